#include "echobeam/channel_data.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace echobeam {

namespace {

constexpr char kMagic[4] = {'U', 'S', 'I', 'Q'};
constexpr std::uint32_t kVersion = 1;
constexpr char kRoleMagic[4] = {'R', 'O', 'L', 'E'};

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos, const char* field) {
    if (pos + sizeof(T) > in.size())
        throw FormatError(std::string("USIQ: truncated file while reading ") + field);
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

}  // namespace

void ChannelData::validate() const {
    if (transmits <= 0 || elements <= 0 || samples <= 0)
        throw ShapeError("channel data: dimensions must be positive");
    if (i_data.size() != numel() || q_data.size() != numel())
        throw ShapeError("channel data: I/Q tensor size mismatch");
    for (std::size_t n = 0; n < i_data.size(); ++n) {
        if (!std::isfinite(i_data[n]) || !std::isfinite(q_data[n]))
            throw NumericError("channel data: non-finite sample");
    }
}

ChannelData make_channel_data(int transmits, const ArrayGeometry& geom, const ScanGrid& grid) {
    ChannelData data;
    data.transmits = transmits;
    data.elements = geom.element_count;
    data.samples = geom.sample_count;
    data.geometry = geom;
    data.grid = grid;
    data.i_data.assign(data.numel(), 0.0f);
    data.q_data.assign(data.numel(), 0.0f);
    return data;
}

std::uint64_t usiq_payload_bytes(int transmits, int elements, int samples) {
    return 2ull * sizeof(float) * static_cast<std::uint64_t>(transmits) * elements * samples;
}

void write_dataset(const ChannelData& data, const std::string& path, const std::string& role) {
    if (data.i_data.size() != data.numel() || data.q_data.size() != data.numel())
        throw ShapeError("USIQ write: tensor size does not match dimensions");
    std::string out;
    out.reserve(48 + usiq_payload_bytes(data.transmits, data.elements, data.samples) +
                (role.empty() ? 0 : 8 + role.size()));
    out.append(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.transmits));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.elements));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(data.samples));
    put<double>(out, data.geometry.speed_of_sound);
    put<double>(out, data.geometry.carrier_frequency);
    put<double>(out, data.geometry.sample_rate);
    put<double>(out, data.geometry.pitch);
    put<double>(out, data.grid.sector_step);
    put<double>(out, data.grid.line_angles.empty() ? 0.0 : data.grid.line_angles.front());
    out.append(reinterpret_cast<const char*>(data.i_data.data()),
               data.i_data.size() * sizeof(float));
    out.append(reinterpret_cast<const char*>(data.q_data.data()),
               data.q_data.size() * sizeof(float));
    if (!role.empty()) {
        out.append(kRoleMagic, 4);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(role.size()));
        out.append(role);
    }
    write_file_bytes(path, out);
}

ReadResult read_dataset_role(const std::string& path) {
    std::string in = read_file_bytes(path);
    std::size_t pos = 0;
    if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
        throw FormatError("USIQ: bad magic in " + path);
    pos = 4;
    std::uint32_t version = take<std::uint32_t>(in, pos, "version");
    if (version != kVersion)
        throw FormatError("USIQ: unsupported version " + std::to_string(version) + " in " + path);
    std::uint32_t transmits = take<std::uint32_t>(in, pos, "dims[0]");
    std::uint32_t elements = take<std::uint32_t>(in, pos, "dims[1]");
    std::uint32_t samples = take<std::uint32_t>(in, pos, "dims[2]");
    if (transmits == 0 || elements == 0 || samples == 0)
        throw FormatError("USIQ: zero dimension in header of " + path);
    double c = take<double>(in, pos, "speed_of_sound");
    double f0 = take<double>(in, pos, "carrier_frequency");
    double fs = take<double>(in, pos, "sample_rate");
    double pitch = take<double>(in, pos, "pitch");
    double sector_step = take<double>(in, pos, "sector_step");
    double first_angle = take<double>(in, pos, "first_angle");

    ReadResult result;
    ChannelData& data = result.data;
    data.transmits = static_cast<int>(transmits);
    data.elements = static_cast<int>(elements);
    data.samples = static_cast<int>(samples);
    data.geometry = make_array(static_cast<int>(elements), f0, fs, static_cast<int>(samples),
                               c, pitch);
    // The header stores the transmit-axis line layout; for SLA datasets this
    // is the full scan grid.
    data.grid.line_count = static_cast<int>(transmits);
    data.grid.sector_step = sector_step;
    data.grid.line_angles.resize(transmits);
    for (std::uint32_t k = 0; k < transmits; ++k)
        data.grid.line_angles[k] = first_angle + static_cast<double>(k) * sector_step;

    std::uint64_t payload = usiq_payload_bytes(data.transmits, data.elements, data.samples);
    if (pos + payload > in.size())
        throw FormatError("USIQ: truncated payload in " + path + " (expected " +
                          std::to_string(payload) + " bytes)");
    std::size_t count = data.numel();
    data.i_data.resize(count);
    data.q_data.resize(count);
    std::memcpy(data.i_data.data(), in.data() + pos, count * sizeof(float));
    pos += count * sizeof(float);
    std::memcpy(data.q_data.data(), in.data() + pos, count * sizeof(float));
    pos += count * sizeof(float);

    if (pos < in.size()) {
        if (in.size() - pos < 8 || std::memcmp(in.data() + pos, kRoleMagic, 4) != 0)
            throw FormatError("USIQ: trailing bytes after payload in " + path);
        pos += 4;
        std::uint32_t len = take<std::uint32_t>(in, pos, "role length");
        if (pos + len != in.size())
            throw FormatError("USIQ: malformed role footer in " + path);
        result.role = in.substr(pos, len);
    }
    return result;
}

ChannelData read_dataset(const std::string& path) { return read_dataset_role(path).data; }

}  // namespace echobeam
