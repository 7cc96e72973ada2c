#include "echobeam/checkpoint.hpp"

#include <cstring>
#include <sstream>

namespace echobeam {

namespace {

constexpr char kMagic[4] = {'E', 'B', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos, const char* field) {
    if (pos + sizeof(T) > in.size())
        throw FormatError(std::string("checkpoint: truncated file while reading ") + field);
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

void put_doubles(std::string& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

std::vector<double> take_doubles(const std::string& in, std::size_t& pos,
                                 const char* field) {
    std::uint64_t n = take<std::uint64_t>(in, pos, field);
    if (pos + n * sizeof(double) > in.size())
        throw FormatError(std::string("checkpoint: truncated file while reading ") + field);
    std::vector<double> v(n);
    std::memcpy(v.data(), in.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return v;
}

void put_string(std::string& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

std::string take_string(const std::string& in, std::size_t& pos, const char* field) {
    std::uint32_t n = take<std::uint32_t>(in, pos, field);
    if (pos + n > in.size())
        throw FormatError(std::string("checkpoint: truncated file while reading ") + field);
    std::string s = in.substr(pos, n);
    pos += n;
    return s;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream out;
    out << std::hex << v;
    return out.str();
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, ck.config_hash);
    put<std::uint64_t>(out, ck.iteration);

    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.arch.depth));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.arch.base_channels));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.arch.kernel));

    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.scheme.acquisitions));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.scheme.lines));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.scheme.decimation));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.scheme.init_kind));
    put<std::uint8_t>(out, ck.scheme.trainable ? 1 : 0);
    put<std::uint64_t>(out, ck.scheme.assignment.size());
    for (int a : ck.scheme.assignment) put<std::int32_t>(out, a);
    put_doubles(out, ck.scheme.psi);

    if (ck.names.size() != ck.tensors.size())
        throw ShapeError("checkpoint: tensor/name count mismatch");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size()));
    for (std::size_t p = 0; p < ck.tensors.size(); ++p) {
        put_string(out, ck.names[p]);
        const ad::Tensor& t = ck.tensors[p];
        put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        out.append(reinterpret_cast<const char*>(t.v.data()), t.v.size() * sizeof(double));
    }

    put<std::uint64_t>(out, ck.adam_step);
    if (ck.adam_m.size() != ck.tensors.size() || ck.adam_v.size() != ck.tensors.size())
        throw ShapeError("checkpoint: optimizer moment count mismatch");
    for (std::size_t p = 0; p < ck.tensors.size(); ++p) {
        put_doubles(out, ck.adam_m[p]);
        put_doubles(out, ck.adam_v[p]);
    }
    put<std::uint64_t>(out, ck.tx_step);
    put_doubles(out, ck.tx_accum);

    write_file_bytes(path, out);

    std::ostringstream side;
    side << "{\n  \"iteration\": " << ck.iteration << ",\n  \"config_hash\": \""
         << hex64(ck.config_hash) << "\",\n  \"format_version\": " << kVersion << "\n}\n";
    write_file_bytes(path + ".json", side.str());
}

Checkpoint load_checkpoint(const std::string& path) {
    std::string in = read_file_bytes(path);
    std::size_t pos = 0;
    if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
        throw FormatError("checkpoint: bad magic in " + path);
    pos = 4;
    std::uint32_t version = take<std::uint32_t>(in, pos, "version");
    if (version != kVersion)
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));

    Checkpoint ck;
    ck.config_hash = take<std::uint64_t>(in, pos, "config hash");
    ck.iteration = take<std::uint64_t>(in, pos, "iteration");
    ck.arch.depth = static_cast<int>(take<std::uint32_t>(in, pos, "arch depth"));
    ck.arch.base_channels = static_cast<int>(take<std::uint32_t>(in, pos, "arch channels"));
    ck.arch.kernel = static_cast<int>(take<std::uint32_t>(in, pos, "arch kernel"));

    ck.scheme.acquisitions = static_cast<int>(take<std::uint32_t>(in, pos, "acquisitions"));
    ck.scheme.lines = static_cast<int>(take<std::uint32_t>(in, pos, "lines"));
    ck.scheme.decimation = static_cast<int>(take<std::uint32_t>(in, pos, "decimation"));
    std::uint32_t kind = take<std::uint32_t>(in, pos, "init kind");
    if (kind > 2) throw FormatError("checkpoint: invalid transmit init kind");
    ck.scheme.init_kind = static_cast<TxInit>(kind);
    ck.scheme.trainable = take<std::uint8_t>(in, pos, "trainable flag") != 0;
    std::uint64_t asn = take<std::uint64_t>(in, pos, "assignment length");
    if (pos + asn * sizeof(std::int32_t) > in.size())
        throw FormatError("checkpoint: truncated file while reading assignment");
    ck.scheme.assignment.resize(asn);
    for (std::uint64_t k = 0; k < asn; ++k)
        ck.scheme.assignment[k] = take<std::int32_t>(in, pos, "assignment entry");
    ck.scheme.psi = take_doubles(in, pos, "psi");
    ck.scheme.validate();

    std::uint32_t count = take<std::uint32_t>(in, pos, "tensor count");
    for (std::uint32_t p = 0; p < count; ++p) {
        ck.names.push_back(take_string(in, pos, "tensor name"));
        std::uint32_t rank = take<std::uint32_t>(in, pos, "tensor rank");
        std::vector<int> shape(rank);
        for (std::uint32_t d = 0; d < rank; ++d)
            shape[d] = static_cast<int>(take<std::uint32_t>(in, pos, "tensor dim"));
        ad::Tensor t(shape);
        if (pos + t.numel() * sizeof(double) > in.size())
            throw FormatError("checkpoint: truncated file while reading tensor data");
        std::memcpy(t.v.data(), in.data() + pos, t.numel() * sizeof(double));
        pos += t.numel() * sizeof(double);
        ck.tensors.push_back(std::move(t));
    }

    ck.adam_step = take<std::uint64_t>(in, pos, "adam step");
    for (std::uint32_t p = 0; p < count; ++p) {
        ck.adam_m.push_back(take_doubles(in, pos, "adam first moment"));
        ck.adam_v.push_back(take_doubles(in, pos, "adam second moment"));
        if (ck.adam_m.back().size() != ck.tensors[p].numel() ||
            ck.adam_v.back().size() != ck.tensors[p].numel())
            throw FormatError("checkpoint: optimizer moment size mismatch");
    }
    ck.tx_step = take<std::uint64_t>(in, pos, "tx optimizer step");
    ck.tx_accum = take_doubles(in, pos, "tx accumulator");
    if (ck.tx_accum.size() != ck.scheme.psi.size())
        throw FormatError("checkpoint: tx accumulator size mismatch");
    return ck;
}

Checkpoint load_checkpoint(const std::string& path, std::uint64_t expected_hash) {
    Checkpoint ck = load_checkpoint(path);
    if (ck.config_hash != expected_hash) {
        throw ConfigError("checkpoint " + path + " was produced under config hash " +
                          hex64(ck.config_hash) + " but the current config hashes to " +
                          hex64(expected_hash) + "; refusing to resume");
    }
    return ck;
}

}  // namespace echobeam
