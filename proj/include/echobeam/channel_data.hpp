#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/geometry.hpp"

namespace echobeam {

/// Complex demodulated per-element signals, indexed [transmit][element][time].
/// I and Q are stored as separate float32 tensors matching the on-disk
/// container payload.
struct ChannelData {
    int transmits = 0;  // L for SLA data, M for emulated acquisitions
    int elements = 0;
    int samples = 0;
    std::vector<float> i_data;
    std::vector<float> q_data;
    ArrayGeometry geometry;
    ScanGrid grid;

    std::size_t numel() const {
        return static_cast<std::size_t>(transmits) * elements * samples;
    }
    std::size_t index(int tx, int el, int t) const {
        return (static_cast<std::size_t>(tx) * elements + el) * samples + t;
    }
    void validate() const;
};

ChannelData make_channel_data(int transmits, const ArrayGeometry& geom, const ScanGrid& grid);

/// Payload size in bytes of a USIQ container with the given dimensions:
/// two float32 tensors of [transmits][elements][samples].
std::uint64_t usiq_payload_bytes(int transmits, int elements, int samples);

/// Writes the little-endian USIQ container: magic "USIQ", version u32 = 1,
/// dims u32x3, then f64 c, f0, fs, pitch, sector_step, first_angle, then
/// the I and Q float32 tensors. A non-empty role appends a small footer
/// after the payload identifying derived products (envelopes, focused IQ).
void write_dataset(const ChannelData& data, const std::string& path,
                   const std::string& role = "");

struct ReadResult {
    ChannelData data;
    std::string role;  // empty for plain dataset files
};

ReadResult read_dataset_role(const std::string& path);
ChannelData read_dataset(const std::string& path);

}  // namespace echobeam
