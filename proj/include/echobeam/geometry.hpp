#pragma once

#include <string>
#include <vector>

#include "echobeam/common.hpp"

namespace echobeam {

/// Phased-array description plus the demodulated sampling axis.
/// Element positions are lateral offsets in meters, uniform pitch,
/// centered at the origin.
struct ArrayGeometry {
    std::vector<double> element_positions;
    int element_count = 0;
    double speed_of_sound = 1540.0;   // m/s
    double carrier_frequency = 0.0;   // Hz
    double modulation_frequency = 0.0;  // rad/s, 2*pi*f0
    double sample_rate = 0.0;         // Hz, demodulated
    int sample_count = 0;
    double pitch = 0.0;               // m

    void validate() const;
};

/// Uniform pitch array centered at the origin. A pitch of 0 selects
/// half-wavelength pitch at the carrier frequency.
ArrayGeometry make_array(int elements, double f0, double fs, int samples,
                         double c = 1540.0, double pitch = 0.0);

/// Sector-scan line set, uniformly spaced and centered on broadside.
struct ScanGrid {
    int line_count = 0;
    std::vector<double> line_angles;  // radians
    double sector_step = 0.0;         // radians per line

    void validate() const;
};

ScanGrid make_sector_grid(int lines, double sector_step);

/// Simulator pulse description: Gaussian envelope width in seconds and the
/// two-way Gaussian angular width of a focused transmit in radians.
struct PulseSpec {
    double envelope_sigma = 0.0;  // s
    double tx_beam_sigma = 0.0;   // rad

    void validate() const;
};

enum class WindowKind { HANN, RECT };

struct ApodizationWindow {
    std::vector<double> weights;
    WindowKind kind = WindowKind::HANN;
};

ApodizationWindow make_window(WindowKind kind, int elements);

WindowKind window_kind_from_string(const std::string& name);
std::string to_string(WindowKind kind);

constexpr double kDegree = 3.14159265358979323846 / 180.0;

}  // namespace echobeam
