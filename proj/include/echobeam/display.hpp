#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/focus.hpp"

namespace echobeam {

/// Row-major real image (lines x samples for pre-scan-converted data).
struct Image {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

Image make_image(int rows, int cols, double fill = 0.0);

/// 8-bit display image.
struct Image8 {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> values;

    std::uint8_t at(int r, int c) const {
        return values[static_cast<std::size_t>(r) * cols + c];
    }
};

/// Smoothed envelope epsilon so the gradient is defined at the origin.
constexpr double kEnvelopeEps = 1e-12;

/// env = sqrt(I^2 + Q^2 + eps^2), elementwise.
Image envelope(const FocusedIQ& focused);

/// Normalizes by the per-frame envelope maximum, clamps to
/// [-dynamic_range_db, 0] dB and maps affinely onto [0, 255]. An all-zero
/// frame maps to all zeros. Evaluation-only; the training loss stays on
/// envelopes.
Image8 log_compress(const Image& env, double dynamic_range_db = 60.0);

/// Polar (angle, r = c t / 2) to Cartesian bilinear resampling; pixels
/// outside the sector are 0.
Image scan_convert(const Image& img, const ScanGrid& grid, const ArrayGeometry& geom,
                   int raster_width, int raster_height);

void write_pgm(const Image8& img, const std::string& path);
Image8 quantize_display(const Image& img);

/// DAS baseline: dynamic focusing followed by envelope formation, no
/// network.
Image das_reconstruct(const ChannelData& data, const TxScheme& scheme,
                      const ArrayGeometry& geom, const ScanGrid& grid,
                      const ApodizationWindow& window, int threads = 1);

Image das_reconstruct(const FocusPlan& plan, const ChannelData& data, const TxScheme& scheme,
                      const ApodizationWindow& window, int threads = 1);

}  // namespace echobeam
