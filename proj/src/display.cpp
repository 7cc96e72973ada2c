#include "echobeam/display.hpp"

#include <cmath>
#include <fstream>

namespace echobeam {

Image make_image(int rows, int cols, double fill) {
    Image img;
    img.rows = rows;
    img.cols = cols;
    img.values.assign(static_cast<std::size_t>(rows) * cols, fill);
    return img;
}

Image envelope(const FocusedIQ& focused) {
    Image env = make_image(focused.lines, focused.samples);
    for (std::size_t n = 0; n < env.values.size(); ++n) {
        double i = focused.i_data[n];
        double q = focused.q_data[n];
        env.values[n] = std::sqrt(i * i + q * q + kEnvelopeEps * kEnvelopeEps);
    }
    return env;
}

Image8 log_compress(const Image& env, double dynamic_range_db) {
    if (dynamic_range_db <= 0.0) throw ConfigError("log_compress: dynamic range must be positive");
    Image8 out;
    out.rows = env.rows;
    out.cols = env.cols;
    out.values.assign(env.values.size(), 0);
    double peak = 0.0;
    for (double v : env.values) peak = std::max(peak, v);
    if (peak <= 0.0) return out;
    for (std::size_t n = 0; n < env.values.size(); ++n) {
        double v = env.values[n];
        if (v <= 0.0) continue;
        double db = 20.0 * std::log10(v / peak);
        if (db < -dynamic_range_db) db = -dynamic_range_db;
        double mapped = 255.0 * (1.0 + db / dynamic_range_db);
        out.values[n] = static_cast<std::uint8_t>(std::lround(mapped));
    }
    return out;
}

Image scan_convert(const Image& img, const ScanGrid& grid, const ArrayGeometry& geom,
                   int raster_width, int raster_height) {
    if (raster_width <= 1 || raster_height <= 1)
        throw ConfigError("scan_convert: degenerate raster size");
    if (img.rows != grid.line_count)
        throw ShapeError("scan_convert: image line count does not match grid");

    const double c = geom.speed_of_sound;
    const double fs = geom.sample_rate;
    const double r_max = c * static_cast<double>(img.cols - 1) / fs / 2.0;
    const double a_min = grid.line_angles.front();
    const double a_max = grid.line_angles.back();
    const double half_width = r_max * std::max(std::sin(std::abs(a_min)),
                                               std::sin(std::abs(a_max)));
    const double x_span = std::max(half_width, 1e-9);

    Image out = make_image(raster_height, raster_width);
    for (int py = 0; py < raster_height; ++py) {
        double z = r_max * static_cast<double>(py) / (raster_height - 1);
        for (int px = 0; px < raster_width; ++px) {
            double x = -x_span + 2.0 * x_span * static_cast<double>(px) / (raster_width - 1);
            double r = std::hypot(x, z);
            double a = std::atan2(x, z);
            if (a < a_min || a > a_max || r > r_max) continue;
            double line_pos = (a - a_min) / grid.sector_step;
            double samp_pos = 2.0 * r * fs / c;
            int l0 = static_cast<int>(std::floor(line_pos));
            int s0 = static_cast<int>(std::floor(samp_pos));
            double lf = line_pos - l0;
            double sf = samp_pos - s0;
            if (l0 >= img.rows - 1) { l0 = img.rows - 2; lf = 1.0; }
            if (s0 >= img.cols - 1) { s0 = img.cols - 2; sf = 1.0; }
            if (l0 < 0 || s0 < 0) continue;
            double v00 = img.at(l0, s0), v01 = img.at(l0, s0 + 1);
            double v10 = img.at(l0 + 1, s0), v11 = img.at(l0 + 1, s0 + 1);
            out.at(py, px) = (1.0 - lf) * ((1.0 - sf) * v00 + sf * v01) +
                             lf * ((1.0 - sf) * v10 + sf * v11);
        }
    }
    return out;
}

void write_pgm(const Image8& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path);
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.values.data()),
              static_cast<std::streamsize>(img.values.size()));
}

Image8 quantize_display(const Image& img) {
    Image8 out;
    out.rows = img.rows;
    out.cols = img.cols;
    out.values.resize(img.values.size());
    for (std::size_t n = 0; n < img.values.size(); ++n) {
        double v = img.values[n];
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        out.values[n] = static_cast<std::uint8_t>(std::lround(v));
    }
    return out;
}

Image das_reconstruct(const FocusPlan& plan, const ChannelData& data, const TxScheme& scheme,
                      const ApodizationWindow& window, int threads) {
    return envelope(dynamic_focus(plan, data, scheme, window, threads));
}

Image das_reconstruct(const ChannelData& data, const TxScheme& scheme,
                      const ArrayGeometry& geom, const ScanGrid& grid,
                      const ApodizationWindow& window, int threads) {
    return envelope(dynamic_focus(data, scheme, geom, grid, window, threads));
}

}  // namespace echobeam
