#include "echobeam/geometry.hpp"

#include <cmath>

namespace echobeam {

void ArrayGeometry::validate() const {
    if (element_count <= 0 || static_cast<int>(element_positions.size()) != element_count)
        throw ConfigError("geometry: element_positions size mismatch");
    if (speed_of_sound <= 0.0) throw ConfigError("geometry: speed of sound must be positive");
    if (sample_rate <= 0.0) throw ConfigError("geometry: sample rate must be positive");
    if (sample_count <= 0) throw ConfigError("geometry: sample count must be positive");
    if (carrier_frequency <= 0.0) throw ConfigError("geometry: carrier frequency must be positive");
    for (int m = 1; m < element_count; ++m) {
        if (!(element_positions[m] > element_positions[m - 1]))
            throw ConfigError("geometry: element positions must be strictly increasing");
    }
    for (int m = 0; m < element_count; ++m) {
        double mirror = element_positions[element_count - 1 - m];
        if (std::abs(element_positions[m] + mirror) > 1e-12)
            throw ConfigError("geometry: element positions must be symmetric about 0");
    }
}

ArrayGeometry make_array(int elements, double f0, double fs, int samples, double c,
                         double pitch) {
    if (elements <= 0) throw ConfigError("geometry: element count must be positive");
    if (f0 <= 0.0 || fs <= 0.0 || c <= 0.0)
        throw ConfigError("geometry: frequencies and speed of sound must be positive");
    ArrayGeometry g;
    g.element_count = elements;
    g.speed_of_sound = c;
    g.carrier_frequency = f0;
    g.modulation_frequency = 2.0 * M_PI * f0;
    g.sample_rate = fs;
    g.sample_count = samples;
    g.pitch = pitch > 0.0 ? pitch : 0.5 * c / f0;
    g.element_positions.resize(elements);
    double half = 0.5 * static_cast<double>(elements - 1);
    for (int m = 0; m < elements; ++m)
        g.element_positions[m] = (static_cast<double>(m) - half) * g.pitch;
    g.validate();
    return g;
}

void ScanGrid::validate() const {
    if (line_count <= 0 || static_cast<int>(line_angles.size()) != line_count)
        throw ConfigError("grid: line_angles size mismatch");
    for (int k = 1; k < line_count; ++k) {
        if (std::abs((line_angles[k] - line_angles[k - 1]) - sector_step) > 1e-12)
            throw ConfigError("grid: line angles are not uniformly spaced");
    }
}

ScanGrid make_sector_grid(int lines, double sector_step) {
    if (lines <= 0) throw ConfigError("grid: line count must be positive");
    if (sector_step <= 0.0) throw ConfigError("grid: sector step must be positive");
    ScanGrid grid;
    grid.line_count = lines;
    grid.sector_step = sector_step;
    grid.line_angles.resize(lines);
    double half = 0.5 * static_cast<double>(lines - 1);
    for (int k = 0; k < lines; ++k)
        grid.line_angles[k] = (static_cast<double>(k) - half) * sector_step;
    grid.validate();
    return grid;
}

void PulseSpec::validate() const {
    if (envelope_sigma <= 0.0) throw ConfigError("pulse: envelope sigma must be positive");
    if (tx_beam_sigma <= 0.0) throw ConfigError("pulse: tx beam sigma must be positive");
}

ApodizationWindow make_window(WindowKind kind, int elements) {
    if (elements <= 0) throw ConfigError("window: element count must be positive");
    ApodizationWindow w;
    w.kind = kind;
    w.weights.resize(elements);
    for (int m = 0; m < elements; ++m) {
        if (kind == WindowKind::RECT) {
            w.weights[m] = 1.0;
        } else {
            // Hann centered between the first and last element, nonzero at
            // the edges.
            double x = (static_cast<double>(m) + 0.5) / static_cast<double>(elements);
            w.weights[m] = 0.5 - 0.5 * std::cos(2.0 * M_PI * x);
        }
    }
    return w;
}

WindowKind window_kind_from_string(const std::string& name) {
    if (name == "HANN" || name == "hann") return WindowKind::HANN;
    if (name == "RECT" || name == "rect") return WindowKind::RECT;
    throw ConfigError("window: unknown kind '" + name + "'");
}

std::string to_string(WindowKind kind) {
    return kind == WindowKind::HANN ? "HANN" : "RECT";
}

}  // namespace echobeam
