#include "echobeam/simulate.hpp"

#include <cmath>
#include <vector>

namespace echobeam {

namespace {

// Gaussian pulse support in units of envelope_sigma. Wide enough that the
// dropped tails are far below float32 resolution.
constexpr double kPulseSupportSigmas = 6.0;
// Transmit weight below exp(-0.5 * kBeamCutoffSigmas^2) is dropped.
constexpr double kBeamCutoffSigmas = 5.0;

}  // namespace

ChannelData simulate_channel_data(const ScattererField& field, const ArrayGeometry& geom,
                                  const ScanGrid& grid, const PulseSpec& pulse,
                                  int threads) {
    geom.validate();
    grid.validate();
    pulse.validate();

    double max_range = 0.0;
    for (const auto& sc : field.scatterers) max_range = std::max(max_range, sc.range);
    double t_span = static_cast<double>(geom.sample_count) / geom.sample_rate;
    if (t_span < 2.0 * max_range / geom.speed_of_sound)
        throw ConfigError("simulate: time axis shorter than the two-way range of the phantom");

    ChannelData out = make_channel_data(grid.line_count, geom, grid);
    const double c = geom.speed_of_sound;
    const double w0 = geom.modulation_frequency;
    const double fs = geom.sample_rate;
    const double sigma_t = pulse.envelope_sigma;
    const double beam_cut = kBeamCutoffSigmas * pulse.tx_beam_sigma;
    const double inv_two_beam_var = 1.0 / (2.0 * pulse.tx_beam_sigma * pulse.tx_beam_sigma);
    const int T = geom.sample_count;
    const int E = geom.element_count;

    // Per-(scatterer, element) two-way travel time is transmit independent;
    // cache it once.
    const std::size_t S = field.scatterers.size();
    std::vector<double> tau(S * E);
    std::vector<double> phase_cos(S * E), phase_sin(S * E);
    for (std::size_t s = 0; s < S; ++s) {
        const auto& sc = field.scatterers[s];
        double sx = sc.range * std::sin(sc.angle);
        double sz = sc.range * std::cos(sc.angle);
        for (int m = 0; m < E; ++m) {
            double dm = geom.element_positions[m];
            double back = std::hypot(sz, sx - dm);
            double t2 = (sc.range + back) / c;
            tau[s * E + m] = t2;
            phase_cos[s * E + m] = std::cos(w0 * t2);
            phase_sin[s * E + m] = std::sin(w0 * t2);
        }
    }

    // Accumulate per transmit in double, cast to float32 once at the end.
    parallel_for(static_cast<std::size_t>(grid.line_count), threads,
                 [&](std::size_t begin, std::size_t end) {
        std::vector<double> acc_i(static_cast<std::size_t>(E) * T);
        std::vector<double> acc_q(static_cast<std::size_t>(E) * T);
        for (std::size_t line = begin; line < end; ++line) {
            double alpha = grid.line_angles[line];
            std::fill(acc_i.begin(), acc_i.end(), 0.0);
            std::fill(acc_q.begin(), acc_q.end(), 0.0);
            for (std::size_t s = 0; s < S; ++s) {
                const auto& sc = field.scatterers[s];
                double da = alpha - sc.angle;
                if (std::abs(da) > beam_cut) continue;
                double w_tx = std::exp(-da * da * inv_two_beam_var) * sc.reflectivity;
                for (int m = 0; m < E; ++m) {
                    double t2 = tau[s * E + m];
                    double pc = phase_cos[s * E + m];
                    double ps = phase_sin[s * E + m];
                    int n0 = static_cast<int>(std::ceil((t2 - kPulseSupportSigmas * sigma_t) * fs));
                    int n1 = static_cast<int>(std::floor((t2 + kPulseSupportSigmas * sigma_t) * fs));
                    if (n0 < 0) n0 = 0;
                    if (n1 > T - 1) n1 = T - 1;
                    double* row_i = acc_i.data() + static_cast<std::size_t>(m) * T;
                    double* row_q = acc_q.data() + static_cast<std::size_t>(m) * T;
                    for (int n = n0; n <= n1; ++n) {
                        double dt = static_cast<double>(n) / fs - t2;
                        double g = std::exp(-dt * dt / (2.0 * sigma_t * sigma_t)) * w_tx;
                        row_i[n] += g * pc;
                        row_q[n] -= g * ps;
                    }
                }
            }
            float* out_i = out.i_data.data() + out.index(static_cast<int>(line), 0, 0);
            float* out_q = out.q_data.data() + out.index(static_cast<int>(line), 0, 0);
            for (std::size_t n = 0; n < acc_i.size(); ++n) {
                out_i[n] = static_cast<float>(acc_i[n]);
                out_q[n] = static_cast<float>(acc_q[n]);
            }
        }
    });

    out.validate();  // rejects non-finite output
    return out;
}

}  // namespace echobeam
