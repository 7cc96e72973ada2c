#include "echobeam/focus.hpp"

#include <cmath>

namespace echobeam {

double compute_delay(double t, double alpha, double delta, double c) {
    double dc = delta / c;
    double disc = 0.25 * t * t - t * std::sin(alpha) * dc + dc * dc;
    if (disc < 0.0)
        throw NumericError("compute_delay: negative discriminant");
    return 0.5 * t + std::sqrt(disc);
}

void phase_rotate(double& i, double& q, double delta_t, double omega0) {
    double phase = omega0 * delta_t;
    double c = std::cos(phase);
    double s = std::sin(phase);
    double i2 = c * i - s * q;
    double q2 = s * i + c * q;
    i = i2;
    q = q2;
}

double sample_delayed(const std::vector<double>& signal, double t_hat, double fs) {
    double pos = t_hat * fs;
    double fl = std::floor(pos);
    int i0 = static_cast<int>(fl);
    double frac = pos - fl;
    int last = static_cast<int>(signal.size()) - 1;
    double v0 = (i0 >= 0 && i0 <= last) ? signal[i0] : 0.0;
    double v1 = (i0 + 1 >= 0 && i0 + 1 <= last) ? signal[i0 + 1] : 0.0;
    return (1.0 - frac) * v0 + frac * v1;
}

FocusPlan::FocusPlan(const ArrayGeometry& geom, const ScanGrid& grid) {
    geom.validate();
    grid.validate();
    lines_ = grid.line_count;
    elements_ = geom.element_count;
    samples_ = geom.sample_count;
    std::size_t total = static_cast<std::size_t>(lines_) * elements_ * samples_;
    idx_.resize(total);
    frac_.resize(total);
    rot_cos_.resize(total);
    rot_sin_.resize(total);

    const double fs = geom.sample_rate;
    const double c = geom.speed_of_sound;
    const double w0 = geom.modulation_frequency;
    std::size_t n = 0;
    for (int k = 0; k < lines_; ++k) {
        double alpha = grid.line_angles[k];
        for (int m = 0; m < elements_; ++m) {
            double delta = geom.element_positions[m];
            for (int t = 0; t < samples_; ++t, ++n) {
                double time = static_cast<double>(t) / fs;
                double t_hat = compute_delay(time, alpha, delta, c);
                double pos = t_hat * fs;
                double fl = std::floor(pos);
                int i0 = static_cast<int>(fl);
                if (i0 < -1 || i0 > samples_ - 1) {
                    idx_[n] = -2;  // whole stencil out of range
                    frac_[n] = 0.0;
                    rot_cos_[n] = 1.0;
                    rot_sin_[n] = 0.0;
                    continue;
                }
                idx_[n] = i0;
                frac_[n] = pos - fl;
                double phase = w0 * (t_hat - time);
                rot_cos_[n] = std::cos(phase);
                rot_sin_[n] = std::sin(phase);
            }
        }
    }
}

void FocusPlan::forward(const std::vector<int>& assignment, int acquisitions,
                        const std::vector<double>& window, const double* in_i,
                        const double* in_q, double* out_i, double* out_q,
                        int threads) const {
    if (static_cast<int>(assignment.size()) != lines_)
        throw ShapeError("focus: assignment size does not match line count");
    if (static_cast<int>(window.size()) != elements_)
        throw ShapeError("focus: window size does not match element count");
    const int E = elements_, T = samples_;
    parallel_for(static_cast<std::size_t>(lines_), threads,
                 [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            int j = assignment[k];
            if (j < 0 || j >= acquisitions)
                throw ShapeError("focus: assignment index out of range");
            double* oi = out_i + k * T;
            double* oq = out_q + k * T;
            for (int t = 0; t < T; ++t) {
                oi[t] = 0.0;
                oq[t] = 0.0;
            }
            for (int m = 0; m < E; ++m) {
                const double w = window[m];
                const std::size_t base = (k * E + m) * T;
                const double* src_i = in_i + (static_cast<std::size_t>(j) * E + m) * T;
                const double* src_q = in_q + (static_cast<std::size_t>(j) * E + m) * T;
                for (int t = 0; t < T; ++t) {
                    int i0 = idx_[base + t];
                    if (i0 == -2) continue;
                    double f = frac_[base + t];
                    double vi, vq;
                    if (i0 >= 0 && i0 + 1 < T) {
                        vi = (1.0 - f) * src_i[i0] + f * src_i[i0 + 1];
                        vq = (1.0 - f) * src_q[i0] + f * src_q[i0 + 1];
                    } else if (i0 == -1) {
                        vi = f * src_i[0];
                        vq = f * src_q[0];
                    } else {  // i0 == T-1
                        vi = (1.0 - f) * src_i[i0];
                        vq = (1.0 - f) * src_q[i0];
                    }
                    double rc = rot_cos_[base + t];
                    double rs = rot_sin_[base + t];
                    oi[t] += w * (rc * vi - rs * vq);
                    oq[t] += w * (rs * vi + rc * vq);
                }
            }
        }
    });
}

void FocusPlan::adjoint(const std::vector<int>& assignment, int acquisitions,
                        const std::vector<double>& window, const double* up_i,
                        const double* up_q, double* grad_i, double* grad_q,
                        int threads) const {
    if (static_cast<int>(assignment.size()) != lines_)
        throw ShapeError("focus adjoint: assignment size does not match line count");
    if (static_cast<int>(window.size()) != elements_)
        throw ShapeError("focus adjoint: window size does not match element count");
    const int E = elements_, T = samples_;
    std::size_t total = static_cast<std::size_t>(acquisitions) * E * T;
    for (std::size_t n = 0; n < total; ++n) {
        grad_i[n] = 0.0;
        grad_q[n] = 0.0;
    }
    // Scatter order is fixed (lines ascending); lines sharing a source
    // acquisition accumulate sequentially, so no parallelism here.
    (void)threads;
    for (int k = 0; k < lines_; ++k) {
        int j = assignment[k];
        if (j < 0 || j >= acquisitions)
            throw ShapeError("focus adjoint: assignment index out of range");
        const double* ui = up_i + static_cast<std::size_t>(k) * T;
        const double* uq = up_q + static_cast<std::size_t>(k) * T;
        for (int m = 0; m < E; ++m) {
            const double w = window[m];
            const std::size_t base = (static_cast<std::size_t>(k) * E + m) * T;
            double* dst_i = grad_i + (static_cast<std::size_t>(j) * E + m) * T;
            double* dst_q = grad_q + (static_cast<std::size_t>(j) * E + m) * T;
            for (int t = 0; t < T; ++t) {
                int i0 = idx_[base + t];
                if (i0 == -2) continue;
                double f = frac_[base + t];
                double rc = rot_cos_[base + t];
                double rs = rot_sin_[base + t];
                // Transposed rotation applied to the upstream pair.
                double gi = w * (rc * ui[t] + rs * uq[t]);
                double gq = w * (-rs * ui[t] + rc * uq[t]);
                if (i0 >= 0 && i0 + 1 < T) {
                    dst_i[i0] += (1.0 - f) * gi;
                    dst_i[i0 + 1] += f * gi;
                    dst_q[i0] += (1.0 - f) * gq;
                    dst_q[i0 + 1] += f * gq;
                } else if (i0 == -1) {
                    dst_i[0] += f * gi;
                    dst_q[0] += f * gq;
                } else {
                    dst_i[i0] += (1.0 - f) * gi;
                    dst_q[i0] += (1.0 - f) * gq;
                }
            }
        }
    }
}

FocusedIQ dynamic_focus(const FocusPlan& plan, const ChannelData& data,
                        const TxScheme& scheme, const ApodizationWindow& window,
                        int threads) {
    if (data.transmits != scheme.acquisitions)
        throw ShapeError("focus: channel data has " + std::to_string(data.transmits) +
                         " acquisitions but scheme expects " +
                         std::to_string(scheme.acquisitions));
    if (data.elements != plan.elements() || data.samples != plan.samples())
        throw ShapeError("focus: channel data dimensions do not match plan");
    std::size_t n = data.numel();
    std::vector<double> in_i(n), in_q(n);
    for (std::size_t v = 0; v < n; ++v) {
        in_i[v] = data.i_data[v];
        in_q[v] = data.q_data[v];
    }
    FocusedIQ out;
    out.lines = plan.lines();
    out.samples = plan.samples();
    out.i_data.resize(static_cast<std::size_t>(out.lines) * out.samples);
    out.q_data.resize(out.i_data.size());
    plan.forward(scheme.assignment, scheme.acquisitions, window.weights, in_i.data(),
                 in_q.data(), out.i_data.data(), out.q_data.data(), threads);
    return out;
}

FocusedIQ dynamic_focus(const ChannelData& data, const TxScheme& scheme,
                        const ArrayGeometry& geom, const ScanGrid& grid,
                        const ApodizationWindow& window, int threads) {
    FocusPlan plan(geom, grid);
    return dynamic_focus(plan, data, scheme, window, threads);
}

}  // namespace echobeam
