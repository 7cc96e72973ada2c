#pragma once

#include <vector>

#include "echobeam/channel_data.hpp"
#include "echobeam/geometry.hpp"
#include "echobeam/tx_scheme.hpp"

namespace echobeam {

/// Dynamic-focusing receive delay: the time at which element m at lateral
/// offset delta must be sampled so that its contribution aligns with
/// two-way time t along the beam direction alpha.
double compute_delay(double t, double alpha, double delta, double c);

/// In-phase/quadrature rotation by the modulation phase accrued over
/// delta_t; preserves magnitude.
void phase_rotate(double& i, double& q, double delta_t, double omega0);

/// Linear interpolation of a sampled signal at time t_hat; indices outside
/// [0, T-1] contribute zero.
double sample_delayed(const std::vector<double>& signal, double t_hat, double fs);

/// Beamformed complex lines [line, time] after dynamic focusing.
struct FocusedIQ {
    int lines = 0;
    int samples = 0;
    std::vector<double> i_data;  // [line * samples]
    std::vector<double> q_data;
};

/// Precomputed per-(line, element, sample) interpolation and rotation
/// coefficients. These depend only on geometry and grid, never on the
/// data, so one plan serves every frame and every training iteration.
class FocusPlan {
  public:
    FocusPlan(const ArrayGeometry& geom, const ScanGrid& grid);

    int lines() const { return lines_; }
    int elements() const { return elements_; }
    int samples() const { return samples_; }

    /// out[k,t] = sum_m w[m] * R(omega0 dt) * interp(in[assignment(k), m, :], t_hat)
    /// Inputs are flat [M, E, T] doubles; outputs are [L, T].
    void forward(const std::vector<int>& assignment, int acquisitions,
                 const std::vector<double>& window, const double* in_i, const double* in_q,
                 double* out_i, double* out_q, int threads = 1) const;

    /// Adjoint of forward: scatters upstream [L, T] gradients back into
    /// [M, E, T] through the identical weights and the transposed rotation.
    void adjoint(const std::vector<int>& assignment, int acquisitions,
                 const std::vector<double>& window, const double* up_i, const double* up_q,
                 double* grad_i, double* grad_q, int threads = 1) const;

  private:
    int lines_ = 0, elements_ = 0, samples_ = 0;
    // Indexed [k][m][t] flattened; idx is the floor sample of t_hat*fs (or
    // -1 when the whole stencil falls outside), frac the interpolation
    // fraction, rot_cos/rot_sin the phase-rotation coefficients.
    std::vector<int> idx_;
    std::vector<double> frac_;
    std::vector<double> rot_cos_;
    std::vector<double> rot_sin_;
};

/// Full differentiable receive beamformer, eager version: emulated channel
/// data in, focused complex lines out.
FocusedIQ dynamic_focus(const ChannelData& data, const TxScheme& scheme,
                        const ArrayGeometry& geom, const ScanGrid& grid,
                        const ApodizationWindow& window, int threads = 1);

FocusedIQ dynamic_focus(const FocusPlan& plan, const ChannelData& data,
                        const TxScheme& scheme, const ApodizationWindow& window,
                        int threads = 1);

}  // namespace echobeam
