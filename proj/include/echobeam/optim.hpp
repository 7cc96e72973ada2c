#pragma once

#include <cstdint>
#include <vector>

#include "echobeam/autodiff.hpp"

namespace echobeam {

/// Adam with bias correction. One instance owns the first/second moment
/// buffers for a fixed list of parameter tensors; the update order and
/// arithmetic are fixed, so trajectories are bitwise reproducible.
class AdamOptimizer {
  public:
    explicit AdamOptimizer(double learning_rate = 0.005, double beta1 = 0.9,
                           double beta2 = 0.999, double epsilon = 1e-8);

    /// Allocates zero moments matching the parameter list.
    void attach(const std::vector<ad::Tensor>& params);

    /// One update over all tensors. grads[i] may be null for tensors that
    /// received no gradient. A non-finite gradient aborts with the
    /// iteration index.
    void step(std::vector<ad::Tensor>& params, const std::vector<const ad::Tensor*>& grads);

    double learning_rate() const { return lr_; }
    std::uint64_t steps() const { return step_; }

    // Checkpoint access.
    const std::vector<std::vector<double>>& moments_m() const { return m_; }
    const std::vector<std::vector<double>>& moments_v() const { return v_; }
    void restore(std::uint64_t step, std::vector<std::vector<double>> m,
                 std::vector<std::vector<double>> v);

  private:
    double lr_, beta1_, beta2_, eps_;
    std::uint64_t step_ = 0;  // completed updates
    std::vector<std::vector<double>> m_, v_;
};

/// Momentum optimizer with a decaying learning rate,
/// eta(n) = eta0 / (1 + n / n_half), applied to a single flat parameter
/// vector (the transmit matrix). Accumulator update is
/// accum = mu * accum + grad; param -= eta(n) * accum.
class MomentumOptimizer {
  public:
    explicit MomentumOptimizer(double learning_rate = 0.005, double mu = 0.9,
                               double n_half = 1000.0);

    void attach(std::size_t size);
    void step(std::vector<double>& param, const std::vector<double>& grad);

    /// Learning rate the n-th update (0-based) would use.
    double rate_at(std::uint64_t n) const { return lr0_ / (1.0 + n / n_half_); }
    std::uint64_t steps() const { return step_; }

    const std::vector<double>& accumulator() const { return accum_; }
    void restore(std::uint64_t step, std::vector<double> accum);

  private:
    double lr0_, mu_, n_half_;
    std::uint64_t step_ = 0;
    std::vector<double> accum_;
};

}  // namespace echobeam
