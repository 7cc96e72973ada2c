#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/autodiff.hpp"

namespace echobeam {

/// Encoder-decoder hyperparameters shared by both I and Q paths.
struct ReconArch {
    int depth = 3;          // pooling stages
    int base_channels = 16;
    int kernel = 3;

    void validate() const;
    bool operator==(const ReconArch&) const = default;
};

/// Dual-path I/Q reconstruction network. Each path is a small U-Net:
/// `depth` stages of {conv, leaky-relu, conv, leaky-relu, maxpool} down,
/// mirrored up with nearest upsampling and skip concatenation, then a 1x1
/// convolution back to one channel and a residual add of the path input.
/// The two paths share the architecture but hold separate parameters.
///
/// Parameters live outside any tape; each forward pass registers them as
/// gradient-tracking leaves on a fresh tape via bind().
class ReconNetwork {
  public:
    explicit ReconNetwork(const ReconArch& arch);

    /// He-uniform kernels, zero biases, zero-initialized final 1x1 layer,
    /// so the network starts as the identity mapping.
    void initialize(std::uint64_t seed);

    const ReconArch& arch() const { return arch_; }
    std::vector<ad::Tensor>& parameters() { return params_; }
    const std::vector<ad::Tensor>& parameters() const { return params_; }
    const std::vector<std::string>& parameter_names() const { return names_; }

    /// Throws ConfigError (naming the padding that would fix it) when the
    /// spatial dims are not divisible by 2^depth.
    void check_spatial(int lines, int samples) const;

    /// Registers every parameter as a leaf on the tape, in storage order.
    std::vector<ad::VarId> bind(ad::Tape& tape, bool requires_grad = true) const;

    /// Full dual-path forward: packed [2,L,T] in, packed [2,L,T] out.
    ad::VarId forward(ad::Tape& tape, ad::VarId packed_iq,
                      const std::vector<ad::VarId>& bound) const;

    /// Convenience eager evaluation (no gradients): [2,L,T] in/out.
    ad::Tensor infer(const ad::Tensor& packed_iq) const;

  private:
    ad::VarId run_path(ad::Tape& tape, ad::VarId x, const std::vector<ad::VarId>& bound,
                       std::size_t first_param) const;

    ReconArch arch_;
    std::vector<ad::Tensor> params_;     // theta_I tensors then theta_Q tensors
    std::vector<std::string> names_;
    std::size_t per_path_ = 0;           // tensors per path
};

}  // namespace echobeam
