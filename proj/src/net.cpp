#include "echobeam/net.hpp"

#include <cmath>
#include <sstream>

namespace echobeam {

void ReconArch::validate() const {
    if (depth < 1) throw ConfigError("network depth must be at least 1");
    if (base_channels < 1) throw ConfigError("network base channel count must be positive");
    if (kernel < 1 || kernel % 2 == 0)
        throw ConfigError("network kernel size must be odd and positive");
}

ReconNetwork::ReconNetwork(const ReconArch& arch) : arch_(arch) {
    arch_.validate();
    const int k = arch_.kernel;
    // One path: depth down blocks, depth up blocks (bottom to top), final
    // 1x1 projection. Channel counts follow base * 2^stage.
    auto add_conv = [&](const std::string& name, int out_ch, int in_ch, int ksz) {
        names_.push_back(name + ".w");
        params_.emplace_back(std::vector<int>{out_ch, in_ch, ksz, ksz});
        names_.push_back(name + ".b");
        params_.emplace_back(std::vector<int>{out_ch});
    };
    for (const char* path : {"I", "Q"}) {
        int in_ch = 1;
        for (int d = 0; d < arch_.depth; ++d) {
            int out_ch = arch_.base_channels << d;
            std::string stage = std::string(path) + ".down" + std::to_string(d);
            add_conv(stage + ".conv1", out_ch, in_ch, k);
            add_conv(stage + ".conv2", out_ch, out_ch, k);
            in_ch = out_ch;
        }
        int carry = arch_.base_channels << (arch_.depth - 1);
        for (int d = arch_.depth - 1; d >= 0; --d) {
            int skip_ch = arch_.base_channels << d;
            std::string stage = std::string(path) + ".up" + std::to_string(d);
            add_conv(stage + ".conv1", skip_ch, carry + skip_ch, k);
            add_conv(stage + ".conv2", skip_ch, skip_ch, k);
            carry = skip_ch;
        }
        add_conv(std::string(path) + ".final", 1, arch_.base_channels, 1);
    }
    per_path_ = params_.size() / 2;
}

void ReconNetwork::initialize(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t p = 0; p < params_.size(); ++p) {
        ad::Tensor& t = params_[p];
        bool is_final = names_[p].find(".final.") != std::string::npos;
        if (t.shape.size() != 4 || is_final) {
            // Biases and the residual-correction output layer start at zero
            // so the untrained network is the identity.
            std::fill(t.v.begin(), t.v.end(), 0.0);
            continue;
        }
        int fan_in = t.dim(1) * t.dim(2) * t.dim(3);
        double bound = std::sqrt(6.0 / fan_in);
        for (double& w : t.v) w = rng.uniform(-bound, bound);
    }
}

void ReconNetwork::check_spatial(int lines, int samples) const {
    int div = 1 << arch_.depth;
    if (lines % div == 0 && samples % div == 0) return;
    auto round_up = [div](int n) { return ((n + div - 1) / div) * div; };
    std::ostringstream msg;
    msg << "network with " << arch_.depth << " pooling stages needs dims divisible by "
        << div << "; got [" << lines << "," << samples << "] -- pad lines to "
        << round_up(lines) << " and samples to " << round_up(samples);
    throw ConfigError(msg.str());
}

std::vector<ad::VarId> ReconNetwork::bind(ad::Tape& tape, bool requires_grad) const {
    std::vector<ad::VarId> ids;
    ids.reserve(params_.size());
    for (const ad::Tensor& t : params_) ids.push_back(tape.leaf(t, requires_grad));
    return ids;
}

ad::VarId ReconNetwork::run_path(ad::Tape& tape, ad::VarId x,
                                 const std::vector<ad::VarId>& bound,
                                 std::size_t first_param) const {
    std::size_t p = first_param;
    auto conv = [&](ad::VarId in) {
        ad::VarId out = ad::conv2d(tape, in, bound[p], bound[p + 1]);
        p += 2;
        return out;
    };
    ad::VarId h = x;
    std::vector<ad::VarId> skips;
    for (int d = 0; d < arch_.depth; ++d) {
        h = ad::leaky_relu(tape, conv(h));
        h = ad::leaky_relu(tape, conv(h));
        skips.push_back(h);
        h = ad::maxpool2(tape, h);
    }
    for (int d = arch_.depth - 1; d >= 0; --d) {
        h = ad::upsample2_nearest(tape, h);
        h = ad::concat_ch(tape, h, skips[d]);
        h = ad::leaky_relu(tape, conv(h));
        h = ad::leaky_relu(tape, conv(h));
    }
    h = conv(h);  // 1x1 back to one channel
    return ad::add(tape, h, x);
}

ad::VarId ReconNetwork::forward(ad::Tape& tape, ad::VarId packed_iq,
                                const std::vector<ad::VarId>& bound) const {
    const ad::Tensor& in = tape.value(packed_iq);
    if (in.shape.size() != 3 || in.dim(0) != 2)
        throw ShapeError("network forward: expected packed [2,L,T] input, got " +
                         ad::shape_str(in.shape));
    check_spatial(in.dim(1), in.dim(2));
    ad::VarId xi = ad::slice_ch(tape, packed_iq, 0, 1);
    ad::VarId xq = ad::slice_ch(tape, packed_iq, 1, 1);
    ad::VarId yi = run_path(tape, xi, bound, 0);
    ad::VarId yq = run_path(tape, xq, bound, per_path_);
    return ad::concat_ch(tape, yi, yq);
}

ad::Tensor ReconNetwork::infer(const ad::Tensor& packed_iq) const {
    ad::Tape tape;
    ad::VarId in = tape.leaf(packed_iq, false);
    std::vector<ad::VarId> bound = bind(tape, false);
    ad::VarId out = forward(tape, in, bound);
    return tape.value(out);
}

}  // namespace echobeam
