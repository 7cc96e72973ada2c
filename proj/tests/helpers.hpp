#pragma once

// Shared fixtures for the unit suites: the small test geometry, random
// tensor/channel-data builders, and a central-difference gradient checker
// usable against any scalar-valued tape graph.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "echobeam/autodiff.hpp"
#include "echobeam/channel_data.hpp"
#include "echobeam/common.hpp"
#include "echobeam/geometry.hpp"

namespace echobeam::testutil {

inline ArrayGeometry small_geom(int elements = 16, int samples = 256) {
    return make_array(elements, 2.5e6, 5.0e6, samples);
}

inline ScanGrid small_grid(int lines = 28, double step_deg = 1.5) {
    return make_sector_grid(lines, step_deg * kDegree);
}

inline PulseSpec small_pulse() {
    PulseSpec pulse;
    pulse.envelope_sigma = 0.6e-6;
    pulse.tx_beam_sigma = 1.2 * kDegree;
    return pulse;
}

inline ad::Tensor random_tensor(std::vector<int> shape, std::uint64_t seed,
                                double scale = 1.0) {
    ad::Tensor t(std::move(shape));
    Rng rng(seed);
    for (double& x : t.v) x = scale * rng.normal();
    return t;
}

inline ChannelData random_channel_data(int transmits, const ArrayGeometry& geom,
                                       const ScanGrid& grid, std::uint64_t seed,
                                       double scale = 1.0) {
    ChannelData data = make_channel_data(transmits, geom, grid);
    Rng rng(seed);
    for (float& x : data.i_data) x = static_cast<float>(scale * rng.normal());
    for (float& x : data.q_data) x = static_cast<float>(scale * rng.normal());
    return data;
}

/// Reduces an arbitrary tensor node to a scalar through a fixed random
/// linear functional so any op can be gradient-checked against a scalar
/// loss. The probe's own gradient (the weights themselves) is exact, so
/// it adds no error of its own.
struct WeightedSumOp final : ad::Op {
    ad::VarId x = 0;
    ad::Tensor w;
    void backward(ad::Tape& tape, ad::VarId out) override {
        if (!tape.requires_grad(x)) return;
        const double up = tape.grad(out).v[0];
        ad::Tensor& gx = tape.grad(x);
        for (std::size_t n = 0; n < w.numel(); ++n) gx.v[n] += up * w.v[n];
    }
};

inline ad::VarId weighted_sum(ad::Tape& tape, ad::VarId x, const ad::Tensor& w) {
    const ad::Tensor& tx = tape.value(x);
    double total = 0.0;
    for (std::size_t n = 0; n < tx.numel(); ++n) total += w.v[n] * tx.v[n];
    auto op = std::make_unique<WeightedSumOp>();
    op->x = x;
    op->w = w;
    ad::Tensor out({1});
    out.v[0] = total;
    return tape.node(std::move(out), {x}, std::move(op));
}

/// Builds the graph from leaf tensors on a fresh tape and returns the
/// scalar loss node; leaf ids are reported through the out parameter in
/// input order.
using GraphBuilder = std::function<ad::VarId(ad::Tape&, const std::vector<ad::Tensor>&,
                                             std::vector<ad::VarId>&)>;

inline double eval_graph(const GraphBuilder& build, const std::vector<ad::Tensor>& leaves) {
    ad::Tape tape;
    std::vector<ad::VarId> ids;
    ad::VarId loss = build(tape, leaves, ids);
    return tape.value(loss).v[0];
}

/// Central-difference check of every (or a sampled subset of) leaf entry
/// against the analytic gradient. Returns the maximum relative error,
/// where the scale floor keeps near-zero gradient pairs from blowing up
/// the ratio.
inline double max_grad_rel_error(const GraphBuilder& build, std::vector<ad::Tensor> leaves,
                                 double eps = 1e-3, int samples_per_leaf = -1,
                                 std::uint64_t sample_seed = 12345) {
    std::vector<ad::Tensor> analytic;
    {
        ad::Tape tape;
        std::vector<ad::VarId> ids;
        ad::VarId loss = build(tape, leaves, ids);
        tape.backward(loss);
        for (ad::VarId id : ids)
            analytic.push_back(tape.has_grad(id) ? tape.grad(id)
                                                 : ad::Tensor(tape.value(id).shape, 0.0));
    }

    Rng rng(sample_seed);
    double worst = 0.0;
    for (std::size_t leaf = 0; leaf < leaves.size(); ++leaf) {
        const std::size_t numel = leaves[leaf].numel();
        std::vector<std::size_t> entries;
        if (samples_per_leaf < 0 || static_cast<std::size_t>(samples_per_leaf) >= numel) {
            entries.resize(numel);
            for (std::size_t n = 0; n < numel; ++n) entries[n] = n;
        } else {
            for (int s = 0; s < samples_per_leaf; ++s)
                entries.push_back(rng.uniform_index(numel));
        }
        for (std::size_t n : entries) {
            const double saved = leaves[leaf].v[n];
            leaves[leaf].v[n] = saved + eps;
            const double up = eval_graph(build, leaves);
            leaves[leaf].v[n] = saved - eps;
            const double down = eval_graph(build, leaves);
            leaves[leaf].v[n] = saved;
            const double fd = (up - down) / (2.0 * eps);
            const double an = analytic[leaf].v[n];
            const double scale = std::max({std::fabs(fd), std::fabs(an), 1e-4});
            worst = std::max(worst, std::fabs(fd - an) / scale);
        }
    }
    return worst;
}

/// Unique scratch directory under the test working directory; wiped on
/// construction so reruns start clean.
struct ScratchDir {
    std::filesystem::path path;
    explicit ScratchDir(const std::string& name) {
        path = std::filesystem::current_path() / "scratch" / name;
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& leaf) const { return (path / leaf).string(); }
};

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t n = 0; n < a.size() && n < b.size(); ++n)
        worst = std::max(worst, std::fabs(a[n] - b[n]));
    if (a.size() != b.size()) return 1e300;
    return worst;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    if (a.size() != b.size()) return 1e300;
    for (std::size_t n = 0; n < a.size(); ++n) {
        const double scale = std::max({std::fabs(a[n]), std::fabs(b[n]), 1e-9});
        worst = std::max(worst, std::fabs(a[n] - b[n]) / scale);
    }
    return worst;
}

}  // namespace echobeam::testutil
