#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "echobeam/optim.hpp"
#include "helpers.hpp"

using namespace echobeam;
using namespace echobeam::testutil;
namespace ad = echobeam::ad;

namespace {

std::vector<ad::Tensor> two_params() {
    return {random_tensor({3, 4}, 1), random_tensor({5}, 2)};
}

}  // namespace

TEST_CASE("adam leaves tensors without gradients untouched") {
    std::vector<ad::Tensor> params = two_params();
    std::vector<ad::Tensor> before = params;
    AdamOptimizer opt(0.01);
    opt.attach(params);
    ad::Tensor g1 = random_tensor({5}, 3);
    opt.step(params, {nullptr, &g1});
    CHECK(params[0].v == before[0].v);
    CHECK(params[1].v != before[1].v);
    CHECK(opt.steps() == 1);
}

TEST_CASE("first adam update has magnitude close to the learning rate") {
    // bias correction makes m_hat = g and v_hat = g^2 on step one, so the
    // update is lr * sign(g) up to the stabilizing epsilon
    std::vector<ad::Tensor> params{ad::Tensor({4}, 1.0)};
    AdamOptimizer opt(0.005);
    opt.attach(params);
    ad::Tensor g({4});
    g.v = {0.5, -0.5, 2.0, -0.01};
    opt.step(params, {&g});
    for (std::size_t n = 0; n < 4; ++n) {
        double delta = params[0].v[n] - 1.0;
        CHECK(std::abs(delta) == doctest::Approx(0.005).epsilon(1e-5));
        CHECK(std::signbit(delta) == std::signbit(-g.v[n]));  // moves against the gradient
    }
}

TEST_CASE("adam rejects non-finite gradients with the update index") {
    std::vector<ad::Tensor> params{ad::Tensor({2}, 0.0)};
    AdamOptimizer opt(0.01);
    opt.attach(params);
    ad::Tensor ok({2}, 0.1);
    opt.step(params, {&ok});
    ad::Tensor bad({2}, 0.0);
    bad.v[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(opt.step(params, {&bad}),
                         doctest::Contains("update 2"), NumericError);
}

TEST_CASE("adam enforces matching shapes") {
    std::vector<ad::Tensor> params = two_params();
    AdamOptimizer opt(0.01);
    opt.attach(params);
    ad::Tensor wrong = random_tensor({3, 3}, 4);
    CHECK_THROWS_AS(opt.step(params, {&wrong, nullptr}), ShapeError);
    std::vector<ad::Tensor> fewer{params[0]};
    CHECK_THROWS_AS(opt.step(fewer, {nullptr}), ShapeError);
    CHECK_THROWS_AS(AdamOptimizer(0.0), ConfigError);
}

TEST_CASE("adam trajectories are bitwise reproducible") {
    auto run = [] {
        std::vector<ad::Tensor> params = two_params();
        AdamOptimizer opt(0.004);
        opt.attach(params);
        for (int it = 0; it < 20; ++it) {
            ad::Tensor ga = random_tensor({3, 4}, 100 + static_cast<std::uint64_t>(it));
            ad::Tensor gb = random_tensor({5}, 200 + static_cast<std::uint64_t>(it));
            opt.step(params, {&ga, &gb});
        }
        return params;
    };
    std::vector<ad::Tensor> a = run(), b = run();
    CHECK(a[0].v == b[0].v);
    CHECK(a[1].v == b[1].v);
}

TEST_CASE("adam restore resumes the exact trajectory") {
    std::vector<ad::Tensor> params = two_params();
    AdamOptimizer opt(0.004);
    opt.attach(params);
    auto grad_at = [](int it) {
        return std::pair{random_tensor({3, 4}, 300 + static_cast<std::uint64_t>(it)),
                         random_tensor({5}, 400 + static_cast<std::uint64_t>(it))};
    };
    for (int it = 0; it < 5; ++it) {
        auto [ga, gb] = grad_at(it);
        opt.step(params, {&ga, &gb});
    }
    // snapshot, run three more on the original
    std::vector<ad::Tensor> resumed_params = params;
    AdamOptimizer resumed(0.004);
    resumed.attach(resumed_params);
    resumed.restore(opt.steps(), opt.moments_m(), opt.moments_v());
    for (int it = 5; it < 8; ++it) {
        auto [ga, gb] = grad_at(it);
        opt.step(params, {&ga, &gb});
        resumed.step(resumed_params, {&ga, &gb});
    }
    CHECK(params[0].v == resumed_params[0].v);
    CHECK(params[1].v == resumed_params[1].v);
    CHECK(opt.steps() == resumed.steps());
}

TEST_CASE("momentum learning rate halves at the decay half-life") {
    MomentumOptimizer opt(0.005, 0.9, 1000.0);
    CHECK(opt.rate_at(0) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(opt.rate_at(1000) == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(opt.rate_at(3000) == doctest::Approx(0.00125).epsilon(1e-12));
}

TEST_CASE("momentum accumulates velocity before applying the rate") {
    MomentumOptimizer opt(0.1, 0.5, 1000.0);
    opt.attach(2);
    std::vector<double> param{1.0, -1.0};
    std::vector<double> g1{2.0, 0.0};
    opt.step(param, g1);
    CHECK(param[0] == doctest::Approx(1.0 - 0.1 * 2.0).epsilon(1e-12));
    CHECK(param[1] == doctest::Approx(-1.0).epsilon(1e-12));
    // second step: accum = 0.5*2 + 1 = 2, eta = 0.1/(1+1/1000)
    std::vector<double> g2{1.0, 0.0};
    opt.step(param, g2);
    double eta1 = 0.1 / (1.0 + 1.0 / 1000.0);
    CHECK(param[0] == doctest::Approx(0.8 - eta1 * 2.0).epsilon(1e-12));
    CHECK(opt.steps() == 2);
    CHECK(opt.accumulator()[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("zero momentum learning rate freezes the parameters") {
    MomentumOptimizer opt(0.0, 0.9, 1000.0);
    opt.attach(3);
    std::vector<double> param{1.0, 2.0, 3.0};
    std::vector<double> grad{5.0, -5.0, 1.0};
    for (int it = 0; it < 10; ++it) opt.step(param, grad);
    CHECK(param == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("momentum validates inputs") {
    CHECK_THROWS_AS(MomentumOptimizer(-0.1), ConfigError);
    CHECK_THROWS_AS(MomentumOptimizer(0.1, 0.9, 0.0), ConfigError);
    MomentumOptimizer opt(0.1);
    opt.attach(2);
    std::vector<double> param{0.0, 0.0};
    std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
    CHECK_THROWS_WITH_AS(opt.step(param, bad), doctest::Contains("update 1"),
                         NumericError);
    std::vector<double> wrong{1.0};
    CHECK_THROWS_AS(opt.step(param, wrong), ShapeError);
}

TEST_CASE("momentum restore resumes the exact trajectory") {
    MomentumOptimizer opt(0.02, 0.9, 1000.0);
    opt.attach(4);
    std::vector<double> param(4, 0.5);
    auto grad_at = [](int it) {
        ad::Tensor t = random_tensor({4}, 500 + static_cast<std::uint64_t>(it));
        return t.v;
    };
    for (int it = 0; it < 6; ++it) opt.step(param, grad_at(it));
    std::vector<double> resumed_param = param;
    MomentumOptimizer resumed(0.02, 0.9, 1000.0);
    resumed.attach(4);
    resumed.restore(opt.steps(), opt.accumulator());
    for (int it = 6; it < 9; ++it) {
        opt.step(param, grad_at(it));
        resumed.step(resumed_param, grad_at(it));
    }
    CHECK(param == resumed_param);
}
