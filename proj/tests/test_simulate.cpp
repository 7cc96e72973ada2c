#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "echobeam/simulate.hpp"
#include "helpers.hpp"

using namespace echobeam;
using namespace echobeam::testutil;

namespace {

ScattererField single_scatterer(double range, double angle, double reflectivity) {
    ScattererField field;
    field.label = "single";
    field.scatterers.push_back({range, angle, reflectivity});
    return field;
}

}  // namespace

TEST_CASE("empty field simulates to all zeros") {
    ArrayGeometry geom = small_geom();
    ScanGrid grid = small_grid();
    ScattererField field;
    ChannelData data = simulate_channel_data(field, geom, grid, small_pulse());
    for (float x : data.i_data) REQUIRE(x == 0.0f);
    for (float x : data.q_data) REQUIRE(x == 0.0f);
}

TEST_CASE("doubling a reflectivity doubles the samples exactly") {
    ArrayGeometry geom = small_geom();
    ScanGrid grid = small_grid();
    ChannelData one = simulate_channel_data(single_scatterer(0.025, 0.0, 0.3), geom, grid,
                                            small_pulse());
    ChannelData two = simulate_channel_data(single_scatterer(0.025, 0.0, 0.6), geom, grid,
                                            small_pulse());
    double worst = 0.0;
    for (std::size_t n = 0; n < one.numel(); ++n) {
        worst = std::max(worst, std::fabs(2.0 * one.i_data[n] - two.i_data[n]));
        worst = std::max(worst, std::fabs(2.0 * one.q_data[n] - two.q_data[n]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("simulation is additive over field unions") {
    ArrayGeometry geom = small_geom();
    ScanGrid grid = small_grid();
    ScattererField a = make_speckle_phantom(2e6, DepthWindow{0.012, 0.035},
                                            grid.line_count * grid.sector_step, 21, 0.05);
    ScattererField b = make_speckle_phantom(2e6, DepthWindow{0.012, 0.035},
                                            grid.line_count * grid.sector_step, 22, 0.05);
    ScattererField both = a;
    both.scatterers.insert(both.scatterers.end(), b.scatterers.begin(),
                           b.scatterers.end());

    ChannelData da = simulate_channel_data(a, geom, grid, small_pulse());
    ChannelData db = simulate_channel_data(b, geom, grid, small_pulse());
    ChannelData dab = simulate_channel_data(both, geom, grid, small_pulse());

    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t n = 0; n < da.numel(); ++n) {
        double sum_i = static_cast<double>(da.i_data[n]) + db.i_data[n];
        double sum_q = static_cast<double>(da.q_data[n]) + db.q_data[n];
        worst = std::max({worst, std::fabs(sum_i - dab.i_data[n]),
                          std::fabs(sum_q - dab.q_data[n])});
        scale = std::max({scale, std::fabs(sum_i), std::fabs(sum_q)});
    }
    REQUIRE(scale > 0.0);
    CHECK(worst / scale < 1e-6);
}

TEST_CASE("on-axis scatterer peaks at the two-way travel time") {
    // 40 mm target needs a longer time axis: 2r/c = 51.95 us -> sample 259.7
    ArrayGeometry geom = small_geom(16, 512);
    ScanGrid grid = small_grid();
    ChannelData data = simulate_channel_data(single_scatterer(0.040, 0.0, 1.0), geom, grid,
                                             small_pulse());
    // broadside line is closest to angle 0; center element is at +pitch/2
    int line = grid.line_count / 2;
    int element = geom.element_count / 2;
    int peak_bin = -1;
    double peak = -1.0;
    for (int t = 0; t < geom.sample_count; ++t) {
        double i = data.i_data[data.index(line, element, t)];
        double q = data.q_data[data.index(line, element, t)];
        double mag = std::hypot(i, q);
        if (mag > peak) {
            peak = mag;
            peak_bin = t;
        }
    }
    double expected = 2.0 * 0.040 / geom.speed_of_sound * geom.sample_rate;  // 259.74
    CHECK(std::fabs(peak_bin - expected) <= 1.0);
    CHECK(peak > 0.0);
}

TEST_CASE("a phantom beyond the time axis is rejected") {
    ArrayGeometry geom = small_geom();  // 256 samples at 5 MHz -> 51.2 us span
    ScanGrid grid = small_grid();
    // 2 * 0.045 / 1540 = 58.4 us > 51.2 us
    CHECK_THROWS_AS((void)simulate_channel_data(single_scatterer(0.045, 0.0, 1.0), geom,
                                                grid, small_pulse()),
                    ConfigError);
}

TEST_CASE("signal energy concentrates around the travel time") {
    ArrayGeometry geom = small_geom();
    ScanGrid grid = small_grid();
    PulseSpec pulse = small_pulse();
    ChannelData data = simulate_channel_data(single_scatterer(0.025, 0.0, 1.0), geom, grid,
                                             pulse);
    int line = grid.line_count / 2;
    const double c = geom.speed_of_sound;
    double inside = 0.0, total = 0.0;
    for (int m = 0; m < geom.element_count; ++m) {
        double sx = 0.025 * std::sin(0.0), sz = 0.025 * std::cos(0.0);
        double tau = (0.025 + std::hypot(sz, sx - geom.element_positions[m])) / c;
        for (int t = 0; t < geom.sample_count; ++t) {
            double i = data.i_data[data.index(line, m, t)];
            double q = data.q_data[data.index(line, m, t)];
            double e = i * i + q * q;
            total += e;
            double dt = static_cast<double>(t) / geom.sample_rate - tau;
            if (std::fabs(dt) <= 4.0 * pulse.envelope_sigma) inside += e;
        }
    }
    REQUIRE(total > 0.0);
    CHECK(inside / total >= 0.99);
}

TEST_CASE("simulation is bitwise deterministic and thread independent") {
    ArrayGeometry geom = small_geom();
    ScanGrid grid = small_grid();
    ScattererField field = make_speckle_phantom(4e6, DepthWindow{0.012, 0.035},
                                                grid.line_count * grid.sector_step, 5, 0.05);
    ChannelData a = simulate_channel_data(field, geom, grid, small_pulse(), 1);
    ChannelData b = simulate_channel_data(field, geom, grid, small_pulse(), 1);
    ChannelData c = simulate_channel_data(field, geom, grid, small_pulse(), 4);
    CHECK(a.i_data == b.i_data);
    CHECK(a.q_data == b.q_data);
    CHECK(a.i_data == c.i_data);
    CHECK(a.q_data == c.q_data);
}
