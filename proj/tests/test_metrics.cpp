#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "echobeam/autodiff.hpp"
#include "echobeam/display.hpp"
#include "echobeam/metrics.hpp"
#include "helpers.hpp"

using namespace echobeam;
using namespace echobeam::testutil;

namespace {

Image8 image8(int rows, int cols, std::uint64_t seed) {
    Image8 img;
    img.rows = rows;
    img.cols = cols;
    img.values.resize(static_cast<std::size_t>(rows) * cols);
    Rng rng(seed);
    for (auto& v : img.values)
        v = static_cast<std::uint8_t>(rng.uniform_index(256));
    return img;
}

/// Straightforward sliding-window SSIM written independently of the
/// library: explicit per-window Gaussian weighting in valid mode.
double ssim_reference(const Image8& a, const Image8& b) {
    const int win = 11;
    const double sigma = 1.5;
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    std::vector<double> w(win * win);
    double wsum = 0.0;
    for (int y = 0; y < win; ++y)
        for (int x = 0; x < win; ++x) {
            double dy = y - 5.0, dx = x - 5.0;
            w[y * win + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
            wsum += w[y * win + x];
        }
    for (double& v : w) v /= wsum;

    double total = 0.0;
    int count = 0;
    for (int r0 = 0; r0 + win <= a.rows; ++r0) {
        for (int c0 = 0; c0 + win <= a.cols; ++c0) {
            double mx = 0.0, my = 0.0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    mx += w[y * win + x] * a.at(r0 + y, c0 + x);
                    my += w[y * win + x] * b.at(r0 + y, c0 + x);
                }
            double vx = 0.0, vy = 0.0, cv = 0.0;
            for (int y = 0; y < win; ++y)
                for (int x = 0; x < win; ++x) {
                    double da = a.at(r0 + y, c0 + x) - mx;
                    double db = b.at(r0 + y, c0 + x) - my;
                    vx += w[y * win + x] * da * da;
                    vy += w[y * win + x] * db * db;
                    cv += w[y * win + x] * da * db;
                }
            total += ((2.0 * mx * my + c1) * (2.0 * cv + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / count;
}

}  // namespace

TEST_CASE("psnr caps identical images and scores a unit offset in closed form") {
    Image8 ref = image8(16, 16, 1);
    CHECK(psnr(ref, ref) == doctest::Approx(kPsnrCap));

    // cap the reference at 254 so the +1 offset never clips
    Image8 base = ref;
    for (auto& v : base.values) v = static_cast<std::uint8_t>(std::min<int>(v, 254));
    Image8 shifted = base;
    for (auto& v : shifted.values) v = static_cast<std::uint8_t>(v + 1);
    CHECK(psnr(shifted, base) ==
          doctest::Approx(10.0 * std::log10(255.0 * 255.0)).epsilon(1e-12));
    CHECK(psnr(shifted, base) == doctest::Approx(48.1308).epsilon(1e-4));
}

TEST_CASE("psnr is symmetric and shape-checked") {
    Image8 a = image8(16, 16, 2);
    Image8 b = image8(16, 16, 3);
    CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-14));
    Image8 odd = image8(16, 15, 4);
    CHECK_THROWS_AS((void)psnr(a, odd), ShapeError);
}

TEST_CASE("ssim scores identical images at one") {
    Image8 a = image8(24, 24, 5);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim of an image against its negative is non-positive") {
    // zero-mean patches: alternate 255/0 in coarse blocks around mean 127.5
    Image8 a;
    a.rows = a.cols = 22;
    a.values.resize(22 * 22);
    for (int r = 0; r < 22; ++r)
        for (int c = 0; c < 22; ++c)
            a.values[r * 22 + c] = static_cast<std::uint8_t>(((r / 2 + c / 2) % 2) * 255);
    Image8 neg = a;
    for (auto& v : neg.values) v = static_cast<std::uint8_t>(255 - v);
    CHECK(ssim(a, neg) <= 0.0);
}

TEST_CASE("ssim matches an independent sliding-window oracle") {
    Image8 a = image8(16, 16, 6);
    Image8 b = image8(16, 16, 7);
    CHECK(std::fabs(ssim(a, b) - ssim_reference(a, b)) < 1e-10);
    // also on a correlated pair (more realistic statistics)
    Image8 c = a;
    Rng rng(8);
    for (auto& v : c.values) {
        int nudged = static_cast<int>(v) + static_cast<int>(rng.uniform_index(21)) - 10;
        v = static_cast<std::uint8_t>(std::clamp(nudged, 0, 255));
    }
    CHECK(std::fabs(ssim(a, c) - ssim_reference(a, c)) < 1e-10);
    CHECK(ssim(a, c) > 0.5);
}

TEST_CASE("ssim rejects images smaller than its window") {
    Image8 tiny = image8(10, 16, 9);
    CHECK_THROWS_AS((void)ssim(tiny, tiny), ConfigError);
}

TEST_CASE("l1 metric equals mean absolute error and the training loss") {
    Image a = make_image(4, 6, 0.0);
    Image b = make_image(4, 6, 0.0);
    CHECK(l1_metric(a, a) == 0.0);
    for (double& v : b.values) v = 0.75;
    CHECK(l1_metric(a, b) == doctest::Approx(0.75).epsilon(1e-12));

    Rng rng(10);
    for (double& v : a.values) v = rng.normal();
    for (double& v : b.values) v = rng.normal();

    ad::Tape tape;
    ad::Tensor ta({4, 6}), tb({4, 6});
    ta.v = a.values;
    tb.v = b.values;
    ad::VarId loss = ad::l1_loss(tape, tape.leaf(std::move(ta)), tape.leaf(std::move(tb)));
    CHECK(l1_metric(a, b) == doctest::Approx(tape.value(loss).v[0]).epsilon(1e-14));

    Image odd = make_image(3, 6, 0.0);
    CHECK_THROWS_AS((void)l1_metric(a, odd), ShapeError);
}

TEST_CASE("roi statistics cover the inclusive disc") {
    Image img = make_image(21, 21, 2.0);
    RoiCircle roi{10.0, 10.0, 3.0, RoiRole::TARGET};
    RoiStats st = roi_stats(img, roi);
    CHECK(st.mean == doctest::Approx(2.0));
    CHECK(st.variance == doctest::Approx(0.0));
    // r^2 <= 9 lattice points around the center: 1+8+12+8 = 29
    CHECK(st.count == 29);
    RoiCircle outside{1.0, 1.0, 3.0, RoiRole::BACKGROUND};
    CHECK_THROWS_AS((void)roi_stats(img, outside), ConfigError);
}

TEST_CASE("contrast ratio reproduces decades and flags empty denominators") {
    Image img = make_image(40, 40, 0.0);
    RoiCircle target{12.0, 12.0, 4.0, RoiRole::TARGET};
    RoiCircle back{28.0, 28.0, 4.0, RoiRole::BACKGROUND};

    SUBCASE("equal means give zero dB") {
        for (double& v : img.values) v = 0.4;
        auto cr = contrast_cr(img, target, back);
        REQUIRE(cr.has_value());
        CHECK(*cr == doctest::Approx(0.0));
    }
    SUBCASE("a tenth gives minus twenty dB") {
        for (int r = 0; r < 40; ++r)
            for (int c = 0; c < 40; ++c)
                img.at(r, c) = (r < 20 && c < 20) ? 0.05 : 0.5;
        auto cr = contrast_cr(img, target, back);
        REQUIRE(cr.has_value());
        CHECK(*cr == doctest::Approx(-20.0).epsilon(1e-12));
    }
    SUBCASE("zero background mean is reported with a reason") {
        for (int r = 0; r < 40; ++r)
            for (int c = 0; c < 40; ++c)
                img.at(r, c) = (r < 20 && c < 20) ? 0.3 : 0.0;
        std::string reason;
        auto cr = contrast_cr(img, target, back, &reason);
        CHECK_FALSE(cr.has_value());
        CHECK(reason.find("undefined") != std::string::npos);
    }
}

TEST_CASE("cnr handles constant regions and equal means") {
    Image img = make_image(40, 40, 1.0);
    RoiCircle target{12.0, 12.0, 4.0, RoiRole::TARGET};
    RoiCircle back{28.0, 28.0, 4.0, RoiRole::BACKGROUND};

    SUBCASE("two constant regions are undefined") {
        std::string reason;
        auto val = cnr(img, target, back, &reason);
        CHECK_FALSE(val.has_value());
        CHECK(reason.find("undefined") != std::string::npos);
    }
    SUBCASE("equal means with texture give zero") {
        Rng rng(11);
        for (double& v : img.values) v = 1.0 + 0.1 * rng.normal();
        // force identical pixel sets: copy target disc onto background disc
        for (int r = 0; r < 40; ++r)
            for (int c = 0; c < 40; ++c) {
                double dr = r - 28.0, dc = c - 28.0;
                if (dr * dr + dc * dc <= 16.0)
                    img.at(r, c) = img.at(r - 16, c - 16);
            }
        auto val = cnr(img, target, back);
        REQUIRE(val.has_value());
        CHECK(*val == doctest::Approx(0.0));
    }
    SUBCASE("reproducible to machine precision on a fixed image") {
        Rng rng(12);
        for (double& v : img.values) v = 0.5 + 0.2 * rng.uniform();
        auto once = cnr(img, target, back);
        auto twice = cnr(img, target, back);
        REQUIRE(once.has_value());
        CHECK(*once == *twice);
    }
}

TEST_CASE("difference image is an absolute clamped map") {
    Image8 ref = image8(8, 8, 13);
    SUBCASE("identical images difference to zero") {
        Image8 d = difference_image(ref, ref);
        for (auto v : d.values) CHECK(v == 0);
    }
    SUBCASE("a constant offset of 40 shows everywhere") {
        Image8 base;
        base.rows = base.cols = 8;
        base.values.assign(64, 100);
        Image8 shifted = base;
        for (auto& v : shifted.values) v = 140;
        Image8 d = difference_image(shifted, base);
        for (auto v : d.values) CHECK(v == 40);
        Image8 dsym = difference_image(base, shifted);
        for (auto v : dsym.values) CHECK(v == 40);
    }
    SUBCASE("large differences clamp to 100") {
        Image8 base;
        base.rows = base.cols = 8;
        base.values.assign(64, 20);
        Image8 far = base;
        for (auto& v : far.values) v = 170;  // difference 150
        Image8 d = difference_image(far, base);
        for (auto v : d.values) CHECK(v == 100);
    }
}
