#include "echobeam/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace echobeam {

namespace {

void require_same_shape(int r1, int c1, int r2, int c2, const char* what) {
    if (r1 != r2 || c1 != c2)
        throw ShapeError(std::string(what) + ": image shapes differ");
}

}  // namespace

double psnr(const Image8& pred, const Image8& ref) {
    require_same_shape(pred.rows, pred.cols, ref.rows, ref.cols, "psnr");
    double sum_sq = 0.0;
    for (std::size_t n = 0; n < pred.values.size(); ++n) {
        double d = static_cast<double>(pred.values[n]) - static_cast<double>(ref.values[n]);
        sum_sq += d * d;
    }
    double mse = sum_sq / static_cast<double>(pred.values.size());
    if (mse == 0.0) return kPsnrCap;
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Image8& pred, const Image8& ref) {
    require_same_shape(pred.rows, pred.cols, ref.rows, ref.cols, "ssim");
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    constexpr double kRange = 255.0;
    constexpr double c1 = (0.01 * kRange) * (0.01 * kRange);
    constexpr double c2 = (0.03 * kRange) * (0.03 * kRange);
    if (pred.rows < kWin || pred.cols < kWin)
        throw ConfigError("ssim: image smaller than the 11x11 window");

    double w[kWin][kWin];
    double wsum = 0.0;
    for (int y = 0; y < kWin; ++y) {
        for (int x = 0; x < kWin; ++x) {
            double dy = y - (kWin - 1) / 2.0;
            double dx = x - (kWin - 1) / 2.0;
            w[y][x] = std::exp(-(dx * dx + dy * dy) / (2.0 * kSigma * kSigma));
            wsum += w[y][x];
        }
    }
    for (auto& row : w)
        for (double& v : row) v /= wsum;

    double total = 0.0;
    int windows = 0;
    for (int r0 = 0; r0 + kWin <= pred.rows; ++r0) {
        for (int c0 = 0; c0 + kWin <= pred.cols; ++c0) {
            double mu_x = 0.0, mu_y = 0.0;
            for (int y = 0; y < kWin; ++y) {
                for (int x = 0; x < kWin; ++x) {
                    mu_x += w[y][x] * pred.at(r0 + y, c0 + x);
                    mu_y += w[y][x] * ref.at(r0 + y, c0 + x);
                }
            }
            double var_x = 0.0, var_y = 0.0, cov = 0.0;
            for (int y = 0; y < kWin; ++y) {
                for (int x = 0; x < kWin; ++x) {
                    double dx = pred.at(r0 + y, c0 + x) - mu_x;
                    double dy = ref.at(r0 + y, c0 + x) - mu_y;
                    var_x += w[y][x] * dx * dx;
                    var_y += w[y][x] * dy * dy;
                    cov += w[y][x] * dx * dy;
                }
            }
            double num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2);
            double den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
            total += num / den;
            ++windows;
        }
    }
    return total / windows;
}

double l1_metric(const Image& pred_env, const Image& ref_env) {
    require_same_shape(pred_env.rows, pred_env.cols, ref_env.rows, ref_env.cols, "l1");
    double sum = 0.0;
    for (std::size_t n = 0; n < pred_env.values.size(); ++n)
        sum += std::abs(pred_env.values[n] - ref_env.values[n]);
    return sum / static_cast<double>(pred_env.values.size());
}

void RoiCircle::validate(int rows, int cols) const {
    if (radius <= 0.0) throw ConfigError("roi: radius must be positive");
    if (line - radius < 0.0 || line + radius > rows - 1 || sample - radius < 0.0 ||
        sample + radius > cols - 1)
        throw ConfigError("roi: circle extends outside the image");
}

RoiStats roi_stats(const Image& img, const RoiCircle& roi) {
    roi.validate(img.rows, img.cols);
    double sum = 0.0, sum_sq = 0.0;
    int count = 0;
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            double dr = r - roi.line;
            double dc = c - roi.sample;
            if (dr * dr + dc * dc > roi.radius * roi.radius) continue;
            double v = img.at(r, c);
            sum += v;
            sum_sq += v * v;
            ++count;
        }
    }
    RoiStats st;
    st.count = count;
    if (count > 0) {
        st.mean = sum / count;
        st.variance = std::max(0.0, sum_sq / count - st.mean * st.mean);
    }
    return st;
}

std::optional<double> contrast_cr(const Image& env, const RoiCircle& target,
                                  const RoiCircle& background, std::string* reason) {
    RoiStats t = roi_stats(env, target);
    RoiStats b = roi_stats(env, background);
    if (b.mean == 0.0 || t.mean == 0.0) {
        if (reason) *reason = "zero ROI mean: contrast ratio undefined";
        return std::nullopt;
    }
    return 20.0 * std::log10(t.mean / b.mean);
}

std::optional<double> cnr(const Image& env, const RoiCircle& target,
                          const RoiCircle& background, std::string* reason) {
    RoiStats t = roi_stats(env, target);
    RoiStats b = roi_stats(env, background);
    double denom = std::sqrt(t.variance + b.variance);
    if (denom == 0.0) {
        if (reason) *reason = "zero ROI variance: contrast-to-noise ratio undefined";
        return std::nullopt;
    }
    return std::abs(t.mean - b.mean) / denom;
}

Image8 difference_image(const Image8& pred, const Image8& ref) {
    require_same_shape(pred.rows, pred.cols, ref.rows, ref.cols, "difference_image");
    Image8 out;
    out.rows = pred.rows;
    out.cols = pred.cols;
    out.values.resize(pred.values.size());
    for (std::size_t n = 0; n < pred.values.size(); ++n) {
        int d = std::abs(static_cast<int>(pred.values[n]) - static_cast<int>(ref.values[n]));
        out.values[n] = static_cast<std::uint8_t>(std::min(d, 100));
    }
    return out;
}

}  // namespace echobeam
