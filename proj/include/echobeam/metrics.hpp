#pragma once

#include <optional>
#include <string>

#include "echobeam/display.hpp"

namespace echobeam {

/// PSNR cap reported for identical images, keeping averages finite.
constexpr double kPsnrCap = 99.0;

/// Peak signal-to-noise ratio on 8-bit display images, peak 255:
/// 10*log10(255^2 / MSE); zero MSE reports the cap.
double psnr(const Image8& pred, const Image8& ref);

/// Mean structural similarity on 8-bit display images: 11x11 Gaussian
/// window (sigma 1.5), K1=0.01, K2=0.03, dynamic range 255, valid-mode
/// sliding window (no padding).
double ssim(const Image8& pred, const Image8& ref);

/// Mean absolute error on envelope-domain images; identical to the
/// training loss for the same pair.
double l1_metric(const Image& pred_env, const Image& ref_env);

enum class RoiRole { TARGET, BACKGROUND };

/// Circular region of interest in (line, sample) index space.
struct RoiCircle {
    double line = 0.0;    // center, line index
    double sample = 0.0;  // center, sample index
    double radius = 0.0;  // samples
    RoiRole role = RoiRole::TARGET;

    void validate(int rows, int cols) const;
};

struct RoiStats {
    double mean = 0.0;
    double variance = 0.0;
    int count = 0;
};

RoiStats roi_stats(const Image& img, const RoiCircle& roi);

/// Contrast ratio 20*log10(mu_target / mu_background) in dB on envelope
/// images. A zero background mean has no defined value; the reason is
/// reported instead.
std::optional<double> contrast_cr(const Image& env, const RoiCircle& target,
                                  const RoiCircle& background,
                                  std::string* reason = nullptr);

/// Contrast-to-noise ratio |mu_t - mu_b| / sqrt(var_t + var_b) on envelope
/// images; undefined when both variances vanish.
std::optional<double> cnr(const Image& env, const RoiCircle& target,
                          const RoiCircle& background, std::string* reason = nullptr);

/// Absolute difference of display images, clamped to [0, 100].
Image8 difference_image(const Image8& pred, const Image8& ref);

}  // namespace echobeam
