#pragma once

#include <limits>

#include "core/image.hpp"
#include "core/watermark.hpp"

namespace wmkit {

// Fraction of matching positions; throws Err::dimension on length mismatch.
double bitwise_accuracy(const Watermark& a, const Watermark& b);

double linf_norm(const Perturbation& delta);
double l2_norm(const Perturbation& delta);

// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// dynamic range 1.0; valid-window positions only, per channel then averaged.
// Requires both dims >= 11.
double ssim(const Image& a, const Image& b);

// Reporting variant: NaN instead of an error when the image is smaller than
// the SSIM window.
inline double ssim_or_nan(const Image& a, const Image& b) {
  if (a.h < 11 || a.w < 11) return std::numeric_limits<double>::quiet_NaN();
  return ssim(a, b);
}

}  // namespace wmkit
