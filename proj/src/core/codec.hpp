#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/watermark.hpp"

namespace wmkit {

// Soft decoder output: one value in (0,1) per bit.
using SoftBits = std::vector<double>;

// Embed/decode pair with a differentiable soft-bit map. Implementations are
// immutable after construction and safe to share across threads.
class Codec {
 public:
  virtual ~Codec() = default;

  virtual int n() const = 0;
  virtual std::string kind() const = 0;

  // Watermarked image; output clamped to [0,1].
  virtual Image embed(const Image& img, const Watermark& w) const = 0;

  virtual SoftBits decode_soft(const Image& img) const = 0;

  // Vector-Jacobian product: given dL/dsoft, return dL/dimage at img.
  // Exact analytic gradient of decode_soft.
  virtual Image decode_soft_vjp(const Image& img, const SoftBits& dsoft) const = 0;

  // Marks bits whose soft score sits at (or within eps of) a non-differentiable
  // kink of the scoring function. Smooth codecs report none.
  virtual std::vector<std::uint8_t> kink_flags(const Image& img, double eps) const {
    (void)img;
    (void)eps;
    return std::vector<std::uint8_t>(n(), 0);
  }
};

inline Watermark decode_bits(const SoftBits& soft) {
  Watermark w(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i) w[i] = soft[i] > 0.5 ? 1 : 0;
  return w;
}

inline Watermark decode(const Codec& codec, const Image& img) {
  return decode_bits(codec.decode_soft(img));
}

}  // namespace wmkit
