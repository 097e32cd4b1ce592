#pragma once

#include <cstdint>
#include <vector>

#include "core/rng.hpp"

namespace wmkit {

// n-bit watermark; each element is 0 or 1.
using Watermark = std::vector<std::uint8_t>;

inline Watermark random_watermark(int n, Rng& rng) {
  Watermark w(n);
  for (int i = 0; i < n; ++i) w[i] = static_cast<std::uint8_t>(rng.bits() >> 63);
  return w;
}

inline Watermark flip(const Watermark& w) {
  Watermark out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] ? 0 : 1;
  return out;
}

}  // namespace wmkit
