#pragma once

#include <cstdint>
#include <vector>

#include "core/image.hpp"

namespace wmkit {

// Procedural RGB test image: gradients, sinusoids, soft blobs, smooth noise,
// stripes, or a blend, chosen and parameterized by the seed. Values kept in
// [0.02, 0.98] so embedding headroom exists everywhere.
Image synth_image(int h, int w, std::uint64_t seed);

// count images with per-index derived seeds.
std::vector<Image> synth_dataset(int count, int h, int w, std::uint64_t seed);

}  // namespace wmkit
