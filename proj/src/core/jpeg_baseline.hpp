#pragma once

#include <cstdint>
#include <vector>

#include "core/image.hpp"

namespace wmkit {

// Baseline sequential JFIF encoder: 8x8 DCT, standard quantization tables
// scaled by the usual quality rule (factor = 5000/Q for Q < 50, else 200-2Q;
// entry = clamp((base*factor + 50)/100, 1, 255)), 4:4:4 sampling, standard
// Huffman tables. Output decodes with any baseline JPEG decoder.
std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality);

}  // namespace wmkit
