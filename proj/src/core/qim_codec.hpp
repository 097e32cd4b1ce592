#pragma once

#include <cstdint>

#include "core/codec.hpp"

namespace wmkit {

// Blind transform-domain codec: one-level Haar DWT of the luma channel, 8x8
// DCT per LL block, one mid-frequency coefficient (3,2) per block carrying one
// bit via dithered quantization with step delta. A keyed pseudorandom
// permutation assigns blocks to bits; the same key drives per-block dither, so
// decoding needs only the image and the codec parameters.
class DwtDctQimCodec final : public Codec {
 public:
  DwtDctQimCodec(int n, double delta, std::uint64_t key);

  int n() const override { return n_; }
  std::string kind() const override { return "dwt-dct-qim"; }
  double delta() const { return delta_; }
  std::uint64_t key() const { return key_; }

  Image embed(const Image& img, const Watermark& w) const override;
  SoftBits decode_soft(const Image& img) const override;
  Image decode_soft_vjp(const Image& img, const SoftBits& dsoft) const override;
  std::vector<std::uint8_t> kink_flags(const Image& img, double eps) const override;

  static constexpr int kBlock = 8;
  static constexpr int kCoeffU = 3;
  static constexpr int kCoeffV = 2;

 private:
  struct Layout {
    int lh, lw;      // LL dims
    int bw;          // blocks per LL row
    std::vector<int> block_of_bit;  // bit i -> block index
  };
  Layout layout_for(const Image& img) const;
  double dither(int block_index) const;

  int n_;
  double delta_;
  std::uint64_t key_;
};

// Smallest quantization step (scanned in `step` increments up to `max_delta`)
// at which every image in the corpus embeds and decodes each of `trials`
// random watermarks exactly, including after an 8-bit save/load round trip.
double calibrate_qim_delta(const std::vector<Image>& images, int n, std::uint64_t key,
                           std::uint64_t seed, int trials = 3, double step = 0.005,
                           double max_delta = 1.0);

}  // namespace wmkit
