#pragma once

#include <cstdint>
#include <string>

#include "core/image.hpp"

namespace wmkit {

enum class PostKind { jpeg, gaussian_noise, gaussian_blur, brightness_contrast };

PostKind post_kind_from_string(const std::string& s);
const char* post_kind_name(PostKind k);

struct PostProcessSpec {
  PostKind kind = PostKind::jpeg;
  double parameter = 99.0;  // Q, sigma, sigma, or a
  std::uint64_t seed = 0;   // noise only
};

// JPEG round trip at quality Q (own baseline encoder, libjpeg decode).
Image jpeg_roundtrip(const Image& img, int quality);

// i.i.d. N(0, sigma^2) per pixel per channel, clamped; deterministic per seed.
Image gaussian_noise(const Image& img, double sigma, std::uint64_t seed);

// 5x5 Gaussian kernel, reflect padding; sigma=0 is the identity.
Image gaussian_blur(const Image& img, double sigma);

// pixelwise a*x + 0.2, clamped.
Image brightness_contrast(const Image& img, double a);

Image apply_postprocess(const Image& img, const PostProcessSpec& spec);

}  // namespace wmkit
