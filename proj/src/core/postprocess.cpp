#include "core/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/jpeg_baseline.hpp"
#include "core/rng.hpp"

namespace wmkit {

PostKind post_kind_from_string(const std::string& s) {
  if (s == "jpeg") return PostKind::jpeg;
  if (s == "gaussian-noise") return PostKind::gaussian_noise;
  if (s == "gaussian-blur") return PostKind::gaussian_blur;
  if (s == "brightness-contrast") return PostKind::brightness_contrast;
  fail(Err::invalid_argument, "unknown post-process kind: " + s);
}

const char* post_kind_name(PostKind k) {
  switch (k) {
    case PostKind::jpeg: return "jpeg";
    case PostKind::gaussian_noise: return "gaussian-noise";
    case PostKind::gaussian_blur: return "gaussian-blur";
    case PostKind::brightness_contrast: return "brightness-contrast";
  }
  return "?";
}

Image jpeg_roundtrip(const Image& img, int quality) {
  const std::vector<std::uint8_t> bytes = encode_jpeg(img, quality);
  return decode_jpeg_bytes(bytes.data(), bytes.size());
}

Image gaussian_noise(const Image& img, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) fail(Err::invalid_argument, "gaussian_noise: sigma < 0");
  if (sigma == 0.0) return img;
  Image out = img;
  Rng rng(seed);
  for (double& v : out.px) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
  return out;
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma < 0.0) fail(Err::invalid_argument, "gaussian_blur: sigma < 0");
  if (sigma == 0.0) return img;

  double k[5];
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    double d = i - 2;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;

  auto reflect = [](int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    return i;
  };

  // separable convolution with reflect padding
  Image mid(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int t = -2; t <= 2; ++t) acc += k[t + 2] * img.at(y, reflect(x + t, img.w), c);
        mid.at(y, x, c) = acc;
      }
  Image out(img.h, img.w);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int t = -2; t <= 2; ++t) acc += k[t + 2] * mid.at(reflect(y + t, img.h), x, c);
        out.at(y, x, c) = std::clamp(acc, 0.0, 1.0);
      }
  return out;
}

Image brightness_contrast(const Image& img, double a) {
  if (a < 0.0) fail(Err::invalid_argument, "brightness_contrast: a < 0");
  Image out = img;
  for (double& v : out.px) v = std::clamp(a * v + 0.2, 0.0, 1.0);
  return out;
}

Image apply_postprocess(const Image& img, const PostProcessSpec& spec) {
  switch (spec.kind) {
    case PostKind::jpeg: {
      int q = static_cast<int>(std::lround(spec.parameter));
      if (q < 1 || q > 99) fail(Err::invalid_argument, "jpeg: Q out of [1,99]");
      return jpeg_roundtrip(img, q);
    }
    case PostKind::gaussian_noise:
      return gaussian_noise(img, spec.parameter, spec.seed);
    case PostKind::gaussian_blur:
      return gaussian_blur(img, spec.parameter);
    case PostKind::brightness_contrast:
      return brightness_contrast(img, spec.parameter);
  }
  fail(Err::internal, "apply_postprocess: bad kind");
}

}  // namespace wmkit
