#include "core/synth.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace wmkit {

namespace {

constexpr double kTau = 6.283185307179586;

Image linear_gradient(int h, int w, Rng& rng) {
  Image im(h, w);
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform();
    c1[c] = rng.uniform();
  }
  const double ang = rng.uniform(0.0, kTau);
  const double dx = std::cos(ang), dy = std::sin(ang);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double t = ((x + 0.5) / w - 0.5) * dx + ((y + 0.5) / h - 0.5) * dy + 0.5;
      t = std::clamp(t, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) im.at(y, x, c) = c0[c] + t * (c1[c] - c0[c]);
    }
  return im;
}

Image sinusoid(int h, int w, Rng& rng) {
  Image im(h, w);
  for (int c = 0; c < 3; ++c) {
    const double fx = rng.uniform(0.5, 6.0), fy = rng.uniform(0.5, 6.0);
    const double phase = rng.uniform(0.0, kTau);
    const double base = rng.uniform(0.25, 0.75), amp = rng.uniform(0.1, 0.25);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        im.at(y, x, c) =
            base + amp * std::sin(kTau * (fx * (x + 0.5) / w + fy * (y + 0.5) / h) + phase);
  }
  return im;
}

Image blobs(int h, int w, Rng& rng) {
  Image im = linear_gradient(h, w, rng);
  const int count = 3 + static_cast<int>(rng.uniform_int(6));
  for (int k = 0; k < count; ++k) {
    const double cx = rng.uniform() * w, cy = rng.uniform() * h;
    const double r = rng.uniform(0.08, 0.35) * std::min(h, w);
    double col[3];
    for (double& v : col) v = rng.uniform();
    const double strength = rng.uniform(0.4, 1.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double d2 = ((x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy)) /
                          (2.0 * r * r);
        const double a = strength * std::exp(-d2);
        for (int c = 0; c < 3; ++c) im.at(y, x, c) += a * (col[c] - im.at(y, x, c));
      }
  }
  return im;
}

Image smooth_noise(int h, int w, Rng& rng) {
  // coarse random lattice, bilinear-upsampled per channel
  const int gh = 6 + static_cast<int>(rng.uniform_int(7));
  const int gw = 6 + static_cast<int>(rng.uniform_int(7));
  std::vector<double> grid(static_cast<std::size_t>(gh) * gw * 3);
  for (double& v : grid) v = rng.uniform();
  Image im(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gy = (y + 0.5) / h * (gh - 1), gx = (x + 0.5) / w * (gw - 1);
      const int y0 = std::min(static_cast<int>(gy), gh - 2);
      const int x0 = std::min(static_cast<int>(gx), gw - 2);
      const double fy = gy - y0, fx = gx - x0;
      for (int c = 0; c < 3; ++c) {
        auto g = [&](int yy, int xx) { return grid[(static_cast<std::size_t>(yy) * gw + xx) * 3 + c]; };
        im.at(y, x, c) = (1 - fy) * ((1 - fx) * g(y0, x0) + fx * g(y0, x0 + 1)) +
                         fy * ((1 - fx) * g(y0 + 1, x0) + fx * g(y0 + 1, x0 + 1));
      }
    }
  return im;
}

Image stripes(int h, int w, Rng& rng) {
  Image im = linear_gradient(h, w, rng);
  const double period = rng.uniform(6.0, 24.0);
  const double ang = rng.uniform(0.0, kTau);
  const double dx = std::cos(ang), dy = std::sin(ang);
  double col[3];
  for (double& v : col) v = rng.uniform();
  const double duty = rng.uniform(0.3, 0.7), strength = rng.uniform(0.3, 0.8);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = (x * dx + y * dy) / period;
      if (t - std::floor(t) < duty)
        for (int c = 0; c < 3; ++c) im.at(y, x, c) += strength * (col[c] - im.at(y, x, c));
    }
  return im;
}

Image pick(int style, int h, int w, Rng& rng) {
  switch (style) {
    case 0: return linear_gradient(h, w, rng);
    case 1: return sinusoid(h, w, rng);
    case 2: return blobs(h, w, rng);
    case 3: return smooth_noise(h, w, rng);
    default: return stripes(h, w, rng);
  }
}

}  // namespace

Image synth_image(int h, int w, std::uint64_t seed) {
  if (h < 1 || w < 1) fail(Err::dimension, "synth_image: bad dims");
  Rng rng(seed);
  const int style = static_cast<int>(rng.uniform_int(6));
  Image im;
  if (style < 5) {
    im = pick(style, h, w, rng);
  } else {
    // blend of two styles
    Image a = pick(static_cast<int>(rng.uniform_int(5)), h, w, rng);
    Image b = pick(static_cast<int>(rng.uniform_int(5)), h, w, rng);
    const double lam = rng.uniform(0.25, 0.75);
    im = Image(h, w);
    for (std::size_t i = 0; i < im.px.size(); ++i)
      im.px[i] = lam * a.px[i] + (1.0 - lam) * b.px[i];
  }
  for (double& v : im.px) v = 0.02 + 0.96 * std::clamp(v, 0.0, 1.0);
  return im;
}

std::vector<Image> synth_dataset(int count, int h, int w, std::uint64_t seed) {
  std::vector<Image> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(synth_image(h, w, derive_seed(seed, {0x73796e7468ULL, static_cast<std::uint64_t>(i)})));
  return out;
}

}  // namespace wmkit
