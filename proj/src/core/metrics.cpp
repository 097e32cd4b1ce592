#include "core/metrics.hpp"

#include <array>
#include <cmath>

#include "core/errors.hpp"

namespace wmkit {

double bitwise_accuracy(const Watermark& a, const Watermark& b) {
  if (a.size() != b.size()) fail(Err::dimension, "bitwise_accuracy: length mismatch");
  if (a.empty()) fail(Err::invalid_argument, "bitwise_accuracy: empty watermark");
  std::size_t match = 0;
  for (std::size_t i = 0; i < a.size(); ++i) match += (a[i] == b[i]);
  return static_cast<double>(match) / static_cast<double>(a.size());
}

double linf_norm(const Perturbation& delta) { return max_abs(delta); }

double l2_norm(const Perturbation& delta) {
  double s = 0.0;
  for (double v : delta.px) s += v * v;
  return std::sqrt(s);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin> gaussian_window() {
  std::array<double, kWin> g{};
  const double sigma = 1.5;
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    double x = i - (kWin - 1) / 2.0;
    g[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable valid-mode convolution of a single-channel plane with the window.
// in: h x w, out: (h-10) x (w-10).
void conv_valid(const std::vector<double>& in, int h, int w, std::vector<double>& out,
                std::vector<double>& tmp) {
  static const std::array<double, kWin> g = gaussian_window();
  const int ow = w - kWin + 1;
  const int oh = h - kWin + 1;
  tmp.assign(static_cast<std::size_t>(h) * ow, 0.0);
  for (int y = 0; y < h; ++y) {
    const double* row = &in[static_cast<std::size_t>(y) * w];
    double* trow = &tmp[static_cast<std::size_t>(y) * ow];
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWin; ++k) s += g[k] * row[x + k];
      trow[x] = s;
    }
  }
  out.assign(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int y = 0; y < oh; ++y) {
    double* orow = &out[static_cast<std::size_t>(y) * ow];
    for (int k = 0; k < kWin; ++k) {
      const double* trow = &tmp[static_cast<std::size_t>(y + k) * ow];
      double gk = g[k];
      for (int x = 0; x < ow; ++x) orow[x] += gk * trow[x];
    }
  }
}

}  // namespace

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail(Err::dimension, "ssim: shape mismatch");
  if (a.h < kWin || a.w < kWin) fail(Err::dimension, "ssim: image smaller than 11x11 window");

  const double c1 = 0.01 * 0.01;  // (K1*L)^2, L = 1
  const double c2 = 0.03 * 0.03;

  const int h = a.h, w = a.w;
  std::vector<double> pa(static_cast<std::size_t>(h) * w), pb(pa.size());
  std::vector<double> paa(pa.size()), pbb(pa.size()), pab(pa.size());
  std::vector<double> ma, mb, maa, mbb, mab, tmp;

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::size_t i = static_cast<std::size_t>(y) * w + x;
        double va = a.at(y, x, c), vb = b.at(y, x, c);
        pa[i] = va;
        pb[i] = vb;
        paa[i] = va * va;
        pbb[i] = vb * vb;
        pab[i] = va * vb;
      }
    }
    conv_valid(pa, h, w, ma, tmp);
    conv_valid(pb, h, w, mb, tmp);
    conv_valid(paa, h, w, maa, tmp);
    conv_valid(pbb, h, w, mbb, tmp);
    conv_valid(pab, h, w, mab, tmp);

    double acc = 0.0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
      double mu_a = ma[i], mu_b = mb[i];
      double var_a = maa[i] - mu_a * mu_a;
      double var_b = mbb[i] - mu_b * mu_b;
      double cov = mab[i] - mu_a * mu_b;
      double num = (2 * mu_a * mu_b + c1) * (2 * cov + c2);
      double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      acc += num / den;
    }
    total += acc / static_cast<double>(ma.size());
  }
  return total / 3.0;
}

}  // namespace wmkit
