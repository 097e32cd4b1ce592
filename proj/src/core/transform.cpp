#include "core/transform.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace wmkit {

void haar_ll_forward(const std::vector<double>& x, int h, int w, std::vector<double>& ll) {
  if (h % 2 || w % 2) fail(Err::dimension, "haar: dims must be even");
  const int lh = h / 2, lw = w / 2;
  ll.assign(static_cast<std::size_t>(lh) * lw, 0.0);
  for (int i = 0; i < lh; ++i) {
    const double* r0 = &x[static_cast<std::size_t>(2 * i) * w];
    const double* r1 = &x[static_cast<std::size_t>(2 * i + 1) * w];
    double* out = &ll[static_cast<std::size_t>(i) * lw];
    for (int j = 0; j < lw; ++j) {
      out[j] = 0.5 * (r0[2 * j] + r0[2 * j + 1] + r1[2 * j] + r1[2 * j + 1]);
    }
  }
}

void haar_ll_adjoint_add(std::vector<double>& x, int h, int w, const std::vector<double>& dll) {
  if (h % 2 || w % 2) fail(Err::dimension, "haar: dims must be even");
  const int lh = h / 2, lw = w / 2;
  for (int i = 0; i < lh; ++i) {
    double* r0 = &x[static_cast<std::size_t>(2 * i) * w];
    double* r1 = &x[static_cast<std::size_t>(2 * i + 1) * w];
    const double* d = &dll[static_cast<std::size_t>(i) * lw];
    for (int j = 0; j < lw; ++j) {
      double v = 0.5 * d[j];
      r0[2 * j] += v;
      r0[2 * j + 1] += v;
      r1[2 * j] += v;
      r1[2 * j + 1] += v;
    }
  }
}

const std::array<std::array<double, 8>, 8>& dct8_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    const double pi = 3.14159265358979323846;
    for (int u = 0; u < 8; ++u) {
      double a = (u == 0) ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int j = 0; j < 8; ++j) {
        b[u][j] = a * std::cos((2 * j + 1) * u * pi / 16.0);
      }
    }
    return b;
  }();
  return basis;
}

double dct8_coeff(const double* blk, int stride, int u, int v) {
  const auto& b = dct8_basis();
  double acc = 0.0;
  for (int y = 0; y < 8; ++y) {
    double row = 0.0;
    for (int x = 0; x < 8; ++x) row += b[v][x] * blk[y * stride + x];
    acc += b[u][y] * row;
  }
  return acc;
}

void dct8_coeff_adjoint_add(double* blk, int stride, int u, int v, double delta) {
  const auto& b = dct8_basis();
  for (int y = 0; y < 8; ++y) {
    double wy = b[u][y] * delta;
    for (int x = 0; x < 8; ++x) blk[y * stride + x] += wy * b[v][x];
  }
}

}  // namespace wmkit
