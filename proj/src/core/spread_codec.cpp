#include "core/spread_codec.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace wmkit {

SpreadParams init_spread_params(int n, int h, int w, double alpha, std::uint64_t seed) {
  if (n < 1 || h < 1 || w < 1) fail(Err::invalid_argument, "spread init: bad dims");
  SpreadParams p;
  p.n = n;
  p.h = h;
  p.w = w;
  p.alpha = alpha;
  const auto N = static_cast<Eigen::Index>(p.N());
  p.P.resize(n, N);
  p.g.resize(n);
  p.b.setZero(n);
  Rng rng(derive_seed(seed, {0x5350524441ULL}));
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) p.P(i, j) = rng.normal();
    p.g(i) = 1e-4 * rng.normal();
  }
  normalize_patterns(p);
  return p;
}

void normalize_patterns(SpreadParams& params) {
  const auto N = static_cast<Eigen::Index>(params.N());
  for (int i = 0; i < params.n; ++i) {
    auto row = params.P.row(i);
    row.array() -= row.mean();
    double rms = std::sqrt(row.squaredNorm() / static_cast<double>(N));
    if (rms > 1e-12) row /= rms;
  }
}

SpreadSpectrumCodec::SpreadSpectrumCodec(SpreadParams params) : params_(std::move(params)) {
  if (params_.n < 1 || params_.P.rows() != params_.n ||
      params_.P.cols() != static_cast<Eigen::Index>(params_.N()) ||
      params_.g.size() != params_.n || params_.b.size() != params_.n)
    fail(Err::invalid_argument, "spread codec: inconsistent parameters");
}

void SpreadSpectrumCodec::check_dims(const Image& img) const {
  if (img.h != params_.h || img.w != params_.w)
    fail(Err::dimension, "spread codec: image dims " + std::to_string(img.h) + "x" +
                             std::to_string(img.w) + " != pattern dims " +
                             std::to_string(params_.h) + "x" + std::to_string(params_.w));
}

Image SpreadSpectrumCodec::embed(const Image& img, const Watermark& w) const {
  if (static_cast<int>(w.size()) != params_.n) fail(Err::dimension, "spread embed: |w| != n");
  check_dims(img);
  Eigen::VectorXd sign(params_.n);
  for (int i = 0; i < params_.n; ++i) sign(i) = w[i] ? 1.0 : -1.0;
  Eigen::VectorXd add = params_.P.transpose() * sign;
  Image out = img;
  const double a = params_.alpha;
  for (std::size_t j = 0; j < out.px.size(); ++j) out.px[j] += a * add(static_cast<Eigen::Index>(j));
  clamp01(out);
  return out;
}

SoftBits SpreadSpectrumCodec::decode_soft(const Image& img) const {
  check_dims(img);
  Eigen::Map<const Eigen::VectorXd> x(img.px.data(), static_cast<Eigen::Index>(img.px.size()));
  Eigen::VectorXd s = params_.P * x;
  SoftBits soft(params_.n);
  for (int i = 0; i < params_.n; ++i) {
    double z = params_.g(i) * s(i) + params_.b(i);
    soft[i] = 1.0 / (1.0 + std::exp(-z));
  }
  return soft;
}

Image SpreadSpectrumCodec::decode_soft_vjp(const Image& img, const SoftBits& dsoft) const {
  if (static_cast<int>(dsoft.size()) != params_.n) fail(Err::dimension, "spread vjp: dsoft length");
  check_dims(img);
  Eigen::Map<const Eigen::VectorXd> x(img.px.data(), static_cast<Eigen::Index>(img.px.size()));
  Eigen::VectorXd s = params_.P * x;
  Eigen::VectorXd v(params_.n);
  for (int i = 0; i < params_.n; ++i) {
    double z = params_.g(i) * s(i) + params_.b(i);
    double sig = 1.0 / (1.0 + std::exp(-z));
    v(i) = dsoft[i] * sig * (1.0 - sig) * params_.g(i);
  }
  Eigen::VectorXd gx = params_.P.transpose() * v;
  Image g(img.h, img.w);
  for (std::size_t j = 0; j < g.px.size(); ++j) g.px[j] = gx(static_cast<Eigen::Index>(j));
  return g;
}

}  // namespace wmkit
