#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "core/codec.hpp"

namespace wmkit {

// Parameters of the trainable linear codec. Patterns are image-shaped tensors
// flattened to rows of P (HWC order, N = h*w*3 columns); rows are kept
// zero-mean with unit RMS so alpha is the embedding strength in pixel units.
struct SpreadParams {
  int n = 0;
  int h = 0;
  int w = 0;
  double alpha = 0.02;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> P;  // n x N
  Eigen::VectorXd g;  // per-bit decoder gain
  Eigen::VectorXd b;  // per-bit decoder bias

  std::size_t N() const { return static_cast<std::size_t>(h) * w * 3; }
};

// Fresh random initialization: patterns ~ N(0,1) projected to zero-mean/unit
// RMS; gains tiny with random signs (untrained decode is uninformative);
// biases zero.
SpreadParams init_spread_params(int n, int h, int w, double alpha, std::uint64_t seed);

// Project each pattern row to zero mean and unit RMS (in place).
void normalize_patterns(SpreadParams& params);

// Linear spread-spectrum codec:
//   embed:  clamp(I + alpha * sum_i (2 w_i - 1) P_i)
//   decode: sigmoid(g_i * <I, P_i> + b_i)
class SpreadSpectrumCodec final : public Codec {
 public:
  explicit SpreadSpectrumCodec(SpreadParams params);

  int n() const override { return params_.n; }
  std::string kind() const override { return "spread-spectrum"; }
  const SpreadParams& params() const { return params_; }

  Image embed(const Image& img, const Watermark& w) const override;
  SoftBits decode_soft(const Image& img) const override;
  Image decode_soft_vjp(const Image& img, const SoftBits& dsoft) const override;

 private:
  void check_dims(const Image& img) const;
  SpreadParams params_;
};

}  // namespace wmkit
