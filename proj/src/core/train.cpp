#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/postprocess.hpp"
#include "core/whitebox.hpp"

namespace wmkit {

namespace {

// learning-rate scales per parameter group; the raw gain gradient carries a
// factor of (alpha*N)^2 -- one alpha*N from the embedded signal inside Zraw
// and one from d z/d g -- so it is preconditioned by that scale to make the
// per-step logit movement independent of the image size
constexpr double kLrPatterns = 0.5;
constexpr double kLrGains = 1.0;
constexpr double kLrBiases = 0.05;

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

Image row_to_image(const RMat& m, int row, int h, int w) {
  Image img(h, w);
  for (std::size_t j = 0; j < img.px.size(); ++j) img.px[j] = m(row, static_cast<Eigen::Index>(j));
  return img;
}

}  // namespace

PostOption sample_post_option(Rng& rng) {
  PostOption o;
  switch (rng.uniform_int(6)) {
    case 0: o.kind = PostOption::Kind::none; break;
    case 1:
      o.kind = PostOption::Kind::jpeg;
      o.parameter = static_cast<double>(10 + rng.uniform_int(90));  // [10,99]
      break;
    case 2:
      o.kind = PostOption::Kind::noise;
      o.parameter = rng.uniform(0.0, 0.1);
      break;
    case 3:
      o.kind = PostOption::Kind::blur;
      o.parameter = rng.uniform(0.0, 1.0);
      break;
    case 4:
      o.kind = PostOption::Kind::contrast;
      o.parameter = rng.uniform(1.0, 5.0);
      break;
    default:
      o.kind = PostOption::Kind::attack;
      o.parameter = rng.uniform(0.01, 0.1);  // perturbation radius
      break;
  }
  return o;
}

double train_step(SpreadParams& p, const std::vector<const Image*>& batch, const TrainConfig& cfg,
                  Rng& rng, const PostOption* forced) {
  const int B = static_cast<int>(batch.size());
  if (B < 1) fail(Err::invalid_argument, "train_step: empty batch");
  const auto N = static_cast<Eigen::Index>(p.N());
  const int n = p.n;

  // fresh watermarks; S holds the embedding signs 2w-1
  RMat S(B, n), T(B, n);
  for (int j = 0; j < B; ++j) {
    Watermark w = random_watermark(n, rng);
    for (int i = 0; i < n; ++i) {
      T(j, i) = w[i];
      S(j, i) = w[i] ? 1.0 : -1.0;
    }
  }

  RMat X(B, N);
  for (int j = 0; j < B; ++j) {
    const Image& img = *batch[j];
    if (static_cast<Eigen::Index>(img.px.size()) != N || img.h != p.h || img.w != p.w)
      fail(Err::dimension, "train_step: image shape mismatch");
    for (Eigen::Index c = 0; c < N; ++c) X(j, c) = img.px[c];
  }

  // embed: X <- clamp(I + alpha * S*P); M masks entries the clamp left free
  X.noalias() += cfg.alpha * (S * p.P);
  RMat M = RMat::Ones(B, N);
  for (Eigen::Index j = 0; j < X.size(); ++j) {
    double& v = X.data()[j];
    if (v < 0.0) {
      v = 0.0;
      M.data()[j] = 0.0;
    } else if (v > 1.0) {
      v = 1.0;
      M.data()[j] = 0.0;
    }
  }

  // forward post-processing (identity in the backward pass)
  RMat Y = X;
  if (cfg.adversarial || forced) {
    std::unique_ptr<SpreadSpectrumCodec> codec;  // built on demand at current params
    for (int j = 0; j < B; ++j) {
      const PostOption opt = forced ? *forced : sample_post_option(rng);
      if (opt.kind == PostOption::Kind::none) continue;
      Image img = row_to_image(X, j, p.h, p.w);
      switch (opt.kind) {
        case PostOption::Kind::jpeg:
          img = jpeg_roundtrip(img, static_cast<int>(opt.parameter));
          break;
        case PostOption::Kind::noise:
          img = gaussian_noise(img, opt.parameter, rng.bits());
          break;
        case PostOption::Kind::blur:
          img = gaussian_blur(img, opt.parameter);
          break;
        case PostOption::Kind::contrast:
          img = brightness_contrast(img, opt.parameter);
          break;
        case PostOption::Kind::attack: {
          if (!codec) codec = std::make_unique<SpreadSpectrumCodec>(p);
          WhiteBoxConfig wcfg;
          wcfg.max_iter = 50;  // capped: this runs once per sampled batch image
          Rng arng(rng.bits());
          Watermark w_t = random_watermark(n, arng);
          PgdOutcome out = find_perturbation(*codec, img, w_t, opt.parameter, wcfg,
                                             WhiteBoxVariant::random_target);
          img = apply(img, out.delta);
          break;
        }
        case PostOption::Kind::none: break;
      }
      for (Eigen::Index c = 0; c < N; ++c) Y(j, c) = img.px[c];
    }
  }

  // decode: z = g .* (Y P^T) + b, cross-entropy against T
  RMat Zraw = Y * p.P.transpose();  // B x n inner products
  RMat R(B, n);                     // sigmoid(z) - t, scaled by 1/B
  double loss = 0.0;
  for (int j = 0; j < B; ++j)
    for (int i = 0; i < n; ++i) {
      const double z = p.g(i) * Zraw(j, i) + p.b(i);
      loss += softplus(z) - T(j, i) * z;
      R(j, i) = (1.0 / (1.0 + std::exp(-z)) - T(j, i)) / B;
    }
  loss /= static_cast<double>(B) * n;

  // exact gradients; post-processing is skipped in the chain (Y treated as X)
  Eigen::VectorXd dg = (R.array() * Zraw.array()).colwise().sum();
  Eigen::VectorXd db = R.colwise().sum();
  RMat Rg = R.array().rowwise() * p.g.transpose().array();  // dL/dZraw
  RMat dP = Rg.transpose() * Y;                             // decoder path
  RMat dX = Rg * p.P;                                       // dL/dimage
  dP.noalias() += cfg.alpha * (S.transpose() * (dX.array() * M.array()).matrix());

  const double lr = cfg.learning_rate;
  const double gain_scale = cfg.alpha * static_cast<double>(N);
  p.P.noalias() -= (lr * kLrPatterns) * dP;
  p.g.noalias() -= (lr * kLrGains / (gain_scale * gain_scale)) * dg;
  p.b.noalias() -= (lr * kLrBiases) * db;
  normalize_patterns(p);
  return loss;
}

double holdout_ba(const SpreadSpectrumCodec& codec, const std::vector<const Image*>& holdout,
                  std::uint64_t seed) {
  if (holdout.empty()) fail(Err::invalid_argument, "holdout_ba: no images");
  Rng rng(seed);
  double acc = 0.0;
  for (const Image* img : holdout) {
    Watermark w = random_watermark(codec.n(), rng);
    acc += bitwise_accuracy(decode(codec, codec.embed(*img, w)), w);
  }
  return acc / static_cast<double>(holdout.size());
}

SpreadSpectrumCodec train(const std::vector<Image>& dataset, const TrainConfig& cfg) {
  if (dataset.size() < 100) fail(Err::invalid_argument, "train: need at least 100 images");
  if (cfg.n < 1 || cfg.epochs < 0 || cfg.batch_size < 1 || cfg.alpha <= 0.0)
    fail(Err::invalid_argument, "train: bad config");
  const int h = dataset[0].h, w = dataset[0].w;
  for (const Image& img : dataset)
    if (img.h != h || img.w != w) fail(Err::dimension, "train: images must share one shape");

  SpreadParams params =
      init_spread_params(cfg.n, h, w, cfg.alpha, derive_seed(cfg.seed, {0x696e6974ULL}));

  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng split_rng(derive_seed(cfg.seed, {0x73706c6974ULL}));
  split_rng.shuffle(idx);
  const std::size_t holdout_count = std::max<std::size_t>(1, dataset.size() / 10);
  std::vector<const Image*> holdout, training;
  for (std::size_t k = 0; k < idx.size(); ++k)
    (k < holdout_count ? holdout : training).push_back(&dataset[idx[k]]);

  if (cfg.epochs == 0) return SpreadSpectrumCodec(std::move(params));

  Rng rng(derive_seed(cfg.seed, {0x736764ULL}));
  std::vector<const Image*> order = training;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Image*> batch(order.begin() + start, order.begin() + stop);
      train_step(params, batch, cfg, rng);
    }
  }

  SpreadSpectrumCodec codec(std::move(params));
  const double ba = holdout_ba(codec, holdout, derive_seed(cfg.seed, {0x686f6c64ULL}));
  if (!cfg.adversarial && ba < 0.99)
    fail(Err::training,
         "training failed the round-trip gate: holdout BA " + std::to_string(ba) + " < 0.99");
  return codec;
}

}  // namespace wmkit
