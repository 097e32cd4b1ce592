#pragma once

#include <cstdint>
#include <vector>

#include "core/rng.hpp"
#include "core/spread_codec.hpp"

namespace wmkit {

struct TrainConfig {
  int n = 30;
  double alpha = 0.02;
  int epochs = 3;
  int batch_size = 32;
  double learning_rate = 1.0;
  std::uint64_t seed = 0;
  bool adversarial = false;
};

// One post-processing draw for adversarial training: no-op, the four baseline
// methods with a random parameter from the pinned ranges (Q in [10,99], noise
// sigma in [0,0.1], blur sigma in [0,1], contrast a in [1,5]), or the
// random-target gradient attack (epsilon 0.01) with a random radius.
struct PostOption {
  enum class Kind { none, jpeg, noise, blur, contrast, attack };
  Kind kind = Kind::none;
  double parameter = 0.0;
};

PostOption sample_post_option(Rng& rng);

// One SGD step over a batch: embed fresh random watermarks, optionally
// post-process each watermarked image (adversarial only; `forced` overrides
// the sampling for tests), then update patterns/gains/biases from the exact
// batch-mean cross-entropy gradient. The post-processing step is treated as
// identity in the backward pass; the embedding clamp is not. Patterns are
// re-projected to zero mean and unit RMS after the update. Returns the mean
// per-bit loss.
double train_step(SpreadParams& params, const std::vector<const Image*>& batch,
                  const TrainConfig& cfg, Rng& rng, const PostOption* forced = nullptr);

// Mean round-trip bitwise accuracy over images with fresh seeded watermarks.
double holdout_ba(const SpreadSpectrumCodec& codec, const std::vector<const Image*>& holdout,
                  std::uint64_t seed);

// Full training run: splits off a 10% holdout, runs cfg.epochs of SGD over the
// rest, and gates standard training on holdout round-trip BA >= 0.99
// (Err::training otherwise). Zero epochs returns the random initialization
// ungated. Single-threaded and deterministic per (dataset, cfg).
SpreadSpectrumCodec train(const std::vector<Image>& dataset, const TrainConfig& cfg);

}  // namespace wmkit
