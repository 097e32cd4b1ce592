#include <doctest.h>

#include <vector>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/model_io.hpp"
#include "core/synth.hpp"
#include "core/train.hpp"
#include "core/watermark.hpp"

using namespace wmkit;

namespace {

std::vector<const Image*> ptrs(const std::vector<Image>& imgs) {
  std::vector<const Image*> out;
  for (const Image& im : imgs) out.push_back(&im);
  return out;
}

}  // namespace

TEST_CASE("sample_post_option covers every kind within its pinned range") {
  Rng rng(606);
  bool seen[6] = {false, false, false, false, false, false};
  for (int i = 0; i < 400; ++i) {
    PostOption o = sample_post_option(rng);
    seen[static_cast<int>(o.kind)] = true;
    switch (o.kind) {
      case PostOption::Kind::none: break;
      case PostOption::Kind::jpeg:
        CHECK(o.parameter >= 10.0);
        CHECK(o.parameter <= 99.0);
        break;
      case PostOption::Kind::noise:
        CHECK(o.parameter >= 0.0);
        CHECK(o.parameter <= 0.1);
        break;
      case PostOption::Kind::blur:
        CHECK(o.parameter >= 0.0);
        CHECK(o.parameter <= 1.0);
        break;
      case PostOption::Kind::contrast:
        CHECK(o.parameter >= 1.0);
        CHECK(o.parameter <= 5.0);
        break;
      case PostOption::Kind::attack:
        CHECK(o.parameter > 0.0);
        break;
    }
  }
  for (bool s : seen) CHECK(s);
}

TEST_CASE("train_step reduces the loss on a fixed batch") {
  std::vector<Image> imgs = synth_dataset(16, 24, 24, 71);
  auto batch = ptrs(imgs);
  TrainConfig cfg;
  cfg.n = 6;
  cfg.alpha = 0.02;
  cfg.batch_size = 16;
  SpreadParams params = init_spread_params(cfg.n, 24, 24, cfg.alpha, 72);
  PostOption none;  // keep the objective itself fixed across steps
  Rng rng(73);
  double first = train_step(params, batch, cfg, rng, &none);
  double last = first;
  for (int step = 0; step < 30; ++step) {
    Rng step_rng(73);  // same watermarks every step: pure optimization progress
    last = train_step(params, batch, cfg, step_rng, &none);
  }
  CHECK(last < 0.5 * first);
  // patterns stay normalized
  for (int i = 0; i < cfg.n; ++i) {
    CHECK(params.P.row(i).mean() == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(params.P.row(i).squaredNorm() / static_cast<double>(params.N()) ==
          doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(train_step(params, {}, cfg, rng, &none), Error);
}

TEST_CASE("full training passes the round-trip gate and is deterministic") {
  std::vector<Image> data = synth_dataset(100, 32, 32, 74);
  TrainConfig cfg;
  cfg.n = 8;
  cfg.epochs = 2;
  cfg.seed = 75;
  SpreadSpectrumCodec codec = train(data, cfg);  // throws Err::training if the gate fails
  CHECK(codec.n() == 8);

  // round trip on an unseen image
  Image img = synth_image(32, 32, 9999);
  Rng rng(76);
  Watermark w = random_watermark(8, rng);
  CHECK(bitwise_accuracy(decode(codec, codec.embed(img, w)), w) == 1.0);

  SpreadSpectrumCodec again = train(data, cfg);
  CHECK(codec_to_json(again) == codec_to_json(codec));
}

TEST_CASE("zero epochs skips the gate; adversarial training is ungated") {
  std::vector<Image> data = synth_dataset(100, 24, 24, 77);
  TrainConfig cfg;
  cfg.n = 8;
  cfg.epochs = 0;
  CHECK_NOTHROW(train(data, cfg));  // random init would fail any BA gate

  cfg.epochs = 1;
  cfg.adversarial = true;
  cfg.seed = 78;
  SpreadSpectrumCodec codec = train(data, cfg);
  CHECK(codec.n() == 8);
}

TEST_CASE("dataset validation") {
  std::vector<Image> few = synth_dataset(40, 24, 24, 79);
  TrainConfig cfg;
  cfg.n = 4;
  CHECK_THROWS_AS(train(few, cfg), Error);

  std::vector<Image> mixed = synth_dataset(100, 24, 24, 80);
  mixed[50] = synth_image(24, 32, 81);
  CHECK_THROWS_AS(train(mixed, cfg), Error);
}
