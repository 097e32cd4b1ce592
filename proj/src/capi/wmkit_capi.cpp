#include "wmkit/wmkit.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/blackbox.hpp"
#include "core/detector.hpp"
#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/image.hpp"
#include "core/metrics.hpp"
#include "core/model_io.hpp"
#include "core/postprocess.hpp"
#include "core/qim_codec.hpp"
#include "core/spread_codec.hpp"
#include "core/synth.hpp"
#include "core/train.hpp"
#include "core/tune.hpp"
#include "core/whitebox.hpp"

struct wmk_image {
  wmkit::Image img;
};

struct wmk_codec {
  std::unique_ptr<wmkit::Codec> codec;
  wmkit::TrainInfo train;
};

namespace {

using wmkit::Err;
using wmkit::Error;

thread_local std::string g_error;

template <typename F>
int guarded(F&& f) {
  try {
    f();
    g_error.clear();
    return WMK_OK;
  } catch (const Error& e) {
    g_error = std::string(wmkit::err_name(e.code)) + ": " + e.what();
    return static_cast<int>(e.code);
  } catch (const std::exception& e) {
    g_error = std::string("internal: ") + e.what();
    return WMK_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) wmkit::fail(Err::invalid_argument, what);
}

wmkit::Watermark parse_bits(const char* s) {
  require(s != nullptr, "null bit string");
  wmkit::Watermark w;
  for (const char* p = s; *p; ++p) {
    require(*p == '0' || *p == '1', "bit strings may contain only '0' and '1'");
    w.push_back(static_cast<std::uint8_t>(*p - '0'));
  }
  require(!w.empty(), "empty bit string");
  return w;
}

void write_bits(const wmkit::Watermark& w, char* out) {
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] ? '1' : '0';
  out[w.size()] = '\0';
}

wmkit::DetectorMode parse_mode(const char* mode) {
  require(mode != nullptr, "null detector mode");
  return wmkit::mode_from_string(mode);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ingestion dims for a codec: spread codecs carry their shape, the QIM codec
// takes the smallest multiple-of-16 square with one 8x8 LL block per bit
void codec_dims(const wmkit::Codec& codec, int* h, int* w) {
  if (const auto* ss = dynamic_cast<const wmkit::SpreadSpectrumCodec*>(&codec)) {
    *h = ss->params().h;
    *w = ss->params().w;
  } else {
    const int side =
        16 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(codec.n()))));
    *h = *w = std::max(side, 16);
  }
}

std::uint64_t seed_from_json(const nlohmann::json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (j[key].is_string()) return std::stoull(j[key].get<std::string>());
  return j[key].get<std::uint64_t>();
}

}  // namespace

extern "C" {

const char* wmk_version(void) { return wmkit::kVersion; }

const char* wmk_last_error(void) { return g_error.c_str(); }

const char* wmk_status_name(int status) {
  if (status == WMK_OK) return "ok";
  if (status >= WMK_ERR_IO && status <= WMK_ERR_INTERNAL)
    return wmkit::err_name(static_cast<Err>(status));
  return "unknown";
}

void wmk_string_free(char* s) { delete[] s; }

int wmk_image_load(const char* path, wmk_image** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new wmk_image{wmkit::load_image(path)};
  });
}

int wmk_image_save_png(const wmk_image* img, const char* path) {
  return guarded([&] {
    require(img && path, "null argument");
    wmkit::save_png(img->img, path);
  });
}

int wmk_image_new(int h, int w, const double* pixels, wmk_image** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(h >= 1 && w >= 1, "dims must be positive");
    wmkit::Image img(h, w);
    if (pixels) {
      std::memcpy(img.px.data(), pixels, img.px.size() * sizeof(double));
      wmkit::clamp01(img);
    }
    *out = new wmk_image{std::move(img)};
  });
}

void wmk_image_free(wmk_image* img) { delete img; }

int wmk_image_dims(const wmk_image* img, int* h, int* w) {
  return guarded([&] {
    require(img != nullptr, "null argument");
    if (h) *h = img->img.h;
    if (w) *w = img->img.w;
  });
}

const double* wmk_image_pixels(const wmk_image* img) {
  return img ? img->img.px.data() : nullptr;
}

int wmk_image_resize(const wmk_image* img, int h, int w, wmk_image** out) {
  return guarded([&] {
    require(img && out, "null argument");
    *out = new wmk_image{wmkit::resize_bilinear(img->img, h, w)};
  });
}

int wmk_image_synth(int h, int w, uint64_t seed, wmk_image** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new wmk_image{wmkit::synth_image(h, w, seed)};
  });
}

int wmk_image_distance(const wmk_image* a, const wmk_image* b, double* linf, double* l2,
                       double* ssim) {
  return guarded([&] {
    require(a && b, "null argument");
    wmkit::Perturbation d = wmkit::diff(a->img, b->img);
    if (linf) *linf = wmkit::linf_norm(d);
    if (l2) *l2 = wmkit::l2_norm(d);
    if (ssim) *ssim = wmkit::ssim(a->img, b->img);
  });
}

int wmk_codec_load(const char* path, wmk_codec** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<wmk_codec>();
    handle->codec = wmkit::load_codec(path, &handle->train);
    *out = handle.release();
  });
}

int wmk_codec_save(const wmk_codec* codec, const char* path) {
  return guarded([&] {
    require(codec && path, "null argument");
    wmkit::save_codec(*codec->codec, path, codec->train.trained ? &codec->train : nullptr);
  });
}

void wmk_codec_free(wmk_codec* codec) { delete codec; }

int wmk_codec_bits(const wmk_codec* codec) { return codec ? codec->codec->n() : 0; }

const char* wmk_codec_kind(const wmk_codec* codec) {
  if (!codec) return "";
  return codec->codec->kind() == "dwt-dct-qim" ? "dwt-dct-qim" : "spread-spectrum";
}

int wmk_codec_qim_new(int n, double delta, uint64_t key, wmk_codec** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    auto handle = std::make_unique<wmk_codec>();
    handle->codec = std::make_unique<wmkit::DwtDctQimCodec>(n, delta, key);
    *out = handle.release();
  });
}

int wmk_codec_spread_new(int n, int h, int w, double alpha, uint64_t seed, wmk_codec** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    auto handle = std::make_unique<wmk_codec>();
    handle->codec = std::make_unique<wmkit::SpreadSpectrumCodec>(
        wmkit::init_spread_params(n, h, w, alpha, seed));
    *out = handle.release();
  });
}

int wmk_codec_train(const char* dataset, const char* config_json, wmk_codec** out) {
  return guarded([&] {
    require(dataset && out, "null argument");
    nlohmann::json j = nlohmann::json::object();
    if (config_json && *config_json) {
      try {
        j = nlohmann::json::parse(config_json);
      } catch (const std::exception& e) {
        wmkit::fail(Err::format, std::string("train config parse: ") + e.what());
      }
    }
    wmkit::TrainConfig cfg;
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("adversarial")) cfg.adversarial = j["adversarial"].get<bool>();
    cfg.seed = seed_from_json(j, "seed", 0);
    const int count = j.contains("sample_count") ? j["sample_count"].get<int>() : 200;
    const int h = j.contains("height") ? j["height"].get<int>() : 128;
    const int w = j.contains("width") ? j["width"].get<int>() : 128;

    std::vector<wmkit::Image> images =
        wmkit::ingest(dataset, count, wmkit::derive_seed(cfg.seed, {0x696e67ULL}), h, w);
    auto handle = std::make_unique<wmk_codec>();
    handle->codec = std::make_unique<wmkit::SpreadSpectrumCodec>(wmkit::train(images, cfg));
    handle->train = {true, cfg.adversarial, cfg.epochs, cfg.batch_size, cfg.learning_rate,
                     cfg.seed};
    *out = handle.release();
  });
}

int wmk_calibrate_qim_delta(const char* dataset, int count, int n, uint64_t key, uint64_t seed,
                            double* out_delta) {
  return guarded([&] {
    require(dataset && out_delta, "null argument");
    const int side = std::max(16 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))),
                              16);
    std::vector<wmkit::Image> images =
        wmkit::ingest(dataset, count, wmkit::derive_seed(seed, {0x696e67ULL}), side, side);
    *out_delta = wmkit::calibrate_qim_delta(images, n, key, seed);
  });
}

int wmk_random_watermark(int n, uint64_t seed, char* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(n >= 1, "n must be positive");
    wmkit::Rng rng(seed);
    write_bits(wmkit::random_watermark(n, rng), out);
  });
}

int wmk_embed(const wmk_codec* codec, const wmk_image* img, const char* bits, wmk_image** out) {
  return guarded([&] {
    require(codec && img && out, "null argument");
    *out = new wmk_image{codec->codec->embed(img->img, parse_bits(bits))};
  });
}

int wmk_decode(const wmk_codec* codec, const wmk_image* img, char* out_bits) {
  return guarded([&] {
    require(codec && img && out_bits, "null argument");
    write_bits(wmkit::decode(*codec->codec, img->img), out_bits);
  });
}

int wmk_decode_soft(const wmk_codec* codec, const wmk_image* img, double* out_soft) {
  return guarded([&] {
    require(codec && img && out_soft, "null argument");
    wmkit::SoftBits soft = codec->codec->decode_soft(img->img);
    std::memcpy(out_soft, soft.data(), soft.size() * sizeof(double));
  });
}

int wmk_bitwise_accuracy(const char* a, const char* b, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = wmkit::bitwise_accuracy(parse_bits(a), parse_bits(b));
  });
}

int wmk_detect(const wmk_codec* codec, const char* groundtruth, double tau, const char* mode,
               const wmk_image* img, int* flagged, double* ba) {
  return guarded([&] {
    require(codec && img, "null argument");
    wmkit::Detector det{codec->codec.get(), parse_bits(groundtruth), tau, parse_mode(mode)};
    wmkit::Verdict v = wmkit::detect(det, img->img);
    if (flagged) *flagged = v.ai_generated ? 1 : 0;
    if (ba) *ba = v.ba;
  });
}

int wmk_calibrate_tau(int n, double eta, const char* mode, double* out_tau) {
  return guarded([&] {
    require(out_tau != nullptr, "null argument");
    *out_tau = wmkit::calibrate_tau(n, eta, parse_mode(mode));
  });
}

int wmk_fpr(int n, double tau, const char* mode, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = parse_mode(mode) == wmkit::DetectorMode::single_tail ? wmkit::fpr_single(tau, n)
                                                                : wmkit::fpr_double(tau, n);
  });
}

int wmk_evasion_bound(int n, double epsilon, double tau, const char* mode, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = parse_mode(mode) == wmkit::DetectorMode::single_tail
               ? wmkit::evasion_bound_single(n, epsilon, tau)
               : wmkit::evasion_bound_double(n, epsilon, tau);
  });
}

int wmk_surrogate_bound(int n, double epsilon, double tau, double beta, double gamma,
                        const char* mode, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = wmkit::surrogate_bound(parse_mode(mode), n, epsilon, tau, beta, gamma);
  });
}

int wmk_postprocess(const wmk_image* img, const char* kind, double parameter, uint64_t seed,
                    wmk_image** out) {
  return guarded([&] {
    require(img && kind && out, "null argument");
    wmkit::PostProcessSpec spec{wmkit::post_kind_from_string(kind), parameter, seed};
    *out = new wmk_image{wmkit::apply_postprocess(img->img, spec)};
  });
}

int wmk_attack(const wmk_codec* codec, const wmk_image* watermarked, const char* attack_json,
               wmk_image** out_adv, char** out_json) {
  return guarded([&] {
    require(codec && watermarked && attack_json, "null argument");
    const wmkit::AttackSpec spec = wmkit::attack_spec_from_json(attack_json);
    wmkit::Watermark groundtruth;
    {
      nlohmann::json j = nlohmann::json::parse(attack_json);
      if (j.contains("groundtruth"))
        groundtruth = parse_bits(j["groundtruth"].get<std::string>().c_str());
    }
    const wmkit::Image& I_w = watermarked->img;

    wmkit::AttackResult res;
    if (spec.kind == "whitebox-flip" || spec.kind == "whitebox-random") {
      res = wmkit::whitebox_attack(*codec->codec, I_w,
                                   spec.kind == "whitebox-flip"
                                       ? wmkit::WhiteBoxVariant::flip_all
                                       : wmkit::WhiteBoxVariant::random_target,
                                   spec.wb);
    } else if (spec.kind == "surrogate") {
      auto surrogate = wmkit::load_codec(spec.surrogate_model);
      res = wmkit::surrogate_attack(*surrogate, I_w, spec.wb);
    } else if (spec.kind == "query") {
      require(!groundtruth.empty(), "query attack needs a \"groundtruth\" bit string");
      const wmkit::DetectorMode mode = wmkit::mode_from_string(spec.tau_attack_mode);
      const double tau =
          spec.tau_attack > 0.0 ? spec.tau_attack : wmkit::calibrate_tau(codec->codec->n(), 1e-4, mode);
      wmkit::Detector det{codec->codec.get(), groundtruth, tau, mode};
      wmkit::CodecOracle oracle(det);
      res = wmkit::query_attack(oracle, I_w, spec.bb);
    } else {
      wmkit::PostProcessSpec post{wmkit::post_kind_from_string(spec.kind), spec.parameter,
                                  spec.wb.seed};
      res.adversarial = wmkit::apply_postprocess(I_w, post);
      res.delta = wmkit::diff(res.adversarial, I_w);
      res.linf = wmkit::linf_norm(res.delta);
      res.l2 = wmkit::l2_norm(res.delta);
      res.ssim = wmkit::ssim(I_w, res.adversarial);
      res.constraint_satisfied = true;
    }

    std::string json = "{";
    if (!groundtruth.empty()) {
      const double ba =
          wmkit::bitwise_accuracy(wmkit::decode(*codec->codec, res.adversarial), groundtruth);
      json += "\"ba\":" + fmt17(ba) + ",";
    }
    json += std::string("\"constraint_satisfied\":") +
            (res.constraint_satisfied ? "true" : "false");
    json += ",\"iterations\":" + std::to_string(res.iterations_used);
    json += ",\"l2\":" + fmt17(res.l2);
    json += ",\"linf\":" + fmt17(res.linf);
    json += ",\"queries\":" + std::to_string(res.queries_used);
    json += ",\"r_final\":" + fmt17(res.r_final);
    json += ",\"ssim\":" + fmt17(res.ssim) + "}";

    if (out_adv) *out_adv = new wmk_image{std::move(res.adversarial)};
    if (out_json) *out_json = dup_string(json);
  });
}

int wmk_tune_baseline(const wmk_codec* codec, const char* kind, const char* dataset, int count,
                      double tau, const char* mode, double target_rate, uint64_t seed,
                      char** out_json) {
  return guarded([&] {
    require(codec && kind && dataset && out_json, "null argument");
    int h = 0, w = 0;
    codec_dims(*codec->codec, &h, &w);
    std::vector<wmkit::Image> images =
        wmkit::ingest(dataset, count, wmkit::derive_seed(seed, {0x696e67ULL}), h, w);
    wmkit::Rng rng(wmkit::derive_seed(seed, {0x7774ULL}));
    wmkit::Watermark groundtruth = wmkit::random_watermark(codec->codec->n(), rng);
    for (wmkit::Image& img : images) img = codec->codec->embed(img, groundtruth);
    wmkit::Detector det{codec->codec.get(), groundtruth, tau, parse_mode(mode)};
    wmkit::TuneResult r =
        wmkit::tune_to_evasion(wmkit::post_kind_from_string(kind), det, images, target_rate, seed);
    std::string json = "{\"achieved_rate\":" + fmt17(r.achieved_rate);
    json += ",\"kind\":\"" + std::string(wmkit::post_kind_name(r.spec.kind)) + "\"";
    json += ",\"mean_linf\":" + fmt17(r.mean_linf);
    json += ",\"parameter\":" + fmt17(r.spec.parameter);
    json += std::string(",\"reached\":") + (r.reached ? "true" : "false") + "}";
    *out_json = dup_string(json);
  });
}

int wmk_run_experiment(const char* config_json, int* all_ok) {
  return guarded([&] {
    require(config_json != nullptr, "null argument");
    wmkit::ExperimentConfig cfg = wmkit::config_from_json(config_json);
    wmkit::ExperimentTable table = wmkit::run_experiment(cfg);
    wmkit::emit_experiment(table, cfg);
    if (all_ok) *all_ok = table.all_ok ? 1 : 0;
  });
}

}  // extern "C"
