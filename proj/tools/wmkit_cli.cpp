// wmkit command-line front end. Talks to the library exclusively through the
// C API; JSON plumbing and flag parsing happen here.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmkit/wmkit.h"

namespace {

using nlohmann::json;

struct ImageHandle {
  wmk_image* p = nullptr;
  ~ImageHandle() { wmk_image_free(p); }
};

struct CodecHandle {
  wmk_codec* p = nullptr;
  ~CodecHandle() { wmk_codec_free(p); }
};

// nonzero status -> print the library's message and exit with that status
void check(int status) {
  if (status == WMK_OK) return;
  std::fprintf(stderr, "error: %s\n", wmk_last_error());
  std::exit(status);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    std::fprintf(stderr, "error: io: cannot read %s\n", path.c_str());
    std::exit(WMK_ERR_IO);
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json parse_json_or_die(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: format: %s: %s\n", what.c_str(), e.what());
    std::exit(WMK_ERR_FORMAT);
  }
}

std::string load_watermark(const CodecHandle& codec, const std::string& bits, std::uint64_t seed) {
  if (!bits.empty()) return bits;
  std::vector<char> buf(static_cast<std::size_t>(wmk_codec_bits(codec.p)) + 1);
  check(wmk_random_watermark(wmk_codec_bits(codec.p), seed, buf.data()));
  return buf.data();
}

constexpr const char* kDefaultTaus = "0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,0.99";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blind image watermarking, detection, and evasion-attack toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", wmk_version());

  // ---- gen-dataset ----
  struct {
    std::string out;
    int count = 100, height = 128, width = 128;
    std::uint64_t seed = 0;
  } gen;
  {
    auto* c = app.add_subcommand("gen-dataset", "write a deterministic procedural image corpus");
    c->add_option("--output", gen.out, "output directory")->required();
    c->add_option("--count", gen.count, "number of images");
    c->add_option("--height", gen.height, "image height");
    c->add_option("--width", gen.width, "image width");
    c->add_option("--seed", gen.seed, "generator seed");
    c->callback([&] {
      std::error_code ec;
      std::filesystem::create_directories(gen.out, ec);
      for (int i = 0; i < gen.count; ++i) {
        ImageHandle img;
        check(wmk_image_synth(gen.height, gen.width, gen.seed + static_cast<std::uint64_t>(i),
                              &img.p));
        char name[32];
        std::snprintf(name, sizeof(name), "/img%04d.png", i);
        check(wmk_image_save_png(img.p, (gen.out + name).c_str()));
      }
      std::printf("wrote %d images to %s\n", gen.count, gen.out.c_str());
    });
  }

  // ---- init-qim ----
  struct {
    std::string out;
    int n = 256;
    double delta = 0.1;
    std::uint64_t key = 0;
  } qim;
  {
    auto* c = app.add_subcommand("init-qim", "write a transform-domain codec model file");
    c->add_option("--output", qim.out, "model file")->required();
    c->add_option("--n", qim.n, "watermark bits");
    c->add_option("--delta", qim.delta, "quantization step");
    c->add_option("--key", qim.key, "permutation/dither key");
    c->callback([&] {
      CodecHandle codec;
      check(wmk_codec_qim_new(qim.n, qim.delta, qim.key, &codec.p));
      check(wmk_codec_save(codec.p, qim.out.c_str()));
      std::printf("wrote %s (dwt-dct-qim, n=%d, delta=%.17g)\n", qim.out.c_str(), qim.n,
                  qim.delta);
    });
  }

  // ---- train-codec ----
  struct {
    std::string dataset, out;
    int n = 30, epochs = 3, batch_size = 32, sample_count = 200, height = 128, width = 128;
    double alpha = 0.02, learning_rate = 1.0;
    std::uint64_t seed = 0;
    bool adversarial = false;
  } tr;
  {
    auto* c = app.add_subcommand("train-codec", "train a spread-spectrum codec");
    c->add_option("--dataset", tr.dataset, "image directory or synth[:tag]")->required();
    c->add_option("--output", tr.out, "model file")->required();
    c->add_option("--n", tr.n, "watermark bits");
    c->add_option("--alpha", tr.alpha, "embedding strength");
    c->add_option("--epochs", tr.epochs, "training epochs");
    c->add_option("--batch-size", tr.batch_size, "SGD batch size");
    c->add_option("--learning-rate", tr.learning_rate, "SGD learning-rate scale");
    c->add_option("--seed", tr.seed, "training seed");
    c->add_option("--sample-count", tr.sample_count, "images to ingest");
    c->add_option("--height", tr.height, "training image height");
    c->add_option("--width", tr.width, "training image width");
    c->add_flag("--adversarial", tr.adversarial,
                "insert random post-processing between encoder and decoder");
    c->callback([&] {
      json cfg{{"n", tr.n},
               {"alpha", tr.alpha},
               {"epochs", tr.epochs},
               {"batch_size", tr.batch_size},
               {"learning_rate", tr.learning_rate},
               {"seed", std::to_string(tr.seed)},
               {"adversarial", tr.adversarial},
               {"sample_count", tr.sample_count},
               {"height", tr.height},
               {"width", tr.width}};
      CodecHandle codec;
      check(wmk_codec_train(tr.dataset.c_str(), cfg.dump().c_str(), &codec.p));
      check(wmk_codec_save(codec.p, tr.out.c_str()));
      std::printf("wrote %s (spread-spectrum, n=%d%s)\n", tr.out.c_str(), tr.n,
                  tr.adversarial ? ", adversarial" : "");
    });
  }

  // ---- calibrate ----
  struct {
    int n = 0;
    double eta = 1e-4;
    std::string mode = "double";
  } cal;
  {
    auto* c = app.add_subcommand("calibrate", "smallest detection threshold with FPR < eta");
    c->add_option("--n", cal.n, "watermark bits")->required();
    c->add_option("--eta", cal.eta, "FPR budget");
    c->add_option("--mode", cal.mode, "single | double");
    c->callback([&] {
      double tau = 0.0;
      check(wmk_calibrate_tau(cal.n, cal.eta, cal.mode.c_str(), &tau));
      double fpr = 0.0;
      check(wmk_fpr(cal.n, tau, cal.mode.c_str(), &fpr));
      std::printf("tau_star=%.17g fpr=%.17g\n", tau, fpr);
    });
  }

  // ---- calibrate-delta ----
  struct {
    std::string dataset;
    int count = 20, n = 256;
    std::uint64_t key = 0, seed = 0;
  } cd;
  {
    auto* c = app.add_subcommand("calibrate-delta",
                                 "smallest QIM step decoding exactly on a corpus");
    c->add_option("--dataset", cd.dataset, "image directory or synth[:tag]")->required();
    c->add_option("--count", cd.count, "images to sample");
    c->add_option("--n", cd.n, "watermark bits");
    c->add_option("--key", cd.key, "permutation/dither key");
    c->add_option("--seed", cd.seed, "sampling seed");
    c->callback([&] {
      double delta = 0.0;
      check(wmk_calibrate_qim_delta(cd.dataset.c_str(), cd.count, cd.n, cd.key, cd.seed, &delta));
      std::printf("delta=%.17g\n", delta);
    });
  }

  // ---- embed ----
  struct {
    std::string model, input, output, bits;
    std::uint64_t seed = 0;
  } em;
  {
    auto* c = app.add_subcommand("embed", "embed a watermark into an image");
    c->add_option("--model", em.model, "codec model file")->required();
    c->add_option("--input", em.input, "input image (PNG or JPEG)")->required();
    c->add_option("--output", em.output, "output PNG")->required();
    c->add_option("--watermark", em.bits, "bit string; default: random from --seed");
    c->add_option("--seed", em.seed, "watermark seed");
    c->callback([&] {
      CodecHandle codec;
      check(wmk_codec_load(em.model.c_str(), &codec.p));
      ImageHandle img;
      check(wmk_image_load(em.input.c_str(), &img.p));
      const std::string bits = load_watermark(codec, em.bits, em.seed);
      ImageHandle marked;
      check(wmk_embed(codec.p, img.p, bits.c_str(), &marked.p));
      check(wmk_image_save_png(marked.p, em.output.c_str()));
      std::printf("%s\n", bits.c_str());
    });
  }

  // ---- decode ----
  struct {
    std::string model, input;
    bool soft = false;
  } de;
  {
    auto* c = app.add_subcommand("decode", "decode the watermark from an image");
    c->add_option("--model", de.model, "codec model file")->required();
    c->add_option("--input", de.input, "image to decode")->required();
    c->add_flag("--soft", de.soft, "also print soft-bit scores");
    c->callback([&] {
      CodecHandle codec;
      check(wmk_codec_load(de.model.c_str(), &codec.p));
      ImageHandle img;
      check(wmk_image_load(de.input.c_str(), &img.p));
      const int n = wmk_codec_bits(codec.p);
      std::vector<char> bits(static_cast<std::size_t>(n) + 1);
      check(wmk_decode(codec.p, img.p, bits.data()));
      std::printf("%s\n", bits.data());
      if (de.soft) {
        std::vector<double> soft(static_cast<std::size_t>(n));
        check(wmk_decode_soft(codec.p, img.p, soft.data()));
        for (int i = 0; i < n; ++i) std::printf(i ? " %.6f" : "%.6f", soft[i]);
        std::printf("\n");
      }
    });
  }

  // ---- detect ----
  struct {
    std::string model, input, groundtruth, mode = "double";
    double tau = 0.0, eta = 1e-4;
  } dt;
  {
    auto* c = app.add_subcommand("detect", "flag an image as AI-generated or not");
    c->add_option("--model", dt.model, "codec model file")->required();
    c->add_option("--input", dt.input, "image to test")->required();
    c->add_option("--groundtruth", dt.groundtruth, "ground-truth watermark bits")->required();
    c->add_option("--tau", dt.tau, "detection threshold; 0 = calibrate from --eta");
    c->add_option("--eta", dt.eta, "FPR budget for calibration");
    c->add_option("--mode", dt.mode, "single | double");
    c->callback([&] {
      CodecHandle codec;
      check(wmk_codec_load(dt.model.c_str(), &codec.p));
      ImageHandle img;
      check(wmk_image_load(dt.input.c_str(), &img.p));
      double tau = dt.tau;
      if (tau <= 0.0)
        check(wmk_calibrate_tau(wmk_codec_bits(codec.p), dt.eta, dt.mode.c_str(), &tau));
      int flaggedv = 0;
      double ba = 0.0;
      check(wmk_detect(codec.p, dt.groundtruth.c_str(), tau, dt.mode.c_str(), img.p, &flaggedv,
                       &ba));
      std::printf("%s ba=%.17g tau=%.17g mode=%s\n",
                  flaggedv ? "ai-generated" : "non-ai-generated", ba, tau, dt.mode.c_str());
    });
  }

  // ---- attack ----
  struct {
    std::string model, input, output, kind, loss = "l2", surrogate, groundtruth;
    std::string tau_mode = "double";
    double parameter = 0.0, epsilon = 0.01, alpha = 0.0, r_init = 2.0, r_tol = 0.001, tau = 0.0;
    int max_iter = 5000, es = 5, b0 = 20;
    std::uint64_t max_q = 2000, seed = 0;
    bool use_l2 = false, no_jpeg_init = false, no_early_stop = false;
  } at;
  {
    auto* c = app.add_subcommand("attack", "run one evasion attack on a watermarked image");
    c->add_option("--model", at.model, "target codec model file")->required();
    c->add_option("--input", at.input, "watermarked image")->required();
    c->add_option("--kind", at.kind,
                  "whitebox-flip | whitebox-random | surrogate | query | jpeg | gaussian-noise | "
                  "gaussian-blur | brightness-contrast")
        ->required();
    c->add_option("--output", at.output, "write the post-attack image here");
    c->add_option("--parameter", at.parameter, "post-processing parameter");
    c->add_option("--loss", at.loss, "l2 | l1 | neg-cosine | cross-entropy");
    c->add_option("--epsilon", at.epsilon, "target-watermark accuracy slack");
    c->add_option("--alpha", at.alpha, "gradient step size; 0 = codec default");
    c->add_option("--max-iter", at.max_iter, "gradient steps per bound probe");
    c->add_option("--r-init", at.r_init, "binary-search upper bound");
    c->add_option("--r-tol", at.r_tol, "binary-search stop width");
    c->add_option("--surrogate-model", at.surrogate, "surrogate codec model file");
    c->add_option("--groundtruth", at.groundtruth, "oracle ground truth (query attack)");
    c->add_option("--max-q", at.max_q, "query budget");
    c->add_option("--es", at.es, "early-stop patience");
    c->add_option("--b0", at.b0, "gradient-probe base count");
    c->add_option("--tau", at.tau, "oracle threshold; 0 = calibrated");
    c->add_option("--tau-mode", at.tau_mode, "oracle detector mode");
    c->add_option("--seed", at.seed, "attack seed");
    c->add_flag("--use-l2", at.use_l2, "query attack tracks l2 instead of L-inf");
    c->add_flag("--no-jpeg-init", at.no_jpeg_init, "random-blend initialization instead of JPEG");
    c->add_flag("--no-early-stop", at.no_early_stop, "run the query attack to the full budget");
    c->callback([&] {
      CodecHandle codec;
      check(wmk_codec_load(at.model.c_str(), &codec.p));
      ImageHandle img;
      check(wmk_image_load(at.input.c_str(), &img.p));
      json a{{"kind", at.kind},
             {"parameter", at.parameter},
             {"loss", at.loss},
             {"epsilon", at.epsilon},
             {"alpha", at.alpha},
             {"max_iter", at.max_iter},
             {"r_init", at.r_init},
             {"r_tol", at.r_tol},
             {"wb_seed", std::to_string(at.seed)},
             {"bb_seed", std::to_string(at.seed)},
             {"max_q", at.max_q},
             {"es", at.es},
             {"b0", at.b0},
             {"use_l2", at.use_l2},
             {"jpeg_initialization", !at.no_jpeg_init},
             {"early_stop", !at.no_early_stop},
             {"surrogate_model", at.surrogate},
             {"tau_attack", at.tau},
             {"tau_attack_mode", at.tau_mode}};
      if (!at.groundtruth.empty()) a["groundtruth"] = at.groundtruth;
      ImageHandle adv;
      char* result = nullptr;
      check(wmk_attack(codec.p, img.p, a.dump().c_str(), &adv.p, &result));
      if (!at.output.empty()) check(wmk_image_save_png(adv.p, at.output.c_str()));
      std::printf("%s\n", result);
      wmk_string_free(result);
    });
  }

  // ---- tune-baseline ----
  struct {
    std::string model, dataset, kind, mode = "double";
    int count = 100;
    double tau = 0.0, eta = 1e-4, target = 0.0;
    std::uint64_t seed = 0;
  } tb;
  {
    auto* c = app.add_subcommand("tune-baseline",
                                 "tune a post-processing method to a target evasion rate");
    c->add_option("--model", tb.model, "codec model file")->required();
    c->add_option("--dataset", tb.dataset, "image directory or synth[:tag]")->required();
    c->add_option("--kind", tb.kind,
                  "jpeg | gaussian-noise | gaussian-blur | brightness-contrast")
        ->required();
    c->add_option("--target-rate", tb.target, "evasion rate to match")->required();
    c->add_option("--count", tb.count, "images to sample");
    c->add_option("--tau", tb.tau, "detection threshold; 0 = calibrate from --eta");
    c->add_option("--eta", tb.eta, "FPR budget for calibration");
    c->add_option("--mode", tb.mode, "single | double");
    c->add_option("--seed", tb.seed, "sampling seed");
    c->callback([&] {
      CodecHandle codec;
      check(wmk_codec_load(tb.model.c_str(), &codec.p));
      double tau = tb.tau;
      if (tau <= 0.0)
        check(wmk_calibrate_tau(wmk_codec_bits(codec.p), tb.eta, tb.mode.c_str(), &tau));
      char* result = nullptr;
      check(wmk_tune_baseline(codec.p, tb.kind.c_str(), tb.dataset.c_str(), tb.count, tau,
                              tb.mode.c_str(), tb.target, tb.seed, &result));
      std::printf("%s\n", result);
      wmk_string_free(result);
    });
  }

  // ---- bounds ----
  struct {
    int n = 0;
    double epsilon = 0.01, beta = -1.0, gamma = -1.0;
    std::string mode = "both", taus = kDefaultTaus;
  } bo;
  {
    auto* c = app.add_subcommand("bounds", "theoretical FPR and evasion-bound table (CSV)");
    c->add_option("--n", bo.n, "watermark bits")->required();
    c->add_option("--epsilon", bo.epsilon, "target-watermark accuracy slack");
    c->add_option("--tau", bo.taus, "comma-separated threshold list");
    c->add_option("--mode", bo.mode, "single | double | both");
    c->add_option("--beta", bo.beta, "surrogate similarity level (with --gamma)");
    c->add_option("--gamma", bo.gamma, "similarity probability (with --beta)");
    c->callback([&] {
      std::vector<double> taus;
      std::stringstream ss(bo.taus);
      for (std::string tok; std::getline(ss, tok, ',');) taus.push_back(std::stod(tok));
      const bool surrogate = bo.beta >= 0.0 || bo.gamma >= 0.0;
      if (surrogate && (bo.beta < 0.0 || bo.gamma < 0.0)) {
        std::fprintf(stderr, "error: invalid-argument: --beta and --gamma go together\n");
        std::exit(WMK_ERR_INVALID_ARGUMENT);
      }
      std::vector<std::string> modes;
      if (bo.mode == "both")
        modes = {"single", "double"};
      else
        modes = {bo.mode};
      std::printf("n,tau,epsilon,beta,gamma,mode,bound\n");
      for (const std::string& mode : modes)
        for (double tau : taus) {
          double bound = 0.0;
          if (surrogate)
            check(wmk_surrogate_bound(bo.n, bo.epsilon, tau, bo.beta, bo.gamma, mode.c_str(),
                                      &bound));
          else
            check(wmk_evasion_bound(bo.n, bo.epsilon, tau, mode.c_str(), &bound));
          std::printf("%d,%.17g,%.17g,", bo.n, tau, bo.epsilon);
          if (surrogate)
            std::printf("%.17g,%.17g,", bo.beta, bo.gamma);
          else
            std::printf(",,");
          std::printf("%s,%.17g\n", mode.c_str(), bound);
        }
    });
  }

  // ---- run ----
  struct {
    std::string config, dataset, codec_model, output_dir;
    int sample_count = -1;
    double eta = -1.0;
    std::uint64_t master_seed = 0;
    bool seed_set = false;
    std::vector<double> taus;
    std::vector<std::string> attacks;
  } ru;
  {
    auto* c = app.add_subcommand("run", "full experiment: attacks x images -> CSV tables");
    c->add_option("--config", ru.config, "experiment config JSON (flags override it)");
    c->add_option("--dataset", ru.dataset, "image directory or synth[:tag]");
    c->add_option("--codec-model", ru.codec_model, "codec model file");
    c->add_option("--sample-count", ru.sample_count, "images to evaluate");
    c->add_option("--eta", ru.eta, "FPR budget for the calibrated thresholds");
    c->add_option("--master-seed", ru.master_seed, "seed all per-item seeds derive from")
        ->each([&](const std::string&) { ru.seed_set = true; });
    c->add_option("--output-dir", ru.output_dir, "where the CSV tables go");
    c->add_option("--tau", ru.taus, "threshold grid point (repeatable; replaces the default)");
    c->add_option("--attack", ru.attacks, "attack spec as a JSON object (repeatable)");
    c->callback([&] {
      json cfg = json::object();
      if (!ru.config.empty())
        cfg = parse_json_or_die(read_text_file(ru.config), ru.config);
      if (!ru.dataset.empty()) cfg["dataset"] = ru.dataset;
      if (!ru.codec_model.empty()) cfg["codec_model"] = ru.codec_model;
      if (ru.sample_count >= 0) cfg["sample_count"] = ru.sample_count;
      if (ru.eta >= 0.0) cfg["eta"] = ru.eta;
      if (ru.seed_set) cfg["master_seed"] = std::to_string(ru.master_seed);
      if (!ru.output_dir.empty()) cfg["output_dir"] = ru.output_dir;
      if (!ru.taus.empty()) cfg["tau_grid"] = ru.taus;
      if (!ru.attacks.empty()) {
        json arr = json::array();
        for (const std::string& a : ru.attacks)
          arr.push_back(parse_json_or_die(a, "--attack"));
        cfg["attacks"] = arr;
      }
      if (!cfg.contains("dataset") || !cfg.contains("codec_model")) {
        std::fprintf(stderr,
                     "error: invalid-argument: run needs --dataset and --codec-model "
                     "(or a config file providing them)\n");
        std::exit(WMK_ERR_INVALID_ARGUMENT);
      }
      int all_ok = 0;
      check(wmk_run_experiment(cfg.dump().c_str(), &all_ok));
      const std::string dir = cfg.contains("output_dir") ? cfg["output_dir"].get<std::string>() : ".";
      std::printf("%s; tables in %s\n", all_ok ? "completed" : "completed with row errors",
                  dir.c_str());
      if (!all_ok) std::exit(1);
    });
  }

  CLI11_PARSE(app, argc, argv);
  return 0;
}
