#include "core/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "core/detector.hpp"
#include "core/errors.hpp"
#include "core/model_io.hpp"
#include "core/qim_codec.hpp"
#include "core/spread_codec.hpp"
#include "core/synth.hpp"

namespace wmkit {

namespace {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// shortest decimal form that parses back to the same double
std::string num(double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(Err::io, "cannot open for write: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) fail(Err::io, "write failed: " + path);
}

constexpr double kBetaGrid[] = {0.70, 0.75, 0.80, 0.85, 0.90, 0.95};

void append_attack_json(std::string& out, const AttackSpec& a) {
  out += "{\"alpha\":" + num17(a.wb.alpha);
  out += ",\"b0\":" + std::to_string(a.bb.b0);
  out += ",\"bb_seed\":\"" + std::to_string(a.bb.seed) + "\"";
  out += ",\"bisect_tol\":" + num17(a.bb.bisect_tol);
  out += ",\"early_stop\":" + std::string(a.bb.early_stop ? "true" : "false");
  out += ",\"epsilon\":" + num17(a.wb.epsilon);
  out += ",\"es\":" + std::to_string(a.bb.es);
  out += ",\"jpeg_initialization\":" + std::string(a.bb.jpeg_initialization ? "true" : "false");
  out += ",\"kind\":\"" + a.kind + "\"";
  out += ",\"loss\":\"" + loss_name(a.wb.loss) + "\"";
  out += ",\"max_iter\":" + std::to_string(a.wb.max_iter);
  out += ",\"max_q\":" + std::to_string(a.bb.max_q);
  out += ",\"parameter\":" + num17(a.parameter);
  out += ",\"r_init\":" + num17(a.wb.r_init);
  out += ",\"r_tol\":" + num17(a.wb.r_tol);
  out += ",\"step_shrink\":" + num17(a.bb.step_shrink);
  out += ",\"surrogate_model\":\"" + a.surrogate_model + "\"";
  out += ",\"tau_attack\":" + num17(a.tau_attack);
  out += ",\"tau_attack_mode\":\"" + a.tau_attack_mode + "\"";
  out += ",\"use_l2\":" + std::string(a.bb.use_l2 ? "true" : "false");
  out += ",\"wb_seed\":\"" + std::to_string(a.wb.seed) + "\"";
  out += "}";
}

// seeds serialize as decimal strings (JSON numbers lose 64-bit precision) but
// bare numbers are accepted on input
std::uint64_t seed_of(const nlohmann::json& v) {
  if (v.is_string()) return std::stoull(v.get<std::string>());
  return v.get<std::uint64_t>();
}

AttackSpec attack_from_json(const nlohmann::json& j) {
  AttackSpec a;
  a.kind = j.at("kind").get<std::string>();
  if (j.contains("parameter")) a.parameter = j["parameter"].get<double>();
  if (j.contains("alpha")) a.wb.alpha = j["alpha"].get<double>();
  if (j.contains("epsilon")) a.wb.epsilon = j["epsilon"].get<double>();
  if (j.contains("loss")) a.wb.loss = loss_from_string(j["loss"].get<std::string>());
  if (j.contains("max_iter")) a.wb.max_iter = j["max_iter"].get<int>();
  if (j.contains("r_init")) a.wb.r_init = j["r_init"].get<double>();
  if (j.contains("r_tol")) a.wb.r_tol = j["r_tol"].get<double>();
  if (j.contains("wb_seed")) a.wb.seed = seed_of(j["wb_seed"]);
  if (j.contains("b0")) a.bb.b0 = j["b0"].get<int>();
  if (j.contains("bb_seed")) a.bb.seed = seed_of(j["bb_seed"]);
  if (j.contains("bisect_tol")) a.bb.bisect_tol = j["bisect_tol"].get<double>();
  if (j.contains("early_stop")) a.bb.early_stop = j["early_stop"].get<bool>();
  if (j.contains("es")) a.bb.es = j["es"].get<int>();
  if (j.contains("jpeg_initialization"))
    a.bb.jpeg_initialization = j["jpeg_initialization"].get<bool>();
  if (j.contains("max_q")) a.bb.max_q = j["max_q"].get<std::uint64_t>();
  if (j.contains("step_shrink")) a.bb.step_shrink = j["step_shrink"].get<double>();
  if (j.contains("use_l2")) a.bb.use_l2 = j["use_l2"].get<bool>();
  if (j.contains("surrogate_model")) a.surrogate_model = j["surrogate_model"].get<std::string>();
  if (j.contains("tau_attack")) a.tau_attack = j["tau_attack"].get<double>();
  if (j.contains("tau_attack_mode")) a.tau_attack_mode = j["tau_attack_mode"].get<std::string>();
  return a;
}

}  // namespace

std::string attack_spec_to_json(const AttackSpec& spec) {
  std::string out;
  append_attack_json(out, spec);
  return out;
}

AttackSpec attack_spec_from_json(const std::string& text) {
  try {
    return attack_from_json(nlohmann::json::parse(text));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Err::format, std::string("attack spec parse: ") + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& cfg) {
  std::string out = "{\"attacks\":[";
  for (std::size_t i = 0; i < cfg.attacks.size(); ++i) {
    if (i) out += ',';
    append_attack_json(out, cfg.attacks[i]);
  }
  out += "],\"codec_model\":\"" + cfg.codec_model + "\"";
  out += ",\"dataset\":\"" + cfg.dataset + "\"";
  out += ",\"eta\":" + num17(cfg.eta);
  out += ",\"format_version\":1";
  out += ",\"master_seed\":\"" + std::to_string(cfg.master_seed) + "\"";
  out += ",\"output_dir\":\"" + cfg.output_dir + "\"";
  out += ",\"sample_count\":" + std::to_string(cfg.sample_count);
  out += ",\"tau_grid\":[";
  for (std::size_t i = 0; i < cfg.tau_grid.size(); ++i) {
    if (i) out += ',';
    out += num17(cfg.tau_grid[i]);
  }
  out += "],\"version\":\"";
  out += kVersion;
  out += "\"}\n";
  return out;
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::format, std::string("config parse: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    if (j.contains("dataset")) cfg.dataset = j["dataset"].get<std::string>();
    if (j.contains("codec_model")) cfg.codec_model = j["codec_model"].get<std::string>();
    if (j.contains("sample_count")) cfg.sample_count = j["sample_count"].get<int>();
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("master_seed")) cfg.master_seed = seed_of(j["master_seed"]);
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("tau_grid"))
      for (const auto& t : j["tau_grid"]) cfg.tau_grid.push_back(t.get<double>());
    if (j.contains("attacks"))
      for (const auto& a : j["attacks"]) cfg.attacks.push_back(attack_from_json(a));
    return cfg;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Err::format, std::string("config parse: ") + e.what());
  }
}

std::vector<Image> ingest(const std::string& dataset, int count, std::uint64_t seed, int oh,
                          int ow) {
  if (count < 0) fail(Err::invalid_argument, "ingest: negative count");
  std::vector<Image> out;
  if (count == 0) return out;
  out.reserve(count);

  if (dataset.rfind("synth", 0) == 0 && (dataset.size() == 5 || dataset[5] == ':')) {
    const std::string tag = dataset.size() > 6 ? dataset.substr(6) : "";
    const std::uint64_t base = fnv1a64(tag);
    for (int i = 0; i < count; ++i)
      out.push_back(
          synth_image(oh, ow, derive_seed(seed, {0x73796eULL, base, static_cast<std::uint64_t>(i)})));
    return out;
  }

  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dataset, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") paths.push_back(entry.path().string());
  }
  if (ec) fail(Err::io, "ingest: cannot list " + dataset + ": " + ec.message());
  std::sort(paths.begin(), paths.end());
  Rng rng(seed);
  rng.shuffle(paths);
  for (const std::string& p : paths) {
    if (static_cast<int>(out.size()) == count) break;
    try {
      out.push_back(resize_bilinear(load_image(p), oh, ow));
    } catch (const Error&) {
      // undecodable file: skip, the sample just moves to the next candidate
    }
  }
  if (static_cast<int>(out.size()) < count)
    fail(Err::io, "ingest: " + dataset + " holds fewer than " + std::to_string(count) +
                      " decodable images");
  return out;
}

namespace {

struct Job {
  std::string label;
  std::string parameters;
  const AttackSpec* spec = nullptr;  // null for the built-in original/watermarked rows
  int occurrence = 0;
};

std::string wb_parameters(const Codec& codec, const WhiteBoxConfig& wb) {
  return "loss=" + loss_name(wb.loss) + ";epsilon=" + num(wb.epsilon) +
         ";alpha=" + num(effective_alpha(codec, wb)) + ";max_iter=" + std::to_string(wb.max_iter) +
         ";r_init=" + num(wb.r_init) + ";r_tol=" + num(wb.r_tol);
}

}  // namespace

ExperimentTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.sample_count < 1) fail(Err::invalid_argument, "run: sample_count must be >= 1");
  for (double t : cfg.tau_grid)
    if (!(t > 0.5 && t <= 1.0)) fail(Err::domain, "run: tau grid values must lie in (0.5, 1]");

  std::unique_ptr<Codec> codec = load_codec(cfg.codec_model);
  const int n = codec->n();

  int oh = 0, ow = 0;
  if (const auto* ss = dynamic_cast<const SpreadSpectrumCodec*>(codec.get())) {
    oh = ss->params().h;
    ow = ss->params().w;
  } else {
    const int side = 16 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    oh = ow = std::max(side, 16);
  }

  ExperimentTable table;
  table.n = n;
  table.tau_star_single = calibrate_tau(n, cfg.eta, DetectorMode::single_tail);
  table.tau_star_double = calibrate_tau(n, cfg.eta, DetectorMode::double_tail);

  table.tau_grid = cfg.tau_grid;
  if (table.tau_grid.empty()) {
    for (int k = 0; k <= 8; ++k) table.tau_grid.push_back(0.55 + 0.05 * k);
    table.tau_grid.push_back(0.99);
  }
  table.tau_grid.push_back(table.tau_star_single);
  table.tau_grid.push_back(table.tau_star_double);
  std::sort(table.tau_grid.begin(), table.tau_grid.end());
  table.tau_grid.erase(std::unique(table.tau_grid.begin(), table.tau_grid.end()),
                       table.tau_grid.end());

  for (const AttackSpec& a : cfg.attacks)
    if (a.kind == "whitebox-random" || a.kind == "surrogate") {
      table.epsilon = a.wb.epsilon;
      break;
    }

  const std::vector<Image> originals =
      ingest(cfg.dataset, cfg.sample_count, derive_seed(cfg.master_seed, {0x696e67ULL}), oh, ow);
  const std::size_t m = originals.size();

  std::vector<Watermark> marks(m);
  std::vector<Image> watermarked(m);
  for (std::size_t i = 0; i < m; ++i) {
    Rng rng(derive_seed(cfg.master_seed, {0x7774ULL, i}));
    marks[i] = random_watermark(n, rng);
    watermarked[i] = codec->embed(originals[i], marks[i]);
  }

  // surrogate codecs, loaded once per distinct path
  std::map<std::string, std::unique_ptr<Codec>> surrogates;
  for (const AttackSpec& a : cfg.attacks)
    if (a.kind == "surrogate" && !surrogates.count(a.surrogate_model))
      surrogates[a.surrogate_model] = load_codec(a.surrogate_model);

  if (!surrogates.empty()) {
    table.surrogate_bounds = true;
    const Codec& sur = *surrogates.begin()->second;
    for (double beta : kBetaGrid) {
      table.beta_grid.push_back(beta);
      table.gamma_at_beta.push_back(estimate_beta_gamma(sur, *codec, watermarked, beta));
    }
  }

  std::vector<Job> jobs;
  jobs.push_back({"original", "", nullptr, 0});
  jobs.push_back({"watermarked", "", nullptr, 1});
  std::map<std::string, int> seen;
  for (const AttackSpec& a : cfg.attacks) {
    Job job;
    job.occurrence = seen[a.kind]++;
    job.label = job.occurrence ? a.kind + "#" + std::to_string(job.occurrence) : a.kind;
    job.spec = &a;
    if (a.kind == "whitebox-flip" || a.kind == "whitebox-random") {
      job.parameters = wb_parameters(*codec, a.wb);
    } else if (a.kind == "surrogate") {
      job.parameters = wb_parameters(*surrogates.at(a.surrogate_model), a.wb) +
                       ";model=" + a.surrogate_model;
    } else if (a.kind == "query") {
      const double tau = a.tau_attack > 0.0
                             ? a.tau_attack
                             : (a.tau_attack_mode == "single" ? table.tau_star_single
                                                              : table.tau_star_double);
      job.parameters = "max_q=" + std::to_string(a.bb.max_q) + ";es=" + std::to_string(a.bb.es) +
                       ";norm=" + (a.bb.use_l2 ? "l2" : "linf") + ";tau=" + num(tau) +
                       ";mode=" + a.tau_attack_mode;
    } else if (a.kind == "jpeg" || a.kind == "gaussian-noise" || a.kind == "gaussian-blur" ||
               a.kind == "brightness-contrast") {
      job.parameters = "parameter=" + num(a.parameter);
    } else {
      fail(Err::invalid_argument, "run: unknown attack kind " + a.kind);
    }
    jobs.push_back(std::move(job));
  }

  table.rows.assign(jobs.size() * m, ResultRow{});

  auto run_item = [&](std::size_t job_idx, std::size_t img_idx) {
    const Job& job = jobs[job_idx];
    ResultRow& row = table.rows[job_idx * m + img_idx];
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "img%04zu", img_idx);
    row.image_id = idbuf;
    row.attack = job.label;
    row.parameters = job.parameters;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Image& I_w = watermarked[img_idx];
      Image out;
      if (!job.spec) {
        if (job.occurrence == 0) {  // original image, FPR side
          out = originals[img_idx];
        } else {  // untouched watermarked image; norms = embedding distortion
          out = I_w;
          Perturbation d = diff(I_w, originals[img_idx]);
          row.linf = linf_norm(d);
          row.l2 = l2_norm(d);
          row.ssim_v = ssim(originals[img_idx], I_w);
        }
      } else {
        const AttackSpec& a = *job.spec;
        const std::uint64_t item_seed = derive_seed(
            cfg.master_seed, {0x61746bULL, fnv1a64(a.kind) ^ a.wb.seed ^ a.bb.seed,
                              static_cast<std::uint64_t>(job.occurrence), img_idx});
        if (a.kind == "whitebox-flip" || a.kind == "whitebox-random") {
          WhiteBoxConfig wb = a.wb;
          wb.seed = item_seed;
          AttackResult res = whitebox_attack(
              *codec, I_w,
              a.kind == "whitebox-flip" ? WhiteBoxVariant::flip_all : WhiteBoxVariant::random_target,
              wb);
          out = std::move(res.adversarial);
          row.converged = res.constraint_satisfied;
          row.r_final = res.r_final;
          row.linf = res.linf;
          row.l2 = res.l2;
          row.ssim_v = res.ssim;
          row.iterations = res.iterations_used;
        } else if (a.kind == "surrogate") {
          WhiteBoxConfig wb = a.wb;
          wb.seed = item_seed;
          AttackResult res = surrogate_attack(*surrogates.at(a.surrogate_model), I_w, wb);
          out = std::move(res.adversarial);
          row.converged = res.constraint_satisfied;
          row.r_final = res.r_final;
          row.linf = res.linf;
          row.l2 = res.l2;
          row.ssim_v = res.ssim;
          row.iterations = res.iterations_used;
        } else if (a.kind == "query") {
          const double tau = a.tau_attack > 0.0
                                 ? a.tau_attack
                                 : (a.tau_attack_mode == "single" ? table.tau_star_single
                                                                  : table.tau_star_double);
          Detector det{codec.get(), marks[img_idx], tau, mode_from_string(a.tau_attack_mode)};
          CodecOracle oracle(det);
          BlackBoxConfig bb = a.bb;
          bb.seed = item_seed;
          AttackResult res = query_attack(oracle, I_w, bb, &row.qlog);
          out = std::move(res.adversarial);
          row.converged = res.constraint_satisfied;
          row.linf = res.linf;
          row.l2 = res.l2;
          row.ssim_v = res.ssim;
          row.queries = res.queries_used;
        } else {
          PostProcessSpec spec{post_kind_from_string(a.kind), a.parameter, item_seed};
          out = apply_postprocess(I_w, spec);
          Perturbation d = diff(out, I_w);
          row.linf = linf_norm(d);
          row.l2 = l2_norm(d);
          row.ssim_v = ssim(I_w, out);
        }
      }
      row.ba = bitwise_accuracy(decode(*codec, out), marks[img_idx]);
      row.verdict_single.reserve(table.tau_grid.size());
      row.verdict_double.reserve(table.tau_grid.size());
      for (double tau : table.tau_grid) {
        row.verdict_single.push_back(flagged(DetectorMode::single_tail, tau, row.ba) ? 1 : 0);
        row.verdict_double.push_back(flagged(DetectorMode::double_tail, tau, row.ba) ? 1 : 0);
      }
    } catch (const Error& e) {
      row.error = std::string(err_name(e.code)) + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = std::string("internal: ") + e.what();
    }
    row.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  const std::size_t items = jobs.size() * m;
  unsigned workers = std::thread::hardware_concurrency();
  if (workers == 0) workers = 4;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, items));
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = cursor.fetch_add(1); i < items; i = cursor.fetch_add(1))
        run_item(i / m, i % m);
    });
  for (std::thread& t : pool) t.join();

  for (const ResultRow& row : table.rows)
    if (!row.error.empty()) table.all_ok = false;

  // the id covers everything that shapes the results; where they land does not
  ExperimentConfig id_cfg = cfg;
  id_cfg.tau_grid = table.tau_grid;
  id_cfg.output_dir.clear();
  table.experiment_id = [&] {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(config_to_json(id_cfg))));
    return std::string(buf);
  }();
  return table;
}

void emit_experiment(const ExperimentTable& table, const ExperimentConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const std::string dir = cfg.output_dir + "/";

  ExperimentConfig manifest_cfg = cfg;
  manifest_cfg.tau_grid = table.tau_grid;
  write_file(dir + "manifest.json", config_to_json(manifest_cfg));

  // results.csv
  std::string res = "experiment,image,attack,parameters,ba,converged,r_final,linf,l2,ssim,queries,"
                    "iterations,error";
  for (double t : table.tau_grid) res += ",single@" + num(t);
  for (double t : table.tau_grid) res += ",double@" + num(t);
  res += "\n";
  for (const ResultRow& r : table.rows) {
    res += table.experiment_id + "," + r.image_id + "," + r.attack + "," + r.parameters + "," +
           num(r.ba) + "," + (r.converged ? "1" : "0") + "," + num(r.r_final) + "," + num(r.linf) +
           "," + num(r.l2) + "," + num(r.ssim_v) + "," + std::to_string(r.queries) + "," +
           std::to_string(r.iterations) + "," + r.error;
    for (std::uint8_t v : r.verdict_single) res += v ? ",1" : ",0";
    for (std::uint8_t v : r.verdict_double) res += v ? ",1" : ",0";
    res += "\n";
  }
  write_file(dir + "results.csv", res);

  // aggregates.csv: one row per (attack, mode, tau) over error-free rows
  std::string agg =
      "experiment,attack,parameters,mode,tau,count,mean_ba,flagged_rate,evasion_rate,"
      "mean_linf,mean_l2,mean_ssim,mean_queries,mean_iterations,converged_rate,"
      "evasion_ci99_lo,evasion_ci99_hi\n";
  std::vector<std::string> labels;
  for (const ResultRow& r : table.rows)
    if (std::find(labels.begin(), labels.end(), r.attack) == labels.end())
      labels.push_back(r.attack);
  for (const std::string& label : labels) {
    std::vector<const ResultRow*> rows;
    for (const ResultRow& r : table.rows)
      if (r.attack == label && r.error.empty()) rows.push_back(&r);
    if (rows.empty()) continue;
    double mean_ba = 0, mean_linf = 0, mean_l2 = 0, mean_ssim = 0, mean_q = 0, mean_it = 0,
           conv = 0;
    for (const ResultRow* r : rows) {
      mean_ba += r->ba;
      mean_linf += r->linf;
      mean_l2 += r->l2;
      mean_ssim += r->ssim_v;
      mean_q += static_cast<double>(r->queries);
      mean_it += static_cast<double>(r->iterations);
      conv += r->converged ? 1.0 : 0.0;
    }
    const double cnt = static_cast<double>(rows.size());
    mean_ba /= cnt;
    mean_linf /= cnt;
    mean_l2 /= cnt;
    mean_ssim /= cnt;
    mean_q /= cnt;
    mean_it /= cnt;
    conv /= cnt;
    for (int mode = 0; mode < 2; ++mode) {
      for (std::size_t ti = 0; ti < table.tau_grid.size(); ++ti) {
        long long hits = 0;
        for (const ResultRow* r : rows)
          hits += (mode == 0 ? r->verdict_single[ti] : r->verdict_double[ti]);
        const double flagged_rate = static_cast<double>(hits) / cnt;
        const double evasion = 1.0 - flagged_rate;
        auto [lo, hi] = binom_band99(rows.size(), evasion);
        agg += table.experiment_id + "," + label + "," + rows[0]->parameters + "," +
               (mode == 0 ? "single" : "double") + "," + num(table.tau_grid[ti]) + "," +
               std::to_string(rows.size()) + "," + num(mean_ba) + "," + num(flagged_rate) + "," +
               num(evasion) + "," + num(mean_linf) + "," + num(mean_l2) + "," + num(mean_ssim) +
               "," + num(mean_q) + "," + num(mean_it) + "," + num(conv) + "," +
               num(static_cast<double>(lo) / cnt) + "," + num(static_cast<double>(hi) / cnt) + "\n";
      }
    }
  }
  write_file(dir + "aggregates.csv", agg);

  // theory.csv: exact FPR curves and evasion lower bounds per tau
  std::string theo =
      "tau,n,epsilon,fpr_single,fpr_double,bound_random_single,bound_random_double,"
      "bound_surrogate_single,beta_single,gamma_single,bound_surrogate_double,beta_double,"
      "gamma_double\n";
  for (double tau : table.tau_grid) {
    theo += num(tau) + "," + std::to_string(table.n) + "," + num(table.epsilon) + "," +
            num(fpr_single(tau, table.n)) + "," + num(fpr_double(tau, table.n)) + "," +
            num(evasion_bound_single(table.n, table.epsilon, tau)) + "," +
            num(evasion_bound_double(table.n, table.epsilon, tau));
    if (table.surrogate_bounds) {
      for (int mode = 0; mode < 2; ++mode) {
        double best = -1.0, best_beta = 0.0, best_gamma = 0.0;
        for (std::size_t bi = 0; bi < table.beta_grid.size(); ++bi) {
          const double b = surrogate_bound(
              mode == 0 ? DetectorMode::single_tail : DetectorMode::double_tail, table.n,
              table.epsilon, tau, table.beta_grid[bi], table.gamma_at_beta[bi]);
          if (b > best) {
            best = b;
            best_beta = table.beta_grid[bi];
            best_gamma = table.gamma_at_beta[bi];
          }
        }
        theo += "," + num(best) + "," + num(best_beta) + "," + num(best_gamma);
      }
    } else {
      theo += ",,,,,,";
    }
    theo += "\n";
  }
  write_file(dir + "theory.csv", theo);

  // wall-clock sidecar; not a CSV so reruns stay byte-identical on the CSVs
  std::string tim = "image\tattack\twall_ms\n";
  for (const ResultRow& r : table.rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_ms);
    tim += r.image_id + "\t" + r.attack + "\t" + buf + "\n";
  }
  write_file(dir + "timings.txt", tim);

  bool any_qlog = false;
  for (const ResultRow& r : table.rows)
    if (!r.qlog.empty()) any_qlog = true;
  if (any_qlog) {
    std::string ql = "image,attack,query,verdict,phase\n";
    for (const ResultRow& r : table.rows)
      for (const QueryRecord& q : r.qlog)
        ql += r.image_id + "," + r.attack + "," + std::to_string(q.index) + "," +
              (q.ai_generated ? "ai-generated" : "non-ai-generated") + "," +
              query_phase_name(q.phase) + "\n";
    write_file(dir + "query_log.csv", ql);
  }
}

}  // namespace wmkit
