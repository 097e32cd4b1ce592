#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/blackbox.hpp"
#include "core/postprocess.hpp"
#include "core/whitebox.hpp"

namespace wmkit {

inline constexpr const char* kVersion = "0.1.0";

// One attack (or baseline post-processing) to evaluate per image. Kinds:
//   whitebox-flip, whitebox-random, surrogate, query,
//   jpeg, gaussian-noise, gaussian-blur, brightness-contrast.
// Rows for the original and the untouched watermarked image are always
// emitted; they are not listed here.
struct AttackSpec {
  std::string kind;
  double parameter = 0.0;  // post-processing parameter
  WhiteBoxConfig wb;       // whitebox-*, surrogate
  BlackBoxConfig bb;       // query
  std::string surrogate_model;             // surrogate: codec file
  double tau_attack = 0.0;                 // query: oracle threshold; 0 = calibrated tau*
  std::string tau_attack_mode = "double";  // query: oracle detector mode
};

struct ExperimentConfig {
  std::string dataset;  // image directory, or "synth[:tag]" for the generator
  std::string codec_model;
  int sample_count = 100;
  double eta = 1e-4;
  std::uint64_t master_seed = 0;
  std::string output_dir = ".";
  std::vector<double> tau_grid;  // empty -> {0.55..0.95 step 0.05, 0.99}; the
                                 // calibrated tau* of each mode is appended
  std::vector<AttackSpec> attacks;
};

// Deterministic manifest serialization (sorted keys, 17-significant-digit
// floats); parses back to an identical config.
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);

// One attack object in the same schema the manifest uses; missing keys take
// the struct defaults.
std::string attack_spec_to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const std::string& text);

struct ResultRow {
  std::string image_id;
  std::string attack;      // kind, "#k" suffix for repeated kinds
  std::string parameters;  // "key=value;..." details
  double ba = 0.0;
  bool converged = true;
  double r_final = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
  double ssim_v = 1.0;
  std::uint64_t queries = 0;
  long long iterations = 0;
  double wall_ms = 0.0;  // emitted to timings.txt, never to the CSVs
  std::string error;
  std::vector<std::uint8_t> verdict_single;  // per resolved tau grid entry
  std::vector<std::uint8_t> verdict_double;
  std::vector<QueryRecord> qlog;  // query attack only
};

struct ExperimentTable {
  std::string experiment_id;  // hash of the manifest
  int n = 0;
  double epsilon = 0.01;           // slack used for the theory curves
  std::vector<double> tau_grid;    // resolved grid, sorted
  double tau_star_single = 0.0;
  double tau_star_double = 0.0;
  std::vector<ResultRow> rows;
  bool surrogate_bounds = false;         // theory.csv carries transfer bounds
  std::vector<double> beta_grid;         // similarity levels probed
  std::vector<double> gamma_at_beta;     // estimated gamma per beta
  bool all_ok = true;
};

// Deterministic seeded sample from a directory of PNG/JPEG files (sorted
// listing, seeded shuffle, first `count`), each bilinearly resized to oh x ow.
// A dataset of "synth" or "synth:<tag>" generates procedural images instead.
std::vector<Image> ingest(const std::string& dataset, int count, std::uint64_t seed, int oh,
                          int ow);

ExperimentTable run_experiment(const ExperimentConfig& cfg);

// Writes results.csv, aggregates.csv, theory.csv, manifest.json, timings.txt,
// and query_log.csv (when a query attack ran) into cfg.output_dir.
void emit_experiment(const ExperimentTable& table, const ExperimentConfig& cfg);

}  // namespace wmkit
