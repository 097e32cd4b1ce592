#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "core/detector.hpp"
#include "core/rng.hpp"
#include "core/whitebox.hpp"

namespace wmkit {

// Hard-label detector API: the attacker sees only the binary verdict.
// query() increments the monotone counter by exactly 1 per call.
class DetectorOracle {
 public:
  virtual ~DetectorOracle() = default;

  bool query(const Image& img) {
    ++count_;
    return classify(img);
  }
  std::uint64_t query_count() const { return count_; }

 private:
  virtual bool classify(const Image& img) const = 0;  // true = AI-generated
  std::uint64_t count_ = 0;
};

// Oracle over a concrete watermark detector.
class CodecOracle final : public DetectorOracle {
 public:
  explicit CodecOracle(Detector det) : det_(std::move(det)) {}

 private:
  bool classify(const Image& img) const override { return detect(det_, img).ai_generated; }
  Detector det_;
};

enum class QueryPhase { init, bisect, probe, step };
const char* query_phase_name(QueryPhase p);

struct QueryRecord {
  std::uint64_t index = 0;  // oracle count after the query
  bool ai_generated = false;
  QueryPhase phase = QueryPhase::init;
};

struct BlackBoxConfig {
  std::uint64_t max_q = 2000;  // hard query cap; the final step truncates to fit
  int es = 5;                  // early-stop threshold (consecutive non-improving steps)
  int b0 = 20;                 // probe count base; iteration t uses ceil(b0*sqrt(t))
  double bisect_tol = 1e-3;    // boundary search tolerance in the blend parameter
  double step_shrink = 0.5;    // geometric step-size search factor
  std::uint64_t seed = 0;
  bool use_l2 = false;             // compare candidates by l2 instead of L-inf
  bool jpeg_initialization = true;  // false: plain random-blend init
  bool early_stop = true;           // false: run to the query budget
};

struct InitResult {
  Image candidate;
  std::uint64_t queries = 0;
};

struct StepResult {
  Image next;     // iterate the walk continues from
  Image nearest;  // closest accepted iterate this step saw (base point or step candidate)
  std::uint64_t queries = 0;
  bool truncated = false;  // allowance ran out mid-step; next = best iterate so far
};

constexpr std::uint64_t kNoAllowance = std::numeric_limits<std::uint64_t>::max();

// Blend I_w with fresh uniform noise, raising the noise weight over a 16-point
// grid and redrawing up to 16 times, until the oracle accepts a candidate.
// Throws Err::init_failure after 256 rejected attempts, Err::budget if the
// allowance runs out first.
InitResult random_blend_init(DetectorOracle& oracle, const Image& I_w, Rng& rng,
                             std::vector<QueryRecord>* log = nullptr,
                             std::uint64_t allowance = kNoAllowance);

// First quality in {99,90,70,50,30,10,1} whose JPEG round trip the oracle
// labels non-AI-generated; falls back to random_blend_init when all seven are
// rejected.
InitResult jpeg_init(DetectorOracle& oracle, const Image& I_w, Rng& rng,
                     std::vector<QueryRecord>* log = nullptr,
                     std::uint64_t allowance = kNoAllowance);

// One boundary-walk iteration from a non-AI-generated iterate: bisect the
// segment to I_w down to the decision boundary, estimate the boundary normal
// from labeled random probes, then take the largest accepted geometric step.
// t is the 1-based iteration number. Spends at most `allowance` queries; on
// exhaustion returns the best non-AI iterate reached, flagged truncated.
// nearest always holds the closest accepted point the step visited, so a
// caller tracking it sees distances that only improve with more budget.
StepResult hopskipjump_step(DetectorOracle& oracle, const Image& current, const Image& I_w, int t,
                            const BlackBoxConfig& cfg, Rng& rng,
                            std::vector<QueryRecord>* log = nullptr,
                            std::uint64_t allowance = kNoAllowance);

// Hard-label query attack: verify the input is detected (1 query), initialize
// via JPEG qualities, then iterate hopskipjump_step keeping the candidate
// closest to I_w, stopping after es consecutive non-improving iterations or
// when the budget runs out (queries_used <= max_q always; the last step is
// truncated to the remaining allowance). The returned image is the accepted
// candidate object itself, so the oracle's verdict on it is non-AI-generated
// by construction.
AttackResult query_attack(DetectorOracle& oracle, const Image& I_w, const BlackBoxConfig& cfg,
                          std::vector<QueryRecord>* log = nullptr);

// Transfer attack: run the random-target white-box attack against a surrogate
// codec; the output is detector-agnostic.
AttackResult surrogate_attack(const Codec& surrogate, const Image& I_w, const WhiteBoxConfig& cfg);

}  // namespace wmkit
