#pragma once

#include <cstdint>
#include <string>

#include "core/codec.hpp"
#include "core/losses.hpp"

namespace wmkit {

// Which constraint the gradient attack drives toward.
//   flip_all:      every decoded bit equals the flipped decoding of the input
//                  (exact equality required).
//   random_target: decoded bits match a uniformly random target watermark with
//                  BA >= 1 - epsilon.
enum class WhiteBoxVariant { flip_all, random_target };

WhiteBoxVariant whitebox_variant_from_string(const std::string& s);
std::string whitebox_variant_name(WhiteBoxVariant v);

struct WhiteBoxConfig {
  int max_iter = 5000;
  double alpha = 0.0;  // learning rate; 0 selects the per-codec default
                       // (0.05 spread-spectrum, 0.5 dwt-dct-qim)
  double epsilon = 0.01;
  LossKind loss = LossKind::l2;
  double r_init = 2.0;
  double r_tol = 0.001;
  std::uint64_t seed = 0;  // draws w_t for random_target
};

struct AttackResult {
  Image adversarial;
  Perturbation delta;
  double linf = 0.0;
  double l2 = 0.0;
  double ssim = 1.0;
  SoftBits soft;        // decoder output on the adversarial image
  Watermark decoded;    // thresholded soft bits
  bool constraint_satisfied = false;
  long long iterations_used = 0;  // total gradient steps across the search
  double r_final = 0.0;           // smallest accepted bound (r_init if none)
  std::uint64_t queries_used = 0; // query attack only
};

double effective_alpha(const Codec& codec, const WhiteBoxConfig& cfg);

bool whitebox_constraint(WhiteBoxVariant variant, const Watermark& decoded, const Watermark& w_t,
                         double epsilon);

struct PgdOutcome {
  Perturbation delta;
  bool satisfied = false;
  int iterations = 0;  // gradient steps taken
};

// Projected gradient descent on l(D(I_w + delta), w_t) under the L-inf bound r.
// delta stays unclamped; the decoded image is clamp(I_w + delta). Returns as
// soon as the variant's constraint holds (checked at delta = 0 and after every
// projected step); otherwise returns the last iterate unsatisfied.
PgdOutcome find_perturbation(const Codec& codec, const Image& I_w, const Watermark& w_t, double r,
                             const WhiteBoxConfig& cfg, WhiteBoxVariant variant);

// Binary search for the smallest perturbation bound whose inner solve meets
// the constraint: shrink [r_a, r_b] from [0, r_init] to width r_tol, keeping
// the last successful delta. No probed bound succeeding leaves delta = 0 and
// constraint_satisfied = false.
AttackResult whitebox_attack(const Codec& codec, const Image& I_w, WhiteBoxVariant variant,
                             const WhiteBoxConfig& cfg);

}  // namespace wmkit
