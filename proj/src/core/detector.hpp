#pragma once

#include <string>
#include <vector>

#include "core/binomial.hpp"
#include "core/codec.hpp"
#include "core/metrics.hpp"

namespace wmkit {

DetectorMode mode_from_string(const std::string& s);
std::string mode_name(DetectorMode m);

// Watermark-based detector: decodes an image and compares bitwise accuracy
// against a ground-truth watermark at threshold tau.
struct Detector {
  const Codec* codec = nullptr;
  Watermark groundtruth;
  double tau = 0.0;
  DetectorMode mode = DetectorMode::single_tail;
};

struct Verdict {
  bool ai_generated = false;
  double ba = 0.0;
};

// Verdict from an already-computed bitwise accuracy. Strict inequalities:
// single-tail flags BA > tau; double-tail flags BA > tau or BA < 1 - tau.
inline bool flagged(DetectorMode mode, double tau, double ba) {
  if (mode == DetectorMode::single_tail) return ba > tau;
  return ba > tau || ba < 1.0 - tau;
}

Verdict detect(const Detector& d, const Image& img);

// Fraction of images on which the surrogate's decoding matches the target's
// with bitwise accuracy >= beta (the gamma estimate at similarity level beta).
double estimate_beta_gamma(const Codec& surrogate, const Codec& target,
                           const std::vector<Image>& images, double beta);

}  // namespace wmkit
