#pragma once

#include <cstdint>
#include <vector>

#include "core/detector.hpp"
#include "core/postprocess.hpp"

namespace wmkit {

struct TuneResult {
  PostProcessSpec spec;
  double achieved_rate = 0.0;
  double mean_linf = 0.0;
  bool reached = false;  // achieved rate within 0.01 of the target
};

// Least-aggressive parameter of one post-processing method whose evasion rate
// over the given watermarked images is within 0.01 of target_rate. Bisection
// over aggressiveness: Q descends from 99 to 1, noise sigma rises to 1, blur
// sigma rises to 5, contrast a rises from 1 to 5. Evasion must be monotone in
// aggressiveness on this image set; a violated bracket aborts with Err::domain
// instead of returning a wrong spec. An unreachable target returns the most
// aggressive spec with reached = false.
TuneResult tune_to_evasion(PostKind kind, const Detector& det, const std::vector<Image>& images,
                           double target_rate, std::uint64_t seed = 0);

}  // namespace wmkit
