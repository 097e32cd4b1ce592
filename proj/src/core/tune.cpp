#include "core/tune.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

namespace wmkit {

namespace {

// aggressiveness s in [0,1] -> method parameter
double param_at(PostKind kind, double s) {
  switch (kind) {
    case PostKind::jpeg: return std::round(99.0 - 98.0 * s);
    case PostKind::gaussian_noise: return s;
    case PostKind::gaussian_blur: return 5.0 * s;
    case PostKind::brightness_contrast: return 1.0 + 4.0 * s;
  }
  fail(Err::internal, "param_at: bad kind");
}

struct Eval {
  double rate = 0.0;
  double mean_linf = 0.0;
};

Eval evaluate(PostKind kind, double s, const Detector& det, const std::vector<Image>& images,
              std::uint64_t seed) {
  Eval e;
  PostProcessSpec spec{kind, param_at(kind, s), 0};
  for (std::size_t i = 0; i < images.size(); ++i) {
    spec.seed = derive_seed(seed, {0x74756e65ULL, i});
    Image out = apply_postprocess(images[i], spec);
    if (!detect(det, out).ai_generated) e.rate += 1.0;
    e.mean_linf += linf_norm(diff(out, images[i]));
  }
  e.rate /= static_cast<double>(images.size());
  e.mean_linf /= static_cast<double>(images.size());
  return e;
}

}  // namespace

TuneResult tune_to_evasion(PostKind kind, const Detector& det, const std::vector<Image>& images,
                           double target_rate, std::uint64_t seed) {
  if (images.empty()) fail(Err::invalid_argument, "tune_to_evasion: no images");
  if (target_rate < 0.0 || target_rate > 1.0)
    fail(Err::invalid_argument, "tune_to_evasion: target_rate outside [0,1]");
  constexpr double kTol = 0.01;

  auto make_result = [&](double s, const Eval& e) {
    TuneResult r;
    r.spec = {kind, param_at(kind, s), seed};
    r.achieved_rate = e.rate;
    r.mean_linf = e.mean_linf;
    r.reached = std::abs(e.rate - target_rate) <= kTol + 1e-12;
    return r;
  };

  // the least-aggressive end already clears the window floor -> done
  Eval lo_eval = evaluate(kind, 0.0, det, images, seed);
  if (lo_eval.rate >= target_rate - kTol) return make_result(0.0, lo_eval);

  Eval hi_eval = evaluate(kind, 1.0, det, images, seed);
  if (hi_eval.rate < lo_eval.rate - 1e-12)
    fail(Err::domain, std::string("tune_to_evasion: evasion not monotone for ") +
                          post_kind_name(kind));
  if (hi_eval.rate < target_rate - kTol) return make_result(1.0, hi_eval);  // unreachable

  // invariant: rate(lo) < target - tol <= rate(hi)
  double lo = 0.0, hi = 1.0;
  const double resolution = kind == PostKind::jpeg ? 1.0 / 196.0 : 1e-3;
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    Eval mid_eval = evaluate(kind, mid, det, images, seed);
    if (mid_eval.rate < lo_eval.rate - 1e-12 || mid_eval.rate > hi_eval.rate + 1e-12)
      fail(Err::domain, std::string("tune_to_evasion: evasion not monotone for ") +
                            post_kind_name(kind));
    if (mid_eval.rate >= target_rate - kTol) {
      hi = mid;
      hi_eval = mid_eval;
    } else {
      lo = mid;
      lo_eval = mid_eval;
    }
  }
  return make_result(hi, hi_eval);
}

}  // namespace wmkit
