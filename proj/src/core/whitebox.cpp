#include "core/whitebox.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

namespace wmkit {

WhiteBoxVariant whitebox_variant_from_string(const std::string& s) {
  if (s == "whitebox-flip" || s == "flip") return WhiteBoxVariant::flip_all;
  if (s == "whitebox-random" || s == "random") return WhiteBoxVariant::random_target;
  fail(Err::invalid_argument, "unknown white-box variant: " + s);
}

std::string whitebox_variant_name(WhiteBoxVariant v) {
  return v == WhiteBoxVariant::flip_all ? "whitebox-flip" : "whitebox-random";
}

double effective_alpha(const Codec& codec, const WhiteBoxConfig& cfg) {
  if (cfg.alpha > 0.0) return cfg.alpha;
  return codec.kind() == "dwt-dct-qim" ? 0.5 : 0.05;
}

bool whitebox_constraint(WhiteBoxVariant variant, const Watermark& decoded, const Watermark& w_t,
                         double epsilon) {
  if (variant == WhiteBoxVariant::flip_all) return decoded == w_t;
  return bitwise_accuracy(decoded, w_t) + 1e-12 >= 1.0 - epsilon;
}

PgdOutcome find_perturbation(const Codec& codec, const Image& I_w, const Watermark& w_t, double r,
                             const WhiteBoxConfig& cfg, WhiteBoxVariant variant) {
  if (r < 0.0) fail(Err::invalid_argument, "find_perturbation: r < 0");
  if (cfg.max_iter < 1) fail(Err::invalid_argument, "find_perturbation: max_iter < 1");
  const double alpha = effective_alpha(codec, cfg);

  PgdOutcome out;
  out.delta = Perturbation(I_w.h, I_w.w);

  Image current = I_w;  // clamp(I_w + delta), maintained incrementally
  for (int k = 0; k < cfg.max_iter; ++k) {
    if (whitebox_constraint(variant, decode(codec, current), w_t, cfg.epsilon)) {
      out.satisfied = true;
      return out;
    }
    auto [value, grad] = grad_loss(codec, current, w_t, cfg.loss);
    (void)value;
    for (std::size_t i = 0; i < out.delta.px.size(); ++i) out.delta.px[i] -= alpha * grad.px[i];
    out.delta = project_linf(std::move(out.delta), r);
    current = apply(I_w, out.delta);
    ++out.iterations;
  }
  out.satisfied = whitebox_constraint(variant, decode(codec, current), w_t, cfg.epsilon);
  return out;
}

AttackResult whitebox_attack(const Codec& codec, const Image& I_w, WhiteBoxVariant variant,
                             const WhiteBoxConfig& cfg) {
  if (cfg.r_tol <= 0.0 || cfg.r_tol >= cfg.r_init)
    fail(Err::invalid_argument, "whitebox_attack: need 0 < r_tol < r_init");

  Watermark w_t;
  if (variant == WhiteBoxVariant::flip_all) {
    w_t = flip(decode(codec, I_w));
  } else {
    Rng rng(cfg.seed);
    w_t = random_watermark(codec.n(), rng);
  }

  AttackResult res;
  res.delta = Perturbation(I_w.h, I_w.w);

  double r_a = 0.0;
  double r_b = cfg.r_init;
  while (r_b - r_a > cfg.r_tol) {
    const double r = 0.5 * (r_a + r_b);
    PgdOutcome probe = find_perturbation(codec, I_w, w_t, r, cfg, variant);
    res.iterations_used += probe.iterations;
    if (probe.satisfied) {
      r_b = r;
      res.delta = std::move(probe.delta);
      res.constraint_satisfied = true;
    } else {
      r_a = r;
    }
  }
  res.r_final = r_b;

  res.adversarial = apply(I_w, res.delta);
  res.linf = linf_norm(res.delta);
  res.l2 = l2_norm(res.delta);
  res.ssim = ssim_or_nan(I_w, res.adversarial);
  res.soft = codec.decode_soft(res.adversarial);
  res.decoded = decode_bits(res.soft);
  return res;
}

}  // namespace wmkit
