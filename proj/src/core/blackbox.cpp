#include "core/blackbox.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/postprocess.hpp"

namespace wmkit {

namespace {

bool ask(DetectorOracle& oracle, const Image& img, QueryPhase phase,
         std::vector<QueryRecord>* log) {
  bool v = oracle.query(img);
  if (log) log->push_back({oracle.query_count(), v, phase});
  return v;
}

Image blend(const Image& a, const Image& b, double lam) {
  // (1-lam)*a + lam*b; convex combination of valid images stays in range
  Image out(a.h, a.w);
  for (std::size_t i = 0; i < out.px.size(); ++i) out.px[i] = (1.0 - lam) * a.px[i] + lam * b.px[i];
  return out;
}

double candidate_norm(const Image& cand, const Image& I_w, const BlackBoxConfig& cfg) {
  Perturbation d = diff(cand, I_w);
  return cfg.use_l2 ? l2_norm(d) : linf_norm(d);
}

}  // namespace

const char* query_phase_name(QueryPhase p) {
  switch (p) {
    case QueryPhase::init: return "init";
    case QueryPhase::bisect: return "bisect";
    case QueryPhase::probe: return "probe";
    case QueryPhase::step: return "step";
  }
  return "?";
}

InitResult random_blend_init(DetectorOracle& oracle, const Image& I_w, Rng& rng,
                             std::vector<QueryRecord>* log, std::uint64_t allowance) {
  InitResult res;
  for (int draw = 0; draw < 16; ++draw) {
    Image noise(I_w.h, I_w.w);
    for (double& v : noise.px) v = rng.uniform();
    for (int j = 1; j <= 16; ++j) {
      if (res.queries >= allowance)
        fail(Err::budget, "query budget exhausted before an accepted initialization");
      Image cand = blend(I_w, noise, j / 16.0);
      ++res.queries;
      if (!ask(oracle, cand, QueryPhase::init, log)) {
        res.candidate = std::move(cand);
        return res;
      }
    }
  }
  fail(Err::init_failure, "initialization failed: oracle rejected all 256 blend candidates");
}

InitResult jpeg_init(DetectorOracle& oracle, const Image& I_w, Rng& rng,
                     std::vector<QueryRecord>* log, std::uint64_t allowance) {
  static constexpr int kQualities[7] = {99, 90, 70, 50, 30, 10, 1};
  InitResult res;
  for (int q : kQualities) {
    if (res.queries >= allowance)
      fail(Err::budget, "query budget exhausted before an accepted initialization");
    Image cand = jpeg_roundtrip(I_w, q);
    ++res.queries;
    if (!ask(oracle, cand, QueryPhase::init, log)) {
      res.candidate = std::move(cand);
      return res;
    }
  }
  InitResult fallback = random_blend_init(oracle, I_w, rng, log, allowance - res.queries);
  fallback.queries += res.queries;
  return fallback;
}

StepResult hopskipjump_step(DetectorOracle& oracle, const Image& current, const Image& I_w, int t,
                            const BlackBoxConfig& cfg, Rng& rng, std::vector<QueryRecord>* log,
                            std::uint64_t allowance) {
  const std::uint64_t start = oracle.query_count();
  StepResult res;
  res.next = current;
  res.nearest = current;
  auto spent = [&] { return oracle.query_count() - start; };
  auto exhausted = [&] { return spent() >= allowance; };

  // (a) walk the blend parameter down to the decision boundary; the non-AI
  // endpoint of the final interval is the new base point
  double lo = 0.0;  // I_w side, AI-generated
  double hi = 1.0;  // current side, non-AI-generated
  while (hi - lo > cfg.bisect_tol) {
    if (exhausted()) {
      res.queries = spent();
      res.truncated = true;
      return res;
    }
    const double mid = 0.5 * (lo + hi);
    if (ask(oracle, blend(I_w, current, mid), QueryPhase::bisect, log))
      lo = mid;
    else
      hi = mid;
  }
  Image base = hi < 1.0 ? blend(I_w, current, hi) : current;
  res.next = base;
  res.nearest = base;  // accepted: the bisection only moves hi onto non-AI points

  Perturbation to_image = diff(base, I_w);
  const double dist = l2_norm(to_image);
  if (dist == 0.0) {
    res.queries = spent();
    return res;
  }
  const auto dims = static_cast<double>(base.px.size());

  // (b) boundary-normal estimate from labeled probes around the base point.
  // sum_labeled - mean(label)*sum_u realizes the baseline-subtracted average
  // of label_i * u_i without keeping the probe directions around.
  const int probes = static_cast<int>(std::ceil(cfg.b0 * std::sqrt(static_cast<double>(t))));
  const double radius = dist / dims;
  Image sum_u(base.h, base.w);
  Image sum_labeled(base.h, base.w);
  double label_sum = 0.0;
  for (int i = 0; i < probes; ++i) {
    if (exhausted()) {
      res.queries = spent();
      res.truncated = true;
      return res;
    }
    Image u(base.h, base.w);
    for (double& x : u.px) x = rng.normal();
    const double norm = l2_norm(u);
    Image probe_pt(base.h, base.w);
    for (std::size_t j = 0; j < u.px.size(); ++j) {
      u.px[j] /= norm;
      probe_pt.px[j] = base.px[j] + radius * u.px[j];
    }
    clamp01(probe_pt);
    const double label = ask(oracle, probe_pt, QueryPhase::probe, log) ? -1.0 : 1.0;
    label_sum += label;
    for (std::size_t j = 0; j < u.px.size(); ++j) {
      sum_u.px[j] += u.px[j];
      sum_labeled.px[j] += label * u.px[j];
    }
  }
  Image v(base.h, base.w);
  if (label_sum == probes || label_sum == -probes) {
    // all probes agree: fall back to the mean direction, signed toward non-AI
    const double sgn = label_sum > 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < v.px.size(); ++j) v.px[j] = sgn * sum_u.px[j];
  } else {
    const double mean = label_sum / probes;
    for (std::size_t j = 0; j < v.px.size(); ++j)
      v.px[j] = sum_labeled.px[j] - mean * sum_u.px[j];
  }
  const double vnorm = l2_norm(v);
  if (vnorm == 0.0) {
    res.queries = spent();
    return res;
  }
  for (double& x : v.px) x /= vnorm;

  // (c) largest accepted step along the estimated direction, geometric search
  double xi = dist / std::sqrt(static_cast<double>(t));
  for (int halvings = 0; halvings < 64; ++halvings) {
    if (exhausted()) {
      res.queries = spent();
      res.truncated = true;
      return res;
    }
    Image cand(base.h, base.w);
    for (std::size_t j = 0; j < cand.px.size(); ++j) cand.px[j] = base.px[j] + xi * v.px[j];
    clamp01(cand);
    if (!ask(oracle, cand, QueryPhase::step, log)) {
      if (candidate_norm(cand, I_w, cfg) < candidate_norm(res.nearest, I_w, cfg))
        res.nearest = cand;
      res.next = std::move(cand);
      break;
    }
    xi *= cfg.step_shrink;
  }
  res.queries = spent();
  return res;
}

AttackResult query_attack(DetectorOracle& oracle, const Image& I_w, const BlackBoxConfig& cfg,
                          std::vector<QueryRecord>* log) {
  if (cfg.max_q < 1 || cfg.es < 1) fail(Err::invalid_argument, "query_attack: max_q, es >= 1");
  Rng rng(derive_seed(cfg.seed, {0x71747261636bULL}));

  AttackResult res;
  std::uint64_t q = 1;
  if (!ask(oracle, I_w, QueryPhase::init, log)) {
    // already labeled non-AI-generated: nothing to do
    res.adversarial = I_w;
    res.delta = Perturbation(I_w.h, I_w.w);
    res.ssim = 1.0;
    res.constraint_satisfied = true;
    res.queries_used = q;
    return res;
  }

  InitResult init = cfg.jpeg_initialization
                        ? jpeg_init(oracle, I_w, rng, log, cfg.max_q - q)
                        : random_blend_init(oracle, I_w, rng, log, cfg.max_q - q);
  q += init.queries;

  Image current = std::move(init.candidate);
  Image best = current;
  double best_norm = candidate_norm(best, I_w, cfg);

  int es = 0;
  int t = 0;
  while (q < cfg.max_q && (!cfg.early_stop || es < cfg.es)) {
    ++t;
    StepResult step = hopskipjump_step(oracle, current, I_w, t, cfg, rng, log, cfg.max_q - q);
    q += step.queries;
    current = std::move(step.next);
    const double norm = candidate_norm(step.nearest, I_w, cfg);
    if (norm < best_norm) {
      best_norm = norm;
      best = std::move(step.nearest);
      es = 0;
    } else {
      ++es;
    }
    if (step.truncated) break;  // remaining budget ran out inside the step
  }

  res.adversarial = std::move(best);
  res.delta = diff(res.adversarial, I_w);
  res.linf = linf_norm(res.delta);
  res.l2 = l2_norm(res.delta);
  res.ssim = ssim_or_nan(I_w, res.adversarial);
  res.constraint_satisfied = true;
  res.queries_used = q;
  return res;
}

AttackResult surrogate_attack(const Codec& surrogate, const Image& I_w,
                              const WhiteBoxConfig& cfg) {
  return whitebox_attack(surrogate, I_w, WhiteBoxVariant::random_target, cfg);
}

}  // namespace wmkit
