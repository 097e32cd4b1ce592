// Acceptance harness: twelve self-checking criteria, one PASS/FAIL line each,
// exit code = number of failures. Shared fixtures (trained codecs, synthetic
// corpora) build lazily; heavy per-image loops fan out over a thread pool and
// merge by index, so results do not depend on thread count.
#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "core/binomial.hpp"
#include "core/blackbox.hpp"
#include "core/detector.hpp"
#include "core/errors.hpp"
#include "core/experiment.hpp"
#include "core/image.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/model_io.hpp"
#include "core/postprocess.hpp"
#include "core/qim_codec.hpp"
#include "core/rng.hpp"
#include "core/spread_codec.hpp"
#include "core/synth.hpp"
#include "core/train.hpp"
#include "core/tune.hpp"
#include "core/whitebox.hpp"

namespace {

using namespace wmkit;
namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 0x57a9ce5eedf00dULL;  // harness master seed
constexpr std::uint64_t kQimKey = 0x9a3c51d2b44e7f01ULL;
constexpr std::uint64_t kQimSurKey = 0x1f6e0b8c93d5a276ULL;

double now_s() {
  using clk = std::chrono::steady_clock;
  return std::chrono::duration<double>(clk::now().time_since_epoch()).count();
}

std::string num(double v, int prec = 4) {
  char b[64];
  std::snprintf(b, sizeof(b), "%.*g", prec, v);
  return b;
}

void note(const std::string& msg) {
  std::printf("# %s\n", msg.c_str());
  std::fflush(stdout);
}

// index-sharded worker pool; exceptions propagate to the caller
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nt = std::min(hw, count);
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!first) first = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

// resolved default threshold grid for one codec size (incl. both calibrated taus)
std::vector<double> default_grid(int n, double eta = 1e-4) {
  std::vector<double> g;
  for (int k = 0; k <= 8; ++k) g.push_back(0.55 + 0.05 * k);
  g.push_back(0.99);
  g.push_back(calibrate_tau(n, eta, DetectorMode::single_tail));
  g.push_back(calibrate_tau(n, eta, DetectorMode::double_tail));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Fixtures {
  double train_secs = 0.0;  // charged to the hardening criterion's budget

  const std::vector<Image>& test128() {
    if (!test128_) test128_ = synth_dataset(100, 128, 128, derive_seed(kSeed, {0x7431}));
    return *test128_;
  }
  const std::vector<Image>& test256() {
    if (!test256_) test256_ = synth_dataset(100, 256, 256, derive_seed(kSeed, {0x7432}));
    return *test256_;
  }
  const SpreadSpectrumCodec& spread_std() {
    build_spread(spread_std_, 2024, false, "standard");
    return *spread_std_;
  }
  const SpreadSpectrumCodec& spread_adv() {
    build_spread(spread_adv_, 2024, true, "adversarial");
    return *spread_adv_;
  }
  const SpreadSpectrumCodec& spread_sur() {
    build_spread(spread_sur_, 4242, false, "surrogate");
    return *spread_sur_;
  }
  const DwtDctQimCodec& qim() {
    build_qim();
    return *qim_;
  }
  const DwtDctQimCodec& qim_sur() {
    build_qim();
    return *qim_sur_;
  }
  double qim_delta() {
    build_qim();
    return qim_delta_;
  }

 private:
  const std::vector<Image>& train_corpus() {
    if (!train_) {
      const double t0 = now_s();
      train_ = synth_dataset(600, 128, 128, derive_seed(kSeed, {0x7472}));
      note("fixture: 600 synthetic 128x128 training images (" + num(now_s() - t0, 3) + "s)");
    }
    return *train_;
  }

  void build_spread(std::optional<SpreadSpectrumCodec>& slot, std::uint64_t seed, bool adversarial,
                    const char* label) {
    if (slot) return;
    TrainConfig cfg;
    cfg.n = 30;
    cfg.seed = seed;
    cfg.adversarial = adversarial;
    const double t0 = now_s();
    slot = train(train_corpus(), cfg);
    const double dt = now_s() - t0;
    train_secs += dt;
    Rng rng(derive_seed(kSeed, {0x6261, seed}));
    const Image& probe = test128()[0];
    Watermark w = random_watermark(30, rng);
    const double ba = bitwise_accuracy(decode(*slot, slot->embed(probe, w)), w);
    note(std::string("fixture: ") + label + " n=30 codec trained (" + num(dt, 3) +
         "s, spot round-trip ba " + num(ba) + ")");
  }

  void build_qim() {
    if (qim_) return;
    const double t0 = now_s();
    std::vector<Image> cal = synth_dataset(12, 256, 256, derive_seed(kSeed, {0x6361}));
    qim_delta_ = calibrate_qim_delta(cal, 256, kQimKey, derive_seed(kSeed, {0x6362}));
    qim_.emplace(256, qim_delta_, kQimKey);
    qim_sur_.emplace(256, qim_delta_, kQimSurKey);
    note("fixture: n=256 qim codec, calibrated delta " + num(qim_delta_) + " (" +
         num(now_s() - t0, 3) + "s)");
  }

  std::optional<std::vector<Image>> train_, test128_, test256_;
  std::optional<SpreadSpectrumCodec> spread_std_, spread_adv_, spread_sur_;
  std::optional<DwtDctQimCodec> qim_, qim_sur_;
  double qim_delta_ = 0.0;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- criterion 1
// threshold calibration matches the published operating points within one
// grid step of 1/n
Outcome ac1(Fixtures&) {
  struct Case {
    int n;
    DetectorMode mode;
    double published;
  };
  const Case cases[] = {
      {256, DetectorMode::single_tail, 0.613},
      {256, DetectorMode::double_tail, 0.621},
      {136, DetectorMode::double_tail, 0.66},
  };
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const double tau = calibrate_tau(c.n, 1e-4, c.mode);
    const long long k = std::llround(tau * c.n);
    const long long k_pub = std::llround(c.published * c.n);
    const long long steps = std::llabs(k - k_pub);
    ok = ok && steps <= 1;
    if (!detail.empty()) detail += ", ";
    detail += num(c.published, 3) + "/" + mode_name(c.mode) + "/n=" + std::to_string(c.n) +
              " -> " + std::to_string(k) + "/" + std::to_string(c.n) + " (" +
              std::to_string(steps) + " step" + (steps == 1 ? "" : "s") + ")";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 2
// exact binomial CDF against brute-force enumeration of all 2^n outcomes
Outcome ac2(Fixtures&) {
  for (int n = 1; n <= 20; ++n) {
    std::vector<long long> count(n + 1, 0);
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) ++count[std::popcount(mask)];
    long long prefix = 0;
    for (int t = -1; t <= n + 1; ++t) {
      if (t >= 0 && t <= n) prefix += count[t];
      // prefix/2^n is exactly representable, so the comparison is exact
      const double want = std::ldexp(static_cast<double>(prefix), -n);
      if (binom_cdf(t, n) != want)
        return {false, "binom_cdf(" + std::to_string(t) + "," + std::to_string(n) +
                           ") != " + num(want, 17)};
    }
    long long suffix = static_cast<long long>(total);
    for (int k = 0; k <= n + 1; ++k) {
      if (k >= 1) suffix -= count[k - 1];
      const double want = std::ldexp(static_cast<double>(suffix), -n);
      if (binom_tail_ge(k, n) != want)
        return {false, "binom_tail_ge(" + std::to_string(k) + "," + std::to_string(n) +
                           ") != " + num(want, 17)};
    }
  }
  return {true, "all CDF and tail values exact for n=1..20 (2^21 outcomes enumerated)"};
}

// ---------------------------------------------------------------- criterion 3
// empirical FPR of random-groundtruth detection inside the 99% binomial band
// around the closed-form rates, checked at every threshold grid point and
// mode. The band is simultaneous across the whole family of checks (exact
// binomial quantiles at tail 0.005/K per side), so the 99% coverage applies
// to the criterion as a whole; per-point 99% intervals repeated K times would
// fail a correct implementation with probability ~1-0.99^K ~ 37%, while a
// wrong closed-form rate still misses this band by hundreds of sigma.
Outcome ac3(Fixtures& fx) {
  struct Setup {
    const Codec* codec;
    const std::vector<Image>* imgs;
    std::uint64_t tag;
  };
  const Setup setups[] = {
      {&fx.spread_std(), &fx.test128(), 0x33a},
      {&fx.qim(), &fx.test256(), 0x33b},
  };
  constexpr int kDraws = 1000;
  std::size_t family = 0;
  for (const Setup& s : setups) family += 2 * default_grid(s.codec->n()).size();
  const double tail = 0.005 / static_cast<double>(family);
  bool ok = true;
  std::string detail;
  for (const Setup& s : setups) {
    const int n = s.codec->n();
    const std::vector<double> grid = default_grid(n);
    const std::size_t m = s.imgs->size();
    // per-image tallies, merged by index
    std::vector<std::vector<long long>> sing(m), dbl(m);
    parallel_for(m, [&](std::size_t i) {
      const Watermark dec = decode(*s.codec, (*s.imgs)[i]);
      std::vector<long long> cs(grid.size(), 0), cd(grid.size(), 0);
      for (int j = 0; j < kDraws; ++j) {
        Rng rng(derive_seed(kSeed, {s.tag, i, static_cast<std::uint64_t>(j)}));
        const Watermark w = random_watermark(n, rng);
        const double ba = bitwise_accuracy(dec, w);
        for (std::size_t g = 0; g < grid.size(); ++g) {
          if (flagged(DetectorMode::single_tail, grid[g], ba)) ++cs[g];
          if (flagged(DetectorMode::double_tail, grid[g], ba)) ++cd[g];
        }
      }
      sing[i] = std::move(cs);
      dbl[i] = std::move(cd);
    });
    const long long trials = static_cast<long long>(m) * kDraws;
    int misses = 0;
    double worst = 0.0;
    std::string worst_at;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (int mode = 0; mode < 2; ++mode) {
        long long cnt = 0;
        for (std::size_t i = 0; i < m; ++i) cnt += mode == 0 ? sing[i][g] : dbl[i][g];
        const double p = mode == 0 ? fpr_single(grid[g], n) : fpr_double(grid[g], n);
        const auto [lo, hi] = binom_band(trials, p, tail);
        if (cnt < lo || cnt > hi) {
          ++misses;
          ok = false;
        }
        const double mu = p * static_cast<double>(trials);
        const double sd = std::sqrt(mu * (1.0 - p));
        const double z = sd > 0.0 ? std::abs(static_cast<double>(cnt) - mu) / sd : 0.0;
        if (z > worst) {
          worst = z;
          worst_at = "n=" + std::to_string(n) + " tau=" + num(grid[g]) +
                     (mode == 0 ? " single" : " double") + " count=" + std::to_string(cnt) +
                     " expected=" + num(mu) + " z=" + num(z, 3);
        }
      }
    }
    if (!detail.empty()) detail += "; ";
    detail += "n=" + std::to_string(n) + ": " + std::to_string(2 * grid.size()) +
              " checks vs simultaneous 99% band (K=" + std::to_string(family) +
              "), " + std::to_string(misses) + " outside";
    if (!worst_at.empty()) detail += " (worst: " + worst_at + ")";
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 4
// bit-flip attack: single-tail evasion 1.0 and double-tail evasion 0.0 over
// converged runs, convergence rate >= 0.95
Outcome ac4(Fixtures& fx) {
  const SpreadSpectrumCodec& codec = fx.spread_std();
  const std::vector<Image>& imgs = fx.test128();
  const int n = codec.n();
  const double tau_s = calibrate_tau(n, 1e-4, DetectorMode::single_tail);
  const double tau_d = calibrate_tau(n, 1e-4, DetectorMode::double_tail);
  const std::size_t m = imgs.size();
  std::vector<std::uint8_t> conv(m, 0);
  std::vector<double> ba_adv(m, 0.0);
  parallel_for(m, [&](std::size_t i) {
    Rng rng(derive_seed(kSeed, {0x34, i}));
    const Watermark w = random_watermark(n, rng);
    const Image I_w = codec.embed(imgs[i], w);
    WhiteBoxConfig cfg;
    cfg.loss = LossKind::cross_entropy;
    const AttackResult res = whitebox_attack(codec, I_w, WhiteBoxVariant::flip_all, cfg);
    conv[i] = res.constraint_satisfied ? 1 : 0;
    ba_adv[i] = bitwise_accuracy(decode(codec, res.adversarial), w);
  });
  std::size_t nconv = 0, evade_s = 0, evade_d = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!conv[i]) continue;
    ++nconv;
    if (!flagged(DetectorMode::single_tail, tau_s, ba_adv[i])) ++evade_s;
    if (!flagged(DetectorMode::double_tail, tau_d, ba_adv[i])) ++evade_d;
  }
  const double conv_rate = static_cast<double>(nconv) / static_cast<double>(m);
  const bool ok = nconv > 0 && evade_s == nconv && evade_d == 0 && conv_rate >= 0.95;
  return {ok, "converged " + std::to_string(nconv) + "/" + std::to_string(m) +
                  ", single-tail evasion " + std::to_string(evade_s) + "/" +
                  std::to_string(nconv) + ", double-tail evasion " + std::to_string(evade_d) +
                  "/" + std::to_string(nconv) + " at tau*=" + num(tau_d)};
}

// ---------------------------------------------------------------- criterion 5
// random-target attack (eps=0.01): empirical evasion >= theoretical lower
// bound - 3*sqrt(p(1-p)/100) at tau in {0.6,0.7,0.8,0.9,0.99}, both modes,
// both codecs
Outcome ac5(Fixtures& fx) {
  struct Setup {
    const Codec* codec;
    const std::vector<Image>* imgs;
    std::uint64_t tag;
  };
  const Setup setups[] = {
      {&fx.spread_std(), &fx.test128(), 0x35a},
      {&fx.qim(), &fx.test256(), 0x35b},
  };
  const double taus[] = {0.6, 0.7, 0.8, 0.9, 0.99};
  bool ok = true;
  std::string detail;
  for (const Setup& s : setups) {
    const int n = s.codec->n();
    const std::size_t m = s.imgs->size();
    std::vector<double> ba(m, 0.0);
    std::vector<std::uint8_t> conv(m, 0);
    parallel_for(m, [&](std::size_t i) {
      Rng rng(derive_seed(kSeed, {s.tag, i, 0}));
      const Watermark w = random_watermark(n, rng);
      const Image I_w = s.codec->embed((*s.imgs)[i], w);
      WhiteBoxConfig cfg;
      cfg.loss = LossKind::cross_entropy;
      cfg.seed = derive_seed(kSeed, {s.tag, i, 1});
      const AttackResult res =
          whitebox_attack(*s.codec, I_w, WhiteBoxVariant::random_target, cfg);
      conv[i] = res.constraint_satisfied ? 1 : 0;
      ba[i] = bitwise_accuracy(decode(*s.codec, res.adversarial), w);
    });
    std::size_t nconv = 0;
    for (std::size_t i = 0; i < m; ++i) nconv += conv[i];
    double worst_margin = 1.0;
    std::string worst_at;
    for (double tau : taus) {
      for (int mode = 0; mode < 2; ++mode) {
        const DetectorMode dm = mode == 0 ? DetectorMode::single_tail : DetectorMode::double_tail;
        std::size_t evade = 0;
        for (std::size_t i = 0; i < m; ++i)
          if (!flagged(dm, tau, ba[i])) ++evade;
        const double emp = static_cast<double>(evade) / static_cast<double>(m);
        const double bound = mode == 0 ? evasion_bound_single(n, 0.01, tau)
                                       : evasion_bound_double(n, 0.01, tau);
        const double slack = 3.0 * std::sqrt(bound * (1.0 - bound) / 100.0);
        const double margin = emp - (bound - slack);
        if (margin < worst_margin) {
          worst_margin = margin;
          worst_at = "n=" + std::to_string(n) + " tau=" + num(tau) +
                     (mode == 0 ? " single" : " double") + " emp=" + num(emp) +
                     " bound=" + num(bound, 6);
        }
        if (margin < -1e-12) ok = false;
      }
    }
    if (!detail.empty()) detail += "; ";
    detail += "n=" + std::to_string(n) + ": converged " + std::to_string(nconv) + "/" +
              std::to_string(m) + ", tightest margin " + num(worst_margin) + " at " + worst_at;
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 6
// query attack completeness: evasion exactly 1.0 at tau* with budget 2000,
// and mean best-perturbation L-inf non-increasing across budgets
Outcome ac6(Fixtures& fx) {
  const DwtDctQimCodec& codec = fx.qim();
  const std::vector<Image>& imgs = fx.test256();
  const int n = codec.n();
  const double tau = calibrate_tau(n, 1e-4, DetectorMode::double_tail);
  const std::vector<std::uint64_t> budgets = {30, 100, 300, 1000, 2000};
  const std::size_t m = imgs.size();
  // linf[b][i]; evade/err tracked at the full budget
  std::vector<std::vector<double>> linf(budgets.size(), std::vector<double>(m, 0.0));
  std::vector<std::uint8_t> evade(m, 0);
  std::vector<std::string> errs(m);
  std::atomic<long long> over_budget{0};
  parallel_for(m, [&](std::size_t i) {
    Rng rng(derive_seed(kSeed, {0x36, i, 0}));
    const Watermark w = random_watermark(n, rng);
    const Image I_w = codec.embed(imgs[i], w);
    const Detector det{&codec, w, tau, DetectorMode::double_tail};
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      CodecOracle oracle(det);
      BlackBoxConfig cfg;
      cfg.max_q = budgets[b];
      cfg.seed = derive_seed(kSeed, {0x36, i, 1});
      try {
        const AttackResult res = query_attack(oracle, I_w, cfg);
        linf[b][i] = res.linf;
        if (res.queries_used > budgets[b]) ++over_budget;
        if (b + 1 == budgets.size())
          evade[i] =
              res.constraint_satisfied && !detect(det, res.adversarial).ai_generated ? 1 : 0;
      } catch (const Error& e) {
        linf[b][i] = std::numeric_limits<double>::quiet_NaN();
        if (b + 1 == budgets.size()) errs[i] = e.what();
      }
    }
  });
  std::size_t evaded = 0;
  for (std::size_t i = 0; i < m; ++i) evaded += evade[i];
  std::vector<double> means(budgets.size(), 0.0);
  bool finite = true;
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(linf[b][i])) finite = false;
      means[b] += linf[b][i];
    }
    means[b] /= static_cast<double>(m);
  }
  bool mono = true;
  long long img_violations = 0;
  for (std::size_t b = 1; b < budgets.size(); ++b) {
    if (!(means[b] <= means[b - 1] + 1e-12)) mono = false;
    for (std::size_t i = 0; i < m; ++i)
      if (linf[b][i] > linf[b - 1][i] + 1e-12) ++img_violations;
  }
  const bool ok = evaded == m && finite && mono && over_budget == 0;
  std::string mstr;
  for (std::size_t b = 0; b < budgets.size(); ++b)
    mstr += (b ? "," : "") + num(means[b]);
  return {ok, "evasion " + std::to_string(evaded) + "/" + std::to_string(m) +
                  " at tau*=" + num(tau) + ", mean linf by budget {" + mstr +
                  "}, per-image monotonicity violations " + std::to_string(img_violations) +
                  ", over-budget runs " + std::to_string(static_cast<long long>(over_budget))};
}

// ---------------------------------------------------------------- criterion 7
// at matched evasion rate, every tuned post-processing baseline costs at least
// as much mean L-inf perturbation as the random-target attack
Outcome ac7(Fixtures& fx) {
  struct Setup {
    const Codec* codec;
    const std::vector<Image>* imgs;
    std::uint64_t tag;
    double extra_tau;  // tested alongside the calibrated tau*
  };
  const Setup setups[] = {
      {&fx.spread_std(), &fx.test128(), 0x37a, 0.9},
      {&fx.qim(), &fx.test256(), 0x37b, 0.7},
  };
  const PostKind kinds[] = {PostKind::jpeg, PostKind::gaussian_noise, PostKind::gaussian_blur,
                            PostKind::brightness_contrast};
  bool ok = true;
  std::string detail;
  for (const Setup& s : setups) {
    const int n = s.codec->n();
    const double tau_star = calibrate_tau(n, 1e-4, DetectorMode::double_tail);
    Rng grng(derive_seed(kSeed, {s.tag, 0}));
    const Watermark gt = random_watermark(n, grng);
    const std::size_t m = s.imgs->size();
    std::vector<Image> wmk(m);
    std::vector<double> att_linf(m, 0.0);
    std::vector<double> att_ba(m, 0.0);
    parallel_for(m, [&](std::size_t i) {
      wmk[i] = s.codec->embed((*s.imgs)[i], gt);
      WhiteBoxConfig cfg;
      cfg.loss = LossKind::cross_entropy;
      cfg.seed = derive_seed(kSeed, {s.tag, i, 1});
      const AttackResult res =
          whitebox_attack(*s.codec, wmk[i], WhiteBoxVariant::random_target, cfg);
      att_linf[i] = res.linf;
      att_ba[i] = bitwise_accuracy(decode(*s.codec, res.adversarial), gt);
    });
    double mean_att = 0.0;
    for (double v : att_linf) mean_att += v;
    mean_att /= static_cast<double>(m);
    for (double tau : {tau_star, s.extra_tau}) {
      std::size_t evade = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (!flagged(DetectorMode::double_tail, tau, att_ba[i])) ++evade;
      const double r_w = static_cast<double>(evade) / static_cast<double>(m);
      const Detector det{s.codec, gt, tau, DetectorMode::double_tail};
      for (std::size_t k = 0; k < 4; ++k) {
        std::string label = std::string(post_kind_name(kinds[k])) + "@n" + std::to_string(n) +
                            "/tau=" + num(tau);
        try {
          const TuneResult tr =
              tune_to_evasion(kinds[k], det, wmk, r_w, derive_seed(kSeed, {s.tag, 0x70, k}));
          if (!tr.reached || tr.mean_linf + 1e-12 < mean_att) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + label + ": reached=" +
                      (tr.reached ? "yes" : "no") + " baseline linf " + num(tr.mean_linf) +
                      " vs attack " + num(mean_att);
          }
        } catch (const Error& e) {
          ok = false;
          detail += (detail.empty() ? "" : "; ") + label + ": " + e.what();
        }
      }
      detail += (detail.empty() ? "" : "; ");
      detail += "n=" + std::to_string(n) + " tau=" + num(tau) + ": matched rate " + num(r_w) +
                ", attack linf " + num(mean_att);
    }
  }
  if (ok) detail = "all 16 tuned baselines dominated the attack; " + detail;
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 8
// adversarial training hardening: >= 1.5x mean attack perturbation at equal
// evasion rates
Outcome ac8(Fixtures& fx) {
  const SpreadSpectrumCodec& cstd = fx.spread_std();
  const SpreadSpectrumCodec& cadv = fx.spread_adv();
  const std::vector<Image>& imgs = fx.test128();
  const int n = cstd.n();
  const double tau = calibrate_tau(n, 1e-4, DetectorMode::double_tail);
  const std::size_t m = imgs.size();
  std::vector<double> linf_s(m), linf_a(m), ba_s(m), ba_a(m);
  std::vector<std::uint8_t> conv_s(m, 0), conv_a(m, 0);
  parallel_for(m, [&](std::size_t i) {
    Rng rng(derive_seed(kSeed, {0x38, i, 0}));
    const Watermark w = random_watermark(n, rng);
    WhiteBoxConfig cfg;
    cfg.loss = LossKind::cross_entropy;
    cfg.seed = derive_seed(kSeed, {0x38, i, 1});  // same w_t for both codecs
    const AttackResult rs =
        whitebox_attack(cstd, cstd.embed(imgs[i], w), WhiteBoxVariant::random_target, cfg);
    const AttackResult ra =
        whitebox_attack(cadv, cadv.embed(imgs[i], w), WhiteBoxVariant::random_target, cfg);
    linf_s[i] = rs.linf;
    linf_a[i] = ra.linf;
    conv_s[i] = rs.constraint_satisfied ? 1 : 0;
    conv_a[i] = ra.constraint_satisfied ? 1 : 0;
    ba_s[i] = bitwise_accuracy(decode(cstd, rs.adversarial), w);
    ba_a[i] = bitwise_accuracy(decode(cadv, ra.adversarial), w);
  });
  double mean_s = 0.0, mean_a = 0.0;
  std::size_t es_s = 0, ed_s = 0, es_a = 0, ed_a = 0, nc_s = 0, nc_a = 0;
  for (std::size_t i = 0; i < m; ++i) {
    mean_s += linf_s[i];
    mean_a += linf_a[i];
    nc_s += conv_s[i];
    nc_a += conv_a[i];
    if (!flagged(DetectorMode::single_tail, tau, ba_s[i])) ++es_s;
    if (!flagged(DetectorMode::double_tail, tau, ba_s[i])) ++ed_s;
    if (!flagged(DetectorMode::single_tail, tau, ba_a[i])) ++es_a;
    if (!flagged(DetectorMode::double_tail, tau, ba_a[i])) ++ed_a;
  }
  mean_s /= static_cast<double>(m);
  mean_a /= static_cast<double>(m);
  const double ratio = mean_a / mean_s;
  const bool ok = ratio >= 1.5 && es_s == es_a && ed_s == ed_a;
  return {ok, "mean linf standard " + num(mean_s) + " vs adversarial " + num(mean_a) +
                  " (ratio " + num(ratio, 3) + "), evasion single " + std::to_string(es_s) +
                  "==" + std::to_string(es_a) + " double " + std::to_string(ed_s) +
                  "==" + std::to_string(ed_a) + " at tau*=" + num(tau) + ", converged " +
                  std::to_string(nc_s) + "/" + std::to_string(nc_a)};
}

// ---------------------------------------------------------------- criterion 9
// analytic gradients vs central finite differences: relative error < 1e-4 on
// 200 informative probes per codec per loss; kink-flagged qim images excluded
Outcome ac9(Fixtures& fx) {
  struct Setup {
    const Codec* codec;
    std::vector<Image> pool;
    std::uint64_t tag;
  };
  std::vector<Setup> setups;
  setups.push_back({&fx.spread_std(), {}, 0x39a});
  for (int i = 0; i < 12; ++i) setups[0].pool.push_back(fx.test128()[i]);
  setups.push_back({&fx.qim(), {}, 0x39b});
  for (const Image& img : fx.test256()) {
    const auto flags = fx.qim().kink_flags(img, 1e-3);
    if (std::none_of(flags.begin(), flags.end(), [](std::uint8_t f) { return f != 0; }))
      setups[1].pool.push_back(img);
    if (setups[1].pool.size() == 12) break;
  }
  if (setups[1].pool.size() < 12)
    return {false, "only " + std::to_string(setups[1].pool.size()) +
                       " kink-free qim images in the corpus"};
  const LossKind losses[] = {LossKind::l2, LossKind::l1, LossKind::neg_cosine,
                             LossKind::cross_entropy};
  constexpr double h = 1e-4;
  bool ok = true;
  std::string detail;
  double worst_rel = 0.0;
  long long total_skipped = 0;
  // one worker per (codec, loss) pair; probes inside a pair run sequentially
  struct PairOut {
    int kept = 0;
    long long skipped = 0;
    double max_rel = 0.0;
  };
  std::vector<PairOut> outs(setups.size() * 4);
  parallel_for(outs.size(), [&](std::size_t pi) {
    const Setup& s = setups[pi / 4];
    const LossKind loss = losses[pi % 4];
    const int n = s.codec->n();
    Rng trng(derive_seed(kSeed, {s.tag, static_cast<std::uint64_t>(pi % 4), 0}));
    const Watermark target = random_watermark(n, trng);
    std::vector<Perturbation> grads(s.pool.size());
    for (std::size_t j = 0; j < s.pool.size(); ++j)
      grads[j] = grad_loss(*s.codec, s.pool[j], target, loss).second;
    Rng prng(derive_seed(kSeed, {s.tag, static_cast<std::uint64_t>(pi % 4), 1}));
    PairOut& out = outs[pi];
    int draws = 0;
    while (out.kept < 200 && draws < 4000) {
      ++draws;
      const std::size_t j = prng.uniform_int(s.pool.size());
      const std::size_t c = prng.uniform_int(s.pool[j].px.size());
      Image up = s.pool[j], dn = s.pool[j];
      up.px[c] += h;
      dn.px[c] -= h;
      const double fd = (grad_loss(*s.codec, up, target, loss).first -
                         grad_loss(*s.codec, dn, target, loss).first) /
                        (2.0 * h);
      const double a = grads[j].px[c];
      const double mag = std::max(std::abs(a), std::abs(fd));
      if (mag < 1e-6) {  // no signal at this coordinate; draw another probe
        ++out.skipped;
        continue;
      }
      out.max_rel = std::max(out.max_rel, std::abs(a - fd) / mag);
      ++out.kept;
    }
  });
  for (std::size_t pi = 0; pi < outs.size(); ++pi) {
    const PairOut& out = outs[pi];
    total_skipped += out.skipped;
    worst_rel = std::max(worst_rel, out.max_rel);
    if (out.kept < 200 || out.max_rel >= 1e-4) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string(setups[pi / 4].codec->kind()) + "/" +
                loss_name(losses[pi % 4]) + ": kept " + std::to_string(out.kept) + ", max rel " +
                num(out.max_rel);
    }
  }
  if (ok)
    detail = "8 codec/loss pairs x 200 probes, worst relative error " + num(worst_rel) + ", " +
             std::to_string(total_skipped) + " zero-signal draws redrawn";
  return {ok, detail};
}

// --------------------------------------------------------------- criterion 10
// transfer bound: equals the white-box bounds at beta=gamma=1 exactly, and the
// measured transfer evasion clears the estimated bound within 3 sigma
Outcome ac10(Fixtures& fx) {
  for (int n : {30, 256}) {
    for (double tau : default_grid(n)) {
      if (surrogate_bound(DetectorMode::single_tail, n, 0.01, tau, 1.0, 1.0) !=
              evasion_bound_single(n, 0.01, tau) ||
          surrogate_bound(DetectorMode::double_tail, n, 0.01, tau, 1.0, 1.0) !=
              evasion_bound_double(n, 0.01, tau))
        return {false, "beta=gamma=1 transfer bound differs from the white-box bound at n=" +
                           std::to_string(n) + " tau=" + num(tau)};
    }
  }
  struct Pair {
    const Codec* sur;
    const Codec* tgt;
    const std::vector<Image>* imgs;
    std::uint64_t tag;
  };
  const Pair pairs[] = {
      {&fx.spread_sur(), &fx.spread_std(), &fx.test128(), 0x3aa},
      {&fx.qim_sur(), &fx.qim(), &fx.test256(), 0x3ab},
  };
  const double betas[] = {0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
  const double taus[] = {0.6, 0.7, 0.8, 0.9, 0.99};
  bool ok = true;
  std::string detail = "beta=gamma=1 identity exact on both grids";
  for (const Pair& p : pairs) {
    const int n = p.tgt->n();
    const std::size_t m = p.imgs->size();
    std::vector<Image> wmk(m);
    std::vector<double> ba(m, 0.0);
    parallel_for(m, [&](std::size_t i) {
      Rng rng(derive_seed(kSeed, {p.tag, i, 0}));
      const Watermark w = random_watermark(n, rng);
      wmk[i] = p.tgt->embed((*p.imgs)[i], w);
      WhiteBoxConfig cfg;
      cfg.loss = LossKind::cross_entropy;
      cfg.seed = derive_seed(kSeed, {p.tag, i, 1});
      const AttackResult res = surrogate_attack(*p.sur, wmk[i], cfg);
      ba[i] = bitwise_accuracy(decode(*p.tgt, res.adversarial), w);
    });
    std::vector<double> gamma(6, 0.0);
    for (int b = 0; b < 6; ++b) gamma[b] = estimate_beta_gamma(*p.sur, *p.tgt, wmk, betas[b]);
    double worst_margin = 1.0;
    std::string worst_at;
    for (double tau : taus) {
      for (int mode = 0; mode < 2; ++mode) {
        const DetectorMode dm = mode == 0 ? DetectorMode::single_tail : DetectorMode::double_tail;
        std::size_t evade = 0;
        for (std::size_t i = 0; i < m; ++i)
          if (!flagged(dm, tau, ba[i])) ++evade;
        const double emp = static_cast<double>(evade) / static_cast<double>(m);
        double bound = 0.0;
        for (int b = 0; b < 6; ++b)
          bound = std::max(bound, surrogate_bound(dm, n, 0.01, tau, betas[b], gamma[b]));
        const double slack = 3.0 * std::sqrt(bound * (1.0 - bound) / 100.0);
        const double margin = emp - (bound - slack);
        if (margin < worst_margin) {
          worst_margin = margin;
          worst_at = "n=" + std::to_string(n) + " tau=" + num(tau) +
                     (mode == 0 ? " single" : " double") + " emp=" + num(emp) +
                     " bound=" + num(bound);
        }
        if (margin < -1e-12) ok = false;
      }
    }
    detail += "; n=" + std::to_string(n) + ": gamma(0.8)=" + num(gamma[2]) +
              ", tightest margin " + num(worst_margin) + " at " + worst_at;
  }
  return {ok, detail};
}

// --------------------------------------------------------------- criterion 11
// guided query attack beats plain boundary walking (random init, no early
// stop) on >= 80% of images at equal budget
Outcome ac11(Fixtures& fx) {
  const DwtDctQimCodec& codec = fx.qim();
  const std::vector<Image>& imgs = fx.test256();
  const int n = codec.n();
  const double tau = calibrate_tau(n, 1e-4, DetectorMode::double_tail);
  const std::size_t m = imgs.size();
  std::vector<double> ours(m), plain(m);
  std::atomic<long long> ours_fail{0}, plain_fail{0};
  parallel_for(m, [&](std::size_t i) {
    Rng rng(derive_seed(kSeed, {0x3b, i, 0}));
    const Watermark w = random_watermark(n, rng);
    const Image I_w = codec.embed(imgs[i], w);
    const Detector det{&codec, w, tau, DetectorMode::double_tail};
    const std::uint64_t seed = derive_seed(kSeed, {0x3b, i, 1});
    auto run = [&](bool guided) {
      CodecOracle oracle(det);
      BlackBoxConfig cfg;
      cfg.seed = seed;
      cfg.jpeg_initialization = guided;
      cfg.early_stop = guided;
      return query_attack(oracle, I_w, cfg).linf;
    };
    try {
      ours[i] = run(true);
    } catch (const Error&) {
      ours[i] = std::numeric_limits<double>::infinity();
      ++ours_fail;
    }
    try {
      plain[i] = run(false);
    } catch (const Error&) {
      plain[i] = std::numeric_limits<double>::infinity();
      ++plain_fail;
    }
  });
  std::size_t wins = 0;
  double mean_o = 0.0, mean_p = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (ours[i] < plain[i]) ++wins;
    mean_o += ours[i];
    mean_p += plain[i];
  }
  mean_o /= static_cast<double>(m);
  mean_p /= static_cast<double>(m);
  const double rate = static_cast<double>(wins) / static_cast<double>(m);
  const bool ok = rate >= 0.80 && mean_o < mean_p;
  return {ok, "strictly smaller linf on " + std::to_string(wins) + "/" + std::to_string(m) +
                  " images, mean " + num(mean_o) + " vs " + num(mean_p) + " (failures " +
                  std::to_string(static_cast<long long>(ours_fail)) + "/" +
                  std::to_string(static_cast<long long>(plain_fail)) + ")"};
}

// --------------------------------------------------------------- criterion 12
// determinism: re-running an experiment from its emitted manifest reproduces
// every CSV byte for byte
Outcome ac12(Fixtures& fx) {
  const fs::path base = fs::temp_directory_path() / "wmkit_acceptance_ac12";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string model_std = (base / "std.json").string();
  const std::string model_sur = (base / "sur.json").string();
  save_codec(fx.spread_std(), model_std);
  save_codec(fx.spread_sur(), model_sur);

  ExperimentConfig cfg;
  cfg.dataset = "synth:acceptance";
  cfg.codec_model = model_std;
  cfg.sample_count = 6;
  cfg.master_seed = 4242;
  cfg.output_dir = (base / "a").string();
  AttackSpec flip;
  flip.kind = "whitebox-flip";
  flip.wb.loss = LossKind::cross_entropy;
  AttackSpec wrand;
  wrand.kind = "whitebox-random";
  wrand.wb.loss = LossKind::cross_entropy;
  wrand.wb.seed = 7;
  AttackSpec sur;
  sur.kind = "surrogate";
  sur.surrogate_model = model_sur;
  sur.wb.loss = LossKind::cross_entropy;
  sur.wb.seed = 9;
  AttackSpec jpeg;
  jpeg.kind = "jpeg";
  jpeg.parameter = 60;
  AttackSpec query;
  query.kind = "query";
  query.bb.max_q = 150;
  query.bb.seed = 11;
  cfg.attacks = {flip, wrand, sur, jpeg, query};

  const ExperimentTable ta = run_experiment(cfg);
  emit_experiment(ta, cfg);
  ExperimentConfig cfg2 = config_from_json(slurp(fs::path(cfg.output_dir) / "manifest.json"));
  cfg2.output_dir = (base / "b").string();
  const ExperimentTable tb = run_experiment(cfg2);
  emit_experiment(tb, cfg2);

  bool ok = ta.all_ok && tb.all_ok && ta.experiment_id == tb.experiment_id;
  std::string diffs;
  for (const char* name : {"results.csv", "aggregates.csv", "theory.csv", "query_log.csv"}) {
    const std::string a = slurp(fs::path(cfg.output_dir) / name);
    const std::string b = slurp(fs::path(cfg2.output_dir) / name);
    if (a.empty() || a != b) {
      ok = false;
      diffs += (diffs.empty() ? "" : ",") + std::string(name);
    }
  }
  fs::remove_all(base);
  if (!ok && diffs.empty()) diffs = "(id or row errors)";
  return {ok, ok ? "experiment " + ta.experiment_id +
                       ": results, aggregates, theory and query-log CSVs byte-identical on re-run"
                 : "mismatch in " + diffs + ", all_ok=" + (ta.all_ok ? "1" : "0") + "/" +
                       (tb.all_ok ? "1" : "0")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg.rfind("--only=", 0) == 0) {
      std::stringstream ss(arg.substr(7));
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: %s [--only=1,2,...]\n", argv[0]);
      return 2;
    }
  }

  struct Criterion {
    int id;
    Outcome (*fn)(Fixtures&);
    double limit_s;   // 0 = no budget stated
    bool add_training;  // budget includes codec training time
  };
  const Criterion criteria[] = {
      {1, ac1, 1.0, false},     {2, ac2, 10.0, false},   {3, ac3, 120.0, false},
      {4, ac4, 1800.0, false},  {5, ac5, 3600.0, false}, {6, ac6, 7200.0, false},
      {7, ac7, 7200.0, false},  {8, ac8, 7200.0, true},  {9, ac9, 60.0, false},
      {10, ac10, 3600.0, false}, {11, ac11, 7200.0, false}, {12, ac12, 0.0, false},
  };

  Fixtures fx;
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome out;
    const double t0 = now_s();
    try {
      out = c.fn(fx);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double elapsed = now_s() - t0;
    if (c.add_training) elapsed += fx.train_secs;
    if (c.limit_s > 0.0 && elapsed > c.limit_s) {
      out.pass = false;
      out.detail += " [over runtime budget of " + num(c.limit_s, 3) + "s]";
    }
    std::printf("AC%d %s - %s (%.1fs)\n", c.id, out.pass ? "PASS" : "FAIL", out.detail.c_str(),
                elapsed);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures;
}
