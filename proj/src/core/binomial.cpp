#include "core/binomial.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "core/errors.hpp"

namespace wmkit {

namespace mp = boost::multiprecision;

namespace {

// Convert S / 2^n to double without overflowing, for arbitrary n.
double ratio_pow2(const mp::cpp_int& s, int n) {
  if (s == 0) return 0.0;
  long top = static_cast<long>(msb(s));  // index of highest set bit
  int shift = 0;
  if (top > 96) shift = static_cast<int>(top - 96);
  double d = (shift > 0) ? static_cast<double>(mp::cpp_int(s >> shift)) : static_cast<double>(s);
  return std::ldexp(d, shift - n);
}

}  // namespace

double binom_cdf(long long t, int n) {
  if (n < 1) fail(Err::invalid_argument, "binom_cdf: n < 1");
  if (t < 0) return 0.0;
  if (t >= n) return 1.0;
  mp::cpp_int sum = 0;
  mp::cpp_int c = 1;  // C(n, 0)
  for (long long k = 0; k <= t; ++k) {
    sum += c;
    c = c * (n - k) / (k + 1);
  }
  return ratio_pow2(sum, n);
}

double binom_tail_ge(long long k, int n) {
  if (n < 1) fail(Err::invalid_argument, "binom_tail_ge: n < 1");
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  mp::cpp_int sum = 0;
  mp::cpp_int c = 1;  // C(n, n) walking down
  for (long long j = n; j >= k; --j) {
    sum += c;
    c = c * j / (n - j + 1);
  }
  return ratio_pow2(sum, n);
}

double fpr_single(double tau, int n) {
  if (!(tau > 0.5 && tau <= 1.0)) fail(Err::domain, "fpr_single: tau must be in (0.5, 1]");
  long long k0 = static_cast<long long>(std::floor(n * tau + 1e-9)) + 1;
  return binom_tail_ge(k0, n);
}

double fpr_double(double tau, int n) {
  if (!(tau > 0.5 && tau <= 1.0)) fail(Err::domain, "fpr_double: tau must be in (0.5, 1]");
  return 2.0 * fpr_single(tau, n);
}

double calibrate_tau(int n, double eta, DetectorMode mode) {
  if (!(eta > 0.0 && eta < 1.0)) fail(Err::invalid_argument, "calibrate_tau: eta out of range");
  if (n < 1) fail(Err::invalid_argument, "calibrate_tau: n < 1");
  int k_lo = (n + 1) / 2 + 1;  // ceil(n/2) + 1
  for (int k = k_lo; k <= n; ++k) {
    double f = binom_tail_ge(k + 1, n);  // strict FPR at grid point k/n
    if (mode == DetectorMode::double_tail) f *= 2.0;
    if (f < eta) return static_cast<double>(k) / n;
  }
  fail(Err::infeasible, "calibrate_tau: no grid threshold reaches the target FPR");
}

double evasion_bound_single(int n, double epsilon, double tau) {
  if (!(epsilon >= 0.0 && epsilon < 0.5)) fail(Err::invalid_argument, "bound: epsilon out of range");
  if (!(tau > 0.5 && tau <= 1.0)) fail(Err::invalid_argument, "bound: tau out of range");
  long long t = static_cast<long long>(std::floor((tau - epsilon) * n + 1e-9));
  return binom_cdf(t, n);
}

double evasion_bound_double(int n, double epsilon, double tau) {
  double b = 2.0 * evasion_bound_single(n, epsilon, tau) - 1.0;
  return b > 0.0 ? b : 0.0;
}

double surrogate_bound(DetectorMode mode, int n, double epsilon, double tau, double beta,
                       double gamma) {
  if (!(beta >= 0.0 && beta <= 1.0 && gamma >= 0.0 && gamma <= 1.0))
    fail(Err::invalid_argument, "surrogate_bound: beta/gamma out of range");
  if (!(epsilon >= 0.0 && epsilon < 0.5)) fail(Err::invalid_argument, "bound: epsilon out of range");
  if (!(tau > 0.5 && tau <= 1.0)) fail(Err::invalid_argument, "bound: tau out of range");
  long long t = static_cast<long long>(std::floor((tau + beta - epsilon - 1.0) * n + 1e-9));
  double p = gamma * binom_cdf(t, n);
  if (mode == DetectorMode::single_tail) return p;
  double b = 2.0 * p - 1.0;
  return b > 0.0 ? b : 0.0;
}

std::pair<long long, long long> binom_band(long long trials, double p, double tail) {
  if (trials < 1 || p < 0.0 || p > 1.0 || !(tail > 0.0 && tail < 0.5))
    fail(Err::invalid_argument, "binom_band: bad inputs");
  if (p == 0.0) return {0, 0};
  if (p == 1.0) return {trials, trials};
  // log pmf at k, recurrence over k; accumulate cdf in double.
  const double logp = std::log(p), logq = std::log1p(-p);
  double lg = trials * logq;  // log pmf at k = 0
  double cdf = std::exp(lg);
  long long lo = -1, hi = trials;
  if (cdf > tail) lo = 0;
  if (cdf >= 1.0 - tail) return {0, 0};
  for (long long k = 1; k <= trials; ++k) {
    lg += std::log(static_cast<double>(trials - k + 1)) - std::log(static_cast<double>(k)) + logp -
          logq;
    cdf += std::exp(lg);
    if (lo < 0 && cdf > tail) lo = k;  // smallest k with P(X <= k-1) <= tail < P(X <= k)
    if (cdf >= 1.0 - tail) {
      hi = k;
      break;
    }
  }
  if (lo < 0) lo = trials;
  return {lo, hi};
}

std::pair<long long, long long> binom_band99(long long trials, double p) {
  return binom_band(trials, p, 0.005);
}

}  // namespace wmkit
