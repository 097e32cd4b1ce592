#pragma once

#include <utility>

namespace wmkit {

enum class DetectorMode { single_tail, double_tail };

// Exact P(t) = Pr(m <= t) for m ~ Binomial(n, 1/2), big-integer arithmetic.
// P(t<0) = 0, P(t>=n) = 1.
double binom_cdf(long long t, int n);

// Exact Pr(m >= k).
double binom_tail_ge(long long k, int n);

// False positive rate of the single-tail detector at threshold tau:
// Pr(m > n*tau), the strict-event form consistent with strict verdicts.
// Index computed as floor(n*tau + 1e-9) + 1.
double fpr_single(double tau, int n);

// Exactly 2 * fpr_single. Requires tau > 0.5 (disjoint tails).
double fpr_double(double tau, int n);

// Smallest tau on the grid {k/n : k = ceil(n/2)+1 .. n} whose mode-appropriate
// FPR is < eta. Throws Err::infeasible when no grid point qualifies.
double calibrate_tau(int n, double eta, DetectorMode mode);

// Lower bounds on the random-target attack's evasion rate at slack epsilon:
// single-tail P(floor((tau-eps)n)); double-tail max(0, 2P - 1).
double evasion_bound_single(int n, double epsilon, double tau);
double evasion_bound_double(int n, double epsilon, double tau);

// Surrogate-transfer bound from (beta, gamma) decoder similarity:
// single gamma*P(floor((tau+beta-eps-1)n)); double max(0, 2*gamma*P - 1).
double surrogate_bound(DetectorMode mode, int n, double epsilon, double tau, double beta,
                       double gamma);

// Central interval [lo, hi] of counts for Binomial(trials, p) with at most
// `tail` probability outside on each side; tail in (0, 0.5). Double-precision
// log-pmf accumulation (not part of the exact-arithmetic contract). Checking a
// family of K rates simultaneously at overall level 1-a calls for tail = a/2K
// per check (Bonferroni), not a/2.
std::pair<long long, long long> binom_band(long long trials, double p, double tail);

// binom_band at the central 99% level (tail = 0.005 per side).
std::pair<long long, long long> binom_band99(long long trials, double p);

}  // namespace wmkit
