#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "condlaw/conditional.hpp"
#include "condlaw/distributions.hpp"
#include "condlaw/fourier.hpp"
#include "condlaw/model.hpp"
#include "condlaw/rng.hpp"

namespace condlaw {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Ensemble for a given number of summands (normally mean-matched).
using EnsembleFamily = std::function<ConditionedEnsemble(std::int64_t)>;

// ---------------------------------------------------------------- Berry-Esseen

struct BerryEsseenPoint {
  std::int64_t n = 0;
  std::uint64_t samples = 0;
  double d = 0.0;        ///< Kolmogorov distance of the standardized U to Phi
  double d_sqrt_n = 0.0;
  double ci = 0.0;       ///< 95% DKW half-width
  double exact_d = kNaN; ///< from the exact conditional law when the DP is feasible
  MomentProfile profile;
  std::optional<MomentCheck> moments;
  std::string verdict;   ///< "ok" or "hypothesis-failure"
};

struct BerryEsseenReport {
  std::vector<BerryEsseenPoint> points;
  double flatness = kNaN;  ///< max / min of D_N sqrt N over passing points
  bool passed = false;     ///< every point ok and flatness <= 2
};

/// Standardizes U by N EY + r (sigma_Y / sigma_X)(k - N EX) and sqrt(N) tau,
/// with an exact moment profile of each ensemble's model.
BerryEsseenReport berry_esseen_sweep(const EnsembleFamily& family, const std::vector<std::int64_t>& n_grid,
                                     std::uint64_t samples_per_n, std::uint64_t master_seed,
                                     int workers = 1, bool with_moments = true,
                                     std::int64_t exact_max_n = 8);

/// Deviations of the conditional moments at the smallest and largest N. Each
/// is bounded when the largest-N value stays within twice the smallest-N
/// value plus three largest-N CI half-widths.
struct MomentGrowth {
  double mean_first = 0.0, mean_last = 0.0, mean_allowance = 0.0;
  double var_first = 0.0, var_last = 0.0, var_allowance = 0.0;
  bool mean_bounded = false;
  bool var_bounded = false;
};

/// Empty when fewer than two points carry moment checks.
std::optional<MomentGrowth> moment_growth(const BerryEsseenReport& report);

/// Exact sup distance between the law of (T - centre) / scale and Phi.
double exact_kolmogorov_distance(const ConditionalLaw& law, double centre, double scale);

// -------------------------------------------------------------------- constants

/// Hypothesis constants measured on a family over an N-grid.
struct MeasuredBounds {
  double c1 = 0.0, c1_tilde = 0.0;  ///< sup / inf sigma_X
  double c2 = 0.0;                  ///< sup (rho_X / sigma_X^3)^(1/3)
  double c3 = 0.0, c3_tilde = 0.0;  ///< sup / inf sigma_Y
  double c4 = 0.0;                  ///< sup (rho_Y / sigma_Y^3)^(1/3)
  double c5 = 0.0;                  ///< characteristic-function constant (min over the grid)
  double c5_tilde = 0.0;            ///< min 2 pi P(S = k) sigma_X sqrt N
  double c6 = 0.0;                  ///< sup |r|
  double eta0 = 1.0;
};

struct ConstantsLedger {
  MeasuredBounds measured;
  double epsilon = 0.0;  ///< min((2/9) c1 c2^3, pi)
  double eta = 0.0;      ///< min((2/9) c3 c4^3, eta0)
  double c0 = 98.0;
  double n0 = 0.0;       ///< max(3, c2^6, c4^6)
  double gaussian_moment_integral = 0.0;  ///< int_{R^2} (|s|+|u|+1)^3 e^{-(s^2+u^2)/24}
  double big_c1 = 0.0, big_c2 = 0.0, big_c3 = 0.0;
  double big_c = 0.0;    ///< C1 + C2 C3^{-1/2} (1/2)^{1/2} e^{-1/2}
  double c7 = 0.0;
  double c8_second = 0.0;
  double c8_third = 0.0;
  double c8 = 0.0;
  bool all_finite_positive = false;
};

/// Closed forms of every constant from measured bounds.
ConstantsLedger evaluate_constants(const MeasuredBounds& bounds);

/// Measures the bounds on the family's N-grid (exact moment profiles,
/// cf_bound_audit, prob_s_equals_k) and evaluates the ledger.
ConstantsLedger constants_ledger(const EnsembleFamily& family, const std::vector<std::int64_t>& n_grid,
                                 const CfGrid& cf_grid = {});

/// int_{R^2} (|s|+|u|+1)^3 exp(-(s^2+u^2)/24) ds du by composite Simpson on
/// [0, L]^2 (times 4), L = 24 sqrt(6).
double gaussian_moment_integral();

// ------------------------------------------------------------- tail brackets

/// One point of an empirical log-tail curve.
struct LdPoint {
  double y = 0.0;
  std::uint64_t count = 0;
  std::uint64_t samples = 0;
  double prob = 0.0;
  double normalized = kNaN;  ///< log(prob) / scale
  double ci_low = kNaN;      ///< normalized Wilson 95% bounds
  double ci_high = kNaN;
  double lower = kNaN;       ///< bracket, tolerance included
  double upper = kNaN;
  std::string verdict;       ///< inside, outside, unobservable, excluded
  double log_lower_mass = kNaN;  ///< adversarial lower bound on log P(Y >= y)
  double exact_prob = kNaN;
  double unconditional_normalized = kNaN;
  double unconditional_ci_low = kNaN;
  double unconditional_ci_high = kNaN;
};

struct LdReport {
  std::vector<LdPoint> points;
  TailBracket bracket{};
  double tolerance = 0.15;
  bool all_inside = false;   ///< every observable point inside
  std::size_t observable = 0;
};

using YSampler = std::function<std::int64_t(Rng&)>;

/// Y of the hashing pair at parameter lambda.
YSampler hashing_y_sampler(double lambda);

/// log P(Y >= y) >= max over (m, k) with k (m - k) >= y of
///   log pmf(X = m + 1) + log(m! / 2^k) - m log(m + 1),
/// searched over m <= m_max. -inf when no pair reaches y.
double adversarial_log_mass(double lambda, double y, std::int64_t m_max = 400);

/// (1/sqrt y) log P(Y >= y) against [-beta - tol, -alpha + tol]. Points with
/// y < 1 are excluded; points with fewer than max(30, min_prob * budget)
/// hits are unobservable.
LdReport tail_log_bracket(const YSampler& sampler, double lambda, const std::vector<double>& y_grid,
                          std::uint64_t sample_budget, std::uint64_t master_seed, int workers = 1,
                          double tolerance = 0.15, double min_prob = 3e-5);

/// Exact check of the adversarial lower bound for table sizes m <= m_max.
struct AdversarialCheck {
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t y = 0;  ///< k (m - k)
  double lower_mass = 0.0;           ///< pmf(m + 1) m! / 2^k / (m + 1)^m
  double exact_block_tail = 0.0;     ///< pmf(m + 1) P(d_{m+1,m} >= y)
  double exact_tail_lower = 0.0;     ///< sum over x <= 9 of pmf(x) P(d_{x,x-1} >= y)
  bool holds = false;
};

std::vector<AdversarialCheck> adversarial_mass_check(double lambda, std::int64_t m_max = 8);

// ------------------------------------------------------------------ big jumps

struct BigJumpPoint {
  double z = 0.0;
  std::uint64_t exceedances = 0;
  double share_zero = 0.0;
  double share_one = 0.0;
  double share_two_plus = 0.0;
  double jump_prob = 0.0;        ///< P^(Y >= z/2) per summand
  double exceed_prob = 0.0;      ///< P^(T - N EY >= z)
  double two_jump_bound = 0.0;   ///< (N P^(Y >= z/2))^2 / P^(T - N EY >= z)
  bool two_jump_ok = false;
};

struct BigJumpReport {
  std::int64_t n = 0;
  std::uint64_t samples = 0;
  double mean_y = 0.0;
  bool conditional = false;
  std::vector<BigJumpPoint> points;
  bool single_jump_dominates = false;  ///< share_one > 0.5 at every point
  bool nondecreasing = false;          ///< share_one nondecreasing in z
  bool passed = false;
};

/// Unconditioned sums of N independent pairs. Throws StatisticalPowerError
/// when a threshold has fewer than `min_exceedances` hits.
BigJumpReport big_jump_diagnostic(const PairModel& model, std::int64_t n_summands,
                                  const std::vector<double>& z_grid, std::uint64_t samples,
                                  std::uint64_t master_seed, int workers = 1,
                                  std::uint64_t min_exceedances = 100);

/// Same statistics on conditional samples of the ensemble.
BigJumpReport big_jump_diagnostic(const ConditionedEnsemble& ens, const std::vector<double>& z_grid,
                                  std::uint64_t samples, std::uint64_t master_seed, int workers = 1,
                                  std::uint64_t min_exceedances = 100);

/// (1/sqrt N) log P^(T - E^[T] >= N y | S = k) against
/// [-beta sqrt y - tol, -alpha sqrt y + tol], with lambda taken from the
/// ensemble's tilt. Each point also carries the unconditioned estimate from
/// the same number of independent sums, and the exact probability when the
/// conditional DP is feasible.
LdReport conditional_ld_check(const ConditionedEnsemble& ens, const std::vector<double>& y_grid,
                              std::uint64_t samples, std::uint64_t master_seed, int workers = 1,
                              double tolerance = 0.15);

}  // namespace condlaw
