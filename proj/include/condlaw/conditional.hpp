#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "condlaw/model.hpp"
#include "condlaw/rng.hpp"

namespace condlaw {

/// Moments of one pair (X, Y) and the derived quantities for N summands.
struct MomentProfile {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double rho_x = 0.0;  ///< E|X - EX|^3
  double rho_y = 0.0;  ///< E|Y - EY|^3
  double r = 0.0;      ///< Corr(X, Y)
  double tau = 0.0;    ///< sigma_Y sqrt(1 - r^2)
  double l1 = 0.0;     ///< rho_X sigma_X^-3 N^-1/2
  double l2 = 0.0;     ///< rho_Y sigma_Y^-3 N^-1/2
  std::int64_t n_summands = 1;
  bool exact = true;
  /// tau <= 1e-6 sigma_Y: Y is (almost) an affine function of X and the
  /// standardized sum has nothing left to normalize.
  bool tau_degenerate = false;
  /// sigma_X^2 <= 4 rho_X, which holds for every integer-valued X.
  bool integer_variance_bound = true;
};

/// Exact moments from the joint table summed to a 1e-16 tail of X. Throws
/// DomainError when the model lacks exact y-laws on that range, and
/// DegenerateModelError when X or Y has zero variance.
MomentProfile moment_profile(const PairModel& model, std::int64_t n_summands);

/// Same fields estimated from `samples` independent draws of (X, Y).
MomentProfile moment_profile_mc(const PairModel& model, std::int64_t n_summands,
                                std::uint64_t samples, std::uint64_t seed);

/// Exact profile when possible, Monte Carlo otherwise.
MomentProfile moment_profile_auto(const PairModel& model, std::int64_t n_summands,
                                  std::uint64_t samples = 2'000'000, std::uint64_t seed = 1);

/// Sets the x-law parameter so that E[X] = target / n_summands:
///   Poisson: lambda = k / N;  Borel: mu = 1 - N/k, lambda = mu e^-mu;
///   geometric on {0, 1, ...}: p = N / (N + k).
/// Throws DomainError for infeasible means (Borel with k < N, say) and for
/// finite laws, which have no free parameter.
ConditionedEnsemble mean_match_tilt(const PairModel& model, std::int64_t n_summands,
                                    std::int64_t target);

/// Exact law of T given S = k. T values are numerators over the model's
/// denominator.
struct ConditionalLaw {
  std::vector<std::int64_t> t_numerators;
  std::vector<double> probs;
  std::int64_t denominator = 1;
  double p_s = 0.0;  ///< P(S = k)

  double mean() const;
  double variance() const;
  /// P(T <= value), value in units of T.
  double cdf(double value) const;
};

/// Dynamic programme over (s, t) with s <= k, one summand at a time. Throws
/// ResourceError when (k + 1) * (N * y_span + 1) exceeds `cell_budget` and
/// ConditioningError when P(S = k) = 0.
ConditionalLaw exact_conditional_pmf(const ConditionedEnsemble& ens, double cell_budget = 1e8);

struct LocalLimitReport {
  double p_exact = 0.0;
  double v = 0.0;  ///< (k - N EX) / (sigma_X sqrt N)
  double gaussian_prediction = 0.0;
  double ratio = 0.0;
  double lower_bound_constant = 0.0;  ///< sqrt(2 pi) e^{-v^2/2} / 2
  double sigma_x = 0.0;
  double gaussian_scale = 0.0;  ///< sigma_X sqrt N
  std::string method;

  /// p_exact * 2 pi sigma_X sqrt N >= lower_bound_constant.
  bool lower_bound_holds() const;
  double scaled_probability() const;  ///< p_exact * 2 pi sigma_X sqrt N
};

enum class LocalLimitMethod { automatic, dp, quadrature };

/// P(S = k). The dp method convolves the x-pmf by binary powering with every
/// table truncated at k; quadrature evaluates psi(0) / 2 pi.
LocalLimitReport prob_s_equals_k(const ConditionedEnsemble& ens,
                                 LocalLimitMethod method = LocalLimitMethod::automatic);

/// Accepted conditional draws. `t` holds numerators of T; the per-summand
/// vectors are filled only when requested.
struct ConditionalSamples {
  std::vector<std::int64_t> t;
  std::vector<std::vector<std::int64_t>> x;
  std::vector<std::vector<std::int64_t>> y;
  std::uint64_t proposals = 0;
  double acceptance_rate = 1.0;
  double predicted_rate = 0.0;  ///< P(S = k); 0 when not computed
  std::string method;
};

struct RejectionOptions {
  double rate_floor = 1e-6;
  std::uint64_t warmup = 100'000;
  bool keep_summands = false;
  bool predict_rate = true;
};

/// Draws N independent pairs and keeps them when S = k. Gives up with
/// StatisticalPowerError once the acceptance rate sits below the floor after
/// the warmup.
ConditionalSamples rejection_sample_conditional(const ConditionedEnsemble& ens, std::uint64_t count,
                                                Rng& rng, const RejectionOptions& options = {});

/// Exact conditional sampler without rejection, for the families whose
/// conditioned x-vector has a combinatorial description:
///   Poisson: multinomial counts of k balls in N urns;
///   geometric: uniform weak composition of k into N parts;
///   Borel: shuffled block lengths of a linear probing table with k cells
///   and k - N balls.
/// Y is then drawn from its law given X. Throws DomainError for other laws.
ConditionalSamples direct_sample_conditional(const ConditionedEnsemble& ens, std::uint64_t count,
                                             Rng& rng, bool keep_summands = false);

bool has_direct_sampler(const PairModel& model);

/// Chunked sampler: chunk c of 4096 draws uses derive_seed(master, c, grid),
/// so the output does not depend on `workers`. Direct sampling when
/// available, rejection otherwise.
ConditionalSamples sample_conditional(const ConditionedEnsemble& ens, std::uint64_t count,
                                      std::uint64_t master_seed, std::uint64_t grid_index,
                                      int workers = 1, bool keep_summands = false);

/// Deviations of the sample mean and variance of U from
///   mean: N EY + r (sigma_Y / sigma_X)(k - N EX)
///   variance: N tau^2
/// with bootstrap percentile half-widths (95%).
struct MomentCheck {
  std::int64_t n_summands = 0;
  std::uint64_t samples = 0;
  double mean_hat = 0.0;
  double mean_prediction = 0.0;
  double mean_deviation = 0.0;  ///< signed
  double mean_ci = 0.0;
  double var_hat = 0.0;
  double var_prediction = 0.0;
  double var_deviation_scaled = 0.0;  ///< (var_hat - N tau^2) / sqrt N, signed
  double var_ci = 0.0;
};

/// Requires at least 10^4 samples (StatisticalPowerError otherwise).
MomentCheck conditional_moment_report(const ConditionedEnsemble& ens, const MomentProfile& profile,
                                      const std::vector<std::int64_t>& t_numerators,
                                      std::uint64_t bootstrap_seed, int resamples = 200);

/// Sorted (x, y-numerator) pairs of all summands.
using SummandMultiset = std::vector<std::pair<std::int64_t, std::int64_t>>;

/// Exact law of the multiset {(X_i, Y_i)} given S = k by enumerating every
/// x-vector with sum k and every y-combination. Small instances only.
std::map<SummandMultiset, double> conditional_multiset_law(const ConditionedEnsemble& ens);

}  // namespace condlaw
