#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "condlaw/rng.hpp"

namespace condlaw {

/// Value of the tree function: mu in (0, 1] with mu * exp(-mu) = lambda.
struct TreeFunctionValue {
  double lambda;
  double mu;
};

/// Solves mu * exp(-mu) = lambda on the branch mu <= 1 by bisection.
/// Throws DomainError unless 0 < lambda <= 1/e.
TreeFunctionValue tree_function(double lambda);

enum class LawKind { borel, poisson, geometric, finite };

/// Integer-valued law on a nonnegative support.
///
/// - Borel(lambda), lambda in (0, 1/e]: pmf lambda^n n^(n-1) / (n! T(lambda)), n >= 1.
/// - Poisson(lambda), lambda > 0.
/// - Geometric(p), p in (0, 1]: pmf p (1-p)^n, n >= 0 (failures before the first success).
/// - Finite: explicit atoms, used for hand-built test laws.
class IntegerLaw {
 public:
  static IntegerLaw borel(double lambda);
  static IntegerLaw poisson(double lambda);
  static IntegerLaw geometric(double p);
  static IntegerLaw finite(std::vector<std::pair<std::int64_t, double>> atoms);

  LawKind kind() const { return kind_; }
  /// lambda for Borel and Poisson, p for geometric, 0 for finite laws.
  double parameter() const { return param_; }
  /// T(lambda) for Borel laws; 0 otherwise.
  double tree_value() const { return mu_; }

  std::int64_t support_min() const;
  double pmf(std::int64_t n) const;
  double log_pmf(std::int64_t n) const;

  double mean() const;
  double variance() const;

  /// Upper bound on P(X > n).
  double tail_bound(std::int64_t n) const;
  /// Smallest n >= support_min with tail_bound(n) < tail. Throws DomainError
  /// for the critical Borel law, whose tail is not summable at any useful n.
  std::int64_t truncation_point(double tail = 1e-10) const;

  /// E[exp(i s X)].
  std::complex<double> characteristic(double s) const;

  std::string describe() const;

 private:
  IntegerLaw(LawKind kind, double param) : kind_(kind), param_(param) {}

  LawKind kind_;
  double param_ = 0.0;
  double mu_ = 0.0;
  std::vector<std::pair<std::int64_t, double>> atoms_;
};

/// Outcome of a capped draw. `truncated` is set when a Borel progeny reached
/// the ceiling; the value is then the ceiling.
struct Draw {
  std::int64_t value;
  bool truncated;
};

inline constexpr std::int64_t kDefaultProgenyCeiling = 10'000'000;

/// Exact sampler. Borel laws are drawn as the total progeny of a Galton-Watson
/// tree with Poisson(T(lambda)) offspring; Poisson and geometric by inversion.
Draw sample(const IntegerLaw& law, Rng& rng,
            std::int64_t progeny_ceiling = kDefaultProgenyCeiling);

/// Decay constants of the Borel tail and the displacement log-tail bracket.
struct TailBracket {
  double kappa;
  double alpha;
  double beta;

  /// Requires 0 < kappa <= log 2.
  static TailBracket from_kappa(double kappa);
};

/// kappa = -log(lambda) - 1, alpha = kappa sqrt 2,
/// beta = 2 kappa sqrt((1 + 1/kappa)(1 + (1 + log 2)/kappa)).
/// Requires lambda in [1/(2e), 1/e).
TailBracket tail_bracket(double lambda);

struct TailRatePoint {
  std::int64_t n;
  double rate;  ///< -log P(X >= n) / n
};

/// Exact curve n -> -log P(X >= n) / n for Borel(lambda), n = 1..n_max, from
/// tail sums of the pmf. Requires lambda in (0, 1/e) and n_max >= 10.
std::vector<TailRatePoint> x_tail_rate_check(double lambda, std::int64_t n_max);

/// Greatest common divisor of the differences between support points with
/// positive mass (within the truncation point).
std::int64_t lattice_span(const IntegerLaw& law);

}  // namespace condlaw
