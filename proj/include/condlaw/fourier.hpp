#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "condlaw/model.hpp"

namespace condlaw {

/// Joint table of (X, Y) restricted to x <= x_max: one row per x with mass.
struct JointRow {
  std::int64_t x;
  double px;
  YAtoms y;
};

/// Rows for x in [support_min, x_max]. Throws DomainError when the model has
/// no exact y-law at some x in that range.
std::vector<JointRow> joint_table(const PairModel& model, std::int64_t x_max);

/// E[Y] from y_mean, summed up to a 1e-17 tail of X.
double model_mean_y(const PairModel& model);

/// phi(s, t) = E exp(i s (X - EX) + i t (Y - EY)), summed over x up to a
/// 1e-17 tail. Requires exact y-laws on that range.
std::complex<double> char_fn(const PairModel& model, double s, double t);

/// Monte Carlo version of char_fn from `samples` draws of (X, Y).
std::complex<double> char_fn_estimate(const PairModel& model, double s, double t,
                                      std::uint64_t samples, std::uint64_t seed);

/// psi(t) = 2 pi P(S = k) E exp(i t (U - N EY)), evaluated as
///   int_{-pi}^{pi} exp(-i s (k - N EX)) phi(s, t)^N ds
/// by the periodic trapezoid rule. The node count doubles from
/// max(64, 2(k + 1)) until two levels agree to 1e-12 of the integrand's L1
/// scale; the aliasing error of M nodes is sum_{j != 0} P(S = k + jM).
struct BartlettResult {
  std::complex<double> value;
  std::int64_t nodes = 0;
  double last_change = 0.0;
};

/// Throws NumericError if no convergence by 2^24 nodes.
BartlettResult bartlett_psi(const ConditionedEnsemble& ens, double t);

struct CfGrid {
  int s_points = 201;  ///< on [-pi, pi], endpoints included
  int t_points = 51;   ///< on [0, eta0], endpoints included
  double eta0 = 1.0;
};

/// Largest c5 with |phi'(s, t)| <= 1 - c5 (sigma_X^2 s^2 + sigma_Y'^2 t^2) on
/// the grid, where phi' is the characteristic function of (X, Y') and
/// Y' = Y - X Cov(X, Y) / sigma_X^2. `c` is the same bound along t = 0.
struct CfAudit {
  double c5 = 0.0;
  double c = 0.0;
  double sigma_x = 0.0;
  double sigma_y_prime = 0.0;
  double worst_s = 0.0;
  double worst_t = 0.0;
  bool passed = false;  ///< c5 > 0 and c > 0
};

CfAudit cf_bound_audit(const PairModel& model, const CfGrid& grid = {});

}  // namespace condlaw
