#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "condlaw/distributions.hpp"
#include "condlaw/rng.hpp"

namespace condlaw {

/// Finite law of Y given X = x. Values are numerators over the model's
/// common denominator, so the convolution tables stay integer-indexed.
struct YAtoms {
  std::vector<std::int64_t> numerators;
  std::vector<double> probs;
};

/// Description of the pair (X, Y): the law of X plus the rule x -> law of Y.
struct PairModel {
  IntegerLaw x_law = IntegerLaw::poisson(1.0);
  /// Y = numerator / y_denominator.
  std::int64_t y_denominator = 1;
  /// Exact law of Y given X = x, valid for x <= exact_limit. Empty means the
  /// model only supports Monte Carlo.
  std::function<YAtoms(std::int64_t)> y_exact;
  std::int64_t exact_limit = std::numeric_limits<std::int64_t>::max();
  /// Draws the numerator of Y given X = x.
  std::function<std::int64_t(std::int64_t, Rng&)> y_sample;
  /// E[Y | X = x], in units of Y (not numerators).
  std::function<double(std::int64_t)> y_mean;
  std::string label;

  bool exact_up_to(std::int64_t x) const { return static_cast<bool>(y_exact) && x <= exact_limit; }

  /// Same Y rule on a different law of X.
  PairModel with_x_law(IntegerLaw law) const {
    PairModel out = *this;
    out.x_law = std::move(law);
    return out;
  }
};

/// L(T | S = target) with T = Y_1 + ... + Y_N and S = X_1 + ... + X_N.
struct ConditionedEnsemble {
  PairModel model;
  std::int64_t n_summands = 1;
  std::int64_t target = 0;
  /// Set when mean_match_tilt chose the parameter of the x-law.
  std::optional<double> tilt;
};

}  // namespace condlaw
