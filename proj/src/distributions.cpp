#include "condlaw/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "condlaw/errors.hpp"

namespace condlaw {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e
constexpr double kLn2 = std::numbers::ln2;

bool is_critical_lambda(double lambda) { return lambda >= kInvE * (1.0 - 1e-15); }

std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

}  // namespace

TreeFunctionValue tree_function(double lambda) {
  if (!(lambda > 0.0) || lambda > kInvE * (1.0 + 1e-15)) {
    throw DomainError("tree_function: lambda must lie in (0, 1/e], got " +
                      format_double(lambda));
  }
  // mu e^{-mu} has zero slope at mu = 1, so bisection there only resolves
  // mu to sqrt(eps); the fixed point is returned directly.
  if (is_critical_lambda(lambda)) return {lambda, 1.0};
  double lo = 0.0;
  double hi = 1.0;
  // Run until the bracket cannot shrink, so small mu keeps full relative precision.
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mid * std::exp(-mid) < lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lambda, 0.5 * (lo + hi)};
}

IntegerLaw IntegerLaw::borel(double lambda) {
  IntegerLaw law(LawKind::borel, lambda);
  law.mu_ = tree_function(lambda).mu;
  return law;
}

IntegerLaw IntegerLaw::poisson(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("Poisson law: lambda must be positive, got " + format_double(lambda));
  }
  return IntegerLaw(LawKind::poisson, lambda);
}

IntegerLaw IntegerLaw::geometric(double p) {
  if (!(p > 0.0) || p > 1.0) {
    throw DomainError("geometric law: p must lie in (0, 1], got " + format_double(p));
  }
  return IntegerLaw(LawKind::geometric, p);
}

IntegerLaw IntegerLaw::finite(std::vector<std::pair<std::int64_t, double>> atoms) {
  if (atoms.empty()) throw DomainError("finite law: no atoms");
  std::sort(atoms.begin(), atoms.end());
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].first < 0) throw DomainError("finite law: negative support point");
    if (!(atoms[i].second >= 0.0)) throw DomainError("finite law: negative mass");
    if (i > 0 && atoms[i].first == atoms[i - 1].first) {
      throw DomainError("finite law: repeated support point");
    }
    total += atoms[i].second;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("finite law: masses must sum to 1");
  IntegerLaw law(LawKind::finite, 0.0);
  law.atoms_ = std::move(atoms);
  return law;
}

std::int64_t IntegerLaw::support_min() const {
  switch (kind_) {
    case LawKind::borel:
      return 1;
    case LawKind::finite:
      return atoms_.front().first;
    default:
      return 0;
  }
}

double IntegerLaw::log_pmf(std::int64_t n) const {
  const double ninf = -std::numeric_limits<double>::infinity();
  if (n < support_min()) return ninf;
  const double x = static_cast<double>(n);
  switch (kind_) {
    case LawKind::borel:
      // n^{n-1}/n! overflows past n ~ 170, so stay in log space.
      return x * std::log(param_) + (x - 1.0) * std::log(x) - std::lgamma(x + 1.0) -
             std::log(mu_);
    case LawKind::poisson:
      return x * std::log(param_) - param_ - std::lgamma(x + 1.0);
    case LawKind::geometric:
      if (param_ == 1.0) return n == 0 ? 0.0 : ninf;
      return std::log(param_) + x * std::log1p(-param_);
    case LawKind::finite: {
      auto it = std::lower_bound(atoms_.begin(), atoms_.end(), std::make_pair(n, 0.0));
      if (it == atoms_.end() || it->first != n || it->second == 0.0) return ninf;
      return std::log(it->second);
    }
  }
  return ninf;
}

double IntegerLaw::pmf(std::int64_t n) const {
  if (kind_ == LawKind::finite) {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), std::make_pair(n, 0.0));
    return (it != atoms_.end() && it->first == n) ? it->second : 0.0;
  }
  return std::exp(log_pmf(n));
}

double IntegerLaw::mean() const {
  switch (kind_) {
    case LawKind::borel:
      return mu_ >= 1.0 ? std::numeric_limits<double>::infinity() : 1.0 / (1.0 - mu_);
    case LawKind::poisson:
      return param_;
    case LawKind::geometric:
      return (1.0 - param_) / param_;
    case LawKind::finite: {
      double m = 0.0;
      for (const auto& [x, p] : atoms_) m += static_cast<double>(x) * p;
      return m;
    }
  }
  return 0.0;
}

double IntegerLaw::variance() const {
  switch (kind_) {
    case LawKind::borel:
      return mu_ >= 1.0 ? std::numeric_limits<double>::infinity()
                        : mu_ / std::pow(1.0 - mu_, 3);
    case LawKind::poisson:
      return param_;
    case LawKind::geometric:
      return (1.0 - param_) / (param_ * param_);
    case LawKind::finite: {
      const double m = mean();
      double v = 0.0;
      for (const auto& [x, p] : atoms_) v += (static_cast<double>(x) - m) * (static_cast<double>(x) - m) * p;
      return v;
    }
  }
  return 0.0;
}

double IntegerLaw::tail_bound(std::int64_t n) const {
  if (n < support_min()) return 1.0;
  switch (kind_) {
    case LawKind::borel: {
      // p(j+1)/p(j) = lambda (1 + 1/j)^{j-1} < lambda e.
      const double ratio = std::exp(std::log(param_) + 1.0);
      if (ratio >= 1.0) return 1.0;
      return std::min(1.0, pmf(n + 1) / (1.0 - ratio));
    }
    case LawKind::poisson: {
      const double ratio = param_ / static_cast<double>(n + 2);
      if (ratio >= 1.0) return 1.0;
      return std::min(1.0, pmf(n + 1) / (1.0 - ratio));
    }
    case LawKind::geometric:
      return std::pow(1.0 - param_, static_cast<double>(n + 1));
    case LawKind::finite: {
      double t = 0.0;
      for (const auto& [x, p] : atoms_) {
        if (x > n) t += p;
      }
      return t;
    }
  }
  return 1.0;
}

std::int64_t IntegerLaw::truncation_point(double tail) const {
  if (kind_ == LawKind::borel && is_critical_lambda(param_)) {
    throw DomainError("truncation_point: the critical Borel law (lambda = 1/e) has no summable tail bound");
  }
  if (kind_ == LawKind::finite) {
    std::int64_t last = atoms_.back().first;
    return last;
  }
  std::int64_t n = support_min();
  for (; n < 100'000'000; ++n) {
    if (tail_bound(n) < tail) return n;
  }
  throw NumericError("truncation_point: no truncation found below 1e8");
}

std::complex<double> IntegerLaw::characteristic(double s) const {
  const std::complex<double> i(0.0, 1.0);
  switch (kind_) {
    case LawKind::poisson:
      return std::exp(param_ * (std::exp(i * s) - 1.0));
    case LawKind::geometric:
      return param_ / (1.0 - (1.0 - param_) * std::exp(i * s));
    case LawKind::finite: {
      std::complex<double> acc = 0.0;
      for (const auto& [x, p] : atoms_) acc += p * std::exp(i * (s * static_cast<double>(x)));
      return acc;
    }
    case LawKind::borel: {
      const std::int64_t top = truncation_point(1e-17);
      std::complex<double> acc = 0.0;
      for (std::int64_t n = 1; n <= top; ++n) {
        acc += pmf(n) * std::exp(i * (s * static_cast<double>(n)));
      }
      return acc;
    }
  }
  return 0.0;
}

std::string IntegerLaw::describe() const {
  switch (kind_) {
    case LawKind::borel:
      return "Borel(" + format_double(param_) + ")";
    case LawKind::poisson:
      return "Poisson(" + format_double(param_) + ")";
    case LawKind::geometric:
      return "Geometric(" + format_double(param_) + ")";
    case LawKind::finite:
      return "Finite(" + std::to_string(atoms_.size()) + " atoms)";
  }
  return "?";
}

Draw sample(const IntegerLaw& law, Rng& rng, std::int64_t progeny_ceiling) {
  switch (law.kind()) {
    case LawKind::borel: {
      // Total progeny of a Galton-Watson tree with Poisson(mu) offspring,
      // one generation at a time: Z_{g+1} ~ Poisson(mu Z_g).
      const double mu = law.tree_value();
      std::int64_t generation = 1;
      std::int64_t total = 1;
      while (generation > 0) {
        generation = rng.poisson(mu * static_cast<double>(generation));
        total += generation;
        if (total >= progeny_ceiling) return {progeny_ceiling, true};
      }
      return {total, false};
    }
    case LawKind::poisson:
      return {rng.poisson(law.parameter()), false};
    case LawKind::geometric: {
      const double p = law.parameter();
      if (p == 1.0) return {0, false};
      const double u = rng.uniform();
      return {static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p))), false};
    }
    case LawKind::finite: {
      const double u = rng.uniform();
      double cdf = 0.0;
      const std::int64_t top = law.truncation_point();
      for (std::int64_t n = law.support_min(); n <= top; ++n) {
        cdf += law.pmf(n);
        if (u <= cdf) return {n, false};
      }
      return {top, false};
    }
  }
  return {0, false};
}

TailBracket TailBracket::from_kappa(double kappa) {
  if (!(kappa > 0.0) || kappa > kLn2 * (1.0 + 1e-12)) {
    throw DomainError("tail_bracket: requires 0 < kappa and kappa := -log(lambda) - 1 <= log(2), got kappa = " +
                      format_double(kappa));
  }
  const double alpha = kappa * std::numbers::sqrt2;
  const double beta =
      2.0 * kappa * std::sqrt((1.0 + 1.0 / kappa) * (1.0 + (1.0 + kLn2) / kappa));
  return {kappa, alpha, beta};
}

TailBracket tail_bracket(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("tail_bracket: lambda must be positive");
  return TailBracket::from_kappa(-std::log(lambda) - 1.0);
}

std::vector<TailRatePoint> x_tail_rate_check(double lambda, std::int64_t n_max) {
  if (n_max < 10) throw DomainError("x_tail_rate_check: n_max must be at least 10");
  if (!(lambda > 0.0) || is_critical_lambda(lambda)) {
    throw DomainError("x_tail_rate_check: lambda must lie in (0, 1/e)");
  }
  const IntegerLaw law = IntegerLaw::borel(lambda);
  // Extend the pmf table until the remaining geometric tail bound is
  // negligible against P(X >= n_max).
  std::vector<long double> pmf{0.0L};
  std::int64_t n = 1;
  long double far_sum = 0.0L;
  for (;; ++n) {
    const long double p = std::exp(static_cast<long double>(law.log_pmf(n)));
    pmf.push_back(p);
    if (n >= n_max) {
      far_sum += p;
      if (law.tail_bound(n) < 1e-18L * far_sum) break;
    }
  }
  std::vector<long double> tail(pmf.size() + 1, 0.0L);
  tail[pmf.size()] = law.tail_bound(n);
  for (std::int64_t j = static_cast<std::int64_t>(pmf.size()) - 1; j >= 1; --j) {
    tail[j] = tail[j + 1] + pmf[j];
  }
  std::vector<TailRatePoint> curve;
  curve.reserve(n_max);
  for (std::int64_t j = 1; j <= n_max; ++j) {
    const double rate =
        j <= law.support_min() ? 0.0 : static_cast<double>(-std::log(tail[j]) / j);
    curve.push_back({j, rate});
  }
  return curve;
}

std::int64_t lattice_span(const IntegerLaw& law) {
  const std::int64_t lo = law.support_min();
  const std::int64_t hi = law.truncation_point(1e-12);
  std::int64_t first = -1;
  std::int64_t span = 0;
  for (std::int64_t x = lo; x <= hi; ++x) {
    if (law.pmf(x) <= 0.0) continue;
    if (first < 0) {
      first = x;
    } else {
      span = std::gcd(span, x - first);
    }
  }
  return span;
}

}  // namespace condlaw
