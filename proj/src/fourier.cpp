#include "condlaw/fourier.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "condlaw/errors.hpp"

namespace condlaw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t x_horizon(const PairModel& model) { return model.x_law.truncation_point(1e-17); }

struct Moments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
};

Moments table_moments(const std::vector<JointRow>& rows, double den) {
  Moments m;
  double mass = 0.0;
  for (const auto& r : rows) {
    mass += r.px;
    m.mean_x += r.px * static_cast<double>(r.x);
    for (std::size_t j = 0; j < r.y.probs.size(); ++j) {
      m.mean_y += r.px * r.y.probs[j] * static_cast<double>(r.y.numerators[j]) / den;
    }
  }
  m.mean_x /= mass;
  m.mean_y /= mass;
  for (const auto& r : rows) {
    const double dx = static_cast<double>(r.x) - m.mean_x;
    for (std::size_t j = 0; j < r.y.probs.size(); ++j) {
      const double dy = static_cast<double>(r.y.numerators[j]) / den - m.mean_y;
      const double w = r.px * r.y.probs[j] / mass;
      m.var_x += w * dx * dx;
      m.var_y += w * dy * dy;
      m.cov += w * dx * dy;
    }
  }
  return m;
}

// sum_x p(x) e^{i a x} g_x with g_x = sum_y q e^{i b y}.
std::complex<double> raw_cf(const std::vector<JointRow>& rows, const std::vector<std::complex<double>>& g,
                            double a) {
  std::complex<double> acc = 0.0;
  if (rows.empty()) return acc;
  const std::complex<double> step = std::polar(1.0, a);
  std::complex<double> w = std::polar(1.0, a * static_cast<double>(rows.front().x));
  std::int64_t x = rows.front().x;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    while (x < rows[i].x) {
      w *= step;
      ++x;
    }
    acc += rows[i].px * w * g[i];
  }
  return acc;
}

std::vector<std::complex<double>> y_phases(const std::vector<JointRow>& rows, double den, double t,
                                           double shift) {
  std::vector<std::complex<double>> g(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < rows[i].y.probs.size(); ++j) {
      acc += rows[i].y.probs[j] *
             std::polar(1.0, t * (static_cast<double>(rows[i].y.numerators[j]) / den - shift));
    }
    g[i] = acc;
  }
  return g;
}

}  // namespace

std::vector<JointRow> joint_table(const PairModel& model, std::int64_t x_max) {
  std::vector<JointRow> rows;
  for (std::int64_t x = model.x_law.support_min(); x <= x_max; ++x) {
    const double p = model.x_law.pmf(x);
    if (p <= 0.0) continue;
    if (!model.exact_up_to(x)) {
      throw DomainError("model '" + model.label + "' has no exact law of Y given X = " +
                        std::to_string(x));
    }
    rows.push_back({x, p, model.y_exact(x)});
  }
  return rows;
}

double model_mean_y(const PairModel& model) {
  if (!model.y_mean) throw DomainError("model '" + model.label + "' does not provide E[Y | X]");
  const std::int64_t top = x_horizon(model);
  double acc = 0.0;
  for (std::int64_t x = model.x_law.support_min(); x <= top; ++x) {
    const double p = model.x_law.pmf(x);
    if (p > 0.0) acc += p * model.y_mean(x);
  }
  return acc;
}

std::complex<double> char_fn(const PairModel& model, double s, double t) {
  const auto rows = joint_table(model, x_horizon(model));
  const double den = static_cast<double>(model.y_denominator);
  const Moments m = table_moments(rows, den);
  const auto g = y_phases(rows, den, t, m.mean_y);
  return raw_cf(rows, g, s) * std::polar(1.0, -s * m.mean_x);
}

std::complex<double> char_fn_estimate(const PairModel& model, double s, double t,
                                      std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw DomainError("char_fn_estimate: samples must be positive");
  Rng rng(seed);
  const double ex = model.x_law.mean();
  const double ey = model_mean_y(model);
  const double den = static_cast<double>(model.y_denominator);
  std::complex<double> acc = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const auto x = sample(model.x_law, rng).value;
    const auto y = model.y_sample(x, rng);
    acc += std::polar(1.0, s * (static_cast<double>(x) - ex) + t * (static_cast<double>(y) / den - ey));
  }
  return acc / static_cast<double>(samples);
}

BartlettResult bartlett_psi(const ConditionedEnsemble& ens, double t) {
  const PairModel& model = ens.model;
  const std::int64_t n = ens.n_summands;
  const std::int64_t k = ens.target;
  if (n < 1) throw DomainError("bartlett_psi: n_summands must be positive");
  std::int64_t x_max = x_horizon(model);
  // Summands above k cannot contribute to {S = k} when X >= 0.
  if (model.x_law.support_min() >= 0) x_max = std::min(x_max, std::max<std::int64_t>(k, 0));

  std::vector<JointRow> rows;
  std::vector<std::complex<double>> g;
  if (t == 0.0) {
    for (std::int64_t x = model.x_law.support_min(); x <= x_max; ++x) {
      const double p = model.x_law.pmf(x);
      if (p > 0.0) rows.push_back({x, p, {}});
    }
    g.assign(rows.size(), 1.0);
  } else {
    rows = joint_table(model, x_max);
    g = y_phases(rows, static_cast<double>(model.y_denominator), t, model_mean_y(model));
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);

  auto integrand = [&](double s) -> std::complex<double> {
    const std::complex<double> phi = raw_cf(rows, g, s);
    const double modulus = std::abs(phi);
    if (modulus == 0.0) return 0.0;
    const double log_mag = nd * std::log(modulus);
    if (log_mag < -745.0) return 0.0;
    const double angle = std::remainder(nd * std::arg(phi), kTwoPi) - std::remainder(s * kd, kTwoPi);
    return std::polar(std::exp(log_mag), angle);
  };

  std::int64_t nodes = 64;
  while (nodes < 2 * (k + 1)) nodes *= 2;
  std::complex<double> sum = 0.0;
  double abs_sum = 0.0;
  for (std::int64_t j = 0; j < nodes; ++j) {
    const auto f = integrand(-std::numbers::pi + kTwoPi * static_cast<double>(j) / static_cast<double>(nodes));
    sum += f;
    abs_sum += std::abs(f);
  }
  std::complex<double> estimate = sum * (kTwoPi / static_cast<double>(nodes));
  constexpr std::int64_t kMaxNodes = std::int64_t{1} << 24;
  double change = std::numeric_limits<double>::infinity();
  while (nodes < kMaxNodes) {
    const std::int64_t doubled = 2 * nodes;
    for (std::int64_t j = 1; j < doubled; j += 2) {
      const auto f =
          integrand(-std::numbers::pi + kTwoPi * static_cast<double>(j) / static_cast<double>(doubled));
      sum += f;
      abs_sum += std::abs(f);
    }
    nodes = doubled;
    const double h = kTwoPi / static_cast<double>(nodes);
    const std::complex<double> refined = sum * h;
    change = std::abs(refined - estimate);
    estimate = refined;
    if (change <= 1e-12 * abs_sum * h) return {estimate, nodes, change};
  }
  throw NumericError("bartlett_psi: trapezoid rule did not converge by 2^24 nodes (N = " +
                     std::to_string(n) + ", k = " + std::to_string(k) +
                     ", last change = " + std::to_string(change) + ")");
}

CfAudit cf_bound_audit(const PairModel& model, const CfGrid& grid) {
  if (grid.s_points < 2 || grid.t_points < 1 || !(grid.eta0 > 0.0)) {
    throw DomainError("cf_bound_audit: grid needs s_points >= 2, t_points >= 1, eta0 > 0");
  }
  const auto rows = joint_table(model, x_horizon(model));
  const double den = static_cast<double>(model.y_denominator);
  const Moments m = table_moments(rows, den);
  if (m.var_x <= 0.0) throw DegenerateModelError("cf_bound_audit: X has zero variance");
  const double b = m.cov / m.var_x;
  const double var_yp = std::max(0.0, m.var_y - m.cov * m.cov / m.var_x);

  CfAudit out;
  out.sigma_x = std::sqrt(m.var_x);
  out.sigma_y_prime = std::sqrt(var_yp);
  out.c5 = std::numeric_limits<double>::infinity();
  out.c = std::numeric_limits<double>::infinity();
  for (int it = 0; it < grid.t_points; ++it) {
    const double t = grid.t_points == 1 ? 0.0 : grid.eta0 * it / (grid.t_points - 1);
    const auto g = y_phases(rows, den, t, 0.0);
    for (int is = 0; is < grid.s_points; ++is) {
      const double s = -std::numbers::pi + 2.0 * std::numbers::pi * is / (grid.s_points - 1);
      const double quad = m.var_x * s * s + var_yp * t * t;
      if (quad <= 0.0) continue;
      // |phi'(s, t)| = |E exp(i (s - t b) X + i t Y)|.
      const double modulus = std::abs(raw_cf(rows, g, s - t * b));
      const double ratio = (1.0 - modulus) / quad;
      if (ratio < out.c5) {
        out.c5 = ratio;
        out.worst_s = s;
        out.worst_t = t;
      }
      if (it == 0) out.c = std::min(out.c, ratio);
    }
  }
  // A unit modulus anywhere off the origin leaves only rounding noise.
  out.passed = out.c5 > 1e-10 && out.c > 1e-10;
  return out;
}

}  // namespace condlaw
