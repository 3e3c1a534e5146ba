#include "condlaw/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "condlaw/distributions.hpp"
#include "condlaw/errors.hpp"
#include "condlaw/fourier.hpp"
#include "condlaw/parallel.hpp"

namespace condlaw {

namespace {

constexpr std::uint64_t kChunk = 4096;

MomentProfile finish_profile(MomentProfile p, double var_x, double var_y, double cov,
                             std::int64_t n_summands) {
  if (!(var_x > 0.0)) throw DegenerateModelError("moment_profile: X has zero variance");
  if (!(var_y > 0.0)) throw DegenerateModelError("moment_profile: Y has zero variance");
  p.n_summands = n_summands;
  p.sigma_x = std::sqrt(var_x);
  p.sigma_y = std::sqrt(var_y);
  p.r = std::clamp(cov / (p.sigma_x * p.sigma_y), -1.0, 1.0);
  p.tau = std::sqrt(std::max(0.0, var_y - cov * cov / var_x));
  const double root_n = std::sqrt(static_cast<double>(n_summands));
  p.l1 = p.rho_x / (var_x * p.sigma_x) / root_n;
  p.l2 = p.rho_y / (var_y * p.sigma_y) / root_n;
  p.tau_degenerate = p.tau <= 1e-6 * p.sigma_y;
  p.integer_variance_bound = var_x <= 4.0 * p.rho_x * (1.0 + 1e-12);
  return p;
}

void check_ensemble(const ConditionedEnsemble& ens) {
  if (ens.n_summands < 1) throw DomainError("ensemble: n_summands must be positive");
  if (ens.model.x_law.support_min() < 0) throw DomainError("ensemble: X must be nonnegative");
}

std::vector<double> truncated_pmf(const IntegerLaw& law, std::int64_t k) {
  std::vector<double> a(static_cast<std::size_t>(k + 1), 0.0);
  for (std::int64_t x = law.support_min(); x <= k; ++x) a[x] = law.pmf(x);
  return a;
}

std::vector<double> truncated_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t size = a.size();
  std::vector<double> c(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; i + j < size; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

double dp_prob(const IntegerLaw& law, std::int64_t n, std::int64_t k) {
  std::vector<double> base = truncated_pmf(law, k);
  std::vector<double> acc(base.size(), 0.0);
  acc[0] = 1.0;
  for (std::int64_t e = n; e > 0; e >>= 1) {
    if (e & 1) acc = truncated_convolve(acc, base);
    if (e > 1) base = truncated_convolve(base, base);
  }
  return acc[static_cast<std::size_t>(k)];
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

MomentProfile moment_profile(const PairModel& model, std::int64_t n_summands) {
  if (n_summands < 1) throw DomainError("moment_profile: n_summands must be positive");
  const auto rows = joint_table(model, model.x_law.truncation_point(1e-16));
  const double den = static_cast<double>(model.y_denominator);
  double mass = 0.0;
  MomentProfile p;
  for (const auto& r : rows) {
    mass += r.px;
    p.mean_x += r.px * static_cast<double>(r.x);
    for (std::size_t j = 0; j < r.y.probs.size(); ++j) {
      p.mean_y += r.px * r.y.probs[j] * static_cast<double>(r.y.numerators[j]) / den;
    }
  }
  p.mean_x /= mass;
  p.mean_y /= mass;
  double var_x = 0.0, var_y = 0.0, cov = 0.0;
  for (const auto& r : rows) {
    const double dx = static_cast<double>(r.x) - p.mean_x;
    for (std::size_t j = 0; j < r.y.probs.size(); ++j) {
      const double w = r.px * r.y.probs[j] / mass;
      const double dy = static_cast<double>(r.y.numerators[j]) / den - p.mean_y;
      var_x += w * dx * dx;
      var_y += w * dy * dy;
      cov += w * dx * dy;
      p.rho_x += w * std::abs(dx * dx * dx);
      p.rho_y += w * std::abs(dy * dy * dy);
    }
  }
  p.exact = true;
  return finish_profile(p, var_x, var_y, cov, n_summands);
}

MomentProfile moment_profile_mc(const PairModel& model, std::int64_t n_summands,
                                std::uint64_t samples, std::uint64_t seed) {
  if (n_summands < 1) throw DomainError("moment_profile: n_summands must be positive");
  if (samples < 2) throw StatisticalPowerError("moment_profile_mc: need at least 2 samples");
  Rng rng(seed);
  const double den = static_cast<double>(model.y_denominator);
  std::vector<double> xs(samples), ys(samples);
  MomentProfile p;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const auto x = sample(model.x_law, rng).value;
    xs[i] = static_cast<double>(x);
    ys[i] = static_cast<double>(model.y_sample(x, rng)) / den;
    p.mean_x += xs[i];
    p.mean_y += ys[i];
  }
  const double n = static_cast<double>(samples);
  p.mean_x /= n;
  p.mean_y /= n;
  double var_x = 0.0, var_y = 0.0, cov = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double dx = xs[i] - p.mean_x;
    const double dy = ys[i] - p.mean_y;
    var_x += dx * dx;
    var_y += dy * dy;
    cov += dx * dy;
    p.rho_x += std::abs(dx * dx * dx);
    p.rho_y += std::abs(dy * dy * dy);
  }
  p.rho_x /= n;
  p.rho_y /= n;
  p.exact = false;
  return finish_profile(p, var_x / n, var_y / n, cov / n, n_summands);
}

MomentProfile moment_profile_auto(const PairModel& model, std::int64_t n_summands,
                                  std::uint64_t samples, std::uint64_t seed) {
  if (model.exact_up_to(model.x_law.truncation_point(1e-16))) return moment_profile(model, n_summands);
  return moment_profile_mc(model, n_summands, samples, seed);
}

ConditionedEnsemble mean_match_tilt(const PairModel& model, std::int64_t n_summands,
                                    std::int64_t target) {
  if (n_summands < 1) throw DomainError("mean_match_tilt: n_summands must be positive");
  const double n = static_cast<double>(n_summands);
  const double k = static_cast<double>(target);
  ConditionedEnsemble ens{model, n_summands, target, std::nullopt};
  switch (model.x_law.kind()) {
    case LawKind::poisson: {
      if (target <= 0) throw DomainError("mean_match_tilt: Poisson mean k/N must be positive");
      const double lambda = k / n;
      ens.model = model.with_x_law(IntegerLaw::poisson(lambda));
      ens.tilt = lambda;
      break;
    }
    case LawKind::borel: {
      if (target <= n_summands) {
        throw DomainError("mean_match_tilt: the Borel mean is at least 1, so k must exceed N (k = " +
                          std::to_string(target) + ", N = " + std::to_string(n_summands) + ")");
      }
      const double mu = 1.0 - n / k;
      const double lambda = mu * std::exp(-mu);
      ens.model = model.with_x_law(IntegerLaw::borel(lambda));
      ens.tilt = lambda;
      break;
    }
    case LawKind::geometric: {
      if (target < 0) throw DomainError("mean_match_tilt: geometric mean k/N must be nonnegative");
      const double p = n / (n + k);
      ens.model = model.with_x_law(IntegerLaw::geometric(p));
      ens.tilt = p;
      break;
    }
    case LawKind::finite:
      throw DomainError("mean_match_tilt: finite laws have no parameter to tilt");
  }
  return ens;
}

double ConditionalLaw::mean() const {
  double m = 0.0;
  const double den = static_cast<double>(denominator);
  for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * static_cast<double>(t_numerators[i]) / den;
  return m;
}

double ConditionalLaw::variance() const {
  const double m = mean();
  const double den = static_cast<double>(denominator);
  double v = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double d = static_cast<double>(t_numerators[i]) / den - m;
    v += probs[i] * d * d;
  }
  return v;
}

double ConditionalLaw::cdf(double value) const {
  const double den = static_cast<double>(denominator);
  double c = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (static_cast<double>(t_numerators[i]) / den <= value) c += probs[i];
  }
  return std::min(c, 1.0);
}

ConditionalLaw exact_conditional_pmf(const ConditionedEnsemble& ens, double cell_budget) {
  check_ensemble(ens);
  const std::int64_t n = ens.n_summands;
  const std::int64_t k = ens.target;
  if (k < 0) throw ConditioningError("exact_conditional_pmf: P(S = k) = 0 for negative k");
  const auto rows = joint_table(ens.model, k);

  struct Atom {
    std::int64_t x;
    std::int64_t y;
    double p;
  };
  std::vector<Atom> atoms;
  std::int64_t ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.y.probs.size(); ++j) {
      if (r.y.probs[j] <= 0.0) continue;
      const auto y = r.y.numerators[j];
      if (first || y < ymin) ymin = y;
      if (first || y > ymax) ymax = y;
      first = false;
      atoms.push_back({r.x, y, r.px * r.y.probs[j]});
    }
  }
  if (atoms.empty()) throw ConditioningError("exact_conditional_pmf: no mass on x <= k");
  const std::int64_t span = ymax - ymin;
  const std::int64_t width = n * span + 1;
  const double cells = static_cast<double>(k + 1) * static_cast<double>(width);
  if (cells > cell_budget) {
    throw ResourceError("exact_conditional_pmf: table of " + std::to_string(cells) +
                        " cells exceeds the budget of " + std::to_string(cell_budget));
  }
  std::vector<double> cur(static_cast<std::size_t>(cells), 0.0), nxt(cur.size());
  cur[0] = 1.0;
  for (std::int64_t j = 0; j < n; ++j) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    const std::int64_t t_top = j * span;
    for (std::int64_t s = 0; s <= k; ++s) {
      for (std::int64_t t = 0; t <= t_top; ++t) {
        const double v = cur[s * width + t];
        if (v == 0.0) continue;
        for (const auto& a : atoms) {
          if (s + a.x > k) continue;
          nxt[(s + a.x) * width + t + a.y - ymin] += v * a.p;
        }
      }
    }
    std::swap(cur, nxt);
  }
  ConditionalLaw law;
  law.denominator = ens.model.y_denominator;
  for (std::int64_t t = 0; t < width; ++t) law.p_s += cur[k * width + t];
  if (!(law.p_s > 0.0)) {
    throw ConditioningError("exact_conditional_pmf: P(S = " + std::to_string(k) + ") = 0");
  }
  for (std::int64_t t = 0; t < width; ++t) {
    const double v = cur[k * width + t];
    if (v == 0.0) continue;
    law.t_numerators.push_back(t + n * ymin);
    law.probs.push_back(v / law.p_s);
  }
  return law;
}

bool LocalLimitReport::lower_bound_holds() const { return scaled_probability() >= lower_bound_constant; }

double LocalLimitReport::scaled_probability() const {
  return p_exact * 2.0 * std::numbers::pi * gaussian_scale;
}

LocalLimitReport prob_s_equals_k(const ConditionedEnsemble& ens, LocalLimitMethod method) {
  check_ensemble(ens);
  const IntegerLaw& law = ens.model.x_law;
  const std::int64_t n = ens.n_summands;
  const std::int64_t k = ens.target;
  LocalLimitReport rep;
  rep.sigma_x = std::sqrt(law.variance());
  if (!(rep.sigma_x > 0.0)) throw DegenerateModelError("prob_s_equals_k: X has zero variance");
  const double root_n = std::sqrt(static_cast<double>(n));
  rep.gaussian_scale = rep.sigma_x * root_n;
  rep.v = (static_cast<double>(k) - static_cast<double>(n) * law.mean()) / rep.gaussian_scale;
  rep.gaussian_prediction =
      std::exp(-0.5 * rep.v * rep.v) / (rep.sigma_x * std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n)));
  rep.lower_bound_constant = std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * rep.v * rep.v) / 2.0;

  if (k < 0 || k < n * law.support_min()) {
    throw ConditioningError("prob_s_equals_k: P(S = " + std::to_string(k) + ") = 0");
  }
  if (method == LocalLimitMethod::automatic) {
    method = k <= 50'000 ? LocalLimitMethod::dp : LocalLimitMethod::quadrature;
  }
  if (method == LocalLimitMethod::dp) {
    rep.p_exact = dp_prob(law, n, k);
    rep.method = "dp";
  } else {
    ConditionedEnsemble bare = ens;
    const auto psi = bartlett_psi(bare, 0.0);
    rep.p_exact = psi.value.real() / (2.0 * std::numbers::pi);
    rep.method = "quadrature";
  }
  if (!(rep.p_exact > 0.0)) {
    throw ConditioningError("prob_s_equals_k: P(S = " + std::to_string(k) + ") = 0");
  }
  rep.ratio = rep.p_exact / rep.gaussian_prediction;
  return rep;
}

ConditionalSamples rejection_sample_conditional(const ConditionedEnsemble& ens, std::uint64_t count,
                                                Rng& rng, const RejectionOptions& options) {
  check_ensemble(ens);
  const std::int64_t n = ens.n_summands;
  const std::int64_t k = ens.target;
  ConditionalSamples out;
  out.method = "rejection";
  out.t.reserve(count);
  std::vector<std::int64_t> xs(static_cast<std::size_t>(n));
  while (out.t.size() < count) {
    ++out.proposals;
    std::int64_t s = 0;
    bool over = false;
    for (std::int64_t i = 0; i < n; ++i) {
      xs[i] = sample(ens.model.x_law, rng).value;
      s += xs[i];
      if (s > k) {
        over = true;
        break;
      }
    }
    if (!over && s == k) {
      std::int64_t t = 0;
      std::vector<std::int64_t> ys;
      if (options.keep_summands) ys.resize(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) {
        const auto y = ens.model.y_sample(xs[i], rng);
        t += y;
        if (options.keep_summands) ys[i] = y;
      }
      out.t.push_back(t);
      if (options.keep_summands) {
        out.x.push_back(xs);
        out.y.push_back(std::move(ys));
      }
    }
    if (out.proposals >= options.warmup &&
        static_cast<double>(out.t.size()) < options.rate_floor * static_cast<double>(out.proposals)) {
      throw StatisticalPowerError("rejection_sample_conditional: acceptance rate " +
                                  std::to_string(static_cast<double>(out.t.size()) /
                                                 static_cast<double>(out.proposals)) +
                                  " fell below the floor " + std::to_string(options.rate_floor) +
                                  " after " + std::to_string(out.proposals) + " proposals");
    }
  }
  out.acceptance_rate = static_cast<double>(out.t.size()) / static_cast<double>(std::max<std::uint64_t>(out.proposals, 1));
  if (options.predict_rate) {
    try {
      out.predicted_rate = prob_s_equals_k(ens).p_exact;
    } catch (const std::exception&) {
      out.predicted_rate = 0.0;
    }
  }
  return out;
}

bool has_direct_sampler(const PairModel& model) {
  const auto kind = model.x_law.kind();
  return kind == LawKind::poisson || kind == LawKind::geometric || kind == LawKind::borel;
}

namespace {

void poisson_vector(std::int64_t n, std::int64_t k, Rng& rng, std::vector<std::int64_t>& xs) {
  std::fill(xs.begin(), xs.end(), 0);
  for (std::int64_t b = 0; b < k; ++b) ++xs[rng.below(static_cast<std::uint64_t>(n))];
}

void geometric_vector(std::int64_t n, std::int64_t k, Rng& rng, std::vector<std::int64_t>& xs) {
  // N - 1 bars among k + N - 1 slots, chosen by selection sampling.
  std::int64_t slots = k + n - 1;
  std::int64_t bars = n - 1;
  std::int64_t part = 0;
  std::int64_t run = 0;
  for (std::int64_t pos = 0; pos < k + n - 1; ++pos) {
    if (static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(slots))) < bars) {
      xs[part++] = run;
      run = 0;
      --bars;
    } else {
      ++run;
    }
    --slots;
  }
  xs[part] = run;
}

void borel_vector(std::int64_t n, std::int64_t k, Rng& rng, std::vector<std::int64_t>& xs,
                  std::vector<std::int64_t>& counts) {
  const std::int64_t m = k;
  counts.assign(static_cast<std::size_t>(m + 1), 0);
  for (std::int64_t b = 0; b < k - n; ++b) ++counts[1 + rng.below(static_cast<std::uint64_t>(m))];
  std::int64_t walk = 0, best = 0, cut = m;
  for (std::int64_t i = 1; i <= m; ++i) {
    walk += counts[i] - 1;
    if (i == 1 || walk < best) {
      best = walk;
      cut = i;
    }
  }
  std::int64_t carry = 0, cell = cut, length = 0, part = 0;
  for (std::int64_t j = 0; j < m; ++j) {
    cell = cell == m ? 1 : cell + 1;
    ++length;
    if (carry + counts[cell] == 0) {
      xs[part++] = length;
      length = 0;
    } else {
      carry = carry + counts[cell] - 1;
    }
  }
  for (std::int64_t i = n - 1; i > 0; --i) {
    std::swap(xs[i], xs[rng.below(static_cast<std::uint64_t>(i + 1))]);
  }
}

}  // namespace

ConditionalSamples direct_sample_conditional(const ConditionedEnsemble& ens, std::uint64_t count,
                                             Rng& rng, bool keep_summands) {
  check_ensemble(ens);
  const std::int64_t n = ens.n_summands;
  const std::int64_t k = ens.target;
  const auto kind = ens.model.x_law.kind();
  if (!has_direct_sampler(ens.model)) {
    throw DomainError("direct_sample_conditional: no direct sampler for " + ens.model.x_law.describe());
  }
  if (kind == LawKind::borel && k < n) {
    throw ConditioningError("direct_sample_conditional: Borel summands need k >= N");
  }
  if (k < 0) throw ConditioningError("direct_sample_conditional: negative target");
  ConditionalSamples out;
  out.method = "direct";
  out.t.reserve(count);
  std::vector<std::int64_t> xs(static_cast<std::size_t>(n)), scratch;
  for (std::uint64_t c = 0; c < count; ++c) {
    switch (kind) {
      case LawKind::poisson:
        poisson_vector(n, k, rng, xs);
        break;
      case LawKind::geometric:
        geometric_vector(n, k, rng, xs);
        break;
      default:
        borel_vector(n, k, rng, xs, scratch);
        break;
    }
    std::int64_t t = 0;
    std::vector<std::int64_t> ys;
    if (keep_summands) ys.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      const auto y = ens.model.y_sample(xs[i], rng);
      t += y;
      if (keep_summands) ys[i] = y;
    }
    out.t.push_back(t);
    if (keep_summands) {
      out.x.push_back(xs);
      out.y.push_back(std::move(ys));
    }
  }
  out.proposals = count;
  out.acceptance_rate = 1.0;
  return out;
}

ConditionalSamples sample_conditional(const ConditionedEnsemble& ens, std::uint64_t count,
                                      std::uint64_t master_seed, std::uint64_t grid_index,
                                      int workers, bool keep_summands) {
  const bool direct = has_direct_sampler(ens.model);
  const std::size_t chunks = static_cast<std::size_t>((count + kChunk - 1) / kChunk);
  std::vector<ConditionalSamples> parts(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    const std::uint64_t size = std::min<std::uint64_t>(kChunk, count - c * kChunk);
    Rng rng(derive_seed(master_seed, c, grid_index));
    if (direct) {
      parts[c] = direct_sample_conditional(ens, size, rng, keep_summands);
    } else {
      RejectionOptions options;
      options.keep_summands = keep_summands;
      options.predict_rate = false;
      parts[c] = rejection_sample_conditional(ens, size, rng, options);
    }
  });
  ConditionalSamples out;
  out.method = direct ? "direct" : "rejection";
  out.t.reserve(count);
  for (auto& part : parts) {
    out.t.insert(out.t.end(), part.t.begin(), part.t.end());
    if (keep_summands) {
      for (auto& v : part.x) out.x.push_back(std::move(v));
      for (auto& v : part.y) out.y.push_back(std::move(v));
    }
    out.proposals += part.proposals;
  }
  out.acceptance_rate = out.proposals == 0 ? 1.0
                                           : static_cast<double>(out.t.size()) / static_cast<double>(out.proposals);
  if (!direct) {
    try {
      out.predicted_rate = prob_s_equals_k(ens).p_exact;
    } catch (const std::exception&) {
      out.predicted_rate = 0.0;
    }
  }
  return out;
}

MomentCheck conditional_moment_report(const ConditionedEnsemble& ens, const MomentProfile& profile,
                                      const std::vector<std::int64_t>& t_numerators,
                                      std::uint64_t bootstrap_seed, int resamples) {
  if (t_numerators.size() < 10'000) {
    throw StatisticalPowerError("conditional_moment_report: needs at least 10^4 conditional samples, got " +
                                std::to_string(t_numerators.size()));
  }
  const double den = static_cast<double>(ens.model.y_denominator);
  const double n = static_cast<double>(ens.n_summands);
  const std::size_t size = t_numerators.size();
  std::vector<double> u(size);
  for (std::size_t i = 0; i < size; ++i) u[i] = static_cast<double>(t_numerators[i]) / den;

  auto mean_var = [](const std::vector<double>& v, auto index) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m += v[index(i)];
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[index(i)] - m;
      s += d * d;
    }
    return std::make_pair(m, s / static_cast<double>(v.size() - 1));
  };

  MomentCheck out;
  out.n_summands = ens.n_summands;
  out.samples = size;
  const auto [m, v] = mean_var(u, [](std::size_t i) { return i; });
  out.mean_hat = m;
  out.var_hat = v;
  out.mean_prediction = n * profile.mean_y + profile.r * (profile.sigma_y / profile.sigma_x) *
                                                 (static_cast<double>(ens.target) - n * profile.mean_x);
  out.var_prediction = n * profile.tau * profile.tau;
  out.mean_deviation = m - out.mean_prediction;
  out.var_deviation_scaled = (v - out.var_prediction) / std::sqrt(n);

  Rng rng(bootstrap_seed);
  std::vector<double> means, vars;
  std::vector<std::size_t> idx(size);
  for (int b = 0; b < resamples; ++b) {
    for (auto& i : idx) i = rng.below(size);
    const auto [bm, bv] = mean_var(u, [&idx](std::size_t i) { return idx[i]; });
    means.push_back(bm);
    vars.push_back(bv);
  }
  std::sort(means.begin(), means.end());
  std::sort(vars.begin(), vars.end());
  out.mean_ci = 0.5 * (quantile_sorted(means, 0.975) - quantile_sorted(means, 0.025));
  out.var_ci = 0.5 * (quantile_sorted(vars, 0.975) - quantile_sorted(vars, 0.025)) / std::sqrt(n);
  return out;
}

std::map<SummandMultiset, double> conditional_multiset_law(const ConditionedEnsemble& ens) {
  check_ensemble(ens);
  const std::int64_t n = ens.n_summands;
  const std::int64_t k = ens.target;
  const auto rows = joint_table(ens.model, k);
  std::vector<const JointRow*> by_x(static_cast<std::size_t>(std::max<std::int64_t>(k, 0) + 1), nullptr);
  for (const auto& r : rows) by_x[r.x] = &r;

  std::map<SummandMultiset, double> law;
  double total = 0.0;
  std::uint64_t visited = 0;
  std::vector<std::int64_t> xs(static_cast<std::size_t>(n));
  SummandMultiset pairs(static_cast<std::size_t>(n));

  std::function<void(std::int64_t, double)> choose_y = [&](std::int64_t i, double w) {
    if (i == n) {
      SummandMultiset key = pairs;
      std::sort(key.begin(), key.end());
      law[key] += w;
      total += w;
      return;
    }
    const auto& atoms = by_x[xs[i]]->y;
    for (std::size_t j = 0; j < atoms.probs.size(); ++j) {
      if (atoms.probs[j] <= 0.0) continue;
      pairs[i] = {xs[i], atoms.numerators[j]};
      choose_y(i + 1, w * atoms.probs[j]);
    }
  };
  std::function<void(std::int64_t, std::int64_t, double)> choose_x = [&](std::int64_t i, std::int64_t left,
                                                                        double w) {
    if (i == n - 1) {
      if (left < 0 || left > k || by_x[left] == nullptr) return;
      xs[i] = left;
      if (++visited > 10'000'000) {
        throw ResourceError("conditional_multiset_law: more than 10^7 x-vectors");
      }
      choose_y(0, w * by_x[left]->px);
      return;
    }
    for (std::int64_t x = 0; x <= left; ++x) {
      if (by_x[x] == nullptr) continue;
      xs[i] = x;
      choose_x(i + 1, left - x, w * by_x[x]->px);
    }
  };
  choose_x(0, k, 1.0);
  if (!(total > 0.0)) throw ConditioningError("conditional_multiset_law: P(S = k) = 0");
  for (auto& [key, w] : law) w /= total;
  return law;
}

}  // namespace condlaw
