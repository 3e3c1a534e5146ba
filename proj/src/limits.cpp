#include "condlaw/limits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "condlaw/errors.hpp"
#include "condlaw/hashing.hpp"
#include "condlaw/parallel.hpp"
#include "condlaw/stats.hpp"

namespace condlaw {

namespace {

constexpr std::uint64_t kBootstrapStream = 0x80000000ULL;
constexpr std::uint64_t kUnconditionalStream = 0x40000000ULL;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

double integrand_sum_weight(int i, int last) {
  if (i == 0 || i == last) return 1.0;
  return (i % 2 == 1) ? 4.0 : 2.0;
}

}  // namespace

// ---------------------------------------------------------------- Berry-Esseen

std::optional<MomentGrowth> moment_growth(const BerryEsseenReport& report) {
  std::vector<const BerryEsseenPoint*> with;
  for (const auto& p : report.points)
    if (p.moments) with.push_back(&p);
  if (with.size() < 2) return std::nullopt;
  const auto [first, last] = std::minmax_element(with.begin(), with.end(),
                                                 [](auto* a, auto* b) { return a->n < b->n; });
  const MomentCheck& a = *(*first)->moments;
  const MomentCheck& b = *(*last)->moments;
  MomentGrowth g;
  g.mean_first = std::abs(a.mean_deviation);
  g.mean_last = std::abs(b.mean_deviation);
  g.mean_allowance = 2.0 * g.mean_first + 3.0 * b.mean_ci;
  g.mean_bounded = g.mean_last <= g.mean_allowance;
  g.var_first = std::abs(a.var_deviation_scaled);
  g.var_last = std::abs(b.var_deviation_scaled);
  g.var_allowance = 2.0 * g.var_first + 3.0 * b.var_ci;
  g.var_bounded = g.var_last <= g.var_allowance;
  return g;
}

double exact_kolmogorov_distance(const ConditionalLaw& law, double centre, double scale) {
  std::vector<std::pair<double, double>> atoms;
  const double den = static_cast<double>(law.denominator);
  for (std::size_t i = 0; i < law.probs.size(); ++i) {
    atoms.emplace_back((static_cast<double>(law.t_numerators[i]) / den - centre) / scale, law.probs[i]);
  }
  std::sort(atoms.begin(), atoms.end());
  double before = 0.0;
  double d = 0.0;
  for (const auto& [z, p] : atoms) {
    const double phi = stats::normal_cdf(z);
    const double after = before + p;
    d = std::max({d, std::abs(before - phi), std::abs(after - phi)});
    before = after;
  }
  return d;
}

BerryEsseenReport berry_esseen_sweep(const EnsembleFamily& family, const std::vector<std::int64_t>& n_grid,
                                     std::uint64_t samples_per_n, std::uint64_t master_seed, int workers,
                                     bool with_moments, std::int64_t exact_max_n) {
  if (samples_per_n < 10'000) {
    throw StatisticalPowerError("berry_esseen_sweep: needs at least 10^4 samples per N");
  }
  BerryEsseenReport report;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool all_ok = true;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    BerryEsseenPoint point;
    point.n = n_grid[g];
    const ConditionedEnsemble ens = family(point.n);
    try {
      point.profile = moment_profile_auto(ens.model, point.n);
    } catch (const DegenerateModelError&) {
      point.verdict = "hypothesis-failure";
      all_ok = false;
      report.points.push_back(point);
      continue;
    }
    if (point.profile.tau_degenerate) {
      point.verdict = "hypothesis-failure";
      all_ok = false;
      report.points.push_back(point);
      continue;
    }
    const auto& prof = point.profile;
    const double nd = static_cast<double>(point.n);
    const double centre = nd * prof.mean_y + prof.r * (prof.sigma_y / prof.sigma_x) *
                                                 (static_cast<double>(ens.target) - nd * prof.mean_x);
    const double scale = std::sqrt(nd) * prof.tau;
    const auto draws = sample_conditional(ens, samples_per_n, master_seed, g, workers);
    const double den = static_cast<double>(ens.model.y_denominator);
    std::vector<double> z(draws.t.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (static_cast<double>(draws.t[i]) / den - centre) / scale;
    std::sort(z.begin(), z.end());
    point.samples = z.size();
    point.d = stats::kolmogorov_distance_normal(z);
    point.d_sqrt_n = point.d * std::sqrt(nd);
    point.ci = stats::dkw_halfwidth(point.samples, 0.05);
    if (point.n <= exact_max_n) {
      try {
        point.exact_d = exact_kolmogorov_distance(exact_conditional_pmf(ens, 1e7), centre, scale);
      } catch (const std::exception&) {
        point.exact_d = kNaN;
      }
    }
    if (with_moments) {
      point.moments = conditional_moment_report(ens, prof, draws.t, derive_seed(master_seed, kBootstrapStream, g));
    }
    point.verdict = "ok";
    lo = std::min(lo, point.d_sqrt_n);
    hi = std::max(hi, point.d_sqrt_n);
    report.points.push_back(point);
  }
  if (hi > 0.0) report.flatness = hi / lo;
  report.passed = all_ok && !report.points.empty() && report.flatness <= 2.0;
  return report;
}

// -------------------------------------------------------------------- constants

double gaussian_moment_integral() {
  const int intervals = 1200;
  const double top = 24.0 * std::sqrt(6.0);
  const double h = top / intervals;
  std::vector<double> weight(intervals + 1), gauss(intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    const double s = i * h;
    weight[i] = integrand_sum_weight(i, intervals);
    gauss[i] = std::exp(-s * s / 24.0);
  }
  double acc = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double s = i * h;
    double row = 0.0;
    for (int j = 0; j <= intervals; ++j) {
      const double base = s + j * h + 1.0;
      row += weight[j] * gauss[j] * base * base * base;
    }
    acc += weight[i] * gauss[i] * row;
  }
  return 4.0 * acc * (h / 3.0) * (h / 3.0);
}

ConstantsLedger evaluate_constants(const MeasuredBounds& b) {
  ConstantsLedger L;
  L.measured = b;
  const double pi = std::numbers::pi;
  const double root_two_pi = std::sqrt(2.0 * pi);
  const double c2_cubed = b.c2 * b.c2 * b.c2;
  const double c4_cubed = b.c4 * b.c4 * b.c4;
  L.epsilon = std::min(2.0 / 9.0 * b.c1 * c2_cubed, pi);
  L.eta = std::min(2.0 / 9.0 * b.c3 * c4_cubed, b.eta0);
  L.n0 = std::max({3.0, c2_cubed * c2_cubed, c4_cubed * c4_cubed});
  L.gaussian_moment_integral = gaussian_moment_integral();
  L.big_c1 = L.c0 * (c2_cubed + c4_cubed) * L.gaussian_moment_integral / b.c5_tilde;
  const double m1 = std::min(1.0, b.c5);
  L.big_c2 = 2.0 / (b.c5_tilde * b.c5) * (root_two_pi / std::sqrt(m1) + 2.0 / (m1 * L.epsilon * b.c1_tilde));
  L.big_c3 = b.c5 * L.epsilon * L.epsilon * b.c1_tilde * b.c1_tilde / 2.0;
  L.big_c = L.big_c1 + L.big_c2 / std::sqrt(L.big_c3) * std::sqrt(0.5) * std::exp(-0.5);
  // int s^2 e^{-c s^2/2} = sqrt(2 pi) c^{-3/2}; int s^4 e^{-a s^2/2} = 3 sqrt(2 pi) a^{-5/2};
  // int |s| e^{-c s^2/2} = 2 / c.
  L.c7 = b.c2 * b.c2 * b.c3 * b.c4 / (2.0 * b.c5_tilde) * root_two_pi * std::pow(b.c5, -1.5);
  const double a = 2.0 * b.c5 / 3.0;
  L.c8_second = std::pow(b.c2, 4) * b.c3 * b.c3 * b.c4 * b.c4 / (4.0 * b.c5_tilde) * 3.0 * root_two_pi *
                std::pow(a, -2.5);
  L.c8_third = b.c3 / b.c5_tilde * (1.0 + b.c2 * b.c4 * b.c4) * (2.0 / b.c5);
  L.c8 = L.c7 + L.c8_second + L.c8_third;
  L.all_finite_positive = finite_positive(L.epsilon) && finite_positive(L.eta) && finite_positive(L.big_c1) &&
                          finite_positive(L.big_c2) && finite_positive(L.big_c3) && finite_positive(L.big_c) &&
                          finite_positive(L.c7) && finite_positive(L.c8_second) && finite_positive(L.c8_third) &&
                          finite_positive(L.n0);
  return L;
}

ConstantsLedger constants_ledger(const EnsembleFamily& family, const std::vector<std::int64_t>& n_grid,
                                 const CfGrid& cf_grid) {
  if (n_grid.empty()) throw DomainError("constants_ledger: empty N-grid");
  MeasuredBounds b;
  b.eta0 = cf_grid.eta0;
  b.c1_tilde = b.c3_tilde = b.c5 = b.c5_tilde = std::numeric_limits<double>::infinity();
  for (const auto n : n_grid) {
    const ConditionedEnsemble ens = family(n);
    const MomentProfile p = moment_profile(ens.model, n);
    b.c1 = std::max(b.c1, p.sigma_x);
    b.c1_tilde = std::min(b.c1_tilde, p.sigma_x);
    b.c2 = std::max(b.c2, std::cbrt(p.rho_x / std::pow(p.sigma_x, 3)));
    b.c3 = std::max(b.c3, p.sigma_y);
    b.c3_tilde = std::min(b.c3_tilde, p.sigma_y);
    b.c4 = std::max(b.c4, std::cbrt(p.rho_y / std::pow(p.sigma_y, 3)));
    b.c6 = std::max(b.c6, std::abs(p.r));
    b.c5 = std::min(b.c5, cf_bound_audit(ens.model, cf_grid).c5);
    b.c5_tilde = std::min(b.c5_tilde, prob_s_equals_k(ens).scaled_probability());
  }
  return evaluate_constants(b);
}

// ------------------------------------------------------------- tail brackets

YSampler hashing_y_sampler(double lambda) {
  IntegerLaw::borel(lambda);  // validates lambda
  return [lambda](Rng& rng) { return hashing::sample_pair_xy(lambda, rng).y; };
}

double adversarial_log_mass(double lambda, double y, std::int64_t m_max) {
  const IntegerLaw law = IntegerLaw::borel(lambda);
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t m = 1; m <= m_max; ++m) {
    // m!/2^k falls with k, so the smallest admissible k is the best one.
    for (std::int64_t k = 0; 2 * k <= m; ++k) {
      if (static_cast<double>(k * (m - k)) < y) continue;
      const double md = static_cast<double>(m);
      const double value = law.log_pmf(m + 1) + std::lgamma(md + 1.0) - static_cast<double>(k) * std::numbers::ln2 -
                           md * std::log(md + 1.0);
      best = std::max(best, value);
      break;
    }
  }
  return best;
}

LdReport tail_log_bracket(const YSampler& sampler, double lambda, const std::vector<double>& y_grid,
                          std::uint64_t sample_budget, std::uint64_t master_seed, int workers, double tolerance,
                          double min_prob) {
  LdReport report;
  report.bracket = tail_bracket(lambda);
  report.tolerance = tolerance;
  if (sample_budget == 0) throw StatisticalPowerError("tail_log_bracket: empty sample budget");

  constexpr std::uint64_t kTailChunk = 1 << 16;
  const std::size_t chunks = static_cast<std::size_t>((sample_budget + kTailChunk - 1) / kTailChunk);
  std::vector<std::map<std::int64_t, std::uint64_t>> histograms(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    const std::uint64_t size = std::min<std::uint64_t>(kTailChunk, sample_budget - c * kTailChunk);
    Rng rng(derive_seed(master_seed, c, 0));
    auto& h = histograms[c];
    for (std::uint64_t i = 0; i < size; ++i) ++h[sampler(rng)];
  });
  std::map<std::int64_t, std::uint64_t> histogram;
  for (const auto& h : histograms) {
    for (const auto& [y, c] : h) histogram[y] += c;
  }

  const double threshold = std::max(30.0, min_prob * static_cast<double>(sample_budget));
  bool all_inside = true;
  for (const double y : y_grid) {
    LdPoint p;
    p.y = y;
    p.samples = sample_budget;
    for (auto it = histogram.lower_bound(static_cast<std::int64_t>(std::ceil(y))); it != histogram.end(); ++it) {
      p.count += it->second;
    }
    p.prob = static_cast<double>(p.count) / static_cast<double>(sample_budget);
    p.lower = -report.bracket.beta - tolerance;
    p.upper = -report.bracket.alpha + tolerance;
    p.log_lower_mass = adversarial_log_mass(lambda, y);
    const double root = std::sqrt(y);
    if (p.count > 0 && y > 0.0) {
      p.normalized = std::log(p.prob) / root;
      const auto [lo, hi] = stats::wilson_interval(p.count, sample_budget);
      p.ci_low = std::log(lo) / root;
      p.ci_high = std::log(hi) / root;
    }
    if (y < 1.0) {
      p.verdict = "excluded";
    } else if (static_cast<double>(p.count) < threshold) {
      p.verdict = "unobservable";
    } else {
      ++report.observable;
      const bool inside = p.normalized >= p.lower && p.normalized <= p.upper;
      p.verdict = inside ? "inside" : "outside";
      all_inside = all_inside && inside;
    }
    report.points.push_back(p);
  }
  report.all_inside = all_inside && report.observable > 0;
  return report;
}

std::vector<AdversarialCheck> adversarial_mass_check(double lambda, std::int64_t m_max) {
  if (m_max > 8) throw ResourceError("adversarial_mass_check: m_max is capped at 8");
  const IntegerLaw law = IntegerLaw::borel(lambda);
  std::vector<AdversarialCheck> out;
  for (std::int64_t m = 1; m <= m_max; ++m) {
    for (std::int64_t k = 0; 2 * k <= m; ++k) {
      AdversarialCheck c;
      c.m = m;
      c.k = k;
      c.y = k * (m - k);
      const double md = static_cast<double>(m);
      c.lower_mass = std::exp(law.log_pmf(m + 1) + std::lgamma(md + 1.0) -
                              static_cast<double>(k) * std::numbers::ln2 - md * std::log(md + 1.0));
      c.exact_block_tail = law.pmf(m + 1) * hashing::displacement_law(m).tail(c.y);
      for (std::int64_t x = 1; x <= 9; ++x) {
        c.exact_tail_lower += law.pmf(x) * hashing::displacement_law(x - 1).tail(c.y);
      }
      c.holds = c.lower_mass <= c.exact_block_tail * (1.0 + 1e-12) &&
                c.exact_block_tail <= c.exact_tail_lower * (1.0 + 1e-12);
      out.push_back(c);
    }
  }
  return out;
}

// ------------------------------------------------------------------ big jumps

namespace {

struct JumpTally {
  std::vector<std::uint64_t> exceed, zero, one, two, jumps;
  std::uint64_t summands = 0;

  explicit JumpTally(std::size_t points)
      : exceed(points, 0), zero(points, 0), one(points, 0), two(points, 0), jumps(points, 0) {}

  void add(double centred, const std::vector<std::int64_t>& ys, const std::vector<double>& z_grid, double den) {
    summands += ys.size();
    for (std::size_t j = 0; j < z_grid.size(); ++j) {
      const double half = z_grid[j] / 2.0;
      std::uint64_t big = 0;
      for (const auto y : ys) {
        if (static_cast<double>(y) / den >= half) ++big;
      }
      jumps[j] += big;
      if (centred >= z_grid[j]) {
        ++exceed[j];
        if (big == 0) {
          ++zero[j];
        } else if (big == 1) {
          ++one[j];
        } else {
          ++two[j];
        }
      }
    }
  }

  void merge(const JumpTally& o) {
    for (std::size_t j = 0; j < exceed.size(); ++j) {
      exceed[j] += o.exceed[j];
      zero[j] += o.zero[j];
      one[j] += o.one[j];
      two[j] += o.two[j];
      jumps[j] += o.jumps[j];
    }
    summands += o.summands;
  }
};

BigJumpReport finish_big_jump(const JumpTally& tally, const std::vector<double>& z_grid, std::int64_t n,
                              std::uint64_t samples, double mean_y, bool conditional,
                              std::uint64_t min_exceedances) {
  BigJumpReport r;
  r.n = n;
  r.samples = samples;
  r.mean_y = mean_y;
  r.conditional = conditional;
  r.single_jump_dominates = true;
  r.nondecreasing = true;
  for (std::size_t j = 0; j < z_grid.size(); ++j) {
    if (tally.exceed[j] < min_exceedances) {
      throw StatisticalPowerError("big_jump_diagnostic: " + std::to_string(tally.exceed[j]) +
                                  " exceedances at z = " + std::to_string(z_grid[j]) + ", need " +
                                  std::to_string(min_exceedances));
    }
    BigJumpPoint p;
    p.z = z_grid[j];
    p.exceedances = tally.exceed[j];
    const double e = static_cast<double>(tally.exceed[j]);
    p.share_zero = static_cast<double>(tally.zero[j]) / e;
    p.share_one = static_cast<double>(tally.one[j]) / e;
    p.share_two_plus = static_cast<double>(tally.two[j]) / e;
    p.jump_prob = static_cast<double>(tally.jumps[j]) / static_cast<double>(tally.summands);
    p.exceed_prob = e / static_cast<double>(samples);
    const double expected_jumps = static_cast<double>(n) * p.jump_prob;
    p.two_jump_bound = expected_jumps * expected_jumps / p.exceed_prob;
    p.two_jump_ok = p.share_two_plus <= p.two_jump_bound;
    r.single_jump_dominates = r.single_jump_dominates && p.share_one > 0.5;
    if (!r.points.empty() && p.share_one < r.points.back().share_one) r.nondecreasing = false;
    r.points.push_back(p);
  }
  r.passed = r.single_jump_dominates && r.nondecreasing && !r.points.empty();
  return r;
}

}  // namespace

BigJumpReport big_jump_diagnostic(const PairModel& model, std::int64_t n_summands,
                                  const std::vector<double>& z_grid, std::uint64_t samples,
                                  std::uint64_t master_seed, int workers, std::uint64_t min_exceedances) {
  if (n_summands < 1) throw DomainError("big_jump_diagnostic: n_summands must be positive");
  const double mean_y = model_mean_y(model);
  const double den = static_cast<double>(model.y_denominator);
  constexpr std::uint64_t kJumpChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((samples + kJumpChunk - 1) / kJumpChunk);
  std::vector<JumpTally> tallies(chunks, JumpTally(z_grid.size()));
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    const std::uint64_t size = std::min<std::uint64_t>(kJumpChunk, samples - c * kJumpChunk);
    Rng rng(derive_seed(master_seed, c, 0));
    std::vector<std::int64_t> ys(static_cast<std::size_t>(n_summands));
    for (std::uint64_t i = 0; i < size; ++i) {
      std::int64_t t = 0;
      for (auto& y : ys) {
        const auto x = sample(model.x_law, rng).value;
        y = model.y_sample(x, rng);
        t += y;
      }
      tallies[c].add(static_cast<double>(t) / den - static_cast<double>(n_summands) * mean_y, ys, z_grid, den);
    }
  });
  JumpTally total(z_grid.size());
  for (const auto& t : tallies) total.merge(t);
  return finish_big_jump(total, z_grid, n_summands, samples, mean_y, false, min_exceedances);
}

BigJumpReport big_jump_diagnostic(const ConditionedEnsemble& ens, const std::vector<double>& z_grid,
                                  std::uint64_t samples, std::uint64_t master_seed, int workers,
                                  std::uint64_t min_exceedances) {
  const double mean_y = model_mean_y(ens.model);
  const double den = static_cast<double>(ens.model.y_denominator);
  const std::int64_t n = ens.n_summands;
  constexpr std::uint64_t kJumpChunk = 4096;
  const std::size_t chunks = static_cast<std::size_t>((samples + kJumpChunk - 1) / kJumpChunk);
  std::vector<JumpTally> tallies(chunks, JumpTally(z_grid.size()));
  const bool direct = has_direct_sampler(ens.model);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    const std::uint64_t size = std::min<std::uint64_t>(kJumpChunk, samples - c * kJumpChunk);
    Rng rng(derive_seed(master_seed, c, 0));
    ConditionalSamples draws;
    if (direct) {
      draws = direct_sample_conditional(ens, size, rng, true);
    } else {
      RejectionOptions options;
      options.keep_summands = true;
      options.predict_rate = false;
      draws = rejection_sample_conditional(ens, size, rng, options);
    }
    for (std::size_t i = 0; i < draws.t.size(); ++i) {
      tallies[c].add(static_cast<double>(draws.t[i]) / den - static_cast<double>(n) * mean_y, draws.y[i], z_grid,
                     den);
    }
  });
  JumpTally total(z_grid.size());
  for (const auto& t : tallies) total.merge(t);
  return finish_big_jump(total, z_grid, n, samples, mean_y, true, min_exceedances);
}

LdReport conditional_ld_check(const ConditionedEnsemble& ens, const std::vector<double>& y_grid,
                              std::uint64_t samples, std::uint64_t master_seed, int workers, double tolerance) {
  LdReport report;
  report.tolerance = tolerance;
  bool have_bracket = false;
  if (ens.model.x_law.kind() == LawKind::borel) {
    try {
      report.bracket = tail_bracket(ens.model.x_law.parameter());
      have_bracket = true;
    } catch (const DomainError&) {
      have_bracket = false;
    }
  }
  const std::int64_t n = ens.n_summands;
  const double nd = static_cast<double>(n);
  const double den = static_cast<double>(ens.model.y_denominator);

  const auto draws = sample_conditional(ens, samples, master_seed, 0, workers);
  std::vector<double> t(draws.t.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(draws.t[i]) / den;
    mean += t[i];
  }
  mean /= static_cast<double>(t.size());

  // Unconditioned sums of the same model, centred by their own mean.
  constexpr std::uint64_t kChunkSize = 4096;
  const std::size_t chunks = static_cast<std::size_t>((samples + kChunkSize - 1) / kChunkSize);
  std::vector<std::vector<double>> parts(chunks);
  for_each_chunk(chunks, workers, [&](std::size_t c) {
    const std::uint64_t size = std::min<std::uint64_t>(kChunkSize, samples - c * kChunkSize);
    Rng rng(derive_seed(master_seed, c, kUnconditionalStream));
    auto& part = parts[c];
    part.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) {
      std::int64_t sum = 0;
      for (std::int64_t j = 0; j < n; ++j) sum += ens.model.y_sample(sample(ens.model.x_law, rng).value, rng);
      part.push_back(static_cast<double>(sum) / den);
    }
  });
  std::vector<double> u;
  u.reserve(samples);
  for (const auto& part : parts) u.insert(u.end(), part.begin(), part.end());
  double u_mean = 0.0;
  for (const double v : u) u_mean += v;
  u_mean /= static_cast<double>(u.size());

  std::optional<ConditionalLaw> exact;
  try {
    exact = exact_conditional_pmf(ens, 1e7);
  } catch (const std::exception&) {
    exact.reset();
  }

  const double root_n = std::sqrt(nd);
  bool all_inside = true;
  for (const double y : y_grid) {
    LdPoint p;
    p.y = y;
    p.samples = t.size();
    const double cut = nd * y;
    for (const double v : t) p.count += (v - mean >= cut) ? 1 : 0;
    p.prob = static_cast<double>(p.count) / static_cast<double>(p.samples);
    if (p.count > 0) {
      p.normalized = std::log(p.prob) / root_n;
      const auto [lo, hi] = stats::wilson_interval(p.count, p.samples);
      p.ci_low = std::log(lo) / root_n;
      p.ci_high = std::log(hi) / root_n;
    }
    std::uint64_t u_count = 0;
    for (const double v : u) u_count += (v - u_mean >= cut) ? 1 : 0;
    if (u_count > 0) {
      p.unconditional_normalized = std::log(static_cast<double>(u_count) / static_cast<double>(u.size())) / root_n;
      const auto [lo, hi] = stats::wilson_interval(u_count, u.size());
      p.unconditional_ci_low = std::log(lo) / root_n;
      p.unconditional_ci_high = std::log(hi) / root_n;
    }
    if (exact) {
      const double exact_mean = exact->mean();
      p.exact_prob = 1.0 - exact->cdf(exact_mean + cut - 1e-9 / den);
      p.exact_prob = std::max(0.0, p.exact_prob);
    }
    if (have_bracket) {
      p.lower = -report.bracket.beta * std::sqrt(y) - tolerance;
      p.upper = -report.bracket.alpha * std::sqrt(y) + tolerance;
    }
    if (p.count < 30) {
      p.verdict = "unobservable";
    } else if (!have_bracket) {
      p.verdict = "no-bracket";
    } else {
      ++report.observable;
      const bool inside = p.normalized >= p.lower && p.normalized <= p.upper;
      p.verdict = inside ? "inside" : "outside";
      all_inside = all_inside && inside;
    }
    report.points.push_back(p);
  }
  report.all_inside = all_inside && report.observable > 0;
  return report;
}

}  // namespace condlaw
