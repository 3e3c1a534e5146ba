#include "condlaw/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "condlaw/conditional.hpp"
#include "condlaw/errors.hpp"
#include "condlaw/fourier.hpp"
#include "condlaw/hashing.hpp"
#include "condlaw/limits.hpp"
#include "condlaw/models.hpp"
#include "condlaw/rng.hpp"

namespace condlaw::cli {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(const std::string& s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  // 1e7 and 100000.0 are accepted when integral
  auto d = parse_double(s);
  if (d && std::isfinite(*d) && *d == std::floor(*d) && std::abs(*d) < 9.0e18) return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw std::invalid_argument("expected a string, number or boolean");
}

// Typed access to a Config. Problems are collected, not thrown, so that
// finish() can report every offending field at once.
class Reader {
 public:
  Reader(const Config& in, const std::string& experiment) : in_(in) {
    used_.insert("experiment");
    auto it = in.values.find("experiment");
    if (it != in.values.end() && it->second != experiment)
      problems_.push_back(fmt::format("experiment: config names '{}' but '{}' was requested", it->second, experiment));
    out_.values["experiment"] = experiment;
  }

  bool has(const std::string& key) const { return in_.has(key); }

  std::string text(const std::string& key, const std::string& fallback) {
    std::string raw;
    if (!fetch(key, raw)) raw = fallback;
    out_.values[key] = raw;
    return raw;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    std::string raw = text(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), raw) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      problem(key, raw, "expected one of " + list);
    }
    return raw;
  }

  double real(const std::string& key, double fallback) {
    std::string raw;
    if (!fetch(key, raw)) {
      out_.values[key] = fmt::format("{}", fallback);
      return fallback;
    }
    out_.values[key] = raw;
    auto v = parse_double(raw);
    if (!v || !std::isfinite(*v)) {
      problem(key, raw, "expected a finite number");
      return fallback;
    }
    return *v;
  }

  std::optional<double> optional_real(const std::string& key) {
    if (!in_.has(key)) {
      used_.insert(key);
      return std::nullopt;
    }
    return real(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min_value,
                       std::int64_t max_value = std::numeric_limits<std::int64_t>::max()) {
    std::string raw;
    if (!fetch(key, raw)) {
      out_.values[key] = fmt::format("{}", fallback);
      return fallback;
    }
    out_.values[key] = raw;
    auto v = parse_int(raw);
    if (!v) {
      problem(key, raw, "expected an integer");
      return fallback;
    }
    if (*v < min_value || *v > max_value) {
      problem(key, raw, fmt::format("expected a value in [{}, {}]", min_value, max_value));
      return fallback;
    }
    return *v;
  }

  std::optional<std::int64_t> optional_integer(const std::string& key, std::int64_t min_value) {
    if (!in_.has(key)) {
      used_.insert(key);
      return std::nullopt;
    }
    return integer(key, 0, min_value);
  }

  std::uint64_t seed() {
    if (seed_) return *seed_;
    seed_ = 1;
    std::string raw;
    if (!fetch("seed", raw)) {
      out_.values["seed"] = "1";
      return 1;
    }
    out_.values["seed"] = raw;
    std::uint64_t v = 0;
    const auto* end = raw.data() + raw.size();
    auto [ptr, ec] = std::from_chars(raw.data(), end, v);
    if (ec != std::errc() || ptr != end) problem("seed", raw, "expected an unsigned 64-bit integer");
    seed_ = v;
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    const std::string raw = choice(key, fallback ? "true" : "false", {"true", "false"});
    return raw == "true";
  }

  std::vector<double> reals(const std::string& key, const std::string& fallback) {
    const std::string raw = text(key, fallback);
    std::vector<double> out;
    for (const auto& item : split_list(raw)) {
      if (item.find(':') != std::string::npos) {
        auto parts = split_range(item);
        auto a = parts.size() == 3 ? parse_double(parts[0]) : std::nullopt;
        auto b = parts.size() == 3 ? parse_double(parts[1]) : std::nullopt;
        auto s = parts.size() == 3 ? parse_double(parts[2]) : std::nullopt;
        if (!a || !b || !s || !(*s > 0.0) || *b < *a) {
          problem(key, raw, "range '" + item + "' must read start:stop:step with step > 0");
          continue;
        }
        const auto count = static_cast<std::int64_t>(std::floor((*b - *a) / *s + 1e-9));
        for (std::int64_t i = 0; i <= count; ++i) out.push_back(*a + static_cast<double>(i) * *s);
        continue;
      }
      auto v = parse_double(item);
      if (!v || !std::isfinite(*v)) {
        problem(key, raw, "'" + item + "' is not a number");
        continue;
      }
      out.push_back(*v);
    }
    return out;
  }

  std::vector<std::int64_t> integers(const std::string& key, const std::string& fallback, std::int64_t min_value) {
    const std::string raw = text(key, fallback);
    std::vector<std::int64_t> out;
    for (const auto& item : split_list(raw)) {
      if (item.find(':') != std::string::npos) {
        auto parts = split_range(item);
        auto a = parts.size() == 3 ? parse_int(parts[0]) : std::nullopt;
        auto b = parts.size() == 3 ? parse_int(parts[1]) : std::nullopt;
        auto s = parts.size() == 3 ? parse_int(parts[2]) : std::nullopt;
        if (!a || !b || !s || *s <= 0 || *b < *a) {
          problem(key, raw, "range '" + item + "' must read start:stop:step with step > 0");
          continue;
        }
        for (std::int64_t v = *a; v <= *b; v += *s) out.push_back(v);
        continue;
      }
      auto v = parse_int(item);
      if (!v) {
        problem(key, raw, "'" + item + "' is not an integer");
        continue;
      }
      out.push_back(*v);
    }
    for (auto v : out)
      if (v < min_value) {
        problem(key, raw, fmt::format("entries must be at least {}", min_value));
        break;
      }
    return out;
  }

  void problem(const std::string& key, const std::string& raw, const std::string& what) {
    problems_.push_back(fmt::format("{}: {} (got '{}')", key, what, raw));
  }

  /// Throws ConfigError listing every problem, unknown keys included.
  const Config& finish() {
    for (const auto& [key, value] : in_.values)
      if (!used_.count(key)) problems_.push_back(fmt::format("{}: unknown key for this experiment", key));
    if (!problems_.empty()) throw ConfigError(problems_);
    return out_;
  }

 private:
  bool fetch(const std::string& key, std::string& raw) {
    used_.insert(key);
    auto it = in_.values.find(key);
    if (it == in_.values.end()) return false;
    raw = it->second;
    return true;
  }

  static std::vector<std::string> split_range(const std::string& item) {
    std::vector<std::string> parts;
    std::stringstream ss(item);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(trim(p));
    return parts;
  }

  const Config& in_;
  Config out_;
  std::set<std::string> used_;
  std::vector<std::string> problems_;
  std::optional<std::uint64_t> seed_;
};

// ------------------------------------------------------------------ models

struct ModelKeys {
  std::string family;
  double parameter = 0.0;
  std::string mark;
  std::int64_t tree_size = 1;
};

const std::vector<std::string> kFamilies = {"occupancy", "hashing", "forest", "poisson", "borel", "geometric"};

ModelKeys read_model(Reader& r, const std::string& family_default, double parameter_default) {
  ModelKeys k;
  k.family = r.choice("family", family_default, kFamilies);
  k.parameter = r.real(k.family == "geometric" ? "p" : "lambda", parameter_default);
  if (k.family == "poisson" || k.family == "borel" || k.family == "geometric") k.mark = r.text("mark", "empty");
  if (k.family == "forest") k.tree_size = r.integer("tree_size", 1, 1);
  return k;
}

PairModel build_model(const ModelKeys& k) {
  if (k.family == "forest") return forest_model(k.parameter, k.tree_size);
  return make_model(k.family, k.parameter, k.mark);
}

struct EnsembleKeys {
  ModelKeys model;
  std::optional<double> k_ratio;
  bool mean_match = true;
};

EnsembleKeys read_ensemble(Reader& r, const std::string& family_default, double parameter_default) {
  EnsembleKeys e;
  e.model = read_model(r, family_default, parameter_default);
  e.k_ratio = r.optional_real("k_ratio");
  e.mean_match = r.choice("tilt", "mean-match", {"mean-match", "fixed"}) == "mean-match";
  return e;
}

EnsembleFamily build_family(const EnsembleKeys& e) {
  PairModel model = build_model(e.model);
  const double ratio = e.k_ratio.value_or(model.x_law.mean());
  const bool match = e.mean_match;
  return [model, ratio, match](std::int64_t n) {
    const auto k = static_cast<std::int64_t>(std::llround(ratio * static_cast<double>(n)));
    if (match) return mean_match_tilt(model, n, k);
    return ConditionedEnsemble{model, n, k, std::nullopt};
  };
}

json nan_to_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ------------------------------------------------------------- experiments

void hashing_sim(Reader& r, RunReport& rep, int) {
  const std::int64_t m = r.integer("m", 10, 2);
  std::vector<std::int64_t> fixed;
  std::int64_t balls = 0, trials = 1;
  if (r.has("sequence")) {
    fixed = r.integers("sequence", "", 1);
    if (fixed.empty()) r.problem("sequence", "", "must not be empty");
  } else {
    balls = r.integer("balls", m - 1, 0, m - 1);
    trials = r.integer("trials", 1, 0);
  }
  const std::uint64_t seed = r.seed();
  rep.config = r.finish();

  rep.columns = {"trial", "ball", "address", "cell", "displacement", "block_start"};
  bool agree = true;
  json per_trial = json::array();
  for (std::int64_t trial = 0; trial < (fixed.empty() ? trials : 1); ++trial) {
    std::vector<std::int64_t> addresses = fixed;
    if (fixed.empty()) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(trial), 0));
      for (std::int64_t i = 0; i < balls; ++i) addresses.push_back(static_cast<std::int64_t>(rng.below(m)) + 1);
    }
    const auto seq = hashing::make_hash_sequence(m, addresses);
    const auto ins = hashing::insert_all(seq);
    const auto dec = hashing::block_decompose(ins);
    std::vector<std::int64_t> start_of(static_cast<std::size_t>(m + 1), 0);
    json lengths = json::array();
    for (const auto& b : dec.blocks) {
      lengths.push_back(b.length);
      for (std::int64_t j = 0; j + 1 < b.length; ++j) start_of[(b.first_cell - 1 + j) % m + 1] = b.first_cell;
    }
    for (std::size_t i = 0; i < addresses.size(); ++i) {
      const std::int64_t cell = ins.final_cells[i];
      rep.rows.push_back({trial + 1, static_cast<std::int64_t>(i + 1), addresses[i], cell, ins.displacements[i],
                          start_of[cell]});
    }
    bool ok = hashing::total_displacement(m, addresses) == ins.total;
    if (seq.size() + 1 == m) ok = ok && hashing::displacement_via_profile(seq).total == ins.total;
    agree = agree && ok;
    per_trial.push_back({{"trial", trial + 1}, {"total", ins.total}, {"block_lengths", lengths}});
  }
  rep.summary["trials"] = per_trial;
  if (!per_trial.empty()) rep.verdicts.emplace_back("profile_formula_matches_simulation", agree);
}

void enumerate(Reader& r, RunReport& rep, int workers) {
  const std::int64_t n = r.integer("n", 3, 1, 9);
  rep.config = r.finish();

  const auto law = hashing::enumerate_all(n, 9, workers);
  rep.columns = {"displacement", "count", "probability"};
  for (std::size_t d = 0; d < law.counts.size(); ++d)
    rep.rows.push_back({static_cast<std::int64_t>(d), static_cast<std::int64_t>(law.counts[d]),
                        law.probability(static_cast<std::int64_t>(d))});
  const double expected = hashing::expected_full_table_displacement(n);
  rep.summary["sequences"] = law.sequences;
  rep.summary["max_displacement"] = law.max_displacement;
  rep.summary["mean"] = law.mean();
  rep.summary["expected_mean"] = expected;
  rep.verdicts.emplace_back("sequence_count", hashing::BigInt(law.sequences) == hashing::sequence_count(n));
  rep.verdicts.emplace_back("max_displacement", law.max_displacement == n * (n - 1) / 2);
  rep.verdicts.emplace_back("mean_matches_closed_form", std::abs(law.mean() - expected) <= 1e-9 * std::max(1.0, expected));
}

void berry_esseen(Reader& r, RunReport& rep, int workers) {
  const auto keys = read_ensemble(r, "occupancy", 2.0);
  const auto grid = r.integers("n_grid", "100,400,1600", 1);
  const std::int64_t samples = r.integer("samples", 100000, 1);
  const std::int64_t exact_max_n = r.integer("exact_max_n", 8, 0);
  const bool moments = r.flag("moments", true);
  const std::uint64_t seed = r.seed();
  rep.config = r.finish();

  rep.columns = {"N", "samples", "D", "DsqrtN", "ci"};
  if (grid.empty()) return;
  const auto report = berry_esseen_sweep(build_family(keys), grid, static_cast<std::uint64_t>(samples), seed,
                                         workers, moments, exact_max_n);
  bool all_ok = true;
  for (const auto& p : report.points) {
    rep.rows.push_back({p.n, static_cast<std::int64_t>(p.samples), p.d, p.d_sqrt_n, p.ci});
    json d = {{"exact_D", nan_to_null(p.exact_d)}, {"tau", p.profile.tau}, {"r", p.profile.r},
              {"l1", p.profile.l1}, {"l2", p.profile.l2}, {"verdict", p.verdict}};
    if (p.moments) {
      d["mean_hat"] = p.moments->mean_hat;
      d["mean_prediction"] = p.moments->mean_prediction;
      d["mean_deviation"] = p.moments->mean_deviation;
      d["mean_ci"] = p.moments->mean_ci;
      d["var_hat"] = p.moments->var_hat;
      d["var_prediction"] = p.moments->var_prediction;
      d["var_deviation_scaled"] = p.moments->var_deviation_scaled;
      d["var_ci"] = p.moments->var_ci;
    }
    rep.row_details.push_back(d);
    all_ok = all_ok && p.verdict == "ok";
  }
  rep.summary["flatness"] = nan_to_null(report.flatness);
  rep.verdicts.emplace_back("hypotheses", all_ok);
  rep.verdicts.emplace_back("flatness_at_most_2", report.flatness <= 2.0);
  if (auto g = moment_growth(report)) {
    rep.summary["moment_growth"] = {{"mean_first", g->mean_first}, {"mean_last", g->mean_last},
                                    {"mean_allowance", g->mean_allowance}, {"var_first", g->var_first},
                                    {"var_last", g->var_last}, {"var_allowance", g->var_allowance}};
    rep.verdicts.emplace_back("mean_deviation_bounded", g->mean_bounded);
    rep.verdicts.emplace_back("variance_deviation_bounded", g->var_bounded);
  }
}

void add_ld_rows(RunReport& rep, const LdReport& ld) {
  for (const auto& p : ld.points) {
    rep.rows.push_back({p.y, static_cast<std::int64_t>(p.count), static_cast<std::int64_t>(p.samples), p.prob,
                        p.normalized, p.ci_low, p.ci_high, p.lower, p.upper, p.verdict});
    rep.row_details.push_back({{"log_lower_mass", nan_to_null(p.log_lower_mass)}});
  }
}

void tails(Reader& r, RunReport& rep, int workers) {
  const double lambda = r.real("lambda", 0.3);
  const auto grid = r.reals("y_grid", "1,2,5,10,20,50,100");
  const std::int64_t budget = r.integer("budget", 10'000'000, 1);
  const double tol = r.real("tolerance", 0.15);
  const double min_prob = r.real("min_prob", 3e-5);
  const std::int64_t adversarial = r.integer("adversarial_m_max", 0, 0, 8);
  const std::uint64_t seed = r.seed();
  rep.config = r.finish();

  const YSampler sampler = hashing_y_sampler(lambda);
  rep.columns = {"y", "count", "samples", "prob", "normalized", "ci_low", "ci_high", "lower", "upper", "verdict"};
  const TailBracket br = tail_bracket(lambda);
  rep.summary["alpha"] = br.alpha;
  rep.summary["beta"] = br.beta;
  if (!grid.empty()) {
    const auto ld = tail_log_bracket(sampler, lambda, grid, static_cast<std::uint64_t>(budget), seed, workers, tol,
                                     min_prob);
    add_ld_rows(rep, ld);
    rep.summary["observable"] = ld.observable;
    rep.verdicts.emplace_back("bracket", ld.all_inside);
  }
  if (adversarial > 0) {
    bool holds = true;
    json checks = json::array();
    for (const auto& c : adversarial_mass_check(lambda, adversarial)) {
      checks.push_back({{"m", c.m}, {"k", c.k}, {"y", c.y}, {"lower_mass", c.lower_mass},
                        {"exact_block_tail", c.exact_block_tail}, {"holds", c.holds}});
      holds = holds && c.holds;
    }
    rep.summary["adversarial"] = checks;
    rep.verdicts.emplace_back("lower_mass_valid", holds);
  }
}

void ld_conditional(Reader& r, RunReport& rep, int workers) {
  const double lambda = r.real("lambda", 0.3);
  const std::int64_t n = r.integer("n", 50, 1);
  const auto k = r.optional_integer("k", 1);
  const auto y_grid = r.reals("y_grid", "0.1,0.2,0.4,0.8");
  const auto z_grid = r.reals("z_grid", "");
  const std::string conditioning = r.choice("jump_conditioning", "conditional", {"conditional", "unconditional"});
  const std::int64_t samples = r.integer("samples", 200000, 1);
  const std::int64_t min_exceed = r.integer("min_exceedances", 100, 1);
  const double tol = r.real("tolerance", 0.15);
  const std::uint64_t seed = r.seed();
  rep.config = r.finish();

  const PairModel model = hashing_model(lambda);
  const std::int64_t target =
      k.value_or(static_cast<std::int64_t>(std::llround(model.x_law.mean() * static_cast<double>(n))));
  const ConditionedEnsemble ens = mean_match_tilt(model, n, target);
  rep.summary["target"] = target;
  rep.summary["tilted_lambda"] = *ens.tilt;
  rep.columns = {"statistic", "threshold", "count", "samples", "value", "ci_low", "ci_high", "lower", "upper", "verdict"};
  const auto s = static_cast<std::uint64_t>(samples);
  if (!y_grid.empty()) {
    const auto ld = conditional_ld_check(ens, y_grid, s, seed, workers, tol);
    for (const auto& p : ld.points) {
      rep.rows.push_back({std::string("conditional_log_tail"), p.y, static_cast<std::int64_t>(p.count),
                          static_cast<std::int64_t>(p.samples), p.normalized, p.ci_low, p.ci_high, p.lower,
                          p.upper, p.verdict});
      rep.row_details.push_back({{"prob", p.prob}, {"exact_prob", nan_to_null(p.exact_prob)}});
      rep.rows.push_back({std::string("unconditional_log_tail"), p.y, std::string(),
                          static_cast<std::int64_t>(p.samples), p.unconditional_normalized, p.unconditional_ci_low,
                          p.unconditional_ci_high, p.lower, p.upper, std::string("reference")});
      rep.row_details.push_back(json::object());
    }
    rep.summary["alpha"] = ld.bracket.alpha;
    rep.summary["beta"] = ld.bracket.beta;
    rep.verdicts.emplace_back("bracket", ld.all_inside);
  }
  if (!z_grid.empty()) {
    const auto bj = conditioning == "conditional"
                        ? big_jump_diagnostic(ens, z_grid, s, seed, workers, static_cast<std::uint64_t>(min_exceed))
                        : big_jump_diagnostic(model, n, z_grid, s, seed, workers, static_cast<std::uint64_t>(min_exceed));
    for (const auto& p : bj.points) {
      rep.rows.push_back({std::string("single_jump_share"), p.z, static_cast<std::int64_t>(p.exceedances),
                          static_cast<std::int64_t>(bj.samples), p.share_one, kNaN, kNaN, 0.5, 1.0,
                          std::string(p.share_one > 0.5 ? "dominant" : "not-dominant")});
      rep.row_details.push_back({{"share_zero", p.share_zero}, {"share_two_plus", p.share_two_plus},
                                 {"jump_prob", p.jump_prob}, {"exceed_prob", p.exceed_prob},
                                 {"two_jump_bound", p.two_jump_bound}});
    }
    rep.summary["mean_y"] = bj.mean_y;
    rep.verdicts.emplace_back("single_jump_dominates", bj.single_jump_dominates);
    rep.verdicts.emplace_back("single_jump_share_nondecreasing", bj.nondecreasing);
  }
}

void exact_conditional(Reader& r, RunReport& rep, int) {
  const auto keys = read_ensemble(r, "occupancy", 1.0);
  const std::int64_t n = r.integer("n", 10, 1);
  const auto k = r.optional_integer("k", 0);
  const double budget = r.real("cell_budget", 1e8);
  rep.config = r.finish();

  ConditionedEnsemble ens;
  if (k) {
    const PairModel model = build_model(keys.model);
    ens = keys.mean_match ? mean_match_tilt(model, n, *k) : ConditionedEnsemble{model, n, *k, std::nullopt};
  } else {
    ens = build_family(keys)(n);
  }
  const auto law = exact_conditional_pmf(ens, budget);
  rep.columns = {"t", "probability", "cdf"};
  double cdf = 0.0;
  for (std::size_t i = 0; i < law.probs.size(); ++i) {
    cdf += law.probs[i];
    rep.rows.push_back({static_cast<double>(law.t_numerators[i]) / static_cast<double>(law.denominator), law.probs[i],
                        std::min(cdf, 1.0)});
  }
  const auto local = prob_s_equals_k(ens);
  rep.summary["target"] = ens.target;
  rep.summary["tilt"] = ens.tilt ? json(*ens.tilt) : json(nullptr);
  rep.summary["p_s"] = law.p_s;
  rep.summary["mean"] = law.mean();
  rep.summary["variance"] = law.variance();
  rep.summary["local_limit"] = {{"v", local.v},
                                {"gaussian_prediction", local.gaussian_prediction},
                                {"ratio", local.ratio},
                                {"scaled_probability", local.scaled_probability()},
                                {"lower_bound_constant", local.lower_bound_constant},
                                {"method", local.method}};
  rep.verdicts.emplace_back("local_lower_bound", local.lower_bound_holds());
}

void audit_hypotheses(Reader& r, RunReport& rep, int) {
  const auto keys = read_ensemble(r, "occupancy", 2.0);
  const auto grid = r.integers("n_grid", "100,400,1600", 1);
  CfGrid cf;
  cf.s_points = static_cast<int>(r.integer("cf_s_points", cf.s_points, 3, 100001));
  cf.t_points = static_cast<int>(r.integer("cf_t_points", cf.t_points, 2, 100001));
  cf.eta0 = r.real("eta0", cf.eta0);
  rep.config = r.finish();

  rep.columns = {"N", "k", "sigma_x", "sigma_y", "r", "tau", "l1", "l2", "c5", "p_s", "scaled_probability",
                 "lower_bound_constant", "verdict"};
  if (grid.empty()) return;
  const auto family = build_family(keys);
  bool tau_ok = true, cf_ok = true, local_ok = true;
  for (const auto n : grid) {
    const auto ens = family(n);
    const auto prof = moment_profile(ens.model, n);
    const auto audit = cf_bound_audit(ens.model, cf);
    const auto local = prob_s_equals_k(ens);
    const bool ok = !prof.tau_degenerate && prof.integer_variance_bound && audit.passed && local.lower_bound_holds();
    tau_ok = tau_ok && !prof.tau_degenerate;
    cf_ok = cf_ok && audit.passed;
    local_ok = local_ok && local.lower_bound_holds();
    rep.rows.push_back({n, ens.target, prof.sigma_x, prof.sigma_y, prof.r, prof.tau, prof.l1, prof.l2, audit.c5,
                        local.p_exact, local.scaled_probability(), local.lower_bound_constant,
                        std::string(ok ? "ok" : "hypothesis-failure")});
  }
  rep.verdicts.emplace_back("tau_nondegenerate", tau_ok);
  rep.verdicts.emplace_back("cf_condition", cf_ok);
  rep.verdicts.emplace_back("local_lower_bound", local_ok);
  if (tau_ok && cf_ok) {
    const auto L = constants_ledger(family, grid, cf);
    const auto& b = L.measured;
    rep.summary["measured"] = {{"c1", b.c1}, {"c1_tilde", b.c1_tilde}, {"c2", b.c2}, {"c3", b.c3},
                               {"c3_tilde", b.c3_tilde}, {"c4", b.c4}, {"c5", b.c5}, {"c5_tilde", b.c5_tilde},
                               {"c6", b.c6}, {"eta0", b.eta0}};
    rep.summary["constants"] = {{"epsilon", L.epsilon}, {"eta", L.eta}, {"C0", L.c0}, {"N0", L.n0},
                                {"gaussian_moment_integral", L.gaussian_moment_integral},
                                {"C1", L.big_c1}, {"C2", L.big_c2}, {"C3", L.big_c3}, {"C", L.big_c},
                                {"c7", L.c7}, {"c8_second", L.c8_second}, {"c8_third", L.c8_third}, {"c8", L.c8}};
    rep.verdicts.emplace_back("constants_finite", L.all_finite_positive);
  }
}

using Runner = void (*)(Reader&, RunReport&, int);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"hashing-sim", hashing_sim},   {"enumerate", enumerate},
      {"berry-esseen", berry_esseen}, {"tails", tails},
      {"ld-conditional", ld_conditional}, {"exact-conditional", exact_conditional},
      {"audit-hypotheses", audit_hypotheses},
  };
  return table;
}

// ------------------------------------------------------------------ output

std::string csv_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return fmt::format("{}", *i);
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

json cell_json(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) return nan_to_null(*d);
  const auto& s = std::get<std::string>(c);
  return s.empty() ? json(nullptr) : json(s);
}

// nlohmann prints the shortest round-trip form; reports use 17 digits.
void dump(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_number(v) : "null";
      break;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        dump(j[i], out, depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close + "]";
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad + json(it.key()).dump() + ": ";
        dump(it.value(), out, depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close + "}";
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

Config parse_ini(std::string_view text) {
  Config cfg;
  std::vector<std::string> problems;
  std::stringstream ss{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty() || (body.front() == '[' && body.back() == ']')) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      problems.push_back(fmt::format("line {}: expected 'key = value' (got '{}')", lineno, body));
      continue;
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      problems.push_back(fmt::format("line {}: empty key", lineno));
    } else if (!cfg.values.emplace(key, value).second) {
      problems.push_back(fmt::format("{}: set more than once (line {})", key, lineno));
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

Config parse_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("json: ") + e.what()});
  }
  if (!root.is_object()) throw ConfigError({"json: top level must be an object"});
  if (root.contains("config") && root["config"].is_object()) root = root["config"];
  Config cfg;
  std::vector<std::string> problems;
  for (auto it = root.begin(); it != root.end(); ++it) {
    try {
      if (it.value().is_array()) {
        std::string joined;
        for (const auto& item : it.value()) joined += (joined.empty() ? "" : ",") + scalar_text(item);
        cfg.values[it.key()] = joined;
      } else {
        cfg.values[it.key()] = scalar_text(it.value());
      }
    } catch (const std::exception& e) {
      problems.push_back(fmt::format("{}: {}", it.key(), e.what()));
    }
  }
  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

Config parse_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_json(text);
  return parse_ini(text);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_json(const Config& config) {
  json j = json::object();
  for (const auto& [k, v] : config.values) j[k] = v;
  return j.dump();
}

std::string config_hash(const Config& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_json(config)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

const std::vector<std::string>& experiments() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : runners()) out.push_back(name);
    return out;
  }();
  return names;
}

bool RunReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.second; });
}

RunReport run(const std::string& experiment, const Config& config, int workers) {
  auto it = runners().find(experiment);
  if (it == runners().end()) throw DomainError("unknown experiment '" + experiment + "'");
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.experiment = experiment;
  Reader reader(config, experiment);
  reader.seed();  // echoed even by exact experiments
  it->second(reader, rep, std::max(1, workers));
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

void write_csv(const RunReport& report, std::ostream& out) {
  out << "# condlaw " << kVersion << " experiment=" << report.experiment;
  if (report.config.has("seed")) out << " seed=" << report.config.values.at("seed");
  out << " config_hash=" << config_hash(report.config) << '\n';
  for (std::size_t i = 0; i < report.columns.size(); ++i) out << (i ? "," : "") << report.columns[i];
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

void write_json(const RunReport& report, std::ostream& out) {
  json j = json::object();
  j["version"] = kVersion;
  j["experiment"] = report.experiment;
  json cfg = json::object();
  for (const auto& [k, v] : report.config.values) cfg[k] = v;
  j["config"] = cfg;
  j["config_hash"] = config_hash(report.config);
  json results = json::array();
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    json row = r < report.row_details.size() ? report.row_details[r] : json::object();
    for (std::size_t c = 0; c < report.columns.size(); ++c) row[report.columns[c]] = cell_json(report.rows[r][c]);
    results.push_back(row);
  }
  j["results"] = results;
  j["summary"] = report.summary;
  json verdicts = json::object();
  for (const auto& [name, ok] : report.verdicts) verdicts[name] = ok;
  j["verdicts"] = verdicts;
  j["passed"] = report.passed();
  j["wall_seconds"] = report.wall_seconds;
  std::string text;
  dump(j, text, 0);
  out << text << '\n';
}

int main(int argc, char** argv) {
  CLI::App app{"Conditioned integer sums and linear probing: simulation, exact laws and limit checks", "condlaw"};
  std::string experiment, config_path, out_path = "-", format = "csv";
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<std::string> sets;
  app.add_option("experiment", experiment, "Experiment to run")->required()->check(CLI::IsMember(experiments()));
  app.add_option("--config", config_path, "INI or JSON config file (a JSON report is accepted too)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed; overrides the config");
  auto* out_opt = app.add_option("--out", out_path, "Output file, '-' for stdout");
  auto* format_opt = app.add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  auto* workers_opt = app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "Extra key=value settings, applied after the config file");
  app.set_version_flag("--version", kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    std::vector<std::string> problems;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        problems.push_back("--set '" + s + "': expected key=value");
        continue;
      }
      cfg.values[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    // Output settings may live in the config; the command line wins.
    auto take = [&cfg](const std::string& key, std::string& target, bool given) {
      auto it = cfg.values.find(key);
      if (it == cfg.values.end()) return;
      if (!given) target = it->second;
      cfg.values.erase(it);
    };
    std::string workers_text = std::to_string(workers);
    take("out", out_path, out_opt->count() > 0);
    take("format", format, format_opt->count() > 0);
    take("workers", workers_text, workers_opt->count() > 0);
    if (format != "csv" && format != "json") problems.push_back("format: expected csv or json (got '" + format + "')");
    auto w = parse_int(workers_text);
    if (!w || *w < 1) problems.push_back("workers: expected a positive integer (got '" + workers_text + "')");
    if (!problems.empty()) throw ConfigError(problems);
    if (seed_opt->count() > 0) cfg.values["seed"] = std::to_string(seed);

    const RunReport report = run(experiment, cfg, static_cast<int>(*w));

    std::ostringstream body;
    if (format == "json") {
      write_json(report, body);
    } else {
      write_csv(report, body);
    }
    if (out_path == "-") {
      std::cout << body.str();
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out || !(out << body.str()) || !out.flush()) throw std::runtime_error("cannot write '" + out_path + "'");
    }
    for (const auto& [name, ok] : report.verdicts) std::cerr << (ok ? "PASS " : "FAIL ") << name << '\n';
    return report.passed() ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace condlaw::cli
