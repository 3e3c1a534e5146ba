// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "condlaw/conditional.hpp"
#include "condlaw/distributions.hpp"
#include "condlaw/hashing.hpp"
#include "condlaw/limits.hpp"
#include "condlaw/models.hpp"

using namespace condlaw;
namespace hs = condlaw::hashing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("threw: ") + e.what()};
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::cout << (out.pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << out.detail
            << fmt::format(" [{:.1f} ms]", ms) << std::endl;
}

template <class Fn>
void for_each_sequence(std::int64_t m, std::int64_t n, Fn fn) {
  std::vector<std::int64_t> a(static_cast<std::size_t>(n), 1);
  for (;;) {
    fn(a);
    std::int64_t pos = n - 1;
    while (pos >= 0 && a[pos] == m) a[pos--] = 1;
    if (pos < 0) return;
    ++a[pos];
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ConditionedEnsemble occupancy_family(std::int64_t n) { return mean_match_tilt(occupancy_model(2.0), n, 2 * n); }

}  // namespace

int main() {
  criterion(1, "worked example", [] {
    const auto start = std::chrono::steady_clock::now();
    const auto ins = hs::insert_all(hs::make_hash_sequence(10, {6, 9, 1, 9, 9, 6, 2, 5}));
    const auto dec = hs::block_decompose(ins);
    const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
    std::vector<std::int64_t> lengths;
    for (const auto& b : dec.blocks) lengths.push_back(b.length);
    std::sort(lengths.begin(), lengths.end());
    const std::vector<std::int64_t> want = {0, 0, 0, 1, 3, 1, 1, 0};
    const bool ok = ins.total == 6 && ins.displacements == want && lengths == std::vector<std::int64_t>{4, 6} &&
                    us < 1000.0;
    return Outcome{ok, fmt::format("total {}, blocks {{{},{}}}, {:.1f} us", ins.total, lengths.at(1), lengths.at(0), us)};
  });

  criterion(2, "enumeration identities n=1..6", [] {
    bool ok = true;
    std::string detail;
    for (std::int64_t n = 1; n <= 6; ++n) {
      const auto law = hs::enumerate_all(n);
      std::uint64_t visited = 0, mismatches = 0;
      std::int64_t max_sim = 0;
      for_each_sequence(n + 1, n, [&](const std::vector<std::int64_t>& a) {
        const auto seq = hs::make_hash_sequence(n + 1, a);
        const auto sim = hs::insert_all(seq).total;
        if (hs::displacement_via_profile(seq).total != sim) ++mismatches;
        max_sim = std::max(max_sim, sim);
        ++visited;
      });
      const bool row = hs::BigInt(law.sequences) == hs::sequence_count(n) && visited == law.sequences &&
                       law.max_displacement == n * (n - 1) / 2 && max_sim == law.max_displacement && mismatches == 0;
      ok = ok && row;
      detail += fmt::format("{}n={}: {} seqs, max {}, {} mismatches", detail.empty() ? "" : "; ", n, law.sequences,
                            law.max_displacement, mismatches);
    }
    return Outcome{ok, detail};
  });

  criterion(3, "permutation invariance n<=5", [] {
    std::uint64_t checked = 0, violations = 0;
    for (std::int64_t n = 1; n <= 5; ++n)
      for_each_sequence(n + 1, n, [&](const std::vector<std::int64_t>& a) {
        const auto base = hs::total_displacement(n + 1, a);
        auto p = a;
        std::sort(p.begin(), p.end());
        do {
          if (hs::insert_all(hs::make_hash_sequence(n + 1, p)).total != base) ++violations;
          ++checked;
        } while (std::next_permutation(p.begin(), p.end()));
      });
    return Outcome{violations == 0, fmt::format("{} orderings, {} violations", checked, violations)};
  });

  criterion(4, "block law equals conditioned pair law, m<=7", [] {
    double worst = 0.0;
    for (std::int64_t m = 1; m <= 7; ++m)
      for (std::int64_t n = 0; n < m; ++n) {
        auto diff = hs::exact_block_multiset_law(m, n);
        const auto pairs = conditional_multiset_law({hashing_model(0.3), m - n, m, std::nullopt});
        for (const auto& [key, p] : pairs) diff[key] -= p;
        double tv = 0.0;
        for (const auto& [key, p] : diff) tv += std::abs(p);
        worst = std::max(worst, tv / 2);
      }
    return Outcome{worst < 1e-10, fmt::format("max total variation {:.3g} (< 1e-10)", worst)};
  });

  criterion(5, "local limit, Poisson mean-matched", [] {
    bool lower = true;
    double scaled_2000 = 0.0;
    for (std::int64_t n : {50, 100, 200, 400, 800, 1000, 1600, 2000}) {
      const auto ens = mean_match_tilt(occupancy_model(1.0), n, 2 * n);
      const auto r = prob_s_equals_k(ens);
      lower = lower && r.lower_bound_holds();
      if (n == 2000) scaled_2000 = r.p_exact * r.sigma_x * std::sqrt(2 * std::numbers::pi * static_cast<double>(n));
    }
    const bool ok = lower && scaled_2000 >= 0.95 && scaled_2000 <= 1.05;
    return Outcome{ok, fmt::format("p sigma sqrt(2 pi N) at N=2000 = {:.6f} in [0.95, 1.05], lower bound on grid: {}",
                                   scaled_2000, lower ? "holds" : "violated")};
  });

  BerryEsseenReport be;
  criterion(6, "Berry-Esseen flatness, occupancy lambda=2", [&be] {
    be = berry_esseen_sweep(occupancy_family, {100, 400, 1600}, 100000, 42, 1, true);
    std::string detail;
    for (const auto& p : be.points) detail += fmt::format("N={} D*sqrtN={:.4f}; ", p.n, p.d_sqrt_n);
    return Outcome{be.passed, detail + fmt::format("max/min {:.3f} (<= 2)", be.flatness)};
  });

  criterion(7, "conditional moment deviations bounded", [&be] {
    const auto g = moment_growth(be);
    if (!g) return Outcome{false, "no moment checks in the sweep"};
    return Outcome{g->mean_bounded && g->var_bounded,
                   fmt::format("mean |dev| {:.4f} -> {:.4f} (allow {:.4f}); var |dev|/sqrtN {:.4f} -> {:.4f} (allow {:.4f})",
                               g->mean_first, g->mean_last, g->mean_allowance, g->var_first, g->var_last,
                               g->var_allowance)};
  });

  criterion(8, "tail bracket, hashing lambda=0.3", [] {
    std::vector<double> grid = {1, 2, 3, 4, 6, 8, 10, 13, 16, 20, 25, 30, 36, 43, 50, 60, 70, 80, 90, 100, 115, 130};
    const auto rep = tail_log_bracket(hashing_y_sampler(0.3), 0.3, grid, 10'000'000, 2024, 1, 0.15, 3e-5);
    const bool constants = std::abs(rep.bracket.alpha - 0.2885) < 1e-3 && std::abs(rep.bracket.beta - 3.023) < 1e-3;
    double lo = 0.0, hi = -1e9;
    for (const auto& p : rep.points)
      if (p.verdict == "inside" || p.verdict == "outside") {
        lo = std::min(lo, p.normalized);
        hi = std::max(hi, p.normalized);
      }
    return Outcome{rep.all_inside && constants && rep.observable >= 10,
                   fmt::format("alpha {:.4f}, beta {:.4f}; {} observable points, normalized in [{:.3f}, {:.3f}] "
                               "within [{:.3f}, {:.3f}]",
                               rep.bracket.alpha, rep.bracket.beta, rep.observable, lo, hi,
                               -rep.bracket.beta - 0.15, -rep.bracket.alpha + 0.15)};
  });

  criterion(9, "adversarial lower mass, m<=8", [] {
    const auto checks = adversarial_mass_check(0.3, 8);
    std::size_t held = 0;
    for (const auto& c : checks) held += c.holds ? 1 : 0;
    return Outcome{!checks.empty() && held == checks.size(), fmt::format("{}/{} (m, k) pairs hold", held, checks.size())};
  });

  criterion(10, "single big jump, hashing lambda=0.3", [] {
    const auto rep = big_jump_diagnostic(hashing_model(0.3), 30, {20, 30, 40, 60}, 200000, 7, 1, 100);
    std::string detail;
    for (const auto& p : rep.points)
      detail += fmt::format("z={} share {:.3f} ({} exceedances); ", p.z, p.share_one, p.exceedances);
    return Outcome{rep.passed, detail + fmt::format("dominant {}, nondecreasing {}", rep.single_jump_dominates,
                                                    rep.nondecreasing)};
  });

  criterion(11, "byte-identical CSV across runs", [] {
    const std::string dir = std::string(CONDLAW_WORK_DIR) + "/";
    const std::vector<std::pair<std::string, std::string>> runs = {
        {"hashing-sim", "--set m=50 --set balls=45 --set trials=20"},
        {"tails", "--set y_grid=1,5,20 --set budget=500000"},
        {"berry-esseen", "--set n_grid=50,200 --set samples=20000"},
        {"ld-conditional", "--set n=20 --set samples=50000 --set z_grid=10,20 --set min_exceedances=50"},
    };
    std::size_t identical = 0;
    for (const auto& [exp, args] : runs) {
      std::string files[3];
      for (int i = 0; i < 3; ++i) {
        files[i] = fmt::format("{}det_{}_{}.csv", dir, exp, i);
        const std::string cmd = fmt::format("{} {} {} --seed 123 --workers {} --out {} 2> /dev/null", CONDLAW_BINARY,
                                            exp, args, i == 2 ? 2 : 1, files[i]);
        if (std::system(cmd.c_str()) == -1) return Outcome{false, "could not launch the CLI"};
      }
      const std::string a = slurp(files[0]);
      if (!a.empty() && a == slurp(files[1]) && a == slurp(files[2])) ++identical;
    }
    return Outcome{identical == runs.size(),
                   fmt::format("{}/{} experiments identical across two runs and two worker counts", identical, runs.size())};
  });

  std::cout << (failures == 0 ? "ALL PASS" : fmt::format("{} FAILED", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
