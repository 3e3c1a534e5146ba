#include "condlaw/hashing.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

#include "condlaw/distributions.hpp"
#include "condlaw/errors.hpp"

namespace condlaw::hashing {

namespace {

// Cell after which the circle can be cut: the first minimiser of
// Sigma_i - i over i = 1..m. That cell ends empty for any n < m.
std::int64_t cut_cell(const std::vector<std::int64_t>& z, std::int64_t m) {
  std::int64_t walk = 0;
  std::int64_t best = 0;
  std::int64_t best_cell = m;
  for (std::int64_t i = 1; i <= m; ++i) {
    walk += z[i] - 1;
    if (i == 1 || walk < best) {
      best = walk;
      best_cell = i;
    }
  }
  return best_cell;
}

// Displacement from arrival counts z[1..m] via the overflow recursion.
std::int64_t displacement_from_counts(const std::vector<std::int64_t>& z, std::int64_t m) {
  const std::int64_t cut = cut_cell(z, m);
  std::int64_t carry = 0;
  std::int64_t total = 0;
  std::int64_t cell = cut;
  for (std::int64_t j = 0; j < m; ++j) {
    cell = cell == m ? 1 : cell + 1;
    carry = std::max<std::int64_t>(0, carry + z[cell] - 1);
    total += carry;
  }
  return total;
}

void check_addresses(std::int64_t m, const std::vector<std::int64_t>& addresses) {
  if (m < 1) throw DomainError("hash sequence: table size must be positive");
  if (static_cast<std::int64_t>(addresses.size()) >= m) {
    throw DomainError("hash sequence: size n must be smaller than the table size m");
  }
  for (const auto a : addresses) {
    if (a < 1 || a > m) {
      throw DomainError("hash sequence: address " + std::to_string(a) + " outside [1, " +
                        std::to_string(m) + "]");
    }
  }
}

}  // namespace

HashSequence make_hash_sequence(std::int64_t m, std::vector<std::int64_t> addresses) {
  check_addresses(m, addresses);
  return HashSequence{m, std::move(addresses)};
}

Insertion insert_all(const HashSequence& seq) {
  check_addresses(seq.m, seq.addresses);
  Insertion ins;
  ins.m = seq.m;
  ins.occupant.assign(seq.m + 1, -1);
  ins.displacements.reserve(seq.addresses.size());
  ins.final_cells.reserve(seq.addresses.size());
  for (std::size_t ball = 0; ball < seq.addresses.size(); ++ball) {
    std::int64_t cell = seq.addresses[ball];
    std::int64_t moved = 0;
    while (ins.occupant[cell] != -1) {
      cell = cell == seq.m ? 1 : cell + 1;
      ++moved;
    }
    ins.occupant[cell] = static_cast<std::int64_t>(ball);
    ins.displacements.push_back(moved);
    ins.final_cells.push_back(cell);
    ins.total += moved;
  }
  return ins;
}

DisplacementProfile displacement_via_profile(const HashSequence& seq) {
  check_addresses(seq.m, seq.addresses);
  const std::int64_t n = seq.size();
  const std::int64_t m = seq.m;
  if (m != n + 1) {
    throw DomainError("displacement_via_profile: requires m = n + 1, got m = " +
                      std::to_string(m) + ", n = " + std::to_string(n));
  }
  std::vector<std::int64_t> counts(m + 1, 0);
  for (const auto a : seq.addresses) ++counts[a];

  DisplacementProfile prof;
  prof.rotation = cut_cell(counts, m) % m + 1;
  prof.z.assign(m + 1, 0);
  prof.sigma.assign(m + 1, 0);
  prof.h.assign(m + 1, 0);
  for (std::int64_t i = 1; i <= m; ++i) {
    prof.z[i] = counts[(prof.rotation - 1 + i - 1) % m + 1];
    prof.sigma[i] = prof.sigma[i - 1] + prof.z[i];
  }
  std::int64_t running_min = 0;  // min_{k<i} (Sigma_k - k), starting with k = 0
  std::int64_t attempts = 0;
  for (std::int64_t i = 1; i <= m; ++i) {
    prof.h[i] = prof.sigma[i] - i - running_min + 1;
    attempts += prof.h[i];
    running_min = std::min(running_min, prof.sigma[i] - i);
  }
  prof.total = attempts - n;
  return prof;
}

std::int64_t total_displacement(std::int64_t m, const std::vector<std::int64_t>& addresses) {
  check_addresses(m, addresses);
  std::vector<std::int64_t> counts(m + 1, 0);
  for (const auto a : addresses) ++counts[a];
  return displacement_from_counts(counts, m);
}

BlockDecomposition block_decompose(const Insertion& ins) {
  const std::int64_t m = ins.m;
  std::vector<std::int64_t> empties;
  for (std::int64_t c = 1; c <= m; ++c) {
    if (ins.occupant[c] == -1) empties.push_back(c);
  }
  if (empties.empty()) {
    throw DomainError("block_decompose: the table has no empty cell");
  }
  BlockDecomposition out;
  std::vector<std::int64_t> block_of(m + 1, 0);
  const std::size_t count = empties.size();
  for (std::size_t j = 0; j < count; ++j) {
    const std::int64_t end = empties[j];
    const std::int64_t prev = empties[(j + count - 1) % count];
    std::int64_t length = ((end - prev) % m + m) % m;
    if (length == 0) length = m;
    Block b;
    b.first_cell = prev % m + 1;
    b.length = length;
    out.blocks.push_back(b);
    std::int64_t cell = b.first_cell;
    for (std::int64_t step = 0; step < length; ++step) {
      block_of[cell] = static_cast<std::int64_t>(j);
      cell = cell == m ? 1 : cell + 1;
    }
  }
  for (std::size_t ball = 0; ball < ins.final_cells.size(); ++ball) {
    out.blocks[block_of[ins.final_cells[ball]]].displacement += ins.displacements[ball];
  }
  return out;
}

std::int64_t sample_full_table_displacement(std::int64_t n, Rng& rng) {
  if (n <= 1) return 0;
  thread_local std::vector<std::int64_t> counts;
  const std::int64_t m = n + 1;
  counts.assign(m + 1, 0);
  for (std::int64_t b = 0; b < n; ++b) {
    ++counts[1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)))];
  }
  return displacement_from_counts(counts, m);
}

PairDraw sample_pair_xy(double lambda, Rng& rng, std::int64_t progeny_ceiling) {
  if (!(lambda > 0.0) || lambda > std::exp(-1.0) * (1.0 + 1e-15)) {
    throw DomainError("sample_pair_xy: lambda must lie in (0, 1/e]");
  }
  thread_local IntegerLaw law = IntegerLaw::borel(0.3);
  if (law.parameter() != lambda) law = IntegerLaw::borel(lambda);
  const Draw x = sample(law, rng, progeny_ceiling);
  if (x.truncated) return {x.value, 0, true};
  return {x.value, sample_full_table_displacement(x.value - 1, rng), false};
}

double DisplacementLaw::probability(std::int64_t d) const {
  if (d < 0 || d >= static_cast<std::int64_t>(counts.size())) return 0.0;
  return static_cast<double>(counts[d]) / static_cast<double>(sequences);
}

double DisplacementLaw::tail(std::int64_t y) const {
  std::uint64_t hits = 0;
  for (std::int64_t d = std::max<std::int64_t>(y, 0); d < static_cast<std::int64_t>(counts.size()); ++d) {
    hits += counts[d];
  }
  return static_cast<double>(hits) / static_cast<double>(sequences);
}

double DisplacementLaw::mean() const {
  double acc = 0.0;
  for (std::size_t d = 0; d < counts.size(); ++d) acc += static_cast<double>(d) * static_cast<double>(counts[d]);
  return acc / static_cast<double>(sequences);
}

DisplacementLaw enumerate_all(std::int64_t n, std::int64_t max_n, int workers) {
  if (n < 0) throw DomainError("enumerate_all: n must be nonnegative");
  max_n = std::min<std::int64_t>(max_n, 9);
  if (n > max_n) {
    throw ResourceError("enumerate_all: (n+1)^n sequences for n = " + std::to_string(n) +
                        " exceed the enumeration budget (n <= " + std::to_string(max_n) + ")");
  }
  const std::int64_t m = n + 1;
  const std::int64_t max_d = n * (n - 1) / 2;
  DisplacementLaw law;
  law.n = n;
  law.counts.assign(max_d + 1, 0);
  if (n == 0) {
    law.sequences = 1;
    law.counts[0] = 1;
    return law;
  }

  // Worker w handles first addresses w+1, w+1+workers, ...
  auto run = [n, m, max_d](std::int64_t first_from, std::int64_t stride) {
    std::vector<std::uint64_t> local(max_d + 1, 0);
    std::vector<std::int64_t> digits(n, 1);
    std::vector<std::int64_t> counts(m + 1, 0);
    for (std::int64_t first = first_from; first <= m; first += stride) {
      std::fill(digits.begin(), digits.end(), 1);
      digits[0] = first;
      std::fill(counts.begin(), counts.end(), 0);
      counts[first] += 1;
      counts[1] += n - 1;
      for (;;) {
        ++local[displacement_from_counts(counts, m)];
        // Odometer over digits 1..n-1.
        std::int64_t pos = n - 1;
        while (pos >= 1 && digits[pos] == m) {
          --counts[m];
          digits[pos] = 1;
          ++counts[1];
          --pos;
        }
        if (pos < 1) break;
        --counts[digits[pos]];
        ++digits[pos];
        ++counts[digits[pos]];
      }
    }
    return local;
  };

  workers = std::max(1, std::min<int>(workers, static_cast<int>(m)));
  std::vector<std::vector<std::uint64_t>> partial(workers);
  if (workers == 1) {
    partial[0] = run(1, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] { partial[w] = run(w + 1, workers); });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& part : partial) {
    for (std::int64_t d = 0; d <= max_d; ++d) law.counts[d] += part[d];
  }
  for (const auto c : law.counts) law.sequences += c;
  for (std::int64_t d = max_d; d >= 0; --d) {
    if (law.counts[d] != 0) {
      law.max_displacement = d;
      break;
    }
  }
  return law;
}

const DisplacementLaw& displacement_law(std::int64_t n) {
  static std::mutex mutex;
  static std::map<std::int64_t, DisplacementLaw> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, enumerate_all(n)).first;
  return it->second;
}

HashSequence adversarial_sequence(std::int64_t m_y, std::int64_t k) {
  if (m_y < 1) throw DomainError("adversarial_sequence: m_y must be positive");
  if (k < 0 || 2 * k > m_y) {
    throw DomainError("adversarial_sequence: requires 0 <= k <= m_y / 2");
  }
  std::vector<std::int64_t> addresses;
  addresses.reserve(m_y);
  for (std::int64_t q = 1; q <= k; ++q) {
    addresses.push_back(q);
    addresses.push_back(q);
  }
  for (std::int64_t q = k + 1; q <= m_y - k; ++q) addresses.push_back(q);
  return make_hash_sequence(m_y + 1, std::move(addresses));
}

BigInt permutation_count(std::int64_t m_y, std::int64_t k) {
  if (m_y < 0 || k < 0 || 2 * k > m_y) {
    throw DomainError("permutation_count: requires 0 <= k <= m_y / 2");
  }
  BigInt factorial = 1;
  for (std::int64_t j = 2; j <= m_y; ++j) factorial *= j;
  return factorial >> static_cast<unsigned>(k);
}

BigInt sequence_count(std::int64_t n) {
  if (n < 0) throw DomainError("sequence_count: n must be nonnegative");
  return boost::multiprecision::pow(BigInt(n + 1), static_cast<unsigned>(n));
}

std::int64_t n_y_threshold(double y) {
  if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("n_y_threshold: y must be positive");
  auto n = static_cast<std::int64_t>(std::ceil(std::sqrt(2.0 * y + 0.25) + 0.5));
  // Guard the floating-point ceiling against the integer definition.
  auto pairs = [](std::int64_t j) { return static_cast<double>(j) * static_cast<double>(j - 1) / 2.0; };
  while (n > 1 && pairs(n - 1) >= y) --n;
  while (pairs(n) < y) ++n;
  return n;
}

double expected_full_table_displacement(std::int64_t n) {
  if (n < 0) throw DomainError("expected_full_table_displacement: n must be nonnegative");
  if (n <= 1) return 0.0;
  const double m = static_cast<double>(n + 1);
  double term = 1.0;
  double q = 1.0;
  for (std::int64_t k = 1; k <= n - 1; ++k) {
    term *= static_cast<double>(n - k) / m;
    q += term;
  }
  return 0.5 * static_cast<double>(n) * (q - 1.0);
}

double pair_mean_y(double lambda) {
  const IntegerLaw law = IntegerLaw::borel(lambda);
  if (law.tree_value() >= 1.0) throw DomainError("pair_mean_y: lambda must be below 1/e");
  double acc = 0.0;
  for (std::int64_t l = 2;; ++l) {
    const double p = law.pmf(l);
    const double term = p * expected_full_table_displacement(l - 1);
    acc += term;
    const double dl = static_cast<double>(l);
    if (law.tail_bound(l) * dl * dl < 1e-18 * acc) break;
  }
  return acc;
}

std::map<BlockMultiset, double> exact_block_multiset_law(std::int64_t m, std::int64_t n) {
  if (m < 1 || n < 0 || n >= m) throw DomainError("exact_block_multiset_law: requires 0 <= n < m");
  const double sequences = std::pow(static_cast<double>(m), static_cast<double>(n));
  if (sequences > 1e8) throw ResourceError("exact_block_multiset_law: m^n exceeds 1e8 sequences");
  std::map<BlockMultiset, std::uint64_t> counts;
  std::vector<std::int64_t> digits(n, 1);
  for (;;) {
    const auto blocks = block_decompose(insert_all(HashSequence{m, digits}));
    BlockMultiset key;
    for (const auto& b : blocks.blocks) key.emplace_back(b.length, b.displacement);
    std::sort(key.begin(), key.end());
    ++counts[key];
    std::int64_t pos = n - 1;
    while (pos >= 0 && digits[pos] == m) {
      digits[pos] = 1;
      --pos;
    }
    if (pos < 0) break;
    ++digits[pos];
  }
  std::map<BlockMultiset, double> law;
  for (const auto& [key, c] : counts) law[key] = static_cast<double>(c) / sequences;
  return law;
}

}  // namespace condlaw::hashing
