#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "condlaw/rng.hpp"

namespace condlaw::hashing {

using BigInt = boost::multiprecision::cpp_int;

/// Addresses h_1..h_n in a circular table of m cells, 1-based, n < m.
struct HashSequence {
  std::int64_t m = 0;
  std::vector<std::int64_t> addresses;

  std::int64_t size() const { return static_cast<std::int64_t>(addresses.size()); }
};

/// Validates the table size and the address range.
HashSequence make_hash_sequence(std::int64_t m, std::vector<std::int64_t> addresses);

/// Result of inserting every ball with forward circular probing.
struct Insertion {
  std::int64_t m = 0;
  std::vector<std::int64_t> displacements;  ///< per ball, in insertion order
  std::vector<std::int64_t> final_cells;    ///< per ball, 1-based
  std::vector<std::int64_t> occupant;       ///< per cell (index 0 unused), ball index or -1
  std::int64_t total = 0;
};

Insertion insert_all(const HashSequence& seq);

/// Arrival counts Z_i, partial sums Sigma_i (Sigma_0 = 0 at index 0) and
/// attempt counts H_i on the table read from the cell after its empty cell.
struct DisplacementProfile {
  std::int64_t rotation = 0;  ///< cell that plays the role of cell 1
  std::vector<std::int64_t> z;
  std::vector<std::int64_t> sigma;
  std::vector<std::int64_t> h;
  std::int64_t total = 0;
};

/// Total displacement of an almost-full table (m = n + 1) from the arrival
/// profile alone: d = sum_i H_i - n with H_i = Sigma_i - i - min_{k<i}(Sigma_k - k) + 1.
/// The circle is cut after its empty cell, found as the first minimiser of
/// Sigma_i - i. Throws DomainError unless m = n + 1.
DisplacementProfile displacement_via_profile(const HashSequence& seq);

/// Total displacement for any m > n in O(n + m), using the same cut and the
/// overflow recursion c_i = max(0, c_{i-1} + Z_i - 1).
std::int64_t total_displacement(std::int64_t m, const std::vector<std::int64_t>& addresses);

struct Block {
  std::int64_t first_cell = 0;  ///< first occupied cell (or the empty cell when length 1)
  std::int64_t length = 0;      ///< occupied cells plus the trailing empty cell
  std::int64_t displacement = 0;
};

/// Blocks ordered by the position of their terminating empty cell.
struct BlockDecomposition {
  std::vector<Block> blocks;
};

/// Requires at least one empty cell. A ball belongs to the block holding its
/// final cell.
BlockDecomposition block_decompose(const Insertion& ins);

struct PairDraw {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool truncated = false;  ///< Borel progeny hit the ceiling; y is then 0
};

/// x ~ Borel(lambda); y = total displacement of a uniform hash sequence of
/// size x - 1 in a table of x cells.
PairDraw sample_pair_xy(double lambda, Rng& rng, std::int64_t progeny_ceiling = 10'000'000);

/// Total displacement of a uniform hash sequence of size n in n + 1 cells.
std::int64_t sample_full_table_displacement(std::int64_t n, Rng& rng);

/// Exact law of d_{n+1,n} by visiting all (n+1)^n hash sequences.
struct DisplacementLaw {
  std::int64_t n = 0;
  std::uint64_t sequences = 0;
  std::vector<std::uint64_t> counts;  ///< indexed by total displacement
  std::int64_t max_displacement = 0;

  double probability(std::int64_t d) const;
  /// P(d_{n+1,n} >= y).
  double tail(std::int64_t y) const;
  double mean() const;
};

/// Odometer enumeration; the first address is split across `workers` threads
/// and the count vectors are summed. Throws ResourceError when n > max_n
/// (max_n itself is capped at 9).
DisplacementLaw enumerate_all(std::int64_t n, std::int64_t max_n = 8, int workers = 1);

/// Process-wide cache over enumerate_all with the default cap.
const DisplacementLaw& displacement_law(std::int64_t n);

/// (1,1,2,2,...,k,k,k+1,...,m_y-k) in a table of m_y + 1 cells; its total
/// displacement is k (m_y - k). Requires 0 <= 2k <= m_y.
HashSequence adversarial_sequence(std::int64_t m_y, std::int64_t k);

/// Number of distinct orderings of the adversarial sequence: m_y! / 2^k.
BigInt permutation_count(std::int64_t m_y, std::int64_t k);

/// (n+1)^n.
BigInt sequence_count(std::int64_t n);

/// Smallest n with n (n - 1) / 2 >= y, i.e. ceil(sqrt(2y + 1/4) + 1/2).
std::int64_t n_y_threshold(double y);

/// E[d_{n+1,n}] = (n/2) (Q(n+1, n-1) - 1) with Q(m, j) = sum_k j!/(j-k)!/m^k.
double expected_full_table_displacement(std::int64_t n);

/// E[Y] for the block pair (X, Y) with X ~ Borel(lambda), lambda < 1/e.
double pair_mean_y(double lambda);

/// Multiset of (block length, in-block displacement), sorted.
using BlockMultiset = std::vector<std::pair<std::int64_t, std::int64_t>>;

/// Exact law of the block multiset over all m^n hash sequences.
std::map<BlockMultiset, double> exact_block_multiset_law(std::int64_t m, std::int64_t n);

}  // namespace condlaw::hashing
