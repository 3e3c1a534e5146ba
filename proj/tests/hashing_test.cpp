#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "condlaw/distributions.hpp"
#include "condlaw/errors.hpp"
#include "condlaw/hashing.hpp"

using namespace condlaw;
using namespace condlaw::hashing;

namespace {

// Visits every sequence in [1, m]^n.
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

BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

TEST(InsertAll, WorkedExample) {
  const auto ins = insert_all(make_hash_sequence(10, {6, 9, 1, 9, 9, 6, 2, 5}));
  EXPECT_EQ(ins.total, 6);
  EXPECT_EQ(ins.displacements, (std::vector<std::int64_t>{0, 0, 0, 1, 3, 1, 1, 0}));
  EXPECT_EQ(ins.occupant[4], -1);
  EXPECT_EQ(ins.occupant[8], -1);
}

TEST(InsertAll, InjectiveSequenceHasNoDisplacement) {
  EXPECT_EQ(insert_all(make_hash_sequence(7, {3, 1, 6, 2})).total, 0);
}

TEST(InsertAll, RepeatedAddressSaturatesTheBound) {
  const auto ins = insert_all(make_hash_sequence(4, {1, 1, 1}));
  EXPECT_EQ(ins.total, 3);
  EXPECT_EQ(ins.displacements, (std::vector<std::int64_t>{0, 1, 2}));
}

TEST(InsertAll, WrapsAroundTheCircle) {
  const auto ins = insert_all(make_hash_sequence(5, {5, 5, 5}));
  EXPECT_EQ(ins.final_cells, (std::vector<std::int64_t>{5, 1, 2}));
  EXPECT_EQ(ins.total, 3);
}

TEST(HashSequence, Validation) {
  EXPECT_THROW(make_hash_sequence(3, {1, 2, 3}), DomainError);
  EXPECT_THROW(make_hash_sequence(3, {0}), DomainError);
  EXPECT_THROW(make_hash_sequence(3, {4}), DomainError);
  EXPECT_THROW(make_hash_sequence(0, {}), DomainError);
}

TEST(Profile, SmallExamples) {
  EXPECT_EQ(displacement_via_profile(make_hash_sequence(4, {1, 1, 2})).total,
            insert_all(make_hash_sequence(4, {1, 1, 2})).total);
  EXPECT_EQ(displacement_via_profile(make_hash_sequence(4, {1, 1, 2})).total, 2);
  EXPECT_EQ(displacement_via_profile(make_hash_sequence(2, {1})).total, 0);
  EXPECT_EQ(displacement_via_profile(make_hash_sequence(4, {2, 3, 1})).total, 0);
}

TEST(Profile, RequiresAlmostFullTable) {
  EXPECT_THROW(displacement_via_profile(make_hash_sequence(5, {1, 1, 2})), DomainError);
}

TEST(Profile, ExhaustiveAgreementWithSimulatorUpToSix) {
  for (std::int64_t n = 1; n <= 6; ++n) {
    const std::int64_t m = n + 1;
    std::uint64_t visited = 0;
    for_each_sequence(m, n, [&](const std::vector<std::int64_t>& a) {
      ++visited;
      const HashSequence seq{m, a};
      const auto prof = displacement_via_profile(seq);
      const auto ins = insert_all(seq);
      ASSERT_EQ(prof.total, ins.total);
      ASSERT_EQ(total_displacement(m, a), ins.total);
      std::int64_t zsum = 0;
      for (std::int64_t i = 1; i <= m; ++i) {
        ASSERT_GE(prof.h[i], 0);
        zsum += prof.z[i];
      }
      ASSERT_EQ(zsum, n);
      ASSERT_LE(prof.total, n * (n - 1) / 2);
      // The cut lands on the cell that stays empty.
      const std::int64_t cut = prof.rotation == 1 ? m : prof.rotation - 1;
      ASSERT_EQ(ins.occupant[cut], -1);
    });
    EXPECT_EQ(BigInt(visited), sequence_count(n));
  }
}

TEST(Profile, RandomAgreementUpToTwoHundred) {
  Rng rng(77);
  for (int c = 0; c < 100000; ++c) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(200));
    const std::int64_t m = n + 1;
    std::vector<std::int64_t> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
    const HashSequence seq{m, a};
    const auto ins = insert_all(seq);
    ASSERT_EQ(displacement_via_profile(seq).total, ins.total);
    ASSERT_GE(ins.total, 0);
    ASSERT_LE(ins.total, n * (n - 1) / 2);
  }
}

TEST(TotalDisplacement, AgreesWithSimulatorOnSparseTables) {
  Rng rng(5);
  for (int c = 0; c < 20000; ++c) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng.below(60));
    const std::int64_t n = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
    std::vector<std::int64_t> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
    ASSERT_EQ(total_displacement(m, a), insert_all(HashSequence{m, a}).total);
  }
}

TEST(PermutationInvariance, ExhaustiveUpToFive) {
  std::uint64_t violations = 0;
  for (std::int64_t n = 1; n <= 5; ++n) {
    const std::int64_t m = n + 1;
    for_each_sequence(m, n, [&](const std::vector<std::int64_t>& a) {
      const auto reference = insert_all(HashSequence{m, a}).total;
      std::vector<std::int64_t> p = a;
      std::sort(p.begin(), p.end());
      do {
        if (insert_all(HashSequence{m, p}).total != reference) ++violations;
      } while (std::next_permutation(p.begin(), p.end()));
    });
  }
  EXPECT_EQ(violations, 0u);
}

TEST(Blocks, WorkedExampleSplit) {
  const auto blocks = block_decompose(insert_all(make_hash_sequence(10, {6, 9, 1, 9, 9, 6, 2, 5})));
  ASSERT_EQ(blocks.blocks.size(), 2u);
  EXPECT_EQ(blocks.blocks[0].first_cell, 9);
  EXPECT_EQ(blocks.blocks[0].length, 6);
  EXPECT_EQ(blocks.blocks[0].displacement, 5);
  EXPECT_EQ(blocks.blocks[1].first_cell, 5);
  EXPECT_EQ(blocks.blocks[1].length, 4);
  EXPECT_EQ(blocks.blocks[1].displacement, 1);
}

TEST(Blocks, EmptyAndAlmostFullTables) {
  const auto empty = block_decompose(insert_all(make_hash_sequence(5, {})));
  ASSERT_EQ(empty.blocks.size(), 5u);
  for (const auto& b : empty.blocks) {
    EXPECT_EQ(b.length, 1);
    EXPECT_EQ(b.displacement, 0);
  }
  const auto full = block_decompose(insert_all(make_hash_sequence(5, {2, 2, 4, 1})));
  ASSERT_EQ(full.blocks.size(), 1u);
  EXPECT_EQ(full.blocks[0].length, 5);
}

TEST(Blocks, InvariantsOnRandomTables) {
  Rng rng(9);
  for (int c = 0; c < 20000; ++c) {
    const std::int64_t m = 1 + static_cast<std::int64_t>(rng.below(30));
    const std::int64_t n = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
    std::vector<std::int64_t> a(static_cast<std::size_t>(n));
    for (auto& v : a) v = 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m)));
    const auto ins = insert_all(HashSequence{m, a});
    const auto blocks = block_decompose(ins);
    ASSERT_EQ(static_cast<std::int64_t>(blocks.blocks.size()), m - n);
    std::int64_t length = 0, disp = 0;
    for (const auto& b : blocks.blocks) {
      length += b.length;
      disp += b.displacement;
      ASSERT_LE(b.displacement, (b.length - 1) * (b.length - 2) / 2);
    }
    ASSERT_EQ(length, m);
    ASSERT_EQ(disp, ins.total);
  }
}

TEST(Enumerate, SmallCounts) {
  const auto law3 = enumerate_all(3);
  EXPECT_EQ(law3.sequences, 64u);
  EXPECT_EQ(law3.max_displacement, 3);
  const auto law1 = enumerate_all(1);
  EXPECT_EQ(law1.sequences, 2u);
  EXPECT_EQ(law1.max_displacement, 0);
  EXPECT_EQ(law1.counts[0], 2u);
  EXPECT_EQ(enumerate_all(0).sequences, 1u);
}

TEST(Enumerate, MatchesBruteForceLawAndBound) {
  for (std::int64_t n = 1; n <= 6; ++n) {
    const auto law = enumerate_all(n);
    EXPECT_EQ(BigInt(law.sequences), sequence_count(n));
    EXPECT_EQ(law.max_displacement, n * (n - 1) / 2);
    std::vector<std::uint64_t> counts(law.counts.size(), 0);
    for_each_sequence(n + 1, n, [&](const std::vector<std::int64_t>& a) {
      ++counts[insert_all(HashSequence{n + 1, a}).total];
    });
    EXPECT_EQ(counts, law.counts) << "n = " << n;
  }
}

TEST(Enumerate, WorkerCountDoesNotChangeTheResult) {
  const auto one = enumerate_all(6, 8, 1);
  const auto four = enumerate_all(6, 8, 4);
  EXPECT_EQ(one.counts, four.counts);
}

TEST(Enumerate, BudgetIsEnforced) {
  EXPECT_THROW(enumerate_all(9), ResourceError);
  EXPECT_THROW(enumerate_all(10, 10), ResourceError);
  EXPECT_THROW(enumerate_all(-1), DomainError);
}

TEST(Enumerate, TailIsMonotoneInTableSize) {
  for (std::int64_t n = 1; n < 7; ++n) {
    const auto& small = displacement_law(n);
    const auto& big = displacement_law(n + 1);
    for (std::int64_t y = 0; y <= big.max_displacement + 1; ++y) {
      EXPECT_LE(small.tail(y), big.tail(y) + 1e-15) << "n = " << n << ", y = " << y;
    }
  }
}

TEST(ExpectedDisplacement, ClosedFormMatchesEnumeration) {
  EXPECT_NEAR(expected_full_table_displacement(2), 1.0 / 3.0, 1e-15);
  for (std::int64_t n = 0; n <= 7; ++n) {
    EXPECT_NEAR(expected_full_table_displacement(n), displacement_law(n).mean(), 1e-12) << "n = " << n;
  }
}

TEST(PairSampler, SmallBlocks) {
  Rng rng(3);
  std::vector<std::uint64_t> given5(7, 0);
  std::uint64_t n5 = 0;
  double sum4 = 0.0;
  std::uint64_t n4 = 0;
  for (int i = 0; i < 2'000'000; ++i) {
    const auto d = sample_pair_xy(0.35, rng);
    ASSERT_FALSE(d.truncated);
    if (d.x == 1) ASSERT_EQ(d.y, 0);
    if (d.x == 2) ASSERT_EQ(d.y, 0);
    if (d.x == 5) {
      ++given5[d.y];
      ++n5;
    }
    if (d.x == 4) {
      sum4 += static_cast<double>(d.y);
      ++n4;
    }
  }
  const auto& law4 = displacement_law(4);
  for (std::int64_t y = 0; y <= 6; ++y) {
    const double p = law4.probability(y);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n5));
    EXPECT_NEAR(static_cast<double>(given5[y]) / static_cast<double>(n5), p, 3 * se + 1e-12) << "y = " << y;
  }
  const auto& law3 = displacement_law(3);
  double var3 = 0.0;
  for (std::int64_t y = 0; y <= 3; ++y) var3 += law3.probability(y) * (y - law3.mean()) * (y - law3.mean());
  EXPECT_NEAR(sum4 / static_cast<double>(n4), law3.mean(), 3 * std::sqrt(var3 / static_cast<double>(n4)));
}

TEST(PairSampler, MeanOfYMatchesSeries) {
  Rng rng(4);
  const int draws = 1'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double y = static_cast<double>(sample_pair_xy(0.3, rng).y);
    s += y;
    s2 += y * y;
  }
  const double m = s / draws;
  const double se = std::sqrt((s2 / draws - m * m) / draws);
  EXPECT_NEAR(pair_mean_y(0.3), m, 4 * se);
}

TEST(Adversarial, TotalDisplacement) {
  EXPECT_EQ(insert_all(adversarial_sequence(10, 3)).total, 21);
  EXPECT_EQ(insert_all(adversarial_sequence(10, 0)).total, 0);
  const auto seq = adversarial_sequence(4, 1);
  EXPECT_EQ(seq.m, 5);
  EXPECT_EQ(seq.addresses, (std::vector<std::int64_t>{1, 1, 2, 3}));
  EXPECT_EQ(insert_all(seq).total, 3);
  for (std::int64_t m = 1; m <= 14; ++m) {
    for (std::int64_t k = 0; 2 * k <= m; ++k) {
      EXPECT_EQ(insert_all(adversarial_sequence(m, k)).total, k * (m - k));
    }
  }
  EXPECT_THROW(adversarial_sequence(4, 3), DomainError);
}

TEST(Adversarial, PermutationCount) {
  EXPECT_EQ(permutation_count(4, 1), 12);
  EXPECT_EQ(permutation_count(7, 0), factorial(7));
  EXPECT_EQ(permutation_count(6, 3), 90);
  EXPECT_EQ(permutation_count(30, 5), factorial(30) / 32);
  EXPECT_THROW(permutation_count(4, 3), DomainError);
}

TEST(Adversarial, PermutationCountMatchesDistinctOrderings) {
  for (std::int64_t m = 1; m <= 8; ++m) {
    for (std::int64_t k = 0; 2 * k <= m; ++k) {
      auto a = adversarial_sequence(m, k).addresses;
      std::sort(a.begin(), a.end());
      std::uint64_t distinct = 0;
      do {
        ++distinct;
        ASSERT_EQ(insert_all(HashSequence{m + 1, a}).total, k * (m - k));
      } while (std::next_permutation(a.begin(), a.end()));
      EXPECT_EQ(BigInt(distinct), permutation_count(m, k)) << m << "," << k;
    }
  }
}

TEST(Threshold, MatchesLinearScan) {
  EXPECT_EQ(n_y_threshold(3), 3);
  EXPECT_EQ(n_y_threshold(1), 2);
  for (double y : {0.5, 1.0, 2.0, 2.5, 3.0, 6.0, 7.0, 100.0, 101.0, 4950.0, 4951.0, 123456.0}) {
    std::int64_t n = 1;
    while (static_cast<double>(n * (n - 1)) / 2.0 < y) ++n;
    EXPECT_EQ(n_y_threshold(y), n) << "y = " << y;
  }
  EXPECT_THROW(n_y_threshold(0.0), DomainError);
}
