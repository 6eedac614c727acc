#include "polya/enumeration.hpp"
#include "support/brute_force.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace polya;
using polya::testing::brute_force;

namespace {

constexpr std::size_t kBruteMax = 12;

// Published values of A000081 for n = 1..30.
const std::vector<std::string> kA000081 = {
    "1",          "1",          "2",           "4",           "9",           "20",          "48",
    "115",        "286",        "719",         "1842",        "4766",        "12486",       "32973",
    "87811",      "235381",     "634847",      "1721159",     "4688676",     "12826228",    "35221832",
    "97055181",   "268282855",  "743724984",   "2067174645",  "5759636510",  "16083734329", "45007066269",
    "126186554308", "354426847597"};

Rational frac(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::size_t level_size(const polya::testing::BruteTree& t, std::size_t k) { return k < t.profile.size() ? t.profile[k] : 0; }

}  // namespace

TEST(TreeCounts, FirstTen) {
  const TreeCountTable y = build_tree_counts(10);
  const std::vector<long> expected = {1, 1, 2, 4, 9, 20, 48, 115, 286, 719};
  for (std::size_t n = 1; n <= 10; ++n) EXPECT_EQ(y[n], expected[n - 1]) << n;
  EXPECT_EQ(y[0], 0);
}

TEST(TreeCounts, MatchesBruteForceAndPublishedValues) {
  const TreeCountTable y = build_tree_counts(30);
  for (std::size_t n = 1; n <= kBruteMax; ++n) EXPECT_EQ(y[n], BigInt(brute_force().of_size(n).size())) << n;
  for (std::size_t n = 1; n <= 30; ++n) EXPECT_EQ(y[n], BigInt(kA000081[n - 1])) << n;
}

TEST(TreeCounts, MatchesFunctionalEquationFixedPoint) {
  EXPECT_EQ(build_tree_counts(100).series(), tree_series_by_fixed_point(100));
}

TEST(TreeCounts, RejectsZeroOrder) { EXPECT_THROW(build_tree_counts(0), std::invalid_argument); }

TEST(Witness, CoefficientsAndFirstNegative) {
  const SimplyGeneratedWitness w = simply_generated_witness(10);
  const std::vector<long> expected = {1, 1, 1, 0, 0, -1, 3, -5, 7, -8, 1};
  ASSERT_EQ(w.phi.order(), 10u);
  for (std::size_t n = 0; n <= 10; ++n) EXPECT_EQ(w.phi[n], expected[n]) << n;
  ASSERT_TRUE(w.first_negative.has_value());
  EXPECT_EQ(*w.first_negative, 5u);
}

TEST(Witness, DefiningIdentity) {
  const SimplyGeneratedWitness w = simply_generated_witness(40);
  EXPECT_EQ(w.phi * w.inverse.truncated(40), IntSeries::monomial(1, 40));
  EXPECT_THROW(simply_generated_witness(9), std::invalid_argument);
}

TEST(HeightSeries, SmallCases) {
  EXPECT_EQ(height_restricted_series(1, 6), IntSeries::monomial(1, 6));
  EXPECT_TRUE(height_restricted_series(0, 6).is_zero());
  EXPECT_EQ(height_restricted_series(3, 6)[4], 3);
}

TEST(HeightSeries, MonotoneAndStabilises) {
  const std::size_t order = 14;
  const IntSeries y = build_tree_counts(order).series();
  IntSeries prev(order);
  for (std::size_t k = 0; k <= order + 2; ++k) {
    const IntSeries cur = height_restricted_series(k, order);
    for (std::size_t n = 0; n <= order; ++n) {
      EXPECT_LE(prev[n], cur[n]);
      EXPECT_GE(y[n] - cur[n], 0);  // e_k = y - y_k is nonnegative
      if (k >= n) {
        EXPECT_EQ(cur[n], y[n]);
      }
    }
    prev = cur;
  }
}

TEST(HeightSeries, AgreesWithUnmarkedLevelSeries) {
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_EQ(height_restricted_series(k, 12), level_marked_series(k, 12).at_zero_markers()) << k;
}

TEST(HeightSeries, MatchesBruteForce) {
  for (std::size_t k = 0; k <= kBruteMax; ++k) {
    const IntSeries yk = height_restricted_series(k, kBruteMax);
    for (std::size_t n = 1; n <= kBruteMax; ++n) {
      std::size_t below = 0;
      for (const auto& t : brute_force().of_size(n)) below += t.height < k ? 1 : 0;
      EXPECT_EQ(yk[n], BigInt(below)) << "k=" << k << " n=" << n;
    }
  }
}

TEST(HeightDistributionTest, SmallSizes) {
  const HeightDistribution h1 = height_distribution(1);
  EXPECT_EQ(h1.probability(0), Rational(1));
  const HeightDistribution h3 = height_distribution(3);
  EXPECT_EQ(h3.probability(1), Rational(1, 2));
  EXPECT_EQ(h3.probability(2), Rational(1, 2));
  EXPECT_EQ(h3.mean(), Rational(3, 2));
}

TEST(HeightDistributionTest, MatchesBruteForce) {
  const HeightTable table(kBruteMax);
  for (std::size_t n = 1; n <= kBruteMax; ++n) {
    const HeightDistribution d = height_distribution(n, table);
    const auto& trees = brute_force().of_size(n);
    std::map<std::size_t, long> hist;
    for (const auto& t : trees) hist[t.height]++;
    Rational total = 0;
    for (std::size_t h = 0; h < n; ++h) {
      EXPECT_EQ(d.probability(h), frac(hist[h], static_cast<long>(trees.size()))) << n << " " << h;
      total += d.probability(h);
    }
    EXPECT_EQ(total, Rational(1));
    EXPECT_EQ(d.probability(n - 1), frac(1, static_cast<long>(trees.size())));
    Rational second = 0;
    for (const auto& t : trees) second += Rational(static_cast<long>(t.height * t.height));
    EXPECT_EQ(d.moment(2), second / Rational(static_cast<long>(trees.size())));
  }
}

TEST(LevelMarked, RootLevel) {
  const LevelSeries s = level_marked_series(0, 10);
  const TreeCountTable y = build_tree_counts(10);
  for (std::size_t n = 1; n <= 10; ++n) {
    EXPECT_EQ(s.coefficient(n, {1}), y[n]);
    s.for_each_term(n, [&](const Marks& m, const BigInt&) { EXPECT_EQ(m[0], 1u); });
  }
}

TEST(LevelMarked, SizeFourDepthOne) {
  const LevelSeries s = level_marked_series(1, 4);
  EXPECT_EQ(s.coefficient(4, {1}), 2);
  EXPECT_EQ(s.coefficient(4, {2}), 1);
  EXPECT_EQ(s.coefficient(4, {3}), 1);
  EXPECT_EQ(s.coefficient(4, {0}), 0);
}

TEST(LevelMarked, MarginalisationAndSupport) {
  const std::size_t order = 15;
  const IntSeries y = build_tree_counts(order).series();
  LevelSeries s = level_marked_series(0, order);
  for (std::size_t k = 0; k <= order; ++k) {
    EXPECT_EQ(s.at_unit_markers(), y) << k;
    for (std::size_t n = 1; n <= order; ++n)
      s.for_each_term(n, [&](const Marks& m, const BigInt&) {
        if (m[0] >= 1) {
          EXPECT_LE(m[0] + k, n);
        }
      });
    s = s.polya_step();
  }
}

TEST(LevelDistributionTest, RootIsPointMass) {
  const LevelDistribution d = level_size_distribution(9, 0);
  ASSERT_EQ(d.pmf().size(), 1u);
  EXPECT_EQ(d.probability({1}), Rational(1));
}

TEST(LevelDistributionTest, SizeFourDepthOne) {
  const LevelDistribution d = level_size_distribution(4, 1);
  EXPECT_EQ(d.probability({1}), Rational(1, 2));
  EXPECT_EQ(d.probability({2}), Rational(1, 4));
  EXPECT_EQ(d.probability({3}), Rational(1, 4));
  EXPECT_EQ(d.total(), Rational(1));
}

TEST(LevelDistributionTest, MatchesBruteForce) {
  for (std::size_t n = 1; n <= kBruteMax; ++n) {
    const auto& trees = brute_force().of_size(n);
    for (std::size_t k = 0; k <= n; ++k) {
      const LevelDistribution d = level_size_distribution(n, k);
      std::map<std::size_t, long> hist;
      for (const auto& t : trees) hist[level_size(t, k)]++;
      EXPECT_EQ(d.total(), Rational(1));
      for (const auto& [m, count] : hist)
        EXPECT_EQ(d.probability({m}), frac(count, static_cast<long>(trees.size()))) << n << " " << k << " " << m;
      for (const auto& [m, p] : d.pmf()) EXPECT_TRUE(hist.count(m[0])) << "spurious support";
    }
  }
}

TEST(JointDistribution, RootAndFirstLevel) {
  const LevelDistribution joint = joint_level_distribution(7, {0, 1});
  const LevelDistribution single = level_size_distribution(7, 1);
  for (const auto& [m, p] : joint.pmf()) {
    EXPECT_EQ(m[0], 1u);
    EXPECT_EQ(p, single.probability({m[1]}));
  }
  EXPECT_EQ(joint.total(), Rational(1));
}

TEST(JointDistribution, MatchesBruteForceTwoAndThreeLevels) {
  const std::vector<std::vector<std::size_t>> depth_sets = {{1, 2}, {0, 3}, {2, 4}, {1, 2, 3}, {0, 2, 5}, {1, 3, 4}};
  for (std::size_t n : {5u, 8u, 11u}) {
    const auto& trees = brute_force().of_size(n);
    for (const auto& depths : depth_sets) {
      const LevelDistribution d = joint_level_distribution(n, depths);
      std::map<Marks, long> hist;
      for (const auto& t : trees) {
        Marks key;
        for (auto k : depths) key.push_back(level_size(t, k));
        hist[key]++;
      }
      EXPECT_EQ(d.pmf().size(), hist.size());
      for (const auto& [m, count] : hist) EXPECT_EQ(d.probability(m), frac(count, static_cast<long>(trees.size())));
    }
  }
}

TEST(JointDistribution, MarginalsReproduceLowerDimensions) {
  const std::size_t n = 16;
  const LevelDistribution three = joint_level_distribution(n, {1, 3, 4});
  EXPECT_EQ(three.total(), Rational(1));
  const LevelDistribution two = joint_level_distribution(n, {1, 3});
  EXPECT_EQ(three.marginal_without(2).pmf(), two.pmf());
  EXPECT_EQ(two.marginal_without(1).pmf(), level_size_distribution(n, 1).pmf());
  EXPECT_EQ(two.marginal_without(0).pmf(), level_size_distribution(n, 3).pmf());
}

TEST(JointDistribution, RejectsBadDepths) {
  EXPECT_THROW(joint_level_distribution(6, {1, 2, 3, 4}), std::invalid_argument);
  EXPECT_THROW(joint_level_distribution(6, {2, 2}), std::invalid_argument);
  EXPECT_THROW(joint_level_distribution(6, {3, 1}), std::invalid_argument);
}

TEST(FourthMoment, SizeThree) {
  EXPECT_EQ(level_diff_fourth_moment(3, 0, 1), Rational(1, 2));
  EXPECT_EQ(level_diff_fourth_moment_operator(3, 0, 1), Rational(1, 2));
}

TEST(FourthMoment, EmptyUpperLevel) {
  const std::size_t n = 9;
  const LevelDistribution single = level_size_distribution(n, 2);
  Rational fourth = 0;
  for (const auto& [m, p] : single.pmf()) fourth += p * Rational(static_cast<long>(m[0] * m[0] * m[0] * m[0]));
  EXPECT_EQ(level_diff_fourth_moment(n, 2, n), fourth);
  EXPECT_EQ(level_diff_fourth_moment(n, 2, n + 3), fourth);
}

TEST(FourthMoment, MatchesBruteForce) {
  for (std::size_t n = 1; n <= kBruteMax; ++n) {
    const auto& trees = brute_force().of_size(n);
    for (std::size_t r = 0; r <= 4; ++r)
      for (std::size_t h = 1; h <= 4; ++h) {
        Rational acc = 0;
        for (const auto& t : trees) {
          const long diff = static_cast<long>(level_size(t, r)) - static_cast<long>(level_size(t, r + h));
          acc += Rational(diff * diff * diff * diff);
        }
        acc /= Rational(static_cast<long>(trees.size()));
        EXPECT_EQ(level_diff_fourth_moment(n, r, h), acc) << n << " " << r << " " << h;
      }
  }
}

TEST(FourthMoment, OperatorRouteAgreesWithDistributionRoute) {
  for (std::size_t n : {10u, 20u, 30u})
    for (std::size_t r : {0u, 2u, 5u})
      for (std::size_t h : {1u, 3u, 6u})
        EXPECT_EQ(level_diff_fourth_moment_operator(n, r, h), level_diff_fourth_moment(n, r, h)) << n << " " << r << " " << h;
}

TEST(FourthMoment, TableCoversEverySizeAndDepth) {
  const std::size_t order = 14, h = 2, r_max = 5;
  const auto table = level_diff_fourth_moment_table(order, h, r_max);
  ASSERT_EQ(table.size(), r_max + 1);
  for (std::size_t r = 0; r <= r_max; ++r)
    for (std::size_t n = 1; n <= order; ++n) EXPECT_EQ(table[r][n], level_diff_fourth_moment(n, r, h)) << n << " " << r;
  EXPECT_THROW(level_diff_fourth_moment_table(10, 0, 3), std::invalid_argument);
}
