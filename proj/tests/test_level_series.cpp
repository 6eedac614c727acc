#include "polya/enumeration.hpp"
#include "polya/level_series.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace polya;

namespace {

using SparseTable = std::map<std::pair<std::size_t, Marks>, BigInt>;

SparseTable as_table(const LevelSeries& s) {
  SparseTable t;
  for (const auto& term : s.terms()) t[{term.n, term.marks}] = term.value;
  return t;
}

// Reference Pólya exponential on a sparse (n, m) table, straight from
// exp(sum_i F(x^i, u^i)/i) = prod over monomials (1 - x^n u^m)^{-F_{n,m}}.
SparseTable naive_polya_step(const SparseTable& f, std::size_t order) {
  SparseTable acc;
  acc[{0, Marks{0}}] = 1;
  for (const auto& [key, count] : f) {
    const auto [n, marks] = key;
    for (long rep = 0; rep < count.get_si(); ++rep) {
      // multiply by 1/(1 - x^n u^m)
      SparseTable result;
      for (const auto& [k2, v] : acc)
        for (std::size_t rep2 = 0; k2.first + rep2 * n <= order; ++rep2)
          result[{k2.first + rep2 * n, Marks{k2.second[0] + rep2 * marks[0]}}] += v;
      acc = std::move(result);
    }
  }
  SparseTable out;
  for (const auto& [key, v] : acc)
    if (key.first + 1 <= order && v != 0) out[{key.first + 1, key.second}] = v;
  return out;
}

}  // namespace

TEST(LevelSeries, SubstituteSpreadsSizeAndMarks) {
  const LevelSeries s = LevelSeries::from_terms(6, 1, {{1, {1}, 2}, {2, {1}, 3}, {3, {2}, 5}});
  const LevelSeries t = s.substitute_power(2);
  EXPECT_EQ(t.coefficient(2, {2}), 2);
  EXPECT_EQ(t.coefficient(4, {2}), 3);
  EXPECT_EQ(t.coefficient(6, {4}), 5);
  EXPECT_EQ(t.terms().size(), 3u);
  const LevelSeries u = s.substitute_power(1);
  EXPECT_EQ(as_table(u), as_table(s));
}

TEST(LevelSeries, PolyaStepMatchesSparseReference) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<long> value(0, 3);
  const std::size_t order = 9;
  std::vector<LevelTerm> terms;
  for (std::size_t n = 1; n <= order; ++n)
    for (std::size_t m = 0; m <= n; ++m)
      if (long v = value(rng); v > 0 && (n + m) % 3 != 0) terms.push_back({n, {m}, v});
  const LevelSeries f = LevelSeries::from_terms(order, 1, terms);
  EXPECT_EQ(as_table(f.polya_step()), naive_polya_step(as_table(f), order));
}

TEST(LevelSeries, MarkedRootAndSpecializations) {
  const TreeCountTable counts = build_tree_counts(12);
  const LevelSeries s = LevelSeries::marked_root(counts.series());
  for (std::size_t n = 1; n <= 12; ++n) EXPECT_EQ(s.coefficient(n, {1}), counts[n]);
  EXPECT_EQ(s.at_unit_markers(), counts.series());
  EXPECT_TRUE(s.at_zero_markers().is_zero());
}

TEST(LevelSeries, NestedMarkingShiftsCoordinates) {
  const TreeCountTable counts = build_tree_counts(8);
  const LevelSeries inner = LevelSeries::marked_root(counts.series());
  const LevelSeries outer = LevelSeries::marked_root(inner);
  EXPECT_EQ(outer.arity(), 2u);
  for (std::size_t n = 1; n <= 8; ++n) EXPECT_EQ(outer.coefficient(n, {1, 1}), counts[n]);
  EXPECT_EQ(outer.coefficient(3, {1, 0}), 0);
}

TEST(LevelSeries, RejectsInvalidInput) {
  EXPECT_THROW(LevelSeries::from_terms(4, 1, {{2, {1}, -1}}), std::domain_error);
  EXPECT_THROW(LevelSeries::from_terms(4, 1, {{2, {3}, 1}}), std::domain_error);
  EXPECT_THROW(LevelSeries::from_terms(4, 4, {}), std::invalid_argument);
  const LevelSeries s = LevelSeries::from_terms(4, 2, {{2, {1, 1}, 1}});
  EXPECT_THROW(s.coefficient(2, {1}), std::invalid_argument);
  EXPECT_EQ(s.coefficient(2, {3, 0}), 0);
}
