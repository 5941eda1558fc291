#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "tiletide/error.hpp"
#include "tiletide/experiments.hpp"
#include "tiletide/sizeenergy.hpp"

using namespace tiletide;

namespace {

constexpr std::array<Shift, 3> kNoShift{Shift::zero, Shift::zero, Shift::zero};

TileFamily single_tile() {
  return TileFamily({TriTile(0, DyadicInterval{0, 0}, {DyadicInterval{0, 0}, DyadicInterval{0, 1}, DyadicInterval{0, 2}})},
                    kNoShift);
}

CoeffSequence coeffs(int component, std::map<TileId, Complex> values) {
  CoeffSequence c;
  c.component = component;
  c.values = std::move(values);
  return c;
}

}  // namespace

TEST(Size, SingleTileIsNormalizedCoefficient) {
  const TileFamily f = single_tile();
  const CoeffSequence a = coeffs(1, {{0, Complex(3, 4)}});
  EXPECT_DOUBLE_EQ(size(f, a, 1), 5.0);
  const SizeResult r = size_of(f, a, 2);
  EXPECT_DOUBLE_EQ(r.value, 5.0);
  ASSERT_TRUE(r.witness);
  EXPECT_NE(r.witness->type, 2);
}

TEST(Size, TopsOfTheExcludedTypeAreNeverUsed) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{10, -2, 3});
    for (int j = 1; j <= 3; ++j)
      for (const auto& top : candidate_tops(f, TopOptions{}, j)) EXPECT_NE(top.type, j);
  }
}

TEST(Size, FormulaMatchesSubsetEnumeration) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 80; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{14, -2, 3});
    const CoeffSequence a = random_coeffs(rng, f, 1, 0.2);
    for (int j = 1; j <= 3; ++j) {
      const double exact = size_exhaustive(f, a, j);
      EXPECT_NEAR(size(f, a, j), exact, 1e-12 * std::max(1.0, exact));
    }
  }
}

TEST(Size, MonotoneUnderCoefficientGrowthAndHomogeneous) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{12, -2, 3});
    CoeffSequence a = random_coeffs(rng, f, 2, 0.2);
    const double base = size(f, a, 1);
    CoeffSequence b = a;
    for (auto& [id, v] : b.values) v *= 2.0;
    EXPECT_NEAR(size(f, b, 1), 2 * base, 1e-12 * std::max(1.0, base));
    a.values.begin()->second += 10.0;
    EXPECT_GE(size(f, a, 1) + 1e-12, 0.0);
  }
}

TEST(Size, EnumerationCapIsEnforced) {
  std::mt19937_64 rng(31);
  std::vector<TriTile> ms;
  for (int k = 0; k < 26; ++k)
    ms.push_back(TriTile(k, DyadicInterval{-5, k}, {DyadicInterval{5, 0}, DyadicInterval{5, 0}, DyadicInterval{5, 0}}));
  const TileFamily f(ms, kNoShift);
  const CoeffSequence a = random_coeffs(rng, f, 1, 0.0);
  EXPECT_THROW(size_exhaustive(f, a, 2, SizeOptions{TopOptions{5}, {}}), DomainError);
}

TEST(Trees, MembersAreDominatedByTheTop) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const auto [f, tree] = random_tree(rng, 12);
    EXPECT_TRUE(is_tree(f, tree));
    for (TileId id : tree.members) EXPECT_TRUE(dominated_by(f.at(id), tree.top));
    std::set<TileId> members(tree.members.begin(), tree.members.end());
    for (const auto& p : f.members())
      if (!members.count(p.id())) EXPECT_FALSE(dominated_by(p, tree.top));
  }
}

TEST(Energy, SingleTileHandValue) {
  // a = 3 on |I| = 1: the ancestor top [0, 2) carries n = 1 with |I_T| = 2, so 2 * sqrt(2).
  const TileFamily f = single_tile();
  const CoeffSequence a = coeffs(1, {{0, Complex(3)}});
  const EnergyResult ex = energy(f, a, 2, EnergyMode::exhaustive);
  EXPECT_NEAR(ex.value, 2 * std::sqrt(2.0), 1e-12);
  ASSERT_TRUE(ex.witness);
  EXPECT_EQ(ex.witness->threshold, 1);
  EXPECT_TRUE(check_forest(f, a, *ex.witness).ok());
  EXPECT_LE(energy(f, a, 2, EnergyMode::greedy).value, ex.value);
}

TEST(Energy, TypeThreeIsRejected) {
  const TileFamily f = single_tile();
  EXPECT_THROW(energy(f, coeffs(3, {{0, Complex(1)}}), 3, EnergyMode::greedy), DomainError);
}

TEST(Energy, GreedyIsSoundAgainstExhaustive) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{10, -2, 3});
    const CoeffSequence a = random_coeffs(rng, f, 1, 0.1);
    for (int t = 1; t <= 2; ++t) {
      const EnergyResult g = energy(f, a, t, EnergyMode::greedy);
      const EnergyResult e = energy(f, a, t, EnergyMode::exhaustive);
      EXPECT_LE(g.value, e.value * (1 + 1e-12));
      if (g.witness) EXPECT_TRUE(check_forest(f, a, *g.witness).ok());
      if (e.witness) EXPECT_TRUE(check_forest(f, a, *e.witness).ok());
    }
  }
}

TEST(Energy, StrongDisjointnessRejectsSharedTiles) {
  const TileFamily f = single_tile();
  const TreeTop top{DyadicInterval{0, 0}, DyadicInterval{0, 0}, 1, false};
  const Tree t{top, {0}};
  EXPECT_FALSE(strongly_disjoint(f, t, t, 2));
}

TEST(Partition, CoversFamilyAndRespectsCaps) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{16, -2, 3});
    const CoeffSequence a = random_coeffs(rng, f, 2, 0.15);
    for (int t = 1; t <= 3; ++t) {
      const PartitionReport r = partition_forests(f, a, t);
      std::multiset<TileId> seen(r.discarded.begin(), r.discarded.end());
      for (const auto& level : r.levels) {
        EXPECT_LE(std::ldexp(1.0, level.n), r.family_size * (1 + 1e-12));
        for (const auto& tree : level.trees) {
          EXPECT_NE(tree.type(), t);
          EXPECT_TRUE(is_tree(f, tree));
          seen.insert(tree.members.begin(), tree.members.end());
          const double s = size(f.subfamily(tree.members), a, t, SizeOptions{TopOptions{}, {tree.top}});
          EXPECT_LE(s, std::ldexp(1.0, level.n + 1) * (1 + 1e-12));
        }
        // Levels below t = 3 obey sum |I_T| <= 2^(-2n) sum |a|^2.
        if (t != 3) EXPECT_LE(level.bound_ratio, 1.0 + 1e-12);
      }
      EXPECT_EQ(seen.size(), f.size());
      EXPECT_EQ(std::set<TileId>(seen.begin(), seen.end()).size(), f.size());
    }
  }
}

TEST(Partition, TypeThreeBoundFormula) {
  // |E4| 2^(-2n) (2^(-n) |E4|^(-1/2))^(2/mu) at |E4| = 4, n = 1, mu = 2: 4 * 1/4 * (1/4) = 1/4.
  EXPECT_NEAR(partition_bound_t3(4.0, 1, 2.0), 0.25, 1e-15);
  const auto j = partition_to_json(partition_forests(single_tile(), coeffs(1, {{0, Complex(3)}}), 2));
  EXPECT_EQ(j.at("t"), 2);
}

TEST(Bmo, HandComputedNestedPair) {
  // [0,1) and [0,1/2) with unit coefficients: the square function is 3 on [0,1/2), 1 on [1/2,1).
  const std::vector<WeightedInterval> fam{{Interval{Rational(0), Rational(1)}, Complex(1)},
                                          {Interval{Rational(0), Rational(1, 2)}, Complex(1)}};
  EXPECT_NEAR(bmo_norm(fam, 2.0), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(bmo_norm(fam, 1.0), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(jn_ratio(fam, 1.0, 2.0), 1.0, 1e-14);
  EXPECT_EQ(jn_ratio({}, 1.0, 2.0), 1.0);
  EXPECT_THROW(jn_ratio(fam, 2.0, 1.0), DomainError);
}

TEST(Bmo, RatioStaysInBand) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const double r = jn_ratio(random_intervals(rng, 30), 1.0, 2.0);
    EXPECT_GE(r, 1.0 / 8);
    EXPECT_LE(r, 8.0);
  }
}

TEST(SingleTree, EstimateHoldsWithConstantOne) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 200; ++trial) {
    const auto [f, tree] = random_tree(rng, 16);
    const auto a1 = random_coeffs(rng, f, 1, 0.1), a2 = random_coeffs(rng, f, 2, 0.1), a3 = random_coeffs(rng, f, 3, 0.1);
    const TreeEstimate e = single_tree_estimate(f, tree, a1, a2, a3);
    EXPECT_LE(e.lhs, e.rhs * (1 + 1e-12));
  }
}

TEST(Exceptional, MajorSubsetKeepsHalf) {
  const GridSpec g = make_grid(-16.0, 1.0 / 16, 512);
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<int> cell(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    std::array<GridSet, 4> e;
    for (auto& s : e) {
      const double a = -8.0 + cell(rng) / 16.0;
      s = GridSet::from_intervals(g, {{a, a + 0.5 + cell(rng) / 64.0}});
    }
    for (int b = 1; b <= 4; ++b) {
      const ExceptionalSet x = exceptional_set(e, b);
      EXPECT_GE(x.major.measure(), 0.5 * e[b - 1].measure());
      EXPECT_EQ(x.major.minus(x.omega).count(), x.major.count());
      // Omega contains every super-level set at the chosen C.
      const double denom = e[b - 1].measure();
      for (const auto& s : e) {
        const GridFunction m = hl_maximal(s.indicator());
        for (std::size_t k = 0; k < g.n; ++k)
          if (m[k].real() > x.C * s.measure() / denom) EXPECT_TRUE(x.omega.mask[k]);
      }
    }
  }
  std::array<GridSet, 4> empty{GridSet::empty(g), GridSet::empty(g), GridSet::empty(g), GridSet::empty(g)};
  EXPECT_THROW(exceptional_set(empty, 4), DomainError);
}

TEST(Exceptional, DistanceShells) {
  const GridSpec g = make_grid(0.0, 1.0 / 16, 256);
  const GridSet omega = GridSet::from_intervals(g, {{0.0, 8.0}});
  const auto tile = [](int scale, std::int64_t idx) {
    return TriTile(0, DyadicInterval{scale, idx}, {DyadicInterval{-scale, 0}, DyadicInterval{-scale, 0}, DyadicInterval{-scale, 0}});
  };
  EXPECT_EQ(distance_shell(tile(0, 3), omega), 2);   // [3,4): 1 + 3/1 = 4
  EXPECT_EQ(distance_shell(tile(0, 10), omega), 0);  // outside omega
  EXPECT_EQ(distance_shell(tile(-1, 1), omega), 1);  // [1/2,1): 1 + (1/2)/(1/2) = 2
}
