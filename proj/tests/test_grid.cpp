#include <random>
#include <set>

#include <gtest/gtest.h>

#include "tiletide/error.hpp"
#include "tiletide/family_io.hpp"
#include "tiletide/grid.hpp"

using namespace tiletide;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

TriTile tri(TileId id, int scale, std::int64_t idx, std::array<std::int64_t, 3> f,
            std::array<Shift, 3> s = {Shift::zero, Shift::zero, Shift::zero}) {
  return TriTile(id, DyadicInterval{scale, idx, Shift::zero},
                 {DyadicInterval{-scale, f[0], s[0]}, DyadicInterval{-scale, f[1], s[1]},
                  DyadicInterval{-scale, f[2], s[2]}});
}

}  // namespace

TEST(Rational, ParsesFractionsAndDecimals) {
  EXPECT_EQ(parse_rational("-0.125"), q(-1, 8));
  EXPECT_EQ(parse_rational("3/6"), q(1, 2));
  EXPECT_EQ(exact_log2(pow2(-7)), -7);
  EXPECT_THROW(exact_log2(q(3)), DomainError);
}

TEST(Mesh, SignTwistAlternatesWithScale) {
  // scale 0: index + shift; scale 1: 2 (index - shift).
  EXPECT_EQ((DyadicInterval{0, 2, Shift::third}.realize().lo), q(7, 3));
  EXPECT_EQ((DyadicInterval{1, 2, Shift::third}.realize().lo), q(10, 3));
  EXPECT_EQ((DyadicInterval{-1, 0, Shift::two_thirds}.realize().lo), q(-1, 3));
}

TEST(Mesh, IntervalsCoverWindowInOrder) {
  for (Shift s : {Shift::zero, Shift::third, Shift::two_thirds})
    for (int scale : {-3, 0, 2}) {
      const Interval w{q(-5, 2), q(7, 3)};
      const auto iv = mesh_intervals(s, scale, w);
      ASSERT_FALSE(iv.empty());
      EXPECT_LE(iv.front().realize().lo, w.lo);
      EXPECT_GE(iv.back().realize().hi, w.hi);
      for (std::size_t k = 0; k + 1 < iv.size(); ++k) {
        EXPECT_EQ(iv[k].realize().hi, iv[k + 1].realize().lo);
        EXPECT_TRUE(iv[k].realize().intersects(w));
      }
    }
}

TEST(Mesh, ShiftedMeshesContainEveryIntervalUpToDilation) {
  // Any interval J lies in a mesh interval of some shift with length at most 6|J|.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> num(-400, 400), len(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    const Rational lo(num(rng), 37);
    const Interval J{lo, lo + Rational(len(rng), 37)};
    bool found = false;
    for (Shift s : {Shift::zero, Shift::third, Shift::two_thirds})
      for (int scale = -8; scale <= 6 && !found; ++scale) {
        if (pow2(scale) > 6 * J.length()) continue;
        for (const auto& d : mesh_intervals(s, scale, J))
          if (d.realize().contains(J)) found = true;
      }
    EXPECT_TRUE(found) << to_string(J.lo) << " " << to_string(J.hi);
  }
}

TEST(Tiles, OrderRelationsOnHandExamples) {
  const Tile big = make_tile(DyadicInterval{0, 0, Shift::zero}, DyadicInterval{0, 0, Shift::zero});
  const Tile small = make_tile(DyadicInterval{-1, 0, Shift::zero}, DyadicInterval{1, 0, Shift::zero});
  const auto f = relation_flags(small, big);
  EXPECT_TRUE(f.lt);
  EXPECT_TRUE(f.le);
  EXPECT_TRUE(f.lesssim);
  EXPECT_FALSE(f.lesssim_prime);
  EXPECT_EQ(tile_relation(big, small), TileRelation::lt);
  EXPECT_FALSE(relation_flags(big, small).lesssim);
  EXPECT_EQ(tile_relation(big, big), TileRelation::equal);

  // Frequency far outside 3 omega but inside 10^7 omega: weak order only.
  const Tile far = make_tile(DyadicInterval{-1, 1, Shift::zero}, DyadicInterval{1, 5, Shift::zero});
  const auto g = relation_flags(far, big);
  EXPECT_FALSE(g.lt);
  EXPECT_TRUE(g.lesssim_prime);
  EXPECT_EQ(tile_relation(big, far), TileRelation::lesssim_prime);
}

TEST(Tiles, RelationsRequireAreaOne) {
  const Tile bad{Interval{q(0), q(1)}, Interval{q(0), q(2)}};
  EXPECT_THROW(relation_flags(bad, bad), DomainError);
  EXPECT_THROW(tri(0, 0, 0, {0, 0, 0}).freq(4), DomainError);
}

TEST(Tiles, LtIsTransitiveAndIrreflexive) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> sc(-4, 0), pos(0, 15), fr(-6, 6);
  std::vector<Tile> tiles;
  for (int k = 0; k < 60; ++k) {
    const int s = sc(rng);
    const std::int64_t i = pos(rng) % (std::int64_t{1} << -s);
    tiles.push_back(make_tile(DyadicInterval{s, i, Shift::zero}, DyadicInterval{-s, fr(rng), Shift::third}));
  }
  for (const auto& a : tiles) {
    EXPECT_FALSE(relation_flags(a, a).lt);
    for (const auto& b : tiles)
      for (const auto& c : tiles)
        if (relation_flags(a, b).lt && relation_flags(b, c).lt) EXPECT_TRUE(relation_flags(a, c).lt);
  }
}

TEST(Families, RejectDuplicateIdsAndMismatchedScales) {
  EXPECT_THROW(TriTile(0, DyadicInterval{0, 0, Shift::zero},
                       {DyadicInterval{0, 0, Shift::zero}, DyadicInterval{1, 0, Shift::zero},
                        DyadicInterval{0, 0, Shift::zero}}),
               DomainError);
  EXPECT_ANY_THROW(TileFamily({tri(1, 0, 0, {0, 1, 2}), tri(1, 0, 1, {0, 1, 2})},
                              {Shift::zero, Shift::zero, Shift::zero}));
}

TEST(Families, JsonRoundTrip) {
  const ModelFamilies fam = generate_model_families(ModelFamilyParams{});
  const auto j = model_families_to_json(fam);
  const ModelFamilies back = model_families_from_json(j);
  EXPECT_EQ(model_families_to_json(back), j);
  EXPECT_EQ(back.p_family.size(), fam.p_family.size());
  EXPECT_EQ(back.links, fam.links);
}

TEST(Sparse, EqualScaleNeedsHugeSeparation) {
  const FrequencyCube a{{DyadicInterval{0, 0}, DyadicInterval{0, 0}, DyadicInterval{0, 0}}};
  FrequencyCube near = a, far = a;
  near.sides[0].index = 5;
  far.sides[1].index = kSparseDilation;
  EXPECT_FALSE(is_sparse(std::vector<FrequencyCube>{a, near}).sparse);
  EXPECT_TRUE(is_sparse(std::vector<FrequencyCube>{a, far}).sparse);

  FrequencyCube coarse{{DyadicInterval{31, 0}, DyadicInterval{31, 0}, DyadicInterval{31, 0}}};
  FrequencyCube close{{DyadicInterval{10, 0}, DyadicInterval{10, 0}, DyadicInterval{10, 0}}};
  EXPECT_TRUE(is_sparse(std::vector<FrequencyCube>{a, coarse}).sparse);
  EXPECT_FALSE(is_sparse(std::vector<FrequencyCube>{a, close}).sparse);
}

TEST(Sparse, SplitPartsAreSparseAndCoverTheFamily) {
  ModelFamilyParams p;
  p.p_scale_min = -2;
  const ModelFamilies fam = generate_model_families(p);
  for (const TileFamily* f : {&fam.p_family, &fam.q_family}) {
    const SparseSplit split = split_sparse(*f);
    std::set<TileId> seen;
    for (const auto& part : split.parts) {
      EXPECT_TRUE(is_sparse(part).sparse);
      for (const auto& m : part.members()) EXPECT_TRUE(seen.insert(m.id()).second);
    }
    EXPECT_EQ(seen.size(), f->size());
    EXPECT_LE(split.scale_classes, kSparseScaleModulus);
  }
}

TEST(Rank1, IndexedCheckMatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> sc(-3, 0), pos(0, 7), fr(-3, 3), cnt(2, 14);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TriTile> ms;
    std::set<std::tuple<int, std::int64_t, std::int64_t, std::int64_t, std::int64_t>> seen;
    const int n = cnt(rng);
    for (int k = 0; k < n; ++k) {
      const int s = sc(rng);
      const std::int64_t i = pos(rng) % (std::int64_t{1} << -s);
      const std::array<std::int64_t, 3> f{fr(rng), fr(rng), fr(rng)};
      if (!seen.emplace(s, i, f[0], f[1], f[2]).second) continue;
      ms.push_back(tri(ms.size(), s, i, f));
    }
    const TileFamily fam(ms, {Shift::zero, Shift::zero, Shift::zero});
    const bool fast = is_rank1(fam).rank1;
    EXPECT_EQ(fast, is_rank1_bruteforce(fam).rank1);
    violations += !fast;
  }
  EXPECT_GT(violations, 0);  // the sample exercises both verdicts
}

TEST(Rank1, RepeatedTileViolatesClauseOne) {
  const TileFamily fam({tri(0, 0, 0, {0, 1, 2}), tri(1, 0, 0, {0, 5, 9})}, {Shift::zero, Shift::zero, Shift::zero});
  const Rank1Check r = is_rank1(fam);
  ASSERT_FALSE(r.rank1);
  EXPECT_EQ(r.violation->clause, 1);
}

TEST(ModelFamilies, GeneratedFamiliesAreRank1WithLinkedScales) {
  for (int gap : {11, 12}) {
    ModelFamilyParams p;
    p.scale_gap = gap;
    const ModelFamilies fam = generate_model_families(p);
    EXPECT_TRUE(is_rank1(fam.p_family).rank1);
    EXPECT_TRUE(is_rank1(fam.q_family).rank1);
    for (const auto& [pid, qs] : fam.links) {
      const TriTile& P = fam.p_family.at(pid);
      ASSERT_FALSE(qs.empty());
      for (TileId qid : qs) {
        const TriTile& Q = fam.q_family.at(qid);
        EXPECT_EQ(Q.spatial_length(), pow2(gap) * P.spatial_length());
        EXPECT_TRUE(Q.spatial_interval().contains(P.spatial_interval()));
      }
    }
  }
}

TEST(ModelFamilies, OffsetsMustBeEvenAndLarge) {
  ModelFamilyParams p;
  p.p_offset = 7;
  EXPECT_ANY_THROW(generate_model_families(p));
  p.p_offset = 6;
  EXPECT_ANY_THROW(generate_model_families(p));
}
