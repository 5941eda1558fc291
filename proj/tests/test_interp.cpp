#include <random>

#include <gtest/gtest.h>

#include "tiletide/error.hpp"
#include "tiletide/interp.hpp"

using namespace tiletide;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

ExponentTuple T(Rational a, Rational b, Rational c, Rational d) { return make_tuple(a, b, c, d); }

Rational dot(const Facet& f, const ExponentTuple& v) {
  return f.normal[0] * v[0] + f.normal[1] * v[1] + f.normal[2] * v[2];
}

ExponentTuple centroid(const std::vector<ExponentTuple>& vs) {
  ExponentTuple c{};
  for (const auto& v : vs)
    for (std::size_t k = 0; k < 4; ++k) c[k] += v[k];
  for (auto& x : c) x /= static_cast<long>(vs.size());
  return c;
}

}  // namespace

TEST(Tuples, Admissibility) {
  const ExponentTuple a = T(q(1, 2), q(1, 2), q(1, 2), q(-1, 2));
  EXPECT_TRUE(is_admissible(a));
  EXPECT_EQ(bad_index(a), 4);
  EXPECT_FALSE(is_good(a));
  EXPECT_TRUE(is_good(T(q(1, 4), q(1, 4), q(1, 4), q(1, 4))));
  EXPECT_FALSE(is_admissible(T(q(1), q(0), q(0), q(0))));                   // entry not below 1
  EXPECT_FALSE(is_admissible(T(q(3, 4), q(3, 4), q(-1, 4), q(-1, 4))));     // two negatives
  EXPECT_FALSE(bad_index(T(q(3, 4), q(3, 4), q(-1, 4), q(-1, 4))).has_value());
  EXPECT_FALSE(is_admissible(T(q(1, 2), q(1, 2), q(1, 2), q(0))));          // sum 3/2
}

TEST(Tuples, JsonRoundTrip) {
  const ExponentTuple a = T(q(3, 5), q(-1), q(7, 10), q(7, 10));
  EXPECT_EQ(tuple_from_json(tuple_to_json(a)), a);
  EXPECT_EQ(tuple_sum(a), q(1));
}

TEST(Hull, TwelveVerticesSumToOne) {
  const auto vs = HullSpec::twelve_vertices();
  ASSERT_EQ(vs.size(), 12u);
  for (const auto& v : vs) EXPECT_EQ(tuple_sum(v), q(1));
}

TEST(Hull, FacetsSupportTheVertexSet) {
  // Every facet is valid for all vertices and tight on at least three of them.
  for (const HullSpec& h : {HullSpec::twelve_point(), HullSpec::listed_points()}) {
    ASSERT_FALSE(h.facets().empty());
    for (const auto& f : h.facets()) {
      int tight = 0;
      for (const auto& v : h.vertices()) {
        EXPECT_LE(dot(f, v), f.offset);
        tight += dot(f, v) == f.offset;
      }
      EXPECT_GE(tight, 3);
    }
  }
}

TEST(Hull, VerticesOnBoundaryCentroidInside) {
  const HullSpec h = HullSpec::twelve_point();
  for (const auto& v : h.vertices()) {
    const HullMembership m = hull_contains(h, v, false);
    EXPECT_TRUE(m.inside);
    EXPECT_EQ(m.margin, 0);
  }
  const HullMembership c = hull_contains(h, centroid(h.vertices()), true, 0.0);
  EXPECT_TRUE(c.strict);
  EXPECT_GT(c.margin, 0);
  EXPECT_FALSE(hull_contains(h, T(q(2), q(-1, 2), q(-1, 2), q(0)), false).inside);
}

TEST(Hull, MidpointTupleSitsOnTheBoundary) {
  // 1/2 + 1/2 = 1 meets the facet a1 + a2 <= 1 exactly, so the margin is zero.
  const HullMembership m = hull_contains(HullSpec::twelve_point(), T(q(1, 2), q(1, 2), q(1, 2), q(-1, 2)), true, 0.0);
  EXPECT_EQ(m.margin, 0);
  EXPECT_FALSE(m.strict);
}

TEST(Hull, ThetaZeroCombinationIsExact) {
  const ExponentTuple v1 = T(q(1), q(1, 2), q(1), q(-3, 2)), v2 = T(q(1), q(1, 2), q(-3, 2), q(1)),
                      v3 = T(q(1), q(-1, 2), q(0), q(1, 2));
  ExponentTuple c{};
  for (std::size_t k = 0; k < 4; ++k) c[k] = q(3, 10) * v1[k] + q(1, 5) * v2[k] + q(1, 2) * v3[k];
  EXPECT_EQ(c, T(q(1), q(0), q(0), q(0)));
}

TEST(Decompose, ReproducesTargetExactlyWithPositiveWeights) {
  const HullSpec h = HullSpec::twelve_point();
  std::mt19937_64 rng(67);
  std::uniform_int_distribution<int> pick(0, 11), wt(1, 9);
  for (int trial = 0; trial < 30; ++trial) {
    // Random strict interior point: a positive mix of all vertices.
    ExponentTuple target{};
    Rational total;
    std::vector<Rational> w(12);
    for (auto& x : w) {
      x = wt(rng);
      total += x;
    }
    for (std::size_t k = 0; k < 12; ++k)
      for (std::size_t c = 0; c < 4; ++c) target[c] += w[k] / total * h.vertices()[k][c];
    const Decomposition d = convex_decompose(target, h.vertices(), true);
    ASSERT_TRUE(d.feasible);
    ExponentTuple back{};
    Rational s;
    for (std::size_t k = 0; k < 12; ++k) {
      EXPECT_GT(d.coefficients[k], 0);
      s += d.coefficients[k];
      for (std::size_t c = 0; c < 4; ++c) back[c] += d.coefficients[k] * h.vertices()[k][c];
    }
    EXPECT_EQ(back, target);
    EXPECT_EQ(s, q(1));
  }
  const Rational e(1, 100);
  EXPECT_TRUE(convex_decompose(T(1 - e, e / 3, e / 3, e / 3), h.vertices(), true).feasible);
  EXPECT_FALSE(convex_decompose(T(q(2), q(-1, 2), q(-1, 2), q(0)), h.vertices(), false).feasible);
}

TEST(Decompose, FeasiblePointSolvesSmallSystem) {
  const auto x = feasible_point({{q(1), q(1)}, {q(1), q(-1)}}, {q(1), q(0)});
  ASSERT_TRUE(x);
  EXPECT_EQ((*x)[0], q(1, 2));
  EXPECT_EQ((*x)[1], q(1, 2));
  EXPECT_FALSE(feasible_point({{q(1), q(1)}}, {q(-1)}).has_value());
  EXPECT_THROW(feasible_point({{q(1)}}, {q(1), q(2)}), DomainError);
}

TEST(Hull, TwelveAndListedHullsDiffer) {
  const HullComparison c = compare_hulls(HullSpec::twelve_point(), HullSpec::listed_points());
  EXPECT_FALSE(c.identical);
  ASSERT_EQ(c.only_in_first.size(), 1u);
  EXPECT_EQ(c.only_in_first.front(), T(q(0), q(1), q(-1, 2), q(1, 2)));
}

TEST(Numerology, WorkedExamples) {
  const Numerology n34 = numerology_34(T(q(3, 10), q(3, 10), q(7, 10), q(-3, 10)));
  EXPECT_TRUE(n34.accepted);
  EXPECT_EQ(n34.a1, q(2, 5));
  EXPECT_EQ(n34.a3, q(2, 5));
  EXPECT_EQ(n34.theta, q(1, 2));
  EXPECT_EQ(n34.reconstructed, T(q(3, 10), q(3, 10), q(7, 10), q(-3, 10)));

  const Numerology n12 = numerology_12(T(q(3, 5), q(-1), q(7, 10), q(7, 10)));
  EXPECT_TRUE(n12.accepted);
  EXPECT_EQ(n12.reconstructed, T(q(3, 5), q(-1), q(7, 10), q(7, 10)));
}

TEST(Interpolation, MajorantRules) {
  const ExponentTuple alpha = T(q(1, 2), q(1, 2), q(1, 2), q(-1, 2));
  EXPECT_TRUE(is_majorant(T(q(3, 5), q(3, 5), q(3, 5), q(-4, 5)), alpha, 4).majorant);
  EXPECT_FALSE(is_majorant(T(q(3, 5), q(3, 5), q(3, 5), q(-4, 5)), alpha, 1).majorant);
  EXPECT_FALSE(is_majorant(alpha, alpha, 4).majorant);
}

TEST(Interpolation, GoodTargetFromGoodSources) {
  const std::vector<SourceTuple> src{{T(q(1, 2), q(1, 2), q(0), q(0)), true, false},
                                     {T(q(0), q(0), q(1, 2), q(1, 2)), true, false}};
  const InterpolationVerdict v = interpolate_tuples(src, T(q(1, 4), q(1, 4), q(1, 4), q(1, 4)));
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.rule, InterpolationRule::good_target);
  EXPECT_EQ(v.weights, (std::vector<Rational>{q(1, 2), q(1, 2)}));

  const InterpolationVerdict no = interpolate_tuples(src, T(q(1, 2), q(1, 4), q(1, 4), q(0)));
  EXPECT_FALSE(no.accepted);
}

TEST(Interpolation, BadTargetNeedsSharedIndex) {
  const ExponentTuple target = T(q(1, 2), q(1, 2), q(1, 2), q(-1, 2));
  const std::vector<SourceTuple> uniform{{T(q(3, 5), q(2, 5), q(1, 2), q(-1, 2)), true, true},
                                         {T(q(2, 5), q(3, 5), q(1, 2), q(-1, 2)), true, true}};
  const InterpolationVerdict v = interpolate_tuples(uniform, target);
  EXPECT_TRUE(v.accepted);
  EXPECT_EQ(v.rule, InterpolationRule::uniform_bad);

  std::vector<SourceTuple> mixed = uniform;
  for (auto& s : mixed) s.uniform = false;
  EXPECT_FALSE(interpolate_tuples(mixed, target).accepted);
}
