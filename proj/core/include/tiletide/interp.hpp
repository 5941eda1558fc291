#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiletide/rational.hpp"

namespace tiletide {

using ExponentTuple = std::array<Rational, 4>;

ExponentTuple make_tuple(const Rational& a1, const Rational& a2, const Rational& a3, const Rational& a4);
Rational tuple_sum(const ExponentTuple& a);
std::string to_string(const ExponentTuple& a);
nlohmann::json tuple_to_json(const ExponentTuple& a);
ExponentTuple tuple_from_json(const nlohmann::json& j);

// All entries < 1, sum 1, at most one negative entry.
bool is_admissible(const ExponentTuple& a);
// 1-based index of the unique negative entry; empty if none or several.
std::optional<int> bad_index(const ExponentTuple& a);
bool has_negative(const ExponentTuple& a);
// Admissible with no negative entry.
bool is_good(const ExponentTuple& a);

struct MajorantCheck {
  bool majorant = false;
  std::string diagnostic;
};

// beta majorizes alpha off j0 (1-based); for bad tuples j0 must be the shared bad index.
MajorantCheck is_majorant(const ExponentTuple& beta, const ExponentTuple& alpha, int j0);

// normal . (a1, a2, a3) <= offset, normal scaled to max |component| = 1.
struct Facet {
  std::array<Rational, 3> normal;
  Rational offset;
};

class HullSpec {
 public:
  explicit HullSpec(std::vector<ExponentTuple> vertices);

  // Listed points with the repeated entry removed and (0,1,-1/2,1/2) added.
  static HullSpec twelve_point();
  // The listed points with the repeated entry removed, no partner.
  static HullSpec listed_points();
  static std::vector<ExponentTuple> twelve_vertices();

  const std::vector<ExponentTuple>& vertices() const { return vertices_; }
  // Empty when the vertices do not span the three-dimensional slice.
  const std::vector<Facet>& facets() const { return facets_; }

 private:
  std::vector<ExponentTuple> vertices_;
  std::vector<Facet> facets_;
};

std::vector<Facet> hull_facets(const std::vector<ExponentTuple>& vertices);

struct HullMembership {
  // Strict requests report inside only when the margin test passes as well.
  bool inside = false;
  bool strict = false;
  // min over facets of offset - normal . x; > 0 interior, 0 boundary, < 0 outside.
  Rational margin;
  std::size_t binding_facet = 0;
  // Convex weights over hull vertices when inside.
  std::vector<Rational> witness;
};

inline constexpr double kDefaultMarginEpsilon = 1e-6;

// epsilon == 0 selects exact strictness (margin > 0).
HullMembership hull_contains(const HullSpec& hull, const ExponentTuple& a, bool strict,
                             double epsilon = kDefaultMarginEpsilon);

struct Decomposition {
  bool feasible = false;
  std::vector<Rational> coefficients;
  std::string violation;
};

// Exact convex weights with sum c_v v == a. Strict mode returns weights positive on every vertex.
Decomposition convex_decompose(const ExponentTuple& a, const std::vector<ExponentTuple>& vertices, bool strict);

// Weights for an arbitrary nonnegative feasibility system A x = b, x >= 0, by exact phase-one simplex.
std::optional<std::vector<Rational>> feasible_point(const std::vector<std::vector<Rational>>& A,
                                                     const std::vector<Rational>& b);

struct HullComparison {
  std::vector<ExponentTuple> only_in_first;   // vertices of the first not in the second hull
  std::vector<ExponentTuple> only_in_second;  // vertices of the second not in the first hull
  bool identical = false;
};

HullComparison compare_hulls(const HullSpec& first, const HullSpec& second);

struct Numerology {
  Rational a1, a2, a3, theta;
  bool accepted = false;
  std::vector<std::string> violations;
  // Constraints with the least slack among the accepted ones.
  std::vector<std::string> binding;
  // Exponents of E1..E4 rebuilt from (a, theta).
  ExponentTuple reconstructed{};
};

// Bad index 4: a1 = 2 a3' - 1, a3 = 2 a4' + 1, a2 = 2 (a1' + a2') - 1, theta = a1'/(a1' + a2').
Numerology numerology_34(const ExponentTuple& alpha);
// Bad index 2: a1 = 2 a3' - 1, a2 = 2 a4' - 1, a3 = 2 (a1' + a2') + 1, theta = (3 a1' + 2 a2')/(a1' + a2').
Numerology numerology_12(const ExponentTuple& alpha);

struct SourceTuple {
  ExponentTuple alpha{};
  bool restricted_weak = true;
  // Shares its major subset with the other uniform sources.
  bool uniform = false;
};

enum class InterpolationRule { none, good_target, uniform_bad, majorant };

std::string to_string(InterpolationRule r);

struct InterpolationVerdict {
  bool accepted = false;
  InterpolationRule rule = InterpolationRule::none;
  std::vector<std::size_t> sources;
  std::vector<Rational> weights;
  std::string reason;
};

InterpolationVerdict interpolate_tuples(const std::vector<SourceTuple>& sources, const ExponentTuple& target);

}  // namespace tiletide
