#include "tiletide/interp.hpp"

#include <algorithm>
#include <sstream>

#include "tiletide/error.hpp"
#include "tiletide/family_io.hpp"

namespace tiletide {
namespace {

using Point3 = std::array<Rational, 3>;

Point3 project(const ExponentTuple& a) { return {a[0], a[1], a[2]}; }

Point3 sub(const Point3& x, const Point3& y) { return {x[0] - y[0], x[1] - y[1], x[2] - y[2]}; }

Point3 cross(const Point3& x, const Point3& y) {
  return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}

Rational dot(const Point3& x, const Point3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }

bool is_zero(const Point3& x) { return x[0] == 0 && x[1] == 0 && x[2] == 0; }

Rational abs_q(const Rational& q) { return q < 0 ? Rational(-q) : q; }

// Rows: four coordinates and the weight sum.
std::pair<std::vector<std::vector<Rational>>, std::vector<Rational>> combination_system(
    const ExponentTuple& target, const std::vector<ExponentTuple>& vertices) {
  std::vector<std::vector<Rational>> A(5, std::vector<Rational>(vertices.size()));
  std::vector<Rational> b(5);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t v = 0; v < vertices.size(); ++v) A[c][v] = vertices[v][c];
    b[c] = target[c];
  }
  for (std::size_t v = 0; v < vertices.size(); ++v) A[4][v] = 1;
  b[4] = 1;
  return {A, b};
}

std::optional<std::vector<Rational>> convex_weights(const ExponentTuple& target,
                                                     const std::vector<ExponentTuple>& vertices) {
  auto [A, b] = combination_system(target, vertices);
  return feasible_point(A, b);
}

// Weights positive on every vertex, or empty when target is on the relative boundary.
std::optional<std::vector<Rational>> strict_weights(const ExponentTuple& target,
                                                     const std::vector<ExponentTuple>& vertices) {
  constexpr int kHalvings = 64;
  if (vertices.empty() || !convex_weights(target, vertices)) return std::nullopt;
  const Rational k(static_cast<long>(vertices.size()));
  ExponentTuple centroid{};
  for (const auto& v : vertices)
    for (std::size_t c = 0; c < 4; ++c) centroid[c] += v[c] / k;
  Rational tau(1, 2);
  for (int h = 0; h < kHalvings; ++h, tau /= 2) {
    // target = (1 - tau) y + tau * centroid.
    ExponentTuple y{};
    for (std::size_t c = 0; c < 4; ++c) y[c] = (target[c] - tau * centroid[c]) / (1 - tau);
    auto w = convex_weights(y, vertices);
    if (!w) continue;
    for (auto& x : *w) x = (1 - tau) * x + tau / k;
    return w;
  }
  return std::nullopt;
}

ExponentTuple combine(const std::vector<ExponentTuple>& vertices, const std::vector<Rational>& w) {
  ExponentTuple out{};
  for (std::size_t v = 0; v < vertices.size(); ++v)
    for (std::size_t c = 0; c < 4; ++c) out[c] += w[v] * vertices[v][c];
  return out;
}

struct Bound {
  std::string name;
  Rational slack;
};

void check_open_unit(const std::string& name, const Rational& x, Numerology& n, std::vector<Bound>& slacks) {
  if (!(x > 0)) n.violations.push_back("0 < " + name + " fails (" + name + " = " + to_string(x) + ")");
  if (!(x < 1)) n.violations.push_back(name + " < 1 fails (" + name + " = " + to_string(x) + ")");
  slacks.push_back({"0 < " + name, x});
  slacks.push_back({name + " < 1", 1 - x});
}

void finish_numerology(Numerology& n, std::vector<Bound>& slacks) {
  if (n.a1 + n.a2 + n.a3 != 1) n.violations.push_back("a1 + a2 + a3 = 1 fails");
  n.accepted = n.violations.empty();
  if (!n.accepted) return;
  Rational least = slacks.front().slack;
  for (const auto& s : slacks) least = std::min(least, s.slack);
  for (const auto& s : slacks)
    if (s.slack == least) n.binding.push_back(s.name);
}

bool consistent_bad_indices(const std::vector<ExponentTuple>& tuples, std::optional<int>& shared) {
  for (const auto& t : tuples) {
    if (!has_negative(t)) continue;
    const auto b = bad_index(t);
    if (!b) return false;
    if (shared && *shared != *b) return false;
    shared = b;
  }
  return true;
}

}  // namespace

ExponentTuple make_tuple(const Rational& a1, const Rational& a2, const Rational& a3, const Rational& a4) {
  return {a1, a2, a3, a4};
}

Rational tuple_sum(const ExponentTuple& a) { return a[0] + a[1] + a[2] + a[3]; }

std::string to_string(const ExponentTuple& a) {
  std::ostringstream os;
  os << '(' << to_string(a[0]) << ", " << to_string(a[1]) << ", " << to_string(a[2]) << ", " << to_string(a[3])
     << ')';
  return os.str();
}

nlohmann::json tuple_to_json(const ExponentTuple& a) {
  auto j = nlohmann::json::array();
  for (const auto& x : a) j.push_back(rational_to_json(x));
  return j;
}

ExponentTuple tuple_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw DomainError("exponent tuple needs four entries");
  ExponentTuple a{};
  for (std::size_t c = 0; c < 4; ++c) a[c] = rational_from_json(j[c]);
  return a;
}

bool has_negative(const ExponentTuple& a) {
  return std::any_of(a.begin(), a.end(), [](const Rational& x) { return x < 0; });
}

bool is_admissible(const ExponentTuple& a) {
  if (tuple_sum(a) != 1) return false;
  if (std::any_of(a.begin(), a.end(), [](const Rational& x) { return !(x < 1); })) return false;
  return std::count_if(a.begin(), a.end(), [](const Rational& x) { return x < 0; }) <= 1;
}

std::optional<int> bad_index(const ExponentTuple& a) {
  std::optional<int> found;
  for (int c = 0; c < 4; ++c) {
    if (a[static_cast<std::size_t>(c)] < 0) {
      if (found) return std::nullopt;
      found = c + 1;
    }
  }
  return found;
}

bool is_good(const ExponentTuple& a) { return is_admissible(a) && !has_negative(a); }

MajorantCheck is_majorant(const ExponentTuple& beta, const ExponentTuple& alpha, int j0) {
  if (j0 < 1 || j0 > 4) return {false, "index out of range"};
  if (tuple_sum(alpha) != 1 || tuple_sum(beta) != 1) return {false, "tuples must sum to 1"};
  const bool alpha_bad = has_negative(alpha);
  const bool beta_bad = has_negative(beta);
  if (alpha_bad || beta_bad) {
    const auto ia = bad_index(alpha);
    const auto ib = bad_index(beta);
    if ((alpha_bad && !ia) || (beta_bad && !ib)) return {false, "more than one negative entry"};
    if (alpha_bad && *ia != j0) return {false, "index differs from the bad index of alpha"};
    if (beta_bad && *ib != j0) return {false, "index differs from the bad index of beta"};
  }
  for (int c = 1; c <= 4; ++c) {
    if (c == j0) continue;
    const auto k = static_cast<std::size_t>(c - 1);
    if (!(alpha[k] < beta[k])) return {false, "entry " + std::to_string(c) + " is not strictly larger"};
  }
  return {true, ""};
}

std::optional<std::vector<Rational>> feasible_point(const std::vector<std::vector<Rational>>& A,
                                                     const std::vector<Rational>& b) {
  const std::size_t m = A.size();
  if (b.size() != m) throw DomainError("feasibility system shape mismatch");
  const std::size_t n = m == 0 ? 0 : A.front().size();
  const std::size_t cols = n + m;
  // Tableau rows [A | I | b] with b >= 0, artificials basic.
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(cols + 1));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (A[i].size() != n) throw DomainError("ragged feasibility system");
    const bool flip = b[i] < 0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = flip ? Rational(-A[i][j]) : A[i][j];
    t[i][n + i] = 1;
    t[i][cols] = flip ? Rational(-b[i]) : b[i];
    basis[i] = n + i;
  }
  // Reduced costs of phase one (minimize the sum of artificials).
  std::vector<Rational> cost(cols + 1);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= cols; ++j)
      if (j < n || j == cols) cost[j] -= t[i][j];

  for (;;) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j)
      if (cost[j] < 0) {
        enter = j;
        break;
      }
    if (enter == cols) break;
    std::size_t leave = m;
    Rational best;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(t[i][enter] > 0)) continue;
      const Rational ratio = t[i][cols] / t[i][enter];
      if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) break;  // unbounded direction cannot occur in phase one
    const Rational pivot = t[leave][enter];
    for (auto& x : t[leave]) x /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational f = t[i][enter];
      for (std::size_t j = 0; j <= cols; ++j) t[i][j] -= f * t[leave][j];
    }
    if (cost[enter] != 0) {
      const Rational f = cost[enter];
      for (std::size_t j = 0; j <= cols; ++j) cost[j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }
  if (cost[cols] != 0) return std::nullopt;
  std::vector<Rational> x(n);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) x[basis[i]] = t[i][cols];
  return x;
}

std::vector<Facet> hull_facets(const std::vector<ExponentTuple>& vertices) {
  std::vector<Point3> p;
  p.reserve(vertices.size());
  for (const auto& v : vertices) p.push_back(project(v));
  std::vector<Facet> facets;
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) {
        Point3 normal = cross(sub(p[j], p[i]), sub(p[k], p[i]));
        if (is_zero(normal)) continue;
        Rational offset = dot(normal, p[i]);
        bool below = true;
        bool above = true;
        for (const auto& q : p) {
          const Rational s = dot(normal, q) - offset;
          if (s > 0) below = false;
          if (s < 0) above = false;
        }
        if (below == above) continue;  // mixed sides, or all coplanar
        if (above) {
          for (auto& c : normal) c = -c;
          offset = -offset;
        }
        Rational scale = std::max({abs_q(normal[0]), abs_q(normal[1]), abs_q(normal[2])});
        for (auto& c : normal) c /= scale;
        offset /= scale;
        const bool seen = std::any_of(facets.begin(), facets.end(), [&](const Facet& f) {
          return f.normal == normal && f.offset == offset;
        });
        if (!seen) facets.push_back({normal, offset});
      }
  return facets;
}

HullSpec::HullSpec(std::vector<ExponentTuple> vertices) : vertices_(std::move(vertices)) {
  for (const auto& v : vertices_)
    if (tuple_sum(v) != 1) throw DomainError("hull vertex " + to_string(v) + " does not sum to 1");
  facets_ = hull_facets(vertices_);
}

std::vector<ExponentTuple> HullSpec::twelve_vertices() {
  const Rational h(1, 2);
  const Rational t(3, 2);
  return {
      make_tuple(1, -t, h, 1), make_tuple(1, -t, 1, h), make_tuple(-t, 1, h, 1), make_tuple(-t, 1, 1, h),
      make_tuple(1, 0, -h, h), make_tuple(0, 1, -h, h), make_tuple(h, 0, -h, 1), make_tuple(0, h, -h, 1),
      make_tuple(1, 0, h, -h), make_tuple(0, 1, h, -h), make_tuple(h, 0, 1, -h), make_tuple(0, h, 1, -h),
  };
}

HullSpec HullSpec::twelve_point() { return HullSpec(twelve_vertices()); }

HullSpec HullSpec::listed_points() {
  auto v = twelve_vertices();
  v.erase(v.begin() + 5);
  return HullSpec(std::move(v));
}

HullMembership hull_contains(const HullSpec& hull, const ExponentTuple& a, bool strict, double epsilon) {
  if (tuple_sum(a) != 1) throw DomainError("tuple " + to_string(a) + " does not sum to 1");
  HullMembership out;
  const auto& facets = hull.facets();
  if (!facets.empty()) {
    const Point3 x = project(a);
    out.margin = facets.front().offset - dot(facets.front().normal, x);
    for (std::size_t f = 1; f < facets.size(); ++f) {
      const Rational s = facets[f].offset - dot(facets[f].normal, x);
      if (s < out.margin) {
        out.margin = s;
        out.binding_facet = f;
      }
    }
  }
  if (auto w = convex_weights(a, hull.vertices())) {
    out.inside = true;
    out.witness = std::move(*w);
  }
  if (out.inside && !facets.empty())
    out.strict = epsilon == 0.0 ? out.margin > 0 : to_double(out.margin) >= epsilon;
  if (strict) out.inside = out.inside && out.strict;
  return out;
}

Decomposition convex_decompose(const ExponentTuple& a, const std::vector<ExponentTuple>& vertices, bool strict) {
  Decomposition d;
  if (vertices.empty()) {
    d.violation = "no vertices";
    return d;
  }
  auto w = strict ? strict_weights(a, vertices) : convex_weights(a, vertices);
  if (w) {
    if (combine(vertices, *w) != a) throw SearchError("convex combination does not reproduce the target");
    d.feasible = true;
    d.coefficients = std::move(*w);
    return d;
  }
  const auto facets = hull_facets(vertices);
  const Point3 x = project(a);
  for (const auto& f : facets) {
    const Rational excess = dot(f.normal, x) - f.offset;
    if (excess > 0 || (strict && excess == 0)) {
      std::ostringstream os;
      os << "facet (" << to_string(f.normal[0]) << ", " << to_string(f.normal[1]) << ", " << to_string(f.normal[2])
         << ") . x <= " << to_string(f.offset) << (excess > 0 ? " violated by " : " tight, excess ")
         << to_string(excess);
      d.violation = os.str();
      return d;
    }
  }
  d.violation = strict ? "target is not in the relative interior of the vertices"
                       : "target is not in the convex hull of the vertices";
  return d;
}

HullComparison compare_hulls(const HullSpec& first, const HullSpec& second) {
  HullComparison c;
  for (const auto& v : first.vertices())
    if (!convex_weights(v, second.vertices())) c.only_in_first.push_back(v);
  for (const auto& v : second.vertices())
    if (!convex_weights(v, first.vertices())) c.only_in_second.push_back(v);
  c.identical = c.only_in_first.empty() && c.only_in_second.empty();
  return c;
}

Numerology numerology_34(const ExponentTuple& alpha) {
  Numerology n;
  if (!is_admissible(alpha)) n.violations.push_back("alpha is not admissible");
  if (bad_index(alpha) != std::optional<int>(4)) n.violations.push_back("bad index is not 4");
  const Rational s = alpha[0] + alpha[1];
  n.a1 = 2 * alpha[2] - 1;
  n.a3 = 2 * alpha[3] + 1;
  n.a2 = 2 * s - 1;
  std::vector<Bound> slacks;
  if (s == 0) {
    n.violations.push_back("alpha1 + alpha2 = 0");
  } else {
    n.theta = alpha[0] / s;
  }
  check_open_unit("a1", n.a1, n, slacks);
  check_open_unit("a2", n.a2, n, slacks);
  check_open_unit("a3", n.a3, n, slacks);
  check_open_unit("theta", n.theta, n, slacks);
  n.reconstructed = {n.theta * (1 + n.a2) / 2, (1 - n.theta) * (1 + n.a2) / 2, (1 + n.a1) / 2, (n.a3 - 1) / 2};
  finish_numerology(n, slacks);
  return n;
}

Numerology numerology_12(const ExponentTuple& alpha) {
  Numerology n;
  if (!is_admissible(alpha)) n.violations.push_back("alpha is not admissible");
  if (bad_index(alpha) != std::optional<int>(2)) n.violations.push_back("bad index is not 2");
  const Rational s = alpha[0] + alpha[1];
  n.a1 = 2 * alpha[2] - 1;
  n.a2 = 2 * alpha[3] - 1;
  n.a3 = 2 * s + 1;
  std::vector<Bound> slacks;
  if (s == 0) {
    n.violations.push_back("alpha1 + alpha2 = 0");
  } else {
    n.theta = (3 * alpha[0] + 2 * alpha[1]) / s;
  }
  check_open_unit("a1", n.a1, n, slacks);
  check_open_unit("a2", n.a2, n, slacks);
  check_open_unit("a3", n.a3, n, slacks);
  check_open_unit("theta", n.theta, n, slacks);
  const Rational w = 1 - n.a3;
  n.reconstructed = {(2 - n.theta) * w / 2, -w + (n.theta - 1) * w / 2, (1 + n.a1) / 2, (1 + n.a2) / 2};
  finish_numerology(n, slacks);
  return n;
}

std::string to_string(InterpolationRule r) {
  switch (r) {
    case InterpolationRule::good_target: return "good_target";
    case InterpolationRule::uniform_bad: return "uniform_bad";
    case InterpolationRule::majorant: return "majorant";
    case InterpolationRule::none: break;
  }
  return "none";
}

InterpolationVerdict interpolate_tuples(const std::vector<SourceTuple>& sources, const ExponentTuple& target) {
  InterpolationVerdict verdict;
  if (!is_admissible(target)) {
    verdict.reason = "target is not admissible";
    return verdict;
  }
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < sources.size(); ++s)
    if (sources[s].restricted_weak && is_admissible(sources[s].alpha)) usable.push_back(s);

  const bool target_good = !has_negative(target);
  const auto target_bad = bad_index(target);
  bool any_combination = false;

  for (std::size_t size = 2; size <= 4; ++size) {
    if (usable.size() < size) break;
    std::vector<bool> pick(usable.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
    do {
      std::vector<std::size_t> chosen;
      std::vector<ExponentTuple> tuples;
      for (std::size_t q = 0; q < usable.size(); ++q)
        if (pick[q]) {
          chosen.push_back(usable[q]);
          tuples.push_back(sources[usable[q]].alpha);
        }
      auto weights = strict_weights(target, tuples);
      if (!weights) continue;
      any_combination = true;
      const auto accept = [&](InterpolationRule rule, std::string reason) {
        verdict.accepted = true;
        verdict.rule = rule;
        verdict.sources = chosen;
        verdict.weights = *weights;
        verdict.reason = std::move(reason);
      };
      if (target_good) {
        accept(InterpolationRule::good_target, "good target is a strict combination of admissible tuples");
        return verdict;
      }
      std::optional<int> shared;
      if (!consistent_bad_indices(tuples, shared)) continue;
      if (shared && target_bad && *shared != *target_bad) continue;
      const bool all_uniform =
          std::all_of(chosen.begin(), chosen.end(), [&](std::size_t s) { return sources[s].uniform; });
      if (all_uniform && (!shared || shared == target_bad)) {
        accept(InterpolationRule::uniform_bad, "uniform sources share the bad index of the target");
        return verdict;
      }
      for (const auto& t : tuples)
        if (is_majorant(t, target, *target_bad).majorant) {
          accept(InterpolationRule::majorant, "a source majorizes the target at its bad index");
          return verdict;
        }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }
  verdict.reason = any_combination ? "no interpolation rule applies to any strict combination"
                                   : "target is not a strict combination of restricted weak-type sources";
  return verdict;
}

}  // namespace tiletide
