#include "tiletide/sizeenergy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "tiletide/error.hpp"
#include "tiletide/packets.hpp"
#include "tree_index.hpp"

namespace tiletide {
namespace detail {

std::vector<TopEntry> index_tops(const TileFamily& family, const std::vector<TreeTop>& tops) {
  std::vector<TopEntry> out;
  out.reserve(tops.size());
  for (const auto& top : tops) {
    TopEntry e{top, top.tile(), to_double(top.spatial.length()), {}};
    const auto& members = family.members();
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto f = relation_flags(members[k].tile(top.type), e.tile);
      if (f.equal || f.lt) e.members.push_back(k);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<double> squared_magnitudes(const TileFamily& family, const CoeffSequence& coeffs) {
  const auto a = coeffs.aligned(family);
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::norm(a[k]);
  return out;
}

int floor_threshold(double mass, double length) {
  int n = static_cast<int>(std::floor(0.5 * std::log2(mass / length)));
  while (std::ldexp(length, 2 * (n + 1)) <= mass) ++n;
  while (std::ldexp(length, 2 * n) > mass) --n;
  return n;
}

int cap_threshold(double ratio) {
  int n = static_cast<int>(std::ceil(0.5 * std::log2(ratio))) - 1;
  while (ratio > std::ldexp(1.0, 2 * (n + 1))) ++n;
  while (ratio <= std::ldexp(1.0, 2 * n)) --n;
  return n;
}

}  // namespace detail

namespace {

using TopKey = std::tuple<int, std::int64_t, int, std::int64_t, int, int>;

TopKey key_of(const TreeTop& t) {
  return {t.spatial.scale, t.spatial.index, t.freq.scale, t.freq.index, static_cast<int>(t.freq.shift), t.type};
}

std::int64_t floor_shift(std::int64_t index, int bits) {
  if (bits >= 63) return index < 0 ? -1 : 0;
  return index >> bits;
}

std::vector<TreeTop> merge_tops(std::vector<TreeTop> tops, const std::vector<TreeTop>& extra, int exclude_type) {
  std::set<TopKey> seen;
  for (const auto& t : tops) seen.insert(key_of(t));
  for (const auto& t : extra) {
    if (t.type == exclude_type) continue;
    if (seen.insert(key_of(t)).second) tops.push_back(t);
  }
  return tops;
}

double to_real(const Rational& q) { return to_double(q); }

}  // namespace

Complex CoeffSequence::at(TileId id) const {
  auto it = values.find(id);
  if (it == values.end()) throw DomainError("coefficient missing for tri-tile " + std::to_string(id));
  return it->second;
}

CoeffSequence CoeffSequence::zeros(const TileFamily& family, int component) {
  CoeffSequence c;
  c.component = component;
  for (const auto& m : family.members()) c.values[m.id()] = Complex{0.0, 0.0};
  return c;
}

std::vector<Complex> CoeffSequence::aligned(const TileFamily& family) const {
  std::vector<Complex> out;
  out.reserve(family.size());
  for (const auto& m : family.members()) out.push_back(at(m.id()));
  return out;
}

std::vector<TreeTop> candidate_tops(const TileFamily& family, const TopOptions& options, int exclude_type) {
  if (options.ancestor_depth < 0) throw DomainError("ancestor depth must be non-negative");
  std::vector<TreeTop> out;
  std::set<TopKey> seen;
  const auto push = [&](const TreeTop& t) {
    if (seen.insert(key_of(t)).second) out.push_back(t);
  };
  for (const auto& p : family.members())
    for (int i = 1; i <= 3; ++i)
      if (i != exclude_type) push(TreeTop{p.spatial(), p.freq(i), i, false});
  for (int d = 1; d <= options.ancestor_depth; ++d) {
    for (const auto& p : family.members()) {
      const DyadicInterval anc{p.spatial().scale + d, floor_shift(p.spatial().index, d), Shift::zero};
      for (int i = 1; i <= 3; ++i) {
        if (i == exclude_type) continue;
        const Interval wide = p.freq_interval(i).dilate(Rational(kOrderDilation));
        for (const auto& w : mesh_intervals(p.freq(i).shift, -anc.scale, wide))
          if (dilate_contains(p.freq_interval(i), w.realize(), kOrderDilation)) push(TreeTop{anc, w, i, true});
      }
    }
  }
  return out;
}

bool dominated_by(const TriTile& p, const TreeTop& top) {
  const auto f = relation_flags(p.tile(top.type), top.tile());
  return f.equal || f.lt;
}

std::vector<TileId> tree_members(const TileFamily& family, const TreeTop& top) {
  std::vector<TileId> out;
  for (const auto& p : family.members())
    if (dominated_by(p, top)) out.push_back(p.id());
  return out;
}

bool is_tree(const TileFamily& family, const Tree& tree) {
  return std::all_of(tree.members.begin(), tree.members.end(),
                     [&](TileId id) { return family.contains(id) && dominated_by(family.at(id), tree.top); });
}

SizeResult size_of(const TileFamily& family, const CoeffSequence& coeffs, int j, const SizeOptions& options) {
  if (j < 1 || j > 3) throw DomainError("size component must be 1, 2 or 3");
  SizeResult r;
  if (family.empty()) return r;
  const auto mag = detail::squared_magnitudes(family, coeffs);
  const auto tops = merge_tops(candidate_tops(family, options.tops, j), options.extra_tops, j);
  double best = 0.0;
  for (const auto& e : detail::index_tops(family, tops)) {
    double mass = 0.0;
    for (std::size_t k : e.members) mass += mag[k];
    const double ratio = mass / e.length;
    if (!r.witness || ratio > best) {
      best = ratio;
      r.witness = e.top;
    }
  }
  r.value = std::sqrt(best);
  return r;
}

double size(const TileFamily& family, const CoeffSequence& coeffs, int j, const SizeOptions& options) {
  return size_of(family, coeffs, j, options).value;
}

double size_exhaustive(const TileFamily& family, const CoeffSequence& coeffs, int j, const SizeOptions& options) {
  if (j < 1 || j > 3) throw DomainError("size component must be 1, 2 or 3");
  if (family.empty()) return 0.0;
  constexpr std::size_t kMaxBits = 24;
  const auto a = coeffs.aligned(family);
  const auto tops = merge_tops(candidate_tops(family, options.tops, j), options.extra_tops, j);
  const auto& members = family.members();
  double best = 0.0;
  for (const auto& top : tops) {
    const Tile tt = top.tile();
    std::vector<double> w;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const TileRelation rel = tile_relation(tt, members[k].tile(top.type));
      if (rel == TileRelation::equal || rel == TileRelation::lt) w.push_back(std::norm(a[k]));
    }
    if (w.size() > kMaxBits) throw DomainError("dominated set too large for subset enumeration");
    const double len = to_real(top.spatial.length());
    // Gray-code walk over all subsets; each step toggles one member.
    const std::uint64_t count = std::uint64_t{1} << w.size();
    std::vector<bool> in(w.size(), false);
    double mass = 0.0;
    for (std::uint64_t g = 1; g < count; ++g) {
      const auto bit = static_cast<std::size_t>(__builtin_ctzll(g));
      in[bit] = !in[bit];
      mass += in[bit] ? w[bit] : -w[bit];
      if (mass < 0.0) mass = 0.0;
      best = std::max(best, mass / len);
    }
  }
  return std::sqrt(best);
}

double bmo_norm(const std::vector<WeightedInterval>& family, double r) {
  if (!(r > 0.0)) throw DomainError("BMO exponent must be positive");
  double best = 0.0;
  for (const auto& outer : family) {
    const Interval& I0 = outer.interval;
    std::vector<const WeightedInterval*> inside;
    std::vector<double> cuts;
    for (const auto& w : family)
      if (I0.contains(w.interval)) {
        inside.push_back(&w);
        cuts.push_back(to_double(w.interval.lo));
        cuts.push_back(to_double(w.interval.hi));
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    // The square function is constant between consecutive endpoints.
    double integral = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
      double s = 0.0;
      for (const auto* w : inside)
        if (to_double(w->interval.lo) <= mid && mid < to_double(w->interval.hi))
          s += std::norm(w->coefficient) / to_double(w->interval.length());
      if (s > 0.0) integral += (cuts[c + 1] - cuts[c]) * std::pow(s, 0.5 * r);
    }
    const double value = std::pow(integral / to_double(I0.length()), 1.0 / r);
    best = std::max(best, value);
  }
  return best;
}

double jn_ratio(const std::vector<WeightedInterval>& family, double p, double q) {
  if (!(p > 0.0) || !(q > p)) throw DomainError("John-Nirenberg ratio needs 0 < p < q");
  const double bp = bmo_norm(family, p);
  const double bq = bmo_norm(family, q);
  if (bp == 0.0 && bq == 0.0) return 1.0;
  return bp / bq;
}

TreeEstimate single_tree_estimate(const TileFamily& family, const Tree& tree, const CoeffSequence& a1,
                                  const CoeffSequence& a2, const CoeffSequence& a3, const TopOptions& tops) {
  if (!is_tree(family, tree)) throw DomainError("members are not dominated by the tree top");
  TreeEstimate est;
  const TileFamily sub = family.subfamily(tree.members);
  for (const auto& p : sub.members())
    est.lhs += std::abs(a1.at(p.id()) * a2.at(p.id()) * a3.at(p.id())) / std::sqrt(to_double(p.spatial_length()));
  SizeOptions opts{tops, {tree.top}};
  est.sizes = {size(sub, a1, 1, opts), size(sub, a2, 2, opts), size(sub, a3, 3, opts)};
  est.rhs = to_double(tree.top.spatial.length()) * est.sizes[0] * est.sizes[1] * est.sizes[2];
  return est;
}

GridSet exceptional_region(const std::array<GridSet, 4>& sets, int bad_index, double C) {
  if (bad_index < 1 || bad_index > 4) throw DomainError("bad index must be 1..4");
  const GridSpec& grid = sets[0].grid;
  const double denom = sets[static_cast<std::size_t>(bad_index - 1)].measure();
  GridSet omega = GridSet::empty(grid);
  for (const auto& e : sets) {
    if (!(e.grid == grid)) throw DomainError("exceptional sets must share a grid");
    const GridFunction m = hl_maximal(e.indicator());
    const double level = C * e.measure() / denom;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const double v = m[k].real();
      // Bad index 3 or 4: closed super-level sets; 1 or 2: open ones.
      const bool hit = bad_index >= 3 ? v >= level : v > level;
      if (hit) omega.mask[k] = 1;
    }
  }
  return omega;
}

ExceptionalSet exceptional_set(const std::array<GridSet, 4>& sets, int bad_index) {
  for (const auto& e : sets)
    if (!(e.measure() > 0.0)) throw DomainError("exceptional set construction needs |E_i| > 0");
  const GridSet& eb = sets[static_cast<std::size_t>(bad_index - 1)];
  for (double C = 2.0; C <= kExceptionalCap; C *= 2.0) {
    GridSet omega = exceptional_region(sets, bad_index, C);
    GridSet major = eb.minus(omega);
    if (major.measure() >= 0.5 * eb.measure()) return ExceptionalSet{std::move(omega), C, std::move(major), bad_index};
  }
  throw SearchError("no major subset found with C <= 2^20");
}

int distance_shell(const TriTile& p, const GridSet& omega) {
  const GridSpec& g = omega.grid;
  const double lo = to_double(p.spatial_interval().lo);
  const double hi = to_double(p.spatial_interval().hi);
  const double len = hi - lo;
  const auto cell_of = [&](double x) { return std::floor((x - g.x0) / g.dx); };
  const double c0 = cell_of(lo);
  const double c1 = std::ceil((hi - g.x0) / g.dx) - 1.0;
  double dist = 0.0;
  const double n = static_cast<double>(g.n);
  bool covered = c0 >= 0.0 && c1 < n && c0 <= c1;
  if (covered)
    for (auto c = static_cast<std::size_t>(c0); c <= static_cast<std::size_t>(c1); ++c)
      if (!omega.mask[c]) {
        covered = false;
        break;
      }
  if (covered) {
    std::size_t a = static_cast<std::size_t>(c0);
    std::size_t b = static_cast<std::size_t>(c1);
    while (a > 0 && omega.mask[a - 1]) --a;
    while (b + 1 < g.n && omega.mask[b + 1]) ++b;
    dist = std::max(0.0, std::min(lo - g.x(a), g.x(b) + g.dx - hi));
  }
  return std::ilogb(1.0 + dist / len);
}

TileFamily tile_distance_shell(const TileFamily& family, const GridSet& omega, int l) {
  std::vector<TileId> ids;
  for (const auto& p : family.members())
    if (distance_shell(p, omega) == l) ids.push_back(p.id());
  return family.subfamily(ids);
}

}  // namespace tiletide
