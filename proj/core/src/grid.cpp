#include "tiletide/grid.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "tiletide/error.hpp"

namespace tiletide {
namespace {

mpz_class floor_div(const Rational& q) {
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

mpz_class ceil_div(const Rational& q) {
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

std::int64_t to_i64(const mpz_class& z) {
  if (!z.fits_slong_p()) throw DomainError("mesh index exceeds 64-bit range");
  return z.get_si();
}

// Signed offset (-1)^scale * sigma of the mesh at this scale.
Rational signed_shift(int scale, Shift s) {
  Rational v = shift_value(s);
  return (scale % 2 == 0) ? v : Rational(-v);
}

std::int64_t floor_shift(std::int64_t index, int bits) {
  // Floor division by 2^bits for signed indices.
  if (bits >= 63) return index < 0 ? -1 : 0;
  return index >> bits;
}

bool same_tile(const TriTile& a, const TriTile& b, int t) {
  return a.spatial() == b.spatial() && a.freq(t) == b.freq(t);
}

}  // namespace

Rational shift_value(Shift s) {
  switch (s) {
    case Shift::zero: return Rational(0);
    case Shift::third: return Rational(1, 3);
    case Shift::two_thirds: return Rational(2, 3);
  }
  throw DomainError("unknown shift");
}

Shift shift_from_rational(const Rational& sigma) {
  if (sigma == 0) return Shift::zero;
  if (sigma == Rational(1, 3)) return Shift::third;
  if (sigma == Rational(2, 3)) return Shift::two_thirds;
  throw DomainError("shift must be 0, 1/3 or 2/3, got " + to_string(sigma));
}

Interval DyadicInterval::realize() const {
  const Rational len = pow2(scale);
  const Rational lo = len * (Rational(mpz_class(std::to_string(index))) + signed_shift(scale, shift));
  return Interval{lo, lo + len};
}

std::vector<DyadicInterval> mesh_intervals(Shift sigma, int scale, const Interval& window) {
  std::vector<DyadicInterval> out;
  if (!(window.lo < window.hi)) return out;
  const Rational len = pow2(scale);
  const Rational off = signed_shift(scale, sigma);
  // lo(k) < window.hi and lo(k) + len > window.lo.
  const mpz_class k_min = floor_div(window.lo / len - off - 1) + 1;
  const mpz_class k_max = ceil_div(window.hi / len - off) - 1;
  for (mpz_class k = k_min; k <= k_max; ++k) {
    out.push_back(DyadicInterval{scale, to_i64(k), sigma});
  }
  return out;
}

Tile make_tile(const DyadicInterval& spatial, const DyadicInterval& freq) {
  if (spatial.shift != Shift::zero) throw DomainError("spatial intervals carry no shift");
  Tile t{spatial.realize(), freq.realize()};
  if (t.area() != 1) throw DomainError("tile area must be exactly 1");
  return t;
}

std::string to_string(TileRelation r) {
  switch (r) {
    case TileRelation::equal: return "equal";
    case TileRelation::lt: return "lt";
    case TileRelation::le: return "le";
    case TileRelation::lesssim: return "lesssim";
    case TileRelation::lesssim_prime: return "lesssim_prime";
    case TileRelation::none: return "none";
  }
  return "none";
}

bool RelationFlags::holds(TileRelation r) const {
  switch (r) {
    case TileRelation::equal: return equal;
    case TileRelation::lt: return lt;
    case TileRelation::le: return le;
    case TileRelation::lesssim: return lesssim;
    case TileRelation::lesssim_prime: return lesssim_prime;
    case TileRelation::none: return !(equal || lt || le || lesssim || lesssim_prime);
  }
  return false;
}

TileRelation RelationFlags::strongest() const {
  if (equal) return TileRelation::equal;
  if (lt) return TileRelation::lt;
  if (lesssim_prime) return TileRelation::lesssim_prime;
  return TileRelation::none;
}

bool dilate_contains(const Interval& outer, const Interval& inner, long factor) {
  const Rational lin = inner.length();
  const Rational lout = outer.length();
  if (lin > lout) return false;
  Rational gap = outer.lo + outer.hi - inner.lo - inner.hi;  // 2 * (c_out - c_in)
  if (gap < 0) gap = -gap;
  return gap <= Rational(factor) * (lout - lin);
}

RelationFlags relation_flags(const Tile& p_prime, const Tile& p) {
  if (p_prime.area() != 1 || p.area() != 1) throw DomainError("tile relation needs area-1 tiles");
  RelationFlags f;
  f.equal = (p_prime == p);
  const bool sub = p.spatial.contains(p_prime.spatial);
  const bool proper = sub && !(p.spatial == p_prime.spatial);
  f.lt = proper && dilate_contains(p_prime.freq, p.freq, kOrderDilation);
  f.le = f.lt || f.equal;
  f.lesssim = sub && dilate_contains(p_prime.freq, p.freq, kWeakOrderDilation);
  f.lesssim_prime = f.lesssim && !f.le;
  return f;
}

TileRelation tile_relation(const Tile& p, const Tile& p_prime) {
  return relation_flags(p_prime, p).strongest();
}

std::size_t TriTile::index_of(int t) {
  if (t < 1 || t > 3) throw DomainError("tri-tile component must be 1, 2 or 3");
  return static_cast<std::size_t>(t - 1);
}

TriTile::TriTile(TileId id, DyadicInterval spatial, std::array<DyadicInterval, 3> freqs)
    : id_(id), spatial_(spatial), freqs_(freqs) {
  if (spatial_.shift != Shift::zero) throw DomainError("spatial intervals carry no shift");
  for (const auto& w : freqs_) {
    if (w.scale != -spatial_.scale) throw DomainError("tri-tile components must have area 1");
  }
  spatial_real_ = spatial_.realize();
  for (std::size_t i = 0; i < 3; ++i) freq_real_[i] = freqs_[i].realize();
}

TileFamily::TileFamily(std::vector<TriTile> members, std::array<Shift, 3> shift, nlohmann::json metadata)
    : members_(std::move(members)), shift_(shift), metadata_(std::move(metadata)) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& m = members_[i];
    for (int t = 1; t <= 3; ++t) {
      if (m.freq(t).shift != shift_[static_cast<std::size_t>(t - 1)]) {
        throw DomainError("family members must share the family shift");
      }
    }
    if (!by_id_.emplace(m.id(), i).second) throw DomainError("duplicate tri-tile id in family");
  }
}

const TriTile& TileFamily::at(TileId id) const { return members_[position(id)]; }

std::size_t TileFamily::position(TileId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw DomainError("tri-tile id not in family: " + std::to_string(id));
  return it->second;
}

TileFamily TileFamily::subfamily(const std::vector<TileId>& ids) const {
  std::vector<TriTile> sub;
  sub.reserve(ids.size());
  for (TileId id : ids) sub.push_back(at(id));
  return TileFamily(std::move(sub), shift_, metadata_);
}

FrequencyCube frequency_cube(const TriTile& p) { return FrequencyCube{p.freqs()}; }

namespace {

// Open dilates of equal-length intervals meet iff |c - c'| < D * L.
bool dilates_meet(const DyadicInterval& a, const DyadicInterval& b, long factor) {
  if (a.shift == b.shift && a.scale == b.scale) {
    const std::int64_t d = a.index - b.index;
    const std::int64_t ad = d < 0 ? -d : d;
    return ad < factor;
  }
  return a.realize().dilate(Rational(factor)).intersects(b.realize().dilate(Rational(factor)));
}

bool cubes_conflict(const FrequencyCube& a, const FrequencyCube& b) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (!dilates_meet(a.sides[i], b.sides[i], kSparseDilation)) return false;
  }
  return true;
}

bool scales_separated(int small, int large) {
  // 10^9 * 2^small < 2^large.
  if (large - small >= 30) return true;
  if (large <= small) return false;
  return Rational(kSparseDilation) < pow2(large - small);
}

void check_cube(const FrequencyCube& q) {
  if (q.sides[1].scale != q.sides[0].scale || q.sides[2].scale != q.sides[0].scale) {
    throw DomainError("frequency cube sides must have equal length");
  }
}

}  // namespace

SparseCheck is_sparse(const std::vector<FrequencyCube>& cubes) {
  for (const auto& q : cubes) check_cube(q);
  SparseCheck out;
  for (std::size_t a = 0; a < cubes.size(); ++a) {
    for (std::size_t b = a + 1; b < cubes.size(); ++b) {
      const auto& qa = cubes[a];
      const auto& qb = cubes[b];
      if (qa == qb) continue;
      bool ok = true;
      if (qa.scale() == qb.scale()) {
        ok = !cubes_conflict(qa, qb);
      } else {
        ok = qa.scale() < qb.scale() ? scales_separated(qa.scale(), qb.scale())
                                      : scales_separated(qb.scale(), qa.scale());
      }
      if (!ok) {
        out.sparse = false;
        out.violation = std::make_pair(a, b);
        return out;
      }
    }
  }
  return out;
}

SparseCheck is_sparse(const TileFamily& family) {
  std::vector<FrequencyCube> cubes;
  cubes.reserve(family.size());
  for (const auto& m : family.members()) cubes.push_back(frequency_cube(m));
  return is_sparse(cubes);
}

SparseSplit split_sparse(const TileFamily& family) {
  SparseSplit out;
  if (family.empty()) return out;

  // Distinct cubes, grouped by scale.
  std::map<FrequencyCube, std::vector<TileId>> owners;
  for (const auto& m : family.members()) owners[frequency_cube(m)].push_back(m.id());
  std::map<int, std::vector<FrequencyCube>> by_scale;
  for (const auto& [cube, ids] : owners) by_scale[cube.scale()].push_back(cube);

  // Greedy coloring per scale in cube order.
  std::map<FrequencyCube, int> color;
  for (auto& [scale, cubes] : by_scale) {
    std::vector<int> local(cubes.size());
    std::vector<char> taken;
    for (std::size_t a = 0; a < cubes.size(); ++a) {
      taken.assign(a + 1, 0);  // at most a colors are blocked
      for (std::size_t b = 0; b < a; ++b) {
        if (cubes_conflict(cubes[a], cubes[b])) taken[static_cast<std::size_t>(local[b])] = 1;
      }
      int c = 0;
      while (taken[static_cast<std::size_t>(c)]) ++c;
      local[a] = c;
      color[cubes[a]] = c;
      out.max_colors = std::max(out.max_colors, c + 1);
    }
  }

  auto residue = [](int scale) {
    const int r = scale % kSparseScaleModulus;
    return r < 0 ? r + kSparseScaleModulus : r;
  };
  std::map<std::pair<int, int>, std::vector<TileId>> parts;
  for (const auto& m : family.members()) {
    const auto cube = frequency_cube(m);
    parts[{residue(cube.scale()), color[cube]}].push_back(m.id());
  }
  std::set<int> classes;
  for (const auto& [key, ids] : parts) {
    classes.insert(key.first);
    auto part = family.subfamily(ids);
    nlohmann::json meta = family.metadata();
    meta["sparse_part"] = {{"scale_residue", key.first}, {"color", key.second}};
    out.parts.emplace_back(std::vector<TriTile>(part.members()), family.shift(), std::move(meta));
  }
  out.scale_classes = static_cast<int>(classes.size());
  return out;
}

namespace {

std::optional<Rank1Violation> check_pair(const TriTile& p, const TriTile& q, bool check_clause1) {
  // p plays P, q plays P'.
  if (check_clause1) {
    for (int j = 1; j <= 3; ++j) {
      if (same_tile(p, q, j)) return Rank1Violation{p.id(), q.id(), 1, j, j};
    }
  }
  const bool much_smaller = q.spatial_length() < Rational(kSparseDilation) * p.spatial_length();
  for (int j = 1; j <= 3; ++j) {
    if (!relation_flags(q.tile(j), p.tile(j)).le) continue;
    for (int i = 1; i <= 3; ++i) {
      const auto f = relation_flags(q.tile(i), p.tile(i));
      if (!f.lesssim) return Rank1Violation{p.id(), q.id(), 2, j, i};
      if (much_smaller && i != j && !f.lesssim_prime) return Rank1Violation{p.id(), q.id(), 3, j, i};
    }
  }
  return std::nullopt;
}

}  // namespace

Rank1Check is_rank1_bruteforce(const TileFamily& family) {
  Rank1Check out;
  const auto& ms = family.members();
  for (std::size_t a = 0; a < ms.size(); ++a) {
    for (std::size_t b = 0; b < ms.size(); ++b) {
      if (a == b) continue;
      if (auto v = check_pair(ms[a], ms[b], true)) {
        out.rank1 = false;
        out.violation = v;
        return out;
      }
    }
  }
  return out;
}

Rank1Check is_rank1(const TileFamily& family) {
  Rank1Check out;
  const auto& ms = family.members();

  // Clause 1 via shared component tiles.
  for (int j = 1; j <= 3; ++j) {
    std::map<std::pair<DyadicInterval, DyadicInterval>, std::size_t> seen;
    for (std::size_t a = 0; a < ms.size(); ++a) {
      auto [it, fresh] = seen.emplace(std::make_pair(ms[a].spatial(), ms[a].freq(j)), a);
      if (!fresh) {
        out.rank1 = false;
        out.violation = Rank1Violation{ms[it->second].id(), ms[a].id(), 1, j, j};
        return out;
      }
    }
  }

  // Domination P'_j <= P_j with P' != P forces I_{P'} strictly inside I_P, so P sits on
  // a spatial ancestor of I_{P'}; within an ancestor, candidates are found by frequency index.
  using Key = std::tuple<int, std::int64_t, int>;  // spatial scale, spatial index, component
  std::map<Key, std::vector<std::pair<std::int64_t, std::size_t>>> index;
  std::set<int> scales;
  for (std::size_t a = 0; a < ms.size(); ++a) {
    scales.insert(ms[a].scale());
    for (int j = 1; j <= 3; ++j) {
      index[{ms[a].scale(), ms[a].spatial().index, j}].emplace_back(ms[a].freq(j).index, a);
    }
  }
  for (auto& [key, list] : index) std::sort(list.begin(), list.end());

  for (std::size_t b = 0; b < ms.size(); ++b) {
    const TriTile& q = ms[b];
    for (int s : scales) {
      if (s <= q.scale()) continue;
      const std::int64_t anc = floor_shift(q.spatial().index, s - q.scale());
      for (int j = 1; j <= 3; ++j) {
        auto it = index.find({s, anc, j});
        if (it == index.end()) continue;
        const auto& list = it->second;
        // Centers of candidate omega_{P_j} lie within (3/2)|omega_{P'_j}| of c'.
        const Interval& wq = q.freq_interval(j);
        const Rational radius = Rational(kOrderDilation) * wq.length() / 2;
        const Rational len = pow2(-s);
        const Rational off = signed_shift(-s, ms[list.front().second].freq(j).shift) + Rational(1, 2);
        const std::int64_t k_lo = to_i64(floor_div((wq.center() - radius) / len - off));
        const std::int64_t k_hi = to_i64(ceil_div((wq.center() + radius) / len - off));
        auto first = std::lower_bound(list.begin(), list.end(), std::make_pair(k_lo, std::size_t{0}));
        for (auto c = first; c != list.end() && c->first <= k_hi; ++c) {
          if (auto v = check_pair(ms[c->second], q, false)) {
            out.rank1 = false;
            out.violation = v;
            return out;
          }
        }
      }
    }
  }
  return out;
}

ModelFamilies generate_model_families(const ModelFamilyParams& params) {
  const int k = params.scale_gap;
  if (k <= 10) throw DomainError("scale gap k must exceed 10");
  if (k > 20) throw DomainError("scale gap k above 20 is outside desk scale");
  if (params.p_scale_min > params.p_scale_max) throw DomainError("empty P scale range");
  for (int n : {params.p_offset, params.q_offset}) {
    if (n < 8 || n % 2 != 0) throw DomainError("frequency offsets must be even and at least 8");
  }

  std::vector<TriTile> p_members;
  std::set<std::pair<int, std::int64_t>> p2_bands;  // (P scale, index of omega_{P_2})
  TileId next = 0;
  for (int s = params.p_scale_min; s <= params.p_scale_max; ++s) {
    for (const auto& I : mesh_intervals(Shift::zero, s, params.spatial_window)) {
      if (!params.spatial_window.contains(I.realize())) continue;
      for (const auto& w : mesh_intervals(Shift::zero, -s, params.frequency_window)) {
        if (!params.frequency_window.contains(w.realize())) continue;
        const std::int64_t l1 = w.index;
        const std::int64_t l2 = l1 + params.p_offset;
        const std::int64_t l3 = l1 + params.p_offset / 2;
        p_members.emplace_back(next++, I,
                               std::array<DyadicInterval, 3>{DyadicInterval{-s, l1, Shift::zero},
                                                             DyadicInterval{-s, l2, Shift::zero},
                                                             DyadicInterval{-s, l3, Shift::zero}});
        p2_bands.emplace(s, l2);
      }
    }
  }
  if (p_members.empty()) throw DomainError("windows too small to hold one P tile");

  // Q tiles: frequency scale finer by 2^k, omega_{Q_3} running over the 2^k mesh
  // intervals inside each omega_{P_2}.
  using QKey = std::tuple<int, std::int64_t, std::int64_t>;  // spatial scale, spatial index, q3 index
  std::set<QKey> q_keys;
  const std::int64_t per_band = std::int64_t{1} << k;
  for (const auto& [s, l2] : p2_bands) {
    const int qs = s + k;
    const auto spatial = mesh_intervals(Shift::zero, qs, params.spatial_window);
    for (const auto& I : spatial) {
      for (std::int64_t p = l2 * per_band; p < (l2 + 1) * per_band; ++p) q_keys.emplace(qs, I.index, p);
    }
  }
  std::vector<TriTile> q_members;
  q_members.reserve(q_keys.size());
  std::map<std::pair<int, std::int64_t>, std::vector<TileId>> by_q3;  // (scale, q3 index) -> ids
  TileId qid = 0;
  const std::int64_t half = params.q_offset / 2;
  for (const auto& [qs, idx, p] : q_keys) {
    q_members.emplace_back(qid, DyadicInterval{qs, idx, Shift::zero},
                           std::array<DyadicInterval, 3>{DyadicInterval{-qs, p - half, Shift::zero},
                                                         DyadicInterval{-qs, p + half, Shift::zero},
                                                         DyadicInterval{-qs, p, Shift::zero}});
    by_q3[{qs, p}].push_back(qid);
    ++qid;
  }

  ModelFamilies out;
  for (const auto& m : p_members) {
    auto& ids = out.links[m.id()];
    const std::int64_t l2 = m.freq(2).index;
    const int qs = m.scale() + k;
    for (std::int64_t p = l2 * per_band; p < (l2 + 1) * per_band; ++p) {
      auto it = by_q3.find({qs, p});
      if (it != by_q3.end()) ids.insert(ids.end(), it->second.begin(), it->second.end());
    }
    std::sort(ids.begin(), ids.end());
  }

  nlohmann::json meta = {
      {"scale_gap", k},
      {"p_scale_min", params.p_scale_min},
      {"p_scale_max", params.p_scale_max},
      {"spatial_window", {to_string(params.spatial_window.lo), to_string(params.spatial_window.hi)}},
      {"frequency_window", {to_string(params.frequency_window.lo), to_string(params.frequency_window.hi)}},
      {"p_offset", params.p_offset},
      {"q_offset", params.q_offset},
  };
  const std::array<Shift, 3> zero{Shift::zero, Shift::zero, Shift::zero};
  nlohmann::json pmeta = meta;
  pmeta["role"] = "P";
  nlohmann::json qmeta = meta;
  qmeta["role"] = "Q";
  out.p_family = TileFamily(std::move(p_members), zero, std::move(pmeta));
  out.q_family = TileFamily(std::move(q_members), zero, std::move(qmeta));
  return out;
}

}  // namespace tiletide
