#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "tiletide/error.hpp"
#include "tiletide/sizeenergy.hpp"
#include "tree_index.hpp"

namespace tiletide {
namespace {

constexpr double kCapSlack = 1e-12;

// Pairwise data for strong t-disjointness in family order.
struct DisjointTables {
  std::vector<std::vector<char>> same;     // P_t == P'_t
  std::vector<std::vector<char>> overlap;  // 2 omega_{P_t} meets 2 omega_{P'_t}

  DisjointTables(const TileFamily& family, int t) {
    const auto& m = family.members();
    const std::size_t n = m.size();
    same.assign(n, std::vector<char>(n, 0));
    overlap.assign(n, std::vector<char>(n, 0));
    std::vector<Interval> doubled;
    doubled.reserve(n);
    for (const auto& p : m) doubled.push_back(p.freq_interval(t).dilate(Rational(2)));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        same[a][b] = m[a].tile(t) == m[b].tile(t);
        overlap[a][b] = doubled[a].intersects(doubled[b]);
      }
  }
};

bool meets_top(const TriTile& p, const TreeTop& top) {
  return p.spatial_interval().intersects(top.spatial.realize());
}

bool disjoint_positions(const TileFamily& family, const DisjointTables& tab, const TreeTop& ta,
                        const std::vector<std::size_t>& a, const TreeTop& tb, const std::vector<std::size_t>& b) {
  const auto& m = family.members();
  for (std::size_t p : a)
    for (std::size_t q : b) {
      if (tab.same[p][q]) return false;
      if (tab.overlap[p][q] && (meets_top(m[q], ta) || meets_top(m[p], tb))) return false;
    }
  return true;
}

std::vector<TreeTop> lacunary_tops(const TileFamily& family, const TopOptions& tops, int t) {
  return candidate_tops(family, tops, t);
}

// max over tops of (mass of the selected members dominated by the top) / |I_top|.
double cap_ratio(const std::vector<detail::TopEntry>& index, const std::vector<double>& mag,
                 const std::vector<char>& selected) {
  double best = 0.0;
  for (const auto& e : index) {
    double mass = 0.0;
    for (std::size_t k : e.members)
      if (selected[k]) mass += mag[k];
    best = std::max(best, mass / e.length);
  }
  return best;
}

Tree make_tree(const TileFamily& family, const TreeTop& top, const std::vector<std::size_t>& positions) {
  Tree tree{top, {}};
  for (std::size_t k : positions) tree.members.push_back(family.members()[k].id());
  return tree;
}

void check_lacunarity(int t) {
  if (t < 1 || t > 3) throw DomainError("lacunarity index must be 1, 2 or 3");
}

// ---- greedy selection ----

struct GreedyLevel {
  double top_measure = 0.0;
  std::vector<Tree> trees;
};

GreedyLevel greedy_forest(const TileFamily& family, const std::vector<detail::TopEntry>& index,
                          const std::vector<double>& mag, const DisjointTables& tab, int n) {
  const std::size_t size = family.size();
  std::vector<char> remaining(size, 0);
  for (std::size_t k = 0; k < size; ++k) remaining[k] = mag[k] > 0.0;
  std::vector<std::pair<const detail::TopEntry*, std::vector<std::size_t>>> chosen;
  const double cap = std::ldexp(1.0, 2 * (n + 1)) * (1.0 + kCapSlack);
  std::vector<char> selected(size, 0);
  for (;;) {
    const detail::TopEntry* best = nullptr;
    std::vector<std::size_t> best_members;
    double best_mass = 0.0;
    for (const auto& e : index) {
      std::vector<std::size_t> d;
      double mass = 0.0;
      for (std::size_t k : e.members)
        if (remaining[k]) {
          d.push_back(k);
          mass += mag[k];
        }
      if (d.empty() || mass <= best_mass) continue;
      if (std::ldexp(e.length, 2 * n) > mass) continue;
      std::fill(selected.begin(), selected.end(), 0);
      for (std::size_t k : d) selected[k] = 1;
      if (cap_ratio(index, mag, selected) > cap) continue;
      const bool ok = std::all_of(chosen.begin(), chosen.end(), [&](const auto& c) {
        return disjoint_positions(family, tab, c.first->top, c.second, e.top, d);
      });
      if (!ok) continue;
      best = &e;
      best_mass = mass;
      best_members = std::move(d);
    }
    if (best == nullptr) break;
    for (std::size_t k : best_members) remaining[k] = 0;
    chosen.emplace_back(best, std::move(best_members));
  }
  GreedyLevel level;
  for (const auto& [e, members] : chosen) {
    level.top_measure += e->length;
    level.trees.push_back(make_tree(family, e->top, members));
  }
  return level;
}

// ---- exhaustive search ----

using Mask = std::uint32_t;

struct Node {
  std::size_t top = 0;
  Mask members = 0;
  double weight = 0.0;
};

struct MaskTables {
  std::vector<Mask> same;     // per compact member
  std::vector<Mask> overlap;  // per compact member
  std::vector<Mask> inter;    // per top: members meeting I_T
};

bool conflict(const MaskTables& mt, const Node& a, const Node& b) {
  Mask same_a = 0, over_a = 0, over_b = 0;
  for (Mask s = a.members; s; s &= s - 1) {
    const int k = __builtin_ctz(s);
    same_a |= mt.same[static_cast<std::size_t>(k)];
    over_a |= mt.overlap[static_cast<std::size_t>(k)];
  }
  if (b.members & same_a) return true;
  if (b.members & over_a & mt.inter[a.top]) return true;
  for (Mask s = b.members; s; s &= s - 1) over_b |= mt.overlap[static_cast<std::size_t>(__builtin_ctz(s))];
  return (a.members & over_b & mt.inter[b.top]) != 0;
}

class IndependentSet {
 public:
  IndependentSet(const std::vector<Node>& nodes, const MaskTables& mt) : nodes_(nodes) {
    const std::size_t n = nodes.size();
    order_.resize(n);
    for (std::size_t k = 0; k < n; ++k) order_[k] = k;
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return nodes[a].weight > nodes[b].weight; });
    adj_.assign(n, std::vector<char>(n, 0));
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        const bool c = conflict(mt, nodes[order_[a]], nodes[order_[b]]);
        adj_[a][b] = adj_[b][a] = c;
      }
    suffix_.assign(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) suffix_[k] = suffix_[k + 1] + nodes[order_[k]].weight;
  }

  double solve(std::vector<std::size_t>& witness) {
    std::vector<std::size_t> current;
    recurse(0, 0.0, current);
    witness.clear();
    for (std::size_t k : best_set_) witness.push_back(order_[k]);
    return best_;
  }

 private:
  void recurse(std::size_t k, double value, std::vector<std::size_t>& current) {
    if (value > best_) {
      best_ = value;
      best_set_ = current;
    }
    if (k == order_.size() || value + suffix_[k] <= best_) return;
    const bool free = std::none_of(current.begin(), current.end(), [&](std::size_t c) { return adj_[c][k]; });
    if (free) {
      current.push_back(k);
      recurse(k + 1, value + nodes_[order_[k]].weight, current);
      current.pop_back();
    }
    recurse(k + 1, value, current);
  }

  const std::vector<Node>& nodes_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<char>> adj_;
  std::vector<double> suffix_;
  double best_ = 0.0;
  std::vector<std::size_t> best_set_;
};

EnergyResult energy_exhaustive(const TileFamily& family, const CoeffSequence& coeffs, int t, const TopOptions& tops) {
  if (family.size() > kExhaustiveEnergyLimit)
    throw DomainError("exhaustive energy is limited to " + std::to_string(kExhaustiveEnergyLimit) + " tri-tiles");
  const auto mag_all = detail::squared_magnitudes(family, coeffs);
  std::vector<std::size_t> live;  // compact index -> family position
  for (std::size_t k = 0; k < mag_all.size(); ++k)
    if (mag_all[k] > 0.0) live.push_back(k);
  EnergyResult result;
  if (live.empty()) return result;
  std::vector<int> compact(family.size(), -1);
  for (std::size_t c = 0; c < live.size(); ++c) compact[live[c]] = static_cast<int>(c);

  const auto index = detail::index_tops(family, lacunary_tops(family, tops, t));
  const DisjointTables tab(family, t);
  const auto& members = family.members();
  MaskTables mt;
  mt.same.assign(live.size(), 0);
  mt.overlap.assign(live.size(), 0);
  for (std::size_t a = 0; a < live.size(); ++a)
    for (std::size_t b = 0; b < live.size(); ++b) {
      if (tab.same[live[a]][live[b]]) mt.same[a] |= Mask{1} << b;
      if (tab.overlap[live[a]][live[b]]) mt.overlap[a] |= Mask{1} << b;
    }
  std::vector<Mask> dominated(index.size(), 0);
  mt.inter.assign(index.size(), 0);
  for (std::size_t e = 0; e < index.size(); ++e) {
    for (std::size_t k : index[e].members)
      if (compact[k] >= 0) dominated[e] |= Mask{1} << compact[k];
    for (std::size_t c = 0; c < live.size(); ++c)
      if (meets_top(members[live[c]], index[e].top)) mt.inter[e] |= Mask{1} << c;
  }
  const std::size_t full = std::size_t{1} << live.size();
  std::vector<double> mass(full, 0.0);
  for (std::size_t s = 1; s < full; ++s) {
    const int low = __builtin_ctzll(s);
    mass[s] = mass[s & (s - 1)] + mag_all[live[static_cast<std::size_t>(low)]];
  }
  const auto cap_of = [&](Mask s) {
    double best = 0.0;
    for (std::size_t e = 0; e < index.size(); ++e) best = std::max(best, mass[s & dominated[e]] / index[e].length);
    return best;
  };

  // Valid n for (top, S) is [cap_threshold(cap), floor_threshold(mass, |I_T|)]; keep minimal S per (top, n).
  std::map<int, std::vector<Node>> by_level;
  for (std::size_t e = 0; e < index.size(); ++e) {
    const Mask d = dominated[e];
    if (d == 0) continue;
    std::map<Mask, std::pair<int, int>> range;
    for (Mask s = d;; s = (s - 1) & d) {
      if (s == 0) break;
      const int lo = detail::cap_threshold(cap_of(s) / (1.0 + kCapSlack));
      const int hi = detail::floor_threshold(mass[s], index[e].length);
      if (lo <= hi) range[s] = {lo, hi};
    }
    for (const auto& [s, r] : range)
      for (int n = r.first; n <= r.second; ++n) {
        bool minimal = true;
        for (Mask b = s; b && minimal; b &= b - 1) {
          const Mask sub = s & ~(b & (~b + 1));
          auto it = range.find(sub);
          if (sub != 0 && it != range.end() && it->second.first <= n && n <= it->second.second) minimal = false;
        }
        if (minimal) by_level[n].push_back(Node{e, s, index[e].length});
      }
  }
  for (auto it = by_level.rbegin(); it != by_level.rend(); ++it) {
    const int n = it->first;
    double total = 0.0;
    for (const auto& node : it->second) total += node.weight;
    if (std::ldexp(std::sqrt(total), n) <= result.value) continue;
    std::vector<std::size_t> chosen;
    IndependentSet solver(it->second, mt);
    const double best = solver.solve(chosen);
    const double value = std::ldexp(std::sqrt(best), n);
    if (value > result.value) {
      Forest forest{t, n, {}};
      for (std::size_t k : chosen) {
        const Node& node = it->second[k];
        std::vector<std::size_t> positions;
        for (Mask s = node.members; s; s &= s - 1) positions.push_back(live[static_cast<std::size_t>(__builtin_ctz(s))]);
        forest.trees.push_back(make_tree(family, index[node.top].top, positions));
      }
      result.value = value;
      result.witness = std::move(forest);
    }
  }
  return result;
}

EnergyResult energy_greedy(const TileFamily& family, const CoeffSequence& coeffs, int t, const TopOptions& tops) {
  const auto mag = detail::squared_magnitudes(family, coeffs);
  EnergyResult result;
  double min_mag = std::numeric_limits<double>::infinity();
  for (double m : mag)
    if (m > 0.0) min_mag = std::min(min_mag, m);
  if (!std::isfinite(min_mag)) return result;
  const auto index = detail::index_tops(family, lacunary_tops(family, tops, t));
  double max_len = 0.0;
  for (const auto& e : index) max_len = std::max(max_len, e.length);
  const double sz = size(family, coeffs, t, SizeOptions{tops, {}});
  const DisjointTables tab(family, t);
  const int n_hi = static_cast<int>(std::ceil(std::log2(sz)));
  const int n_lo = static_cast<int>(std::floor(0.5 * std::log2(min_mag / max_len))) - 1;
  for (int n = n_hi; n >= n_lo; --n) {
    GreedyLevel level = greedy_forest(family, index, mag, tab, n);
    const double value = std::ldexp(std::sqrt(level.top_measure), n);
    if (!level.trees.empty() && value > result.value) {
      result.value = value;
      result.witness = Forest{t, n, std::move(level.trees)};
    }
  }
  return result;
}

}  // namespace

bool strongly_disjoint(const TileFamily& family, const Tree& a, const Tree& b, int i) {
  check_lacunarity(i);
  for (TileId pa : a.members)
    for (TileId pb : b.members) {
      const TriTile& p = family.at(pa);
      const TriTile& q = family.at(pb);
      if (p.tile(i) == q.tile(i)) return false;
      const bool overlap =
          p.freq_interval(i).dilate(Rational(2)).intersects(q.freq_interval(i).dilate(Rational(2)));
      if (overlap && (meets_top(q, a.top) || meets_top(p, b.top))) return false;
    }
  return true;
}

ForestCheck check_forest(const TileFamily& family, const CoeffSequence& coeffs, const Forest& forest,
                         const TopOptions& tops) {
  check_lacunarity(forest.lacunarity);
  const int t = forest.lacunarity;
  const int n = forest.threshold;
  ForestCheck check;
  const auto& trees = forest.trees;
  for (std::size_t a = 0; a < trees.size(); ++a) {
    const Tree& tree = trees[a];
    if (tree.type() == t || !is_tree(family, tree)) check.disjoint = false;
    for (std::size_t b = a + 1; b < trees.size(); ++b)
      if (!strongly_disjoint(family, tree, trees[b], t)) check.disjoint = false;
    double mass = 0.0;
    for (TileId id : tree.members) mass += std::norm(coeffs.at(id));
    const double len = to_double(tree.top.spatial.length());
    if (mass < std::ldexp(len, 2 * n)) check.lower = false;
    const TileFamily sub = family.subfamily(tree.members);
    const double s = size(sub, coeffs, t, SizeOptions{tops, {tree.top}});
    if (s * s > std::ldexp(1.0, 2 * (n + 1)) * (1.0 + kCapSlack)) check.upper = false;
  }
  return check;
}

EnergyResult energy(const TileFamily& family, const CoeffSequence& coeffs, int t, EnergyMode mode,
                    const TopOptions& tops) {
  if (t != 1 && t != 2) throw DomainError("energy is defined for t = 1, 2 only");
  if (family.empty()) return {};
  return mode == EnergyMode::exhaustive ? energy_exhaustive(family, coeffs, t, tops)
                                        : energy_greedy(family, coeffs, t, tops);
}

double partition_bound_t3(double e4_measure, int n, double mu) {
  if (!(e4_measure > 0.0) || !(mu > 0.0)) throw DomainError("t = 3 bound needs |E_4| > 0 and mu > 0");
  const double inner = std::ldexp(1.0, -n) / std::sqrt(e4_measure);
  return e4_measure * std::ldexp(1.0, -2 * n) * std::pow(inner, 2.0 / mu);
}

PartitionReport partition_forests(const TileFamily& family, const CoeffSequence& coeffs, int t,
                                  const PartitionOptions& options) {
  check_lacunarity(t);
  PartitionReport report;
  report.t = t;
  const auto mag = detail::squared_magnitudes(family, coeffs);
  std::vector<char> remaining(family.size(), 0);
  std::size_t left = 0;
  for (std::size_t k = 0; k < family.size(); ++k) {
    if (mag[k] > 0.0) {
      remaining[k] = 1;
      ++left;
    } else {
      report.discarded.push_back(family.members()[k].id());
    }
  }
  if (left == 0) return report;
  const auto index = detail::index_tops(family, lacunary_tops(family, options.tops, t));
  report.family_size = size(family, coeffs, t, SizeOptions{options.tops, {}});
  int n = static_cast<int>(std::floor(std::log2(report.family_size)));
  // Every remaining member has size below 2^(n+1) on entry to level n.
  while (left > 0) {
    if (n < -2000) throw SearchError("forest partition did not terminate");
    PartitionLevel level;
    level.n = n;
    double level_mass = 0.0;
    for (;;) {
      const detail::TopEntry* best = nullptr;
      double best_mass = 0.0;
      for (const auto& e : index) {
        double m = 0.0;
        for (std::size_t k : e.members)
          if (remaining[k]) m += mag[k];
        if (m > best_mass && std::ldexp(e.length, 2 * n) <= m) {
          best = &e;
          best_mass = m;
        }
      }
      if (best == nullptr) break;
      std::vector<std::size_t> taken;
      for (std::size_t k : best->members)
        if (remaining[k]) {
          taken.push_back(k);
          remaining[k] = 0;
          --left;
        }
      level.trees.push_back(make_tree(family, best->top, taken));
      level.top_measure += best->length;
      level_mass += best_mass;
    }
    if (!level.trees.empty()) {
      // Without |E_4| the t = 3 bound is not evaluated and the ratio stays 0.
      if (t != 3)
        level.bound_ratio = level.top_measure / std::ldexp(level_mass, -2 * n);
      else if (options.e4_measure > 0.0)
        level.bound_ratio = level.top_measure / partition_bound_t3(options.e4_measure, n, options.mu);
      report.max_bound_ratio = std::max(report.max_bound_ratio, level.bound_ratio);
      report.levels.push_back(std::move(level));
    }
    --n;
  }
  return report;
}

nlohmann::json partition_to_json(const PartitionReport& report) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& level : report.levels) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : level.trees)
      trees.push_back({{"top_scale", tree.top.spatial.scale},
                       {"top_index", tree.top.spatial.index},
                       {"type", tree.top.type},
                       {"synthetic", tree.top.synthetic},
                       {"members", tree.members}});
    levels.push_back({{"n", level.n},
                      {"top_measure", level.top_measure},
                      {"bound_ratio", level.bound_ratio},
                      {"trees", std::move(trees)}});
  }
  return {{"t", report.t},
          {"family_size", report.family_size},
          {"max_bound_ratio", report.max_bound_ratio},
          {"discarded", report.discarded},
          {"levels", std::move(levels)}};
}

}  // namespace tiletide
