#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiletide/grid.hpp"
#include "tiletide/spectral.hpp"

namespace tiletide {

// a_{P_t} keyed by tri-tile id.
struct CoeffSequence {
  int component = 1;
  std::map<TileId, Complex> values;

  Complex at(TileId id) const;
  static CoeffSequence zeros(const TileFamily& family, int component);
  // Values in family member order; throws if an id is missing.
  std::vector<Complex> aligned(const TileFamily& family) const;
};

// Top of a t-tree: the spatial interval and the t-th frequency interval of a (possibly synthetic) tri-tile.
struct TreeTop {
  DyadicInterval spatial{};
  DyadicInterval freq{};
  int type = 1;
  bool synthetic = false;

  Tile tile() const { return make_tile(spatial, freq); }
  bool operator==(const TreeTop& other) const = default;
};

struct Tree {
  TreeTop top{};
  std::vector<TileId> members;

  int type() const { return top.type; }
};

struct TopOptions {
  // Spatial ancestors of member intervals, up to this many scales above, become synthetic tops.
  int ancestor_depth = 1;
};

// Member tops (I_P, omega_{P_i}) and synthetic ancestor tops, for every type i other than `exclude_type`.
std::vector<TreeTop> candidate_tops(const TileFamily& family, const TopOptions& options, int exclude_type = 0);

// P_t <= P_{T,t}: equal or lt.
bool dominated_by(const TriTile& p, const TreeTop& top);
// Members of the family dominated by the top in component top.type.
std::vector<TileId> tree_members(const TileFamily& family, const TreeTop& top);
bool is_tree(const TileFamily& family, const Tree& tree);

struct SizeOptions {
  TopOptions tops{};
  // Added to the candidate tops (used for sub-trees of a tree with an external top).
  std::vector<TreeTop> extra_tops;
};

struct SizeResult {
  double value = 0.0;
  std::optional<TreeTop> witness;
};

// sup over j-lacunary candidate trees of (|I_T|^-1 sum |a_{P_j}|^2)^(1/2), all dominated members taken.
SizeResult size_of(const TileFamily& family, const CoeffSequence& coeffs, int j, const SizeOptions& options = {});
double size(const TileFamily& family, const CoeffSequence& coeffs, int j, const SizeOptions& options = {});

// Subset enumeration over the dominated set of every candidate top; reference for `size`.
double size_exhaustive(const TileFamily& family, const CoeffSequence& coeffs, int j, const SizeOptions& options = {});

bool strongly_disjoint(const TileFamily& family, const Tree& a, const Tree& b, int i);

enum class EnergyMode { greedy, exhaustive };

inline constexpr std::size_t kExhaustiveEnergyLimit = 12;

struct Forest {
  int lacunarity = 1;  // t
  int threshold = 0;   // n
  std::vector<Tree> trees;
};

struct EnergyResult {
  double value = 0.0;
  std::optional<Forest> witness;
};

struct ForestCheck {
  bool disjoint = true;
  bool lower = true;
  bool upper = true;
  bool ok() const { return disjoint && lower && upper; }
};

// Strong t-disjointness, the 2^n lower witness and the 2^(n+1) sub-tree cap, recomputed from scratch.
ForestCheck check_forest(const TileFamily& family, const CoeffSequence& coeffs, const Forest& forest,
                         const TopOptions& tops = {});

// t in {1, 2}; the t = 3 case is only checked through partition_forests.
EnergyResult energy(const TileFamily& family, const CoeffSequence& coeffs, int t, EnergyMode mode,
                    const TopOptions& tops = {});

struct PartitionLevel {
  int n = 0;
  std::vector<Tree> trees;
  double top_measure = 0.0;  // sum |I_T|
  // sum |I_T| / bound (0 for t = 3 without |E_4|); bound is 2^(-2n) sum |a|^2 for t in {1, 2} and the mu-dependent form for t = 3.
  double bound_ratio = 0.0;
};

struct PartitionOptions {
  TopOptions tops{};
  double mu = 10.0;
  // |E_4|; required for the t = 3 bound.
  double e4_measure = 0.0;
};

struct PartitionReport {
  int t = 1;
  std::vector<PartitionLevel> levels;  // decreasing n
  std::vector<TileId> discarded;       // zero coefficients
  double family_size = 0.0;
  double max_bound_ratio = 0.0;
};

PartitionReport partition_forests(const TileFamily& family, const CoeffSequence& coeffs, int t,
                                  const PartitionOptions& options = {});

// |E_4| 2^(-2n) (2^(-n) |E_4|^(-1/2))^(2/mu).
double partition_bound_t3(double e4_measure, int n, double mu);

nlohmann::json partition_to_json(const PartitionReport& report);

// Dyadic interval with a coefficient.
struct WeightedInterval {
  Interval interval;
  Complex coefficient;
};

double bmo_norm(const std::vector<WeightedInterval>& family, double r);
// bmo(p) / bmo(q); 0/0 is reported as 1.
double jn_ratio(const std::vector<WeightedInterval>& family, double p, double q);

struct TreeEstimate {
  double lhs = 0.0;
  double rhs = 0.0;
  std::array<double, 3> sizes{};
};

// lhs = sum |I_P|^(-1/2) |a1 a2 a3|; rhs = |I_T| size_1 size_2 size_3 on the tree.
TreeEstimate single_tree_estimate(const TileFamily& family, const Tree& tree, const CoeffSequence& a1,
                                  const CoeffSequence& a2, const CoeffSequence& a3, const TopOptions& tops = {});

struct ExceptionalSet {
  GridSet omega;
  double C = 0.0;
  GridSet major;  // E_b minus omega
  int bad_index = 4;
};

inline constexpr double kExceptionalCap = 1048576.0;  // 2^20

// Doubles C from 2 until |E_b \ Omega_C| >= |E_b| / 2.
ExceptionalSet exceptional_set(const std::array<GridSet, 4>& sets, int bad_index);
// Omega_C for a fixed C.
GridSet exceptional_region(const std::array<GridSet, 4>& sets, int bad_index, double C);

// l with 2^l <= 1 + dist(I_P, complement of omega)/|I_P| < 2^(l+1).
int distance_shell(const TriTile& p, const GridSet& omega);
TileFamily tile_distance_shell(const TileFamily& family, const GridSet& omega, int l);

}  // namespace tiletide
