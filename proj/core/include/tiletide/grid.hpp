#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiletide/rational.hpp"

namespace tiletide {

// Dilation constants of the tile orders and of sparseness.
inline constexpr long kOrderDilation = 3;
inline constexpr long kWeakOrderDilation = 10'000'000;
inline constexpr long kSparseDilation = 1'000'000'000;
// Smallest m with 2^(m-1) > kSparseDilation, so scales congruent mod m are separated.
inline constexpr int kSparseScaleModulus = 31;

enum class Shift : std::uint8_t { zero = 0, third = 1, two_thirds = 2 };

Rational shift_value(Shift s);
Shift shift_from_rational(const Rational& sigma);

// 2^scale * (index + (0,1) + (-1)^scale * shift).
struct DyadicInterval {
  int scale = 0;
  std::int64_t index = 0;
  Shift shift = Shift::zero;

  Interval realize() const;
  Rational length() const { return pow2(scale); }
  auto operator<=>(const DyadicInterval&) const = default;
};

// Mesh members of the given scale whose realization meets window, by increasing index.
std::vector<DyadicInterval> mesh_intervals(Shift sigma, int scale, const Interval& window);

// Realized phase-space rectangle; area must be exactly 1 for the order relations.
struct Tile {
  Interval spatial;
  Interval freq;

  Rational area() const { return spatial.length() * freq.length(); }
  bool operator==(const Tile& other) const { return spatial == other.spatial && freq == other.freq; }
};

Tile make_tile(const DyadicInterval& spatial, const DyadicInterval& freq);

enum class TileRelation { equal, lt, le, lesssim, lesssim_prime, none };

std::string to_string(TileRelation r);

struct RelationFlags {
  bool equal = false;
  bool lt = false;
  bool le = false;
  bool lesssim = false;
  bool lesssim_prime = false;

  bool holds(TileRelation r) const;
  // equal, then lt, then lesssim_prime, else none.
  TileRelation strongest() const;
};

// Flags for the statement "p_prime REL p".
RelationFlags relation_flags(const Tile& p_prime, const Tile& p);

// Strongest relation "p_prime REL p".
TileRelation tile_relation(const Tile& p, const Tile& p_prime);

// D*inner ⊆ D*outer for the dilates about each interval's own center.
bool dilate_contains(const Interval& outer, const Interval& inner, long factor);

using TileId = std::uint64_t;

class TriTile {
 public:
  TriTile() = default;
  TriTile(TileId id, DyadicInterval spatial, std::array<DyadicInterval, 3> freqs);

  TileId id() const { return id_; }
  const DyadicInterval& spatial() const { return spatial_; }
  // Component t in {1,2,3}.
  const DyadicInterval& freq(int t) const { return freqs_[index_of(t)]; }
  const std::array<DyadicInterval, 3>& freqs() const { return freqs_; }
  const Interval& spatial_interval() const { return spatial_real_; }
  const Interval& freq_interval(int t) const { return freq_real_[index_of(t)]; }
  Tile tile(int t) const { return Tile{spatial_real_, freq_real_[index_of(t)]}; }
  int scale() const { return spatial_.scale; }
  Rational spatial_length() const { return spatial_real_.length(); }

 private:
  static std::size_t index_of(int t);

  TileId id_ = 0;
  DyadicInterval spatial_{};
  std::array<DyadicInterval, 3> freqs_{};
  Interval spatial_real_{};
  std::array<Interval, 3> freq_real_{};
};

class TileFamily {
 public:
  TileFamily() = default;
  TileFamily(std::vector<TriTile> members, std::array<Shift, 3> shift,
             nlohmann::json metadata = nlohmann::json::object());

  const std::vector<TriTile>& members() const { return members_; }
  const std::array<Shift, 3>& shift() const { return shift_; }
  const nlohmann::json& metadata() const { return metadata_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(TileId id) const { return by_id_.count(id) != 0; }
  const TriTile& at(TileId id) const;
  std::size_t position(TileId id) const;

  TileFamily subfamily(const std::vector<TileId>& ids) const;

 private:
  std::vector<TriTile> members_;
  std::array<Shift, 3> shift_{Shift::zero, Shift::zero, Shift::zero};
  nlohmann::json metadata_ = nlohmann::json::object();
  std::unordered_map<TileId, std::size_t> by_id_;
};

struct FrequencyCube {
  std::array<DyadicInterval, 3> sides;

  int scale() const { return sides[0].scale; }
  auto operator<=>(const FrequencyCube&) const = default;
};

FrequencyCube frequency_cube(const TriTile& p);

struct SparseCheck {
  bool sparse = true;
  std::optional<std::pair<std::size_t, std::size_t>> violation;
};

// Cubes must share one shifted mesh and have equal side lengths per cube.
SparseCheck is_sparse(const std::vector<FrequencyCube>& cubes);
SparseCheck is_sparse(const TileFamily& family);

struct SparseSplit {
  std::vector<TileFamily> parts;
  int scale_classes = 0;
  int max_colors = 0;
};

SparseSplit split_sparse(const TileFamily& family);

struct Rank1Violation {
  TileId first = 0;   // P
  TileId second = 0;  // P'
  int clause = 0;     // 1, 2 or 3
  int dominated_component = 0;  // j
  int failing_component = 0;    // i
};

struct Rank1Check {
  bool rank1 = true;
  std::optional<Rank1Violation> violation;
};

// Pairs are restricted to domination candidates through a frequency index.
Rank1Check is_rank1(const TileFamily& family);
// Plain double loop over ordered pairs; reference for small families.
Rank1Check is_rank1_bruteforce(const TileFamily& family);

struct ModelFamilyParams {
  int scale_gap = 11;
  int p_scale_min = 0;
  int p_scale_max = 0;
  Interval spatial_window{Rational(0), Rational(1)};
  Interval frequency_window{Rational(-4), Rational(-3)};
  // Index offset between omega_1 and omega_2 (even, >= 8).
  int p_offset = 8;
  int q_offset = 8;
};

struct ModelFamilies {
  TileFamily p_family;
  TileFamily q_family;
  std::map<TileId, std::vector<TileId>> links;
};

ModelFamilies generate_model_families(const ModelFamilyParams& params);

}  // namespace tiletide
