#pragma once

#include <vector>

#include "tiletide/sizeenergy.hpp"

namespace tiletide::detail {

// A candidate top with its realized tile and the positions of the members it dominates.
struct TopEntry {
  TreeTop top;
  Tile tile;
  double length = 0.0;
  std::vector<std::size_t> members;
};

std::vector<TopEntry> index_tops(const TileFamily& family, const std::vector<TreeTop>& tops);

// |a|^2 in family order.
std::vector<double> squared_magnitudes(const TileFamily& family, const CoeffSequence& coeffs);

// Largest n with 2^(2n) * length <= mass (mass > 0).
int floor_threshold(double mass, double length);
// Smallest n with ratio <= 2^(2(n+1)) (ratio > 0).
int cap_threshold(double ratio);

}  // namespace tiletide::detail
