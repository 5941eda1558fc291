#pragma once

#include <nlohmann/json.hpp>

#include "tiletide/grid.hpp"

namespace tiletide {

// {"num": n, "den": d}; components are JSON integers when they fit in 64 bits, else strings.
nlohmann::json rational_to_json(const Rational& q);
// Accepts the object form, a JSON integer, or a string "p/q" / decimal.
Rational rational_from_json(const nlohmann::json& j);

nlohmann::json interval_to_json(const Interval& iv);
Interval interval_from_json(const nlohmann::json& j);

nlohmann::json dyadic_to_json(const DyadicInterval& d);
DyadicInterval dyadic_from_json(const nlohmann::json& j);

nlohmann::json family_to_json(const TileFamily& family);
TileFamily family_from_json(const nlohmann::json& j);

nlohmann::json model_families_to_json(const ModelFamilies& families);
ModelFamilies model_families_from_json(const nlohmann::json& j);

}  // namespace tiletide
