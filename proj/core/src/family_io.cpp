#include "tiletide/family_io.hpp"

#include "tiletide/error.hpp"

namespace tiletide {
namespace {

nlohmann::json integer_to_json(const mpz_class& z) {
  if (z.fits_slong_p()) return static_cast<std::int64_t>(z.get_si());
  return z.get_str();
}

mpz_class integer_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return mpz_class(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) {
    mpz_class z;
    if (z.set_str(j.get<std::string>(), 10) != 0) throw DomainError("malformed integer string");
    return z;
  }
  throw DomainError("expected integer");
}

}  // namespace

nlohmann::json rational_to_json(const Rational& q) {
  return {{"num", integer_to_json(q.get_num())}, {"den", integer_to_json(q.get_den())}};
}

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_object()) {
    Rational q(integer_from_json(j.at("num")), integer_from_json(j.at("den")));
    if (q.get_den() == 0) throw DomainError("rational with zero denominator");
    q.canonicalize();
    return q;
  }
  if (j.is_number_integer()) return Rational(mpz_class(static_cast<long>(j.get<std::int64_t>())));
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw DomainError("expected a rational: {num,den}, integer or string");
}

nlohmann::json interval_to_json(const Interval& iv) {
  return {{"lo", rational_to_json(iv.lo)}, {"hi", rational_to_json(iv.hi)}};
}

Interval interval_from_json(const nlohmann::json& j) {
  Interval iv;
  if (j.is_array() && j.size() == 2) {
    iv = Interval{rational_from_json(j[0]), rational_from_json(j[1])};
  } else {
    iv = Interval{rational_from_json(j.at("lo")), rational_from_json(j.at("hi"))};
  }
  if (!(iv.lo < iv.hi)) throw DomainError("interval must satisfy lo < hi");
  return iv;
}

nlohmann::json dyadic_to_json(const DyadicInterval& d) {
  return {{"scale", d.scale}, {"index", d.index}, {"shift", rational_to_json(shift_value(d.shift))}};
}

DyadicInterval dyadic_from_json(const nlohmann::json& j) {
  DyadicInterval d;
  d.scale = j.at("scale").get<int>();
  d.index = j.at("index").get<std::int64_t>();
  d.shift = shift_from_rational(rational_from_json(j.at("shift")));
  return d;
}

nlohmann::json family_to_json(const TileFamily& family) {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : family.members()) {
    nlohmann::json freqs = nlohmann::json::array();
    for (int t = 1; t <= 3; ++t) freqs.push_back(dyadic_to_json(m.freq(t)));
    members.push_back({{"id", m.id()}, {"spatial", dyadic_to_json(m.spatial())}, {"freqs", std::move(freqs)}});
  }
  nlohmann::json shift = nlohmann::json::array();
  for (auto s : family.shift()) shift.push_back(rational_to_json(shift_value(s)));
  return {{"shift", std::move(shift)}, {"metadata", family.metadata()}, {"members", std::move(members)}};
}

TileFamily family_from_json(const nlohmann::json& j) {
  std::array<Shift, 3> shift{};
  const auto& js = j.at("shift");
  if (!js.is_array() || js.size() != 3) throw DomainError("family shift must be a triple");
  for (std::size_t i = 0; i < 3; ++i) shift[i] = shift_from_rational(rational_from_json(js[i]));
  std::vector<TriTile> members;
  for (const auto& m : j.at("members")) {
    const auto& f = m.at("freqs");
    if (!f.is_array() || f.size() != 3) throw DomainError("tri-tile needs three frequency intervals");
    members.emplace_back(m.at("id").get<TileId>(), dyadic_from_json(m.at("spatial")),
                         std::array<DyadicInterval, 3>{dyadic_from_json(f[0]), dyadic_from_json(f[1]),
                                                       dyadic_from_json(f[2])});
  }
  return TileFamily(std::move(members), shift, j.value("metadata", nlohmann::json::object()));
}

nlohmann::json model_families_to_json(const ModelFamilies& families) {
  nlohmann::json links = nlohmann::json::array();
  for (const auto& [pid, qids] : families.links) links.push_back({{"p", pid}, {"q", qids}});
  return {{"p_family", family_to_json(families.p_family)},
          {"q_family", family_to_json(families.q_family)},
          {"links", std::move(links)}};
}

ModelFamilies model_families_from_json(const nlohmann::json& j) {
  ModelFamilies out;
  out.p_family = family_from_json(j.at("p_family"));
  out.q_family = family_from_json(j.at("q_family"));
  for (const auto& l : j.at("links")) {
    const TileId pid = l.at("p").get<TileId>();
    if (!out.p_family.contains(pid)) throw DomainError("link refers to unknown P tile");
    auto ids = l.at("q").get<std::vector<TileId>>();
    for (TileId q : ids) {
      if (!out.q_family.contains(q)) throw DomainError("link refers to unknown Q tile");
    }
    out.links[pid] = std::move(ids);
  }
  return out;
}

}  // namespace tiletide
