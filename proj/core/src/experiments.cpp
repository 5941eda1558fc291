#include "tiletide/experiments.hpp"

#include <fftw3.h>
#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "tiletide/error.hpp"

#ifndef TILETIDE_VERSION
#define TILETIDE_VERSION "unknown"
#endif

namespace tiletide {
namespace {

using nlohmann::json;

json window_to_json(const Interval& w) { return json::array({to_string(w.lo), to_string(w.hi)}); }

Interval window_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("windows are [lo, hi] pairs");
  const auto side = [](const json& v) { return v.is_string() ? parse_rational(v.get<std::string>()) : Rational(v.get<long>()); };
  Interval w{side(j[0]), side(j[1])};
  if (!(w.lo < w.hi)) throw ConfigError("window must have lo < hi");
  return w;
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ModelFamilyParams ExperimentConfig::default_family_params() {
  ModelFamilyParams p;
  p.spatial_window = Interval{Rational(1020), Rational(1028)};
  p.frequency_window = Interval{Rational(-4), Rational(-3)};
  return p;
}

double ExperimentConfig::tolerance(const std::string& name, double fallback) const {
  auto it = tolerances.find(name);
  return it == tolerances.end() ? fallback : it->second;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> known = {
      "experiment", "seed", "scale_gap", "p_scale_min", "p_scale_max", "spatial_window", "frequency_window",
      "p_offset", "q_offset", "samples_per_unit", "bins_per_unit", "plateau_order", "bump_power", "bump_samples",
      "mu", "top_depth", "size_trials", "size_max_tiles", "energy_trials", "energy_max_tiles", "partition_trials",
      "partition_max_tiles", "tree_trials", "tree_max_tiles", "jn_trials", "jn_max_intervals", "alpha", "dilations",
      "set_intervals", "n2", "eval_x", "eval_k_min", "eval_k_max", "tolerances", "replay"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
  ExperimentConfig c;
  try {
    read(j, "experiment", c.experiment);
    read(j, "seed", c.seed);
    read(j, "scale_gap", c.family.scale_gap);
    read(j, "p_scale_min", c.family.p_scale_min);
    read(j, "p_scale_max", c.family.p_scale_max);
    if (j.contains("spatial_window")) c.family.spatial_window = window_from_json(j.at("spatial_window"));
    if (j.contains("frequency_window")) c.family.frequency_window = window_from_json(j.at("frequency_window"));
    read(j, "p_offset", c.family.p_offset);
    read(j, "q_offset", c.family.q_offset);
    read(j, "samples_per_unit", c.grid.samples_per_unit);
    read(j, "bins_per_unit", c.grid.bins_per_unit);
    read(j, "plateau_order", c.plateau_order);
    read(j, "bump_power", c.bump.power);
    read(j, "bump_samples", c.bump.samples);
    read(j, "mu", c.mu);
    read(j, "top_depth", c.top_depth);
    read(j, "size_trials", c.size_trials);
    read(j, "size_max_tiles", c.size_max_tiles);
    read(j, "energy_trials", c.energy_trials);
    read(j, "energy_max_tiles", c.energy_max_tiles);
    read(j, "partition_trials", c.partition_trials);
    read(j, "partition_max_tiles", c.partition_max_tiles);
    read(j, "tree_trials", c.tree_trials);
    read(j, "tree_max_tiles", c.tree_max_tiles);
    read(j, "jn_trials", c.jn_trials);
    read(j, "jn_max_intervals", c.jn_max_intervals);
    if (j.contains("alpha")) c.alpha = tuple_from_json(j.at("alpha"));
    read(j, "dilations", c.dilations);
    read(j, "set_intervals", c.set_intervals);
    read(j, "n2", c.n2);
    read(j, "eval_x", c.eval_x);
    read(j, "eval_k_min", c.eval_k_min);
    read(j, "eval_k_max", c.eval_k_max);
    read(j, "tolerances", c.tolerances);
    read(j, "replay", c.replay);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (c.size_max_tiles > 24) throw ConfigError("size_max_tiles above 24 exceeds the subset enumeration cap");
  if (c.energy_max_tiles > static_cast<int>(kExhaustiveEnergyLimit))
    throw ConfigError("energy_max_tiles above 12 exceeds the exhaustive energy cap");
  if (c.set_intervals < 1) throw ConfigError("set_intervals must be positive");
  if (c.dilations.empty()) throw ConfigError("dilations must not be empty");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return json{{"experiment", c.experiment},
              {"seed", c.seed},
              {"scale_gap", c.family.scale_gap},
              {"p_scale_min", c.family.p_scale_min},
              {"p_scale_max", c.family.p_scale_max},
              {"spatial_window", window_to_json(c.family.spatial_window)},
              {"frequency_window", window_to_json(c.family.frequency_window)},
              {"p_offset", c.family.p_offset},
              {"q_offset", c.family.q_offset},
              {"samples_per_unit", c.grid.samples_per_unit},
              {"bins_per_unit", c.grid.bins_per_unit},
              {"plateau_order", c.plateau_order},
              {"bump_power", c.bump.power},
              {"bump_samples", c.bump.samples},
              {"mu", c.mu},
              {"top_depth", c.top_depth},
              {"size_trials", c.size_trials},
              {"size_max_tiles", c.size_max_tiles},
              {"energy_trials", c.energy_trials},
              {"energy_max_tiles", c.energy_max_tiles},
              {"partition_trials", c.partition_trials},
              {"partition_max_tiles", c.partition_max_tiles},
              {"tree_trials", c.tree_trials},
              {"tree_max_tiles", c.tree_max_tiles},
              {"jn_trials", c.jn_trials},
              {"jn_max_intervals", c.jn_max_intervals},
              {"alpha", tuple_to_json(c.alpha)},
              {"dilations", c.dilations},
              {"set_intervals", c.set_intervals},
              {"n2", c.n2},
              {"eval_x", c.eval_x},
              {"eval_k_min", c.eval_k_min},
              {"eval_k_max", c.eval_k_max},
              {"tolerances", c.tolerances},
              {"replay", c.replay}};
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::mt19937_64 check_rng(const ExperimentConfig& config, const std::string& name) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(name)), static_cast<std::uint32_t>(fnv1a(name) >> 32)};
  return std::mt19937_64(seq);
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed || c.known_conflict; });
}

json check_to_json(const CheckResult& c) {
  json j{{"name", c.name},
         {"passed", c.passed},
         {"measured", c.measured},
         {"comparison", c.comparison},
         {"tolerance", c.tolerance},
         {"details", c.details}};
  if (c.known_conflict) j["known_conflict"] = true;
  return j;
}

json report_to_json(const SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_to_json(c));
  return json{{"suite", r.suite}, {"passed", r.passed()}, {"checks", std::move(checks)}, {"data", r.data}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Table report_table(const SuiteReport& r) {
  if (r.table) return *r.table;
  Table t{{"check", "passed", "measured", "comparison", "tolerance", "known_conflict"}, {}};
  for (const auto& c : r.checks)
    t.rows.push_back({c.name, c.passed ? "1" : "0", format_double(c.measured), c.comparison,
                      format_double(c.tolerance), c.known_conflict ? "1" : "0"});
  return t;
}

std::string table_to_csv(const Table& t) {
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << cell(row[k]);
    out << '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out.str();
}

json library_versions() {
  return json{{"tiletide", std::string(TILETIDE_VERSION)},
              {"gmp", std::string(gmp_version)},
              {"fftw", std::string(fftw_version)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

json make_manifest(const ExperimentConfig& config, const SuiteReport& report) {
  const json cfg = config_to_json(config);
  return json{{"experiment", config.experiment},
              {"seed", config.seed},
              {"config", cfg},
              {"config_hash", hex64(fnv1a(cfg.dump()))},
              {"report_hash", hex64(fnv1a(report_to_json(report).dump()))},
              {"versions", library_versions()},
              {"outputs", json::array({"report.json", "rows.csv", "manifest.json"})}};
}

void write_outputs(const ExperimentConfig& config, const SuiteReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto put = [&](const char* name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (dir / name).string());
    f << text;
  };
  put("report.json", report_to_json(report).dump(2) + "\n");
  put("rows.csv", table_to_csv(report_table(report)));
  put("manifest.json", make_manifest(config, report).dump(2) + "\n");
  for (const auto& c : report.checks)
    if (c.details.contains("counterexample"))
      put(("counterexample_" + c.name + ".json").c_str(), c.details.at("counterexample").dump(2) + "\n");
}

TileFamily random_family(std::mt19937_64& rng, const RandomFamilyOptions& options) {
  std::uniform_int_distribution<int> count(1, options.max_tiles);
  std::uniform_int_distribution<int> scale(options.min_scale, 0);
  std::uniform_real_distribution<double> xi(0.0, 8.0);
  std::bernoulli_distribution fresh(0.3);
  std::array<std::vector<double>, 3> pool;
  for (auto& p : pool)
    for (int k = 0; k < options.frequency_pool; ++k) p.push_back(xi(rng));
  std::uniform_int_distribution<int> pick(0, options.frequency_pool - 1);
  const int n = count(rng);
  std::set<std::tuple<int, std::int64_t, std::int64_t, std::int64_t, std::int64_t>> seen;
  std::vector<TriTile> members;
  for (int k = 0; k < n; ++k) {
    const int s = scale(rng);
    std::uniform_int_distribution<std::int64_t> index(0, (std::int64_t{1} << -s) - 1);
    const std::int64_t idx = index(rng);
    std::array<DyadicInterval, 3> f;
    for (std::size_t t = 0; t < 3; ++t) {
      const double x = fresh(rng) ? xi(rng) : pool[t][static_cast<std::size_t>(pick(rng))];
      f[t] = DyadicInterval{-s, static_cast<std::int64_t>(std::floor(std::ldexp(x, s))), Shift::zero};
    }
    if (!seen.emplace(s, idx, f[0].index, f[1].index, f[2].index).second) continue;
    members.emplace_back(static_cast<TileId>(members.size() + 1), DyadicInterval{s, idx, Shift::zero}, f);
  }
  return TileFamily(std::move(members), {Shift::zero, Shift::zero, Shift::zero});
}

CoeffSequence random_coeffs(std::mt19937_64& rng, const TileFamily& family, int component, double zero_probability) {
  std::normal_distribution<double> g;
  std::bernoulli_distribution zero(zero_probability);
  CoeffSequence c;
  c.component = component;
  for (const auto& p : family.members()) {
    const double re = g(rng), im = g(rng);
    c.values[p.id()] = zero(rng) ? Complex{} : Complex{re, im};
  }
  return c;
}

std::pair<TileFamily, Tree> random_tree(std::mt19937_64& rng, int max_tiles) {
  std::uniform_int_distribution<int> type(1, 3);
  std::uniform_int_distribution<std::int64_t> band(0, 7);
  std::uniform_int_distribution<int> count(1, max_tiles);
  std::uniform_int_distribution<int> scale(-3, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int t = type(rng);
  const TreeTop top{DyadicInterval{0, 0, Shift::zero}, DyadicInterval{0, band(rng), Shift::zero}, t, false};
  const int n = count(rng);
  std::set<std::tuple<int, std::int64_t, std::int64_t, std::int64_t, std::int64_t>> seen;
  std::vector<TriTile> members;
  for (int k = 0; k < n; ++k) {
    const int s = scale(rng);
    std::uniform_int_distribution<std::int64_t> index(0, (std::int64_t{1} << -s) - 1);
    const std::int64_t idx = index(rng);
    std::array<DyadicInterval, 3> f;
    for (int c = 1; c <= 3; ++c) {
      // Component t nests around omega_T, the others are free.
      const double x = c == t ? static_cast<double>(top.freq.index) + unit(rng) : 8.0 * unit(rng);
      f[static_cast<std::size_t>(c - 1)] =
          DyadicInterval{-s, static_cast<std::int64_t>(std::floor(std::ldexp(x, s))), Shift::zero};
    }
    if (!seen.emplace(s, idx, f[0].index, f[1].index, f[2].index).second) continue;
    members.emplace_back(static_cast<TileId>(members.size() + 1), DyadicInterval{s, idx, Shift::zero}, f);
  }
  TileFamily family(std::move(members), {Shift::zero, Shift::zero, Shift::zero});
  return {family, Tree{top, tree_members(family, top)}};
}

std::vector<WeightedInterval> random_intervals(std::mt19937_64& rng, int max_intervals) {
  std::uniform_int_distribution<int> count(1, max_intervals);
  std::uniform_int_distribution<int> scale(-5, 0);
  std::normal_distribution<double> g;
  std::set<std::pair<int, std::int64_t>> seen;
  std::vector<WeightedInterval> out;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) {
    const int s = scale(rng);
    std::uniform_int_distribution<std::int64_t> index(0, (std::int64_t{1} << -s) - 1);
    const std::int64_t idx = index(rng);
    const double re = g(rng), im = g(rng);
    if (!seen.emplace(s, idx).second) continue;
    out.push_back(WeightedInterval{DyadicInterval{s, idx, Shift::zero}.realize(), Complex{re, im}});
  }
  return out;
}

json coeffs_to_json(const CoeffSequence& c) {
  json values = json::array();
  for (const auto& [id, v] : c.values) values.push_back(json::array({id, v.real(), v.imag()}));
  return json{{"component", c.component}, {"values", std::move(values)}};
}

CoeffSequence coeffs_from_json(const json& j) {
  CoeffSequence c;
  c.component = j.at("component").get<int>();
  for (const auto& v : j.at("values")) c.values[v.at(0).get<TileId>()] = Complex{v.at(1).get<double>(), v.at(2).get<double>()};
  return c;
}

}  // namespace tiletide
