#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tiletide/error.hpp"
#include "tiletide/experiments.hpp"
#include "tiletide/family_io.hpp"

using namespace tiletide;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tiletide_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, UnknownKeyIsRejected) {
  EXPECT_THROW(config_from_json(json{{"experiment", "hull"}, {"sead", 3}}), ConfigError);
  EXPECT_THROW(config_from_json(json{{"size_trials", "many"}}), ConfigError);
}

TEST(Config, RoundTripsThroughJson) {
  ExperimentConfig c;
  c.experiment = "oracles";
  c.seed = 0x1234567890ULL;
  c.size_trials = 7;
  c.alpha = make_tuple(Rational(3, 10), Rational(3, 10), Rational(7, 10), Rational(-3, 10));
  c.dilations = {0, 2};
  c.tolerances["scaling_band"] = 50.0;
  const json j = config_to_json(c);
  const ExperimentConfig back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.alpha, c.alpha);
  EXPECT_EQ(back.tolerance("scaling_band", 100.0), 50.0);
  EXPECT_EQ(back.tolerance("absent", 3.0), 3.0);
}

TEST(Config, CoarseGridIsAConfigError) {
  ExperimentConfig c = config_from_json(json{{"experiment", "scaling"}});
  c.grid.samples_per_unit = 4;
  EXPECT_THROW(run_suite(c), ConfigError);
}

TEST(Hashing, Fnv1aReferenceVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Manifest, HashesTheEmbeddedConfig) {
  ExperimentConfig c;
  c.experiment = "hull";
  const SuiteReport r = run_suite(c);
  const json m = make_manifest(c, r);
  EXPECT_EQ(m.at("config_hash"), hex64(fnv1a(m.at("config").dump())));
  EXPECT_EQ(m.at("report_hash"), hex64(fnv1a(report_to_json(r).dump())));
  EXPECT_EQ(config_from_json(m.at("config")).experiment, "hull");
}

TEST(Determinism, SameSeedSameBytes) {
  ExperimentConfig c;
  c.experiment = "families";
  c.seed = 5;
  const auto a = scratch("det_a"), b = scratch("det_b");
  write_outputs(c, run_suite(c), a);
  write_outputs(c, run_suite(c), b);
  for (const char* f : {"report.json", "rows.csv", "manifest.json"}) {
    ASSERT_TRUE(std::filesystem::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Determinism, SeedsGiveDistinctInstances) {
  std::set<std::string> seen;
  for (std::uint64_t s = 1; s <= 10; ++s) {
    ExperimentConfig c;
    c.seed = s;
    auto rng = check_rng(c, "size_oracle");
    seen.insert(family_to_json(random_family(rng, RandomFamilyOptions{})).dump());
  }
  EXPECT_EQ(seen.size(), 10u);

  ExperimentConfig c;
  auto r1 = check_rng(c, "size_oracle"), r2 = check_rng(c, "energy_soundness");
  EXPECT_NE(r1(), r2());
}

TEST(Counterexample, RoundTripAndReplay) {
  ExperimentConfig c;
  auto rng = check_rng(c, "replay");
  const TileFamily f = random_family(rng, RandomFamilyOptions{8});
  const CoeffSequence a = random_coeffs(rng, f, 1, 0.2);
  json cs = json::array({coeffs_to_json(a)});
  for (const char* kind : {"size", "energy", "partition"}) {
    const json ce{{"kind", kind}, {"family", family_to_json(f)}, {"coeffs", cs}, {"index", 1}, {"top_depth", 1}};
    const json back = json::parse(ce.dump(2));
    EXPECT_EQ(back, ce);
    EXPECT_EQ(family_to_json(family_from_json(back.at("family"))), ce.at("family"));
    const CheckResult r = replay_counterexample(back);
    EXPECT_TRUE(r.passed) << kind << " " << r.measured;
  }
  EXPECT_THROW(replay_counterexample(json{{"kind", "bogus"}, {"family", family_to_json(f)}, {"coeffs", cs}, {"index", 1}}),
               ConfigError);
}

TEST(Report, KnownConflictIsExemptFromVerdict) {
  SuiteReport r;
  r.checks.push_back(CheckResult{"a", true});
  EXPECT_TRUE(r.passed());
  CheckResult conflict{"b", false};
  conflict.known_conflict = true;
  r.checks.push_back(conflict);
  EXPECT_TRUE(r.passed());
  r.checks.push_back(CheckResult{"c", false});
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(check_to_json(conflict).at("known_conflict"), true);
}

TEST(Report, CsvQuotesAndRows) {
  Table t{{"name", "value"}, {{"x,y", "1"}, {"plain", "2"}}};
  EXPECT_EQ(table_to_csv(t), "name,value\n\"x,y\",1\nplain,2\n");
}
