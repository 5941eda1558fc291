#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tiletide/error.hpp"
#include "tiletide/experiments.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "tiletide-out";
  std::string replay;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tiletide::ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw tiletide::ConfigError(path + ": " + e.what());
  }
}

void print_checks(const tiletide::SuiteReport& report) {
  for (const auto& c : report.checks) {
    const char* verdict = c.passed ? "PASS" : (c.known_conflict ? "FAIL (known conflict)" : "FAIL");
    std::printf("%-32s %-22s measured %-24s %s %s\n", c.name.c_str(), verdict,
                tiletide::format_double(c.measured).c_str(), c.comparison.c_str(),
                tiletide::format_double(c.tolerance).c_str());
  }
}

int run(const std::string& experiment, const Options& o) {
  nlohmann::json j = o.config_path.empty() ? nlohmann::json::object() : load_json(o.config_path);
  // A manifest replays its embedded configuration.
  if (j.contains("config_hash") && j.contains("config")) {
    const std::string expected = j.at("config_hash").get<std::string>();
    j = j.at("config");
    if (tiletide::hex64(tiletide::fnv1a(j.dump())) != expected)
      throw tiletide::ConfigError("manifest configuration does not match its hash");
  }
  j["experiment"] = experiment;
  if (o.seed) j["seed"] = *o.seed;
  if (!o.replay.empty()) j["replay"] = o.replay;
  const tiletide::ExperimentConfig config = tiletide::config_from_json(j);

  if (!config.replay.empty()) {
    const tiletide::CheckResult r = tiletide::replay_counterexample(load_json(config.replay));
    tiletide::SuiteReport rep{"replay", {r}, std::nullopt, nlohmann::json::object()};
    print_checks(rep);
    std::cout << r.details.dump() << "\n";
    return r.passed ? kExitPass : kExitFail;
  }

  const tiletide::SuiteReport report = tiletide::run_suite(config);
  tiletide::write_outputs(config, report, o.out);
  print_checks(report);
  std::printf("%s: %s (outputs in %s)\n", report.suite.c_str(), report.passed() ? "pass" : "fail", o.out.c_str());
  return report.passed() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tiletide: phase-space tile experiments"};
  app.require_subcommand(1);
  Options options;
  std::string chosen;

  const auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", options.config_path, "flat JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", options.seed, "overrides the configured seed");
    sub->add_option("--out", options.out, "output directory")->capture_default_str();
    sub->callback([&chosen, name] { chosen = name; });
    return sub;
  };
  add("identities", "cutoff, coefficient, Taylor, packet and operator identity checks");
  add("oracles", "size, energy, partition, tree and BMO oracle comparisons")
      ->add_option("--replay", options.replay, "re-evaluate a serialized counterexample")
      ->check(CLI::ExistingFile);
  add("scaling", "restricted weak-type scaling experiment");
  add("hull", "exact exponent hull calculus");
  add("eval", "one-off operator and model form evaluations");
  add("families", "generate and serialize the model tri-tile families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    return run(chosen, options);
  } catch (const tiletide::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
}
