#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tiletide/decomp.hpp"
#include "tiletide/error.hpp"
#include "tiletide/experiments.hpp"
#include "tiletide/family_io.hpp"

namespace tiletide {
namespace {

using nlohmann::json;

constexpr double kRelSlack = 1e-12;

CheckResult at_most(std::string name, double measured, double tolerance, json details = json::object()) {
  return CheckResult{std::move(name), measured <= tolerance, measured, tolerance, "<=", false, std::move(details)};
}

CheckResult at_least(std::string name, double measured, double tolerance, json details = json::object()) {
  return CheckResult{std::move(name), measured >= tolerance, measured, tolerance, ">=", false, std::move(details)};
}

TopOptions tops_of(const ExperimentConfig& c) { return TopOptions{c.top_depth}; }

GridSpec operator_grid() { return make_grid(-8.0, std::ldexp(1.0, -10), 16 * 1024); }

GridFunction indicator(const GridSpec& g, double a, double b) {
  return GridFunction::sample(g, [=](double x) { return Complex(x >= a && x <= b ? 1.0 : 0.0); });
}

GridFunction gaussian(const GridSpec& g, double c, double w) {
  return GridFunction::sample(g, [=](double x) { return Complex(std::exp(-(x - c) * (x - c) / (w * w))); });
}

ModelFamilyParams random_model_params(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> gap(11, 12), pmin(-2, 0), width(1, 2), start(0, 8), fband(-3, 2), off(4, 6);
  ModelFamilyParams p;
  p.scale_gap = gap(rng);
  p.p_scale_min = pmin(rng);
  p.p_scale_max = std::uniform_int_distribution<int>(p.p_scale_min, 0)(rng);
  const int a = start(rng);
  p.spatial_window = Interval{Rational(a), Rational(a + width(rng))};
  const long side = 1L << -p.p_scale_min;
  const long b = fband(rng);
  p.frequency_window = Interval{Rational(b * side), Rational((b + 1) * side)};
  p.p_offset = 2 * off(rng);
  p.q_offset = 2 * off(rng);
  return p;
}

json params_to_json(const ModelFamilyParams& p) {
  return json{{"scale_gap", p.scale_gap},
              {"p_scale_min", p.p_scale_min},
              {"p_scale_max", p.p_scale_max},
              {"spatial_window", {to_string(p.spatial_window.lo), to_string(p.spatial_window.hi)}},
              {"frequency_window", {to_string(p.frequency_window.lo), to_string(p.frequency_window.hi)}},
              {"p_offset", p.p_offset},
              {"q_offset", p.q_offset}};
}

// ---- oracle evaluations shared with replay ----

struct SizeVerdict {
  double formula = 0.0, exhaustive = 0.0;
  bool ok() const { return std::abs(formula - exhaustive) <= kRelSlack * std::max(1.0, exhaustive); }
};

SizeVerdict size_verdict(const TileFamily& f, const CoeffSequence& a, int j, const TopOptions& tops) {
  return {size(f, a, j, SizeOptions{tops, {}}), size_exhaustive(f, a, j, SizeOptions{tops, {}})};
}

struct EnergyVerdict {
  double greedy = 0.0, exhaustive = 0.0;
  bool witness_ok = true;
  bool ok() const { return greedy <= exhaustive * (1.0 + kRelSlack) && witness_ok; }
};

EnergyVerdict energy_verdict(const TileFamily& f, const CoeffSequence& a, int t, const TopOptions& tops) {
  EnergyVerdict v;
  const EnergyResult ex = energy(f, a, t, EnergyMode::exhaustive, tops);
  v.exhaustive = ex.value;
  v.greedy = energy(f, a, t, EnergyMode::greedy, tops).value;
  if (ex.witness) v.witness_ok = check_forest(f, a, *ex.witness, tops).ok();
  return v;
}

// Violations of the partition contract: coverage, disjointness, tree shape, caps, empty high levels.
int partition_violations(const TileFamily& f, const CoeffSequence& a, int t, const PartitionReport& r,
                         const TopOptions& tops) {
  int bad = 0;
  std::multiset<TileId> seen(r.discarded.begin(), r.discarded.end());
  for (TileId id : r.discarded)
    if (std::norm(a.at(id)) != 0.0) ++bad;
  const double fsize = size(f, a, t, SizeOptions{tops, {}});
  for (const auto& level : r.levels) {
    if (std::ldexp(1.0, level.n) > fsize * (1.0 + kRelSlack)) ++bad;
    for (const auto& tree : level.trees) {
      if (tree.type() == t || !is_tree(f, tree)) ++bad;
      seen.insert(tree.members.begin(), tree.members.end());
      const double s = size(f.subfamily(tree.members), a, t, SizeOptions{tops, {tree.top}});
      if (s > std::ldexp(1.0, level.n + 1) * (1.0 + kRelSlack)) ++bad;
    }
  }
  std::multiset<TileId> all;
  for (const auto& p : f.members()) all.insert(p.id());
  if (seen != all) ++bad;
  return bad;
}

json instance_json(const std::string& kind, const TileFamily& f, const std::vector<CoeffSequence>& coeffs, int index,
                   const TopOptions& tops) {
  json cs = json::array();
  for (const auto& c : coeffs) cs.push_back(coeffs_to_json(c));
  return json{{"kind", kind}, {"family", family_to_json(f)}, {"coeffs", cs}, {"index", index}, {"top_depth", tops.ancestor_depth}};
}

// Small grid for packet coefficients of families inside [0, 1] with frequencies below 16.
GridSpec packet_grid() { return make_grid(-3.5, std::ldexp(1.0, -6), 512); }

// Union of k disjoint intervals with endpoints on the 1/16 lattice inside [lo, hi).
std::vector<std::pair<double, double>> random_set(std::mt19937_64& rng, double lo, double hi, int k) {
  const int cells = static_cast<int>((hi - lo) * 16.0);
  std::uniform_int_distribution<int> pick(0, cells);
  std::set<int> cuts;
  while (static_cast<int>(cuts.size()) < 2 * k) cuts.insert(pick(rng));
  std::vector<int> c(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < c.size(); i += 2) out.emplace_back(lo + c[i] / 16.0, lo + c[i + 1] / 16.0);
  return out;
}

}  // namespace

// ---- identities ----

CheckResult check_telescoping(const ExperimentConfig& config) {
  const CutoffProfile alpha = CutoffProfile::plateau(config.plateau_order);
  double worst = 0.0;
  constexpr int kPoints = 10000;
  for (int m = 0; m < kPoints; ++m) {
    const double s = -4.0 + 8.0 * (m + 0.5) / kPoints;
    for (int k1 = -4; k1 <= 4; ++k1) {
      // Past 2^(N+1)|s| > 2 the tail alpha(2^(N+1) s) vanishes.
      double sum = 0.0;
      for (int i = k1; std::ldexp(std::abs(s), i) <= 2.0; ++i) sum += theta_scaled(alpha, i, s);
      worst = std::max(worst, std::abs(alpha(std::ldexp(s, k1)) - sum));
    }
  }
  return at_most("telescoping", worst, config.tolerance("telescoping", 1e-12),
                 json{{"points", kPoints}, {"k1", {-4, 4}}, {"plateau_order", config.plateau_order}});
}

CheckResult check_partition_of_unity(const ExperimentConfig& config) {
  std::vector<double> pts(10000);
  for (std::size_t m = 0; m < pts.size(); ++m) pts[m] = -1.0 + 2.0 * (static_cast<double>(m) + 0.5) / pts.size();
  return at_most("partition_of_unity", partition_check(pts), config.tolerance("partition_of_unity", 1e-10),
                 json{{"points", pts.size()}});
}

namespace {

CoeffMatrix coefficient_matrix(const ExperimentConfig& config, int i, Shift sigma) {
  const SquareSpec q{-i - 3, 1000, 1010, sigma};
  return fourier_coeffs(q, i, CutoffProfile::plateau(config.plateau_order), default_square_window(),
                        default_square_window());
}

}  // namespace

CheckResult check_coefficient_decay(const ExperimentConfig& config) {
  double slope = -std::numeric_limits<double>::infinity();
  json per = json::array();
  for (Shift s : {Shift::zero, Shift::third, Shift::two_thirds}) {
    const CoeffMatrix m = coefficient_matrix(config, 4, s);
    const double e = m.decay_exponent(4, 32);
    slope = std::max(slope, -e);
    per.push_back(json{{"shift", static_cast<int>(s)}, {"slope", -e}, {"points", m.points}});
  }
  return at_most("coefficient_decay", slope, config.tolerance("coefficient_decay", -6.0), json{{"shifts", per}});
}

CheckResult check_coefficient_scale_invariance(const ExperimentConfig& config) {
  double worst = 0.0;
  for (Shift s : {Shift::zero, Shift::third, Shift::two_thirds})
    for (int i : {2, 3, 4}) {
      const CoeffMatrix a = coefficient_matrix(config, i, s);
      const CoeffMatrix b = coefficient_matrix(config, i + 5, s);
      for (std::size_t k = 0; k < a.values.size(); ++k) worst = std::max(worst, std::abs(a.values[k] - b.values[k]));
    }
  return at_most("coefficient_scale_invariance", worst, config.tolerance("coefficient_scale", 1e-8),
                 json{{"scale_pairs", {{2, 7}, {3, 8}, {4, 9}}}});
}

CheckResult check_coefficient_reconstruction(const ExperimentConfig& config) {
  double worst = 0.0;
  const CutoffProfile alpha = CutoffProfile::plateau(config.plateau_order);
  for (Shift s : {Shift::zero, Shift::third, Shift::two_thirds}) {
    const CoeffMatrix m = coefficient_matrix(config, 4, s);
    for (int a = 0; a <= 40; ++a)
      for (int b = 0; b <= 40; ++b) {
        const double e1 = 0.1 + 0.8 * a / 40.0, e2 = 0.1 + 0.8 * b / 40.0;
        const double ref =
            coefficient_integrand(m.square, 4, alpha, default_square_window(), default_square_window(), e1, e2);
        worst = std::max(worst, std::abs(m.reconstruct(e1, e2) - ref));
      }
  }
  return at_most("coefficient_reconstruction", worst, config.tolerance("coefficient_reconstruction", 1e-8),
                 json{{"window", {0.1, 0.9}}, {"n_max", 32}});
}

CheckResult check_taylor_reconstruction(const ExperimentConfig& config) {
  const CutoffProfile beta = CutoffProfile::plateau(config.plateau_order);
  double worst = 0.0;
  for (int gap : {12, 16})
    for (int order : {0, 1, 2}) worst = std::max(worst, taylor_carve(beta, 2 + gap, 2, order).reconstruction_residual());
  return at_most("taylor_reconstruction", worst, config.tolerance("taylor_reconstruction", 1e-9),
                 json{{"gaps", {12, 16}}, {"orders", {0, 1, 2}}});
}

CheckResult check_taylor_remainder_scaling(const ExperimentConfig& config) {
  const CutoffProfile beta = CutoffProfile::plateau(config.plateau_order);
  double worst = 1.0;
  json per = json::array();
  for (int order : {0, 1, 2}) {
    const double r12 = taylor_carve(beta, 14, 2, order).remainder_sup();
    const double r16 = taylor_carve(beta, 18, 2, order).remainder_sup();
    const double expected = std::ldexp(1.0, 4 * (order + 1));
    const double q = (r12 / r16) / expected;
    worst = std::max({worst, q, 1.0 / q});
    per.push_back(json{{"order", order}, {"ratio", r12 / r16}, {"expected", expected}});
  }
  return at_most("taylor_remainder_scaling", worst, config.tolerance("taylor_remainder_factor", 2.0),
                 json{{"orders", per}});
}

CheckResult check_packet_adaptedness(const ExperimentConfig& config) {
  const ModelFamilies fam = generate_model_families(config.family);
  const GridSpec grid = model_grid(fam, config.grid);
  double worst_c = 0.0, worst_leak = 0.0, worst_norm = 0.0;
  for (const TileFamily* f : {&fam.p_family, &fam.q_family}) {
    const TriTile& rep = f->members().front();
    for (int t = 1; t <= 3; ++t) {
      const GridFunction phi = wave_packet(grid, rep.tile(t));
      worst_c = std::max(worst_c, verify_adapted(phi, rep.tile(t), 2.0).constant);
      worst_leak = std::max(worst_leak, spectral_leakage(phi, rep.tile(t)));
      worst_norm = std::max(worst_norm, std::abs(l2_norm(phi) - 1.0));
    }
  }
  const double limit = config.tolerance("packet_adaptedness", 100.0);
  CheckResult r = at_most("packet_adaptedness", worst_c, limit,
                          json{{"M", 2.0}, {"leakage", worst_leak}, {"norm_error", worst_norm}, {"grid_n", grid.n}});
  r.passed = r.passed && worst_leak <= 1e-8 && worst_norm <= 1e-8;
  return r;
}

CheckResult check_model_rank1(const ExperimentConfig& config) {
  auto rng = check_rng(config, "model_rank1");
  int failures = 0;
  json first = nullptr;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelFamilyParams p = random_model_params(rng);
    const ModelFamilies fam = generate_model_families(p);
    for (const TileFamily* f : {&fam.p_family, &fam.q_family})
      if (!is_rank1(*f).rank1) {
        ++failures;
        if (first.is_null()) first = params_to_json(p);
      }
  }
  return at_most("model_rank1", failures, 0, json{{"parameterizations", 100}, {"first_failure", first}});
}

CheckResult check_split_sparse(const ExperimentConfig& config) {
  auto rng = check_rng(config, "model_rank1");
  int failures = 0;
  std::size_t parts = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelFamilies fam = generate_model_families(random_model_params(rng));
    for (const TileFamily* f : {&fam.p_family, &fam.q_family}) {
      const SparseSplit split = split_sparse(*f);
      std::size_t covered = 0;
      for (const auto& part : split.parts) {
        covered += part.size();
        if (!is_sparse(part).sparse) ++failures;
      }
      if (covered != f->size()) ++failures;
      parts += split.parts.size();
    }
  }
  return at_most("split_sparse", failures, 0, json{{"parameterizations", 100}, {"parts", parts}});
}

CheckResult check_direct_constants(const ExperimentConfig& config) {
  const GridSpec g = operator_grid();
  const GridFunction one = GridFunction::sample(g, [](double) { return Complex(1.0); });
  const double v = direct_Tstar(one, one, one, 0.0, ScaleRange{-4, 0});
  return at_most("direct_constants", std::abs(v - 4.0), config.tolerance("direct_constants", 1e-6),
                 json{{"value", v}, {"x", 0.0}, {"k_range", {-4, 0}}});
}

CheckResult check_direct_indicators(const ExperimentConfig& config) {
  const GridSpec g = operator_grid();
  const GridFunction ind = indicator(g, 0.0, 1.0);
  const double v = direct_Tstar(ind, ind, ind, 0.5, ScaleRange{-6, 0});
  return at_most("direct_indicators", std::abs(v - 4.0), config.tolerance("direct_indicators", 1e-3),
                 json{{"value", v}, {"x", 0.5}, {"k_range", {-6, 0}}});
}

CheckResult check_quadrature_halving(const ExperimentConfig& config) {
  const GridSpec g = operator_grid();
  const GridSpec fine = make_grid(g.x0, g.dx / 2.0, g.n * 2);
  double worst = 0.0;
  for (double x : {-0.7, 0.0, 0.4})
    for (int k1 : {-2, 0, 1})
      for (int k2 : {-1, 0}) {
        const auto f1 = gaussian(g, 0.3, 1.0), f2 = gaussian(g, -0.2, 0.7), f3 = gaussian(g, 0.0, 1.5);
        const double base = direct_T(f1, f2, f3, k1, k2, x, QuadratureOptions{129});
        const double halved = direct_T(f1, f2, f3, k1, k2, x, QuadratureOptions{257});
        const double refined = direct_T(gaussian(fine, 0.3, 1.0), gaussian(fine, -0.2, 0.7), gaussian(fine, 0.0, 1.5),
                                        k1, k2, x, QuadratureOptions{257});
        worst = std::max({worst, std::abs(halved - base) / base, std::abs(refined - halved) / halved});
      }
  return at_most("quadrature_halving", worst, config.tolerance("quadrature_halving", 0.01));
}

CheckResult check_majorization(const ExperimentConfig& config) {
  auto rng = check_rng(config, "majorization");
  const GridSpec g = operator_grid();
  const SmoothingKernel w = SmoothingKernel::from_profile(CutoffProfile::autocorrelation(config.bump));
  const Majorization mj = majorization_constant(w, w);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ScaleRange range{-3, 0};
  double worst = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng), c = u(rng), x = u(rng);
    const auto f1 = indicator(g, a, a + 1.0 + 0.5 * u(rng));
    const auto f2 = gaussian(g, b, 0.5 + 0.25 * (u(rng) + 1.0));
    const auto f3 = indicator(g, c - 0.5, c + 0.5);
    const double T = direct_Tstar(f1, f2, f3, x, range);
    const double S = smoothed_Tstar(f1, f2, f3, x, w, w, range.shifted(mj.c));
    if (T > 0.0) {
      const double q = mj.constant * S / T;
      worst = std::min(worst, q);
      if (q < 1.0) ++violations;
    }
  }
  CheckResult r = at_least("majorization", worst, config.tolerance("majorization", 1.0),
                           json{{"c", mj.c}, {"constant", mj.constant}, {"min_weight", mj.min_weight},
                                {"kernel_radius", w.radius}, {"samples", 100}, {"violations", violations}});
  return r;
}

// ---- oracles ----

CheckResult check_size_oracle(const ExperimentConfig& config) {
  auto rng = check_rng(config, "size_oracle");
  const TopOptions tops = tops_of(config);
  int mismatches = 0;
  double worst = 0.0;
  json counterexample = nullptr;
  for (int trial = 0; trial < config.size_trials; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{config.size_max_tiles, -2, 3});
    const CoeffSequence a = random_coeffs(rng, f, 1, 0.1);
    for (int j = 1; j <= 3; ++j) {
      const SizeVerdict v = size_verdict(f, a, j, tops);
      worst = std::max(worst, std::abs(v.formula - v.exhaustive) / std::max(1.0, v.exhaustive));
      if (!v.ok()) {
        ++mismatches;
        if (counterexample.is_null()) counterexample = instance_json("size", f, {a}, j, tops);
      }
    }
  }
  CheckResult r = at_most("size_oracle", worst, config.tolerance("size_oracle", kRelSlack),
                          json{{"trials", config.size_trials}, {"mismatches", mismatches}});
  r.passed = r.passed && mismatches == 0;
  if (!counterexample.is_null()) r.details["counterexample"] = counterexample;
  return r;
}

CheckResult check_energy_soundness(const ExperimentConfig& config) {
  auto rng = check_rng(config, "energy_soundness");
  const TopOptions tops = tops_of(config);
  int failures = 0;
  double min_ratio = std::numeric_limits<double>::infinity();
  json counterexample = nullptr;
  for (int trial = 0; trial < config.energy_trials; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{config.energy_max_tiles, -2, 3});
    const CoeffSequence a = random_coeffs(rng, f, 1, 0.1);
    for (int t = 1; t <= 2; ++t) {
      const EnergyVerdict v = energy_verdict(f, a, t, tops);
      if (v.exhaustive > 0.0) min_ratio = std::min(min_ratio, v.greedy / v.exhaustive);
      if (!v.ok()) {
        ++failures;
        if (counterexample.is_null()) counterexample = instance_json("energy", f, {a}, t, tops);
      }
    }
  }
  CheckResult r = at_most("energy_soundness", failures, 0,
                          json{{"trials", config.energy_trials},
                               {"min_greedy_ratio", min_ratio},
                               {"ratio_floor", config.tolerance("energy_ratio_floor", 0.25)}});
  r.passed = r.passed && min_ratio >= config.tolerance("energy_ratio_floor", 0.25);
  if (!counterexample.is_null()) r.details["counterexample"] = counterexample;
  return r;
}

CheckResult check_partition_lemma(const ExperimentConfig& config) {
  auto rng = check_rng(config, "partition_lemma");
  const TopOptions tops = tops_of(config);
  int failures = 0;
  std::size_t levels = 0;
  json counterexample = nullptr;
  for (int trial = 0; trial < config.partition_trials; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{config.partition_max_tiles, -2, 3});
    const CoeffSequence a = random_coeffs(rng, f, 1, 0.1);
    for (int t = 1; t <= 3; ++t) {
      const PartitionReport rep = partition_forests(f, a, t, PartitionOptions{tops, config.mu, 0.0});
      levels += rep.levels.size();
      const int bad = partition_violations(f, a, t, rep, tops);
      if (bad > 0) {
        failures += bad;
        if (counterexample.is_null()) counterexample = instance_json("partition", f, {a}, t, tops);
      }
    }
  }
  CheckResult r = at_most("partition_lemma", failures, 0, json{{"trials", config.partition_trials}, {"levels", levels}});
  if (!counterexample.is_null()) r.details["counterexample"] = counterexample;
  return r;
}

CheckResult check_partition_t3_bound(const ExperimentConfig& config) {
  auto rng = check_rng(config, "partition_t3");
  const TopOptions tops = tops_of(config);
  const GridSpec g = packet_grid();
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < config.partition_trials; ++trial) {
    const TileFamily f = random_family(rng, RandomFamilyOptions{config.partition_max_tiles, -2, 3});
    const auto e4 = random_set(rng, 0.0, 1.0, 1 + trial % 3);
    const GridSet set = GridSet::from_intervals(g, e4);
    const Spectrum s4 = forward_dft(set.indicator());
    CoeffSequence a3;
    a3.component = 3;
    for (const auto& p : f.members()) a3.values[p.id()] = make_wave_packet(g, p.tile(3)).pair_with(s4);
    const PartitionReport rep = partition_forests(f, a3, 3, PartitionOptions{tops, config.mu, set.measure()});
    failures += partition_violations(f, a3, 3, rep, tops);
    worst = std::max(worst, rep.max_bound_ratio);
  }
  CheckResult r = at_most("partition_t3_bound", worst, config.tolerance("partition_t3_constant", 4.0),
                          json{{"trials", config.partition_trials}, {"mu", config.mu}, {"partition_failures", failures}});
  r.passed = r.passed && failures == 0;
  return r;
}

CheckResult check_single_tree(const ExperimentConfig& config) {
  auto rng = check_rng(config, "single_tree");
  const TopOptions tops = tops_of(config);
  int violations = 0;
  double worst = 0.0;
  json counterexample = nullptr;
  for (int trial = 0; trial < config.tree_trials; ++trial) {
    const auto [f, tree] = random_tree(rng, config.tree_max_tiles);
    const CoeffSequence a1 = random_coeffs(rng, f, 1, 0.1);
    const CoeffSequence a2 = random_coeffs(rng, f, 2, 0.1);
    const CoeffSequence a3 = random_coeffs(rng, f, 3, 0.1);
    const TreeEstimate e = single_tree_estimate(f, tree, a1, a2, a3, tops);
    if (e.rhs > 0.0) worst = std::max(worst, e.lhs / e.rhs);
    if (e.lhs > e.rhs * (1.0 + kRelSlack)) {
      ++violations;
      if (counterexample.is_null()) {
        counterexample = instance_json("tree", f, {a1, a2, a3}, tree.type(), tops);
        counterexample["top"] = {{"spatial", dyadic_to_json(tree.top.spatial)}, {"freq", dyadic_to_json(tree.top.freq)}};
      }
    }
  }
  CheckResult r = at_most("single_tree", worst, 1.0 + kRelSlack,
                          json{{"trials", config.tree_trials}, {"violations", violations}});
  if (!counterexample.is_null()) r.details["counterexample"] = counterexample;
  return r;
}

CheckResult check_john_nirenberg(const ExperimentConfig& config) {
  auto rng = check_rng(config, "john_nirenberg");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int trial = 0; trial < config.jn_trials; ++trial) {
    const double r = jn_ratio(random_intervals(rng, config.jn_max_intervals), 1.0, 2.0);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double band = config.tolerance("jn_band", 8.0);
  return at_most("john_nirenberg", std::max(hi, 1.0 / lo), band,
                 json{{"trials", config.jn_trials}, {"min_ratio", lo}, {"max_ratio", hi}});
}

// ---- hull ----

std::vector<CheckResult> check_hull_calculus(const ExperimentConfig& config) {
  (void)config;
  std::vector<CheckResult> out;
  const HullSpec hull = HullSpec::twelve_point();

  int bad_sums = 0;
  for (const auto& v : hull.vertices())
    if (tuple_sum(v) != Rational(1)) ++bad_sums;
  out.push_back(at_most("hull_vertex_sums", bad_sums, 0, json{{"vertices", hull.vertices().size()}}));

  const Rational h(1, 2);
  const ExponentTuple mid = make_tuple(h, h, h, -h);
  const HullMembership m = hull_contains(hull, mid, true, 0.0);
  CheckResult interior{"hull_interior_point", m.strict, to_double(m.margin), 0.0, ">", false,
                       json{{"point", tuple_to_json(mid)}, {"margin", to_string(m.margin)}, {"inside", m.inside}}};
  if (!hull.facets().empty()) {
    const Facet& f = hull.facets()[m.binding_facet];
    interior.details["binding_facet"] = {{"normal", {to_string(f.normal[0]), to_string(f.normal[1]), to_string(f.normal[2])}},
                                         {"offset", to_string(f.offset)}};
  }
  // The point lies on the facets a1 + a2 + a3 <= 3/2 and a1 + a2 <= 1, so strict interiority cannot hold.
  if (!m.strict) interior.known_conflict = true;
  out.push_back(interior);

  const std::vector<ExponentTuple> four = {
      make_tuple(Rational(1), h, Rational(1), Rational(-3, 2)), make_tuple(Rational(1), h, Rational(-3, 2), Rational(1)),
      make_tuple(Rational(1), -h, Rational(0), h), make_tuple(Rational(1), -h, h, Rational(0))};
  const std::array<Rational, 4> weights{Rational(3, 10), Rational(1, 5), Rational(1, 2), Rational(0)};
  ExponentTuple combo{};
  Rational wsum;
  for (std::size_t k = 0; k < 4; ++k) {
    wsum += weights[k];
    for (std::size_t c = 0; c < 4; ++c) combo[c] += weights[k] * four[k][c];
  }
  const ExponentTuple e1 = make_tuple(Rational(1), Rational(0), Rational(0), Rational(0));
  int off = 0;
  for (std::size_t c = 0; c < 4; ++c)
    if (combo[c] != e1[c]) ++off;
  out.push_back(at_most("hull_theta0_combination", off, 0,
                        json{{"combination", tuple_to_json(combo)},
                             {"weight_sum", to_string(wsum)},
                             {"theta_weight_sum", "1 - 4 theta"}}));

  const Rational eps(1, 100);
  const ExponentTuple target = make_tuple(1 - eps, eps / 3, eps / 3, eps / 3);
  const Decomposition d = convex_decompose(target, hull.vertices(), true);
  double min_coeff = 0.0;
  bool exact = d.feasible;
  if (d.feasible) {
    min_coeff = std::numeric_limits<double>::infinity();
    ExponentTuple back{};
    Rational s;
    for (std::size_t k = 0; k < d.coefficients.size(); ++k) {
      min_coeff = std::min(min_coeff, to_double(d.coefficients[k]));
      s += d.coefficients[k];
      for (std::size_t c = 0; c < 4; ++c) back[c] += d.coefficients[k] * hull.vertices()[k][c];
    }
    exact = back == target && s == Rational(1);
  }
  json coeffs = json::array();
  for (const auto& c : d.coefficients) coeffs.push_back(to_string(c));
  CheckResult strict{"hull_strict_epsilon", d.feasible && exact && min_coeff > 0.0, min_coeff, 0.0, ">", false,
                     json{{"target", tuple_to_json(target)}, {"coefficients", coeffs}, {"exact", exact}}};
  out.push_back(strict);
  return out;
}

// ---- suites ----

SuiteReport run_identity_suite(const ExperimentConfig& config) {
  SuiteReport r{"identities", {}, std::nullopt, json::object()};
  r.checks.push_back(check_telescoping(config));
  r.checks.push_back(check_partition_of_unity(config));
  r.checks.push_back(check_coefficient_decay(config));
  r.checks.push_back(check_coefficient_scale_invariance(config));
  r.checks.push_back(check_coefficient_reconstruction(config));
  r.checks.push_back(check_taylor_reconstruction(config));
  r.checks.push_back(check_taylor_remainder_scaling(config));
  r.checks.push_back(check_packet_adaptedness(config));
  r.checks.push_back(check_model_rank1(config));
  r.checks.push_back(check_split_sparse(config));
  r.checks.push_back(check_direct_constants(config));
  r.checks.push_back(check_direct_indicators(config));
  r.checks.push_back(check_quadrature_halving(config));
  r.checks.push_back(check_majorization(config));
  return r;
}

SuiteReport run_oracle_suite(const ExperimentConfig& config) {
  SuiteReport r{"oracles", {}, std::nullopt, json::object()};
  r.checks.push_back(check_size_oracle(config));
  r.checks.push_back(check_energy_soundness(config));
  r.checks.push_back(check_partition_lemma(config));
  r.checks.push_back(check_partition_t3_bound(config));
  r.checks.push_back(check_single_tree(config));
  r.checks.push_back(check_john_nirenberg(config));
  r.data["candidate_tops"] = {{"ancestor_depth", config.top_depth},
                              {"note", "size sup restricted to member and ancestor tops"}};
  return r;
}

SuiteReport run_hull_suite(const ExperimentConfig& config) {
  SuiteReport r{"hull", check_hull_calculus(config), std::nullopt, json::object()};
  const HullSpec twelve = HullSpec::twelve_point();
  const HullComparison cmp = compare_hulls(twelve, HullSpec::listed_points());
  json only = json::array();
  for (const auto& v : cmp.only_in_first) only.push_back(tuple_to_json(v));
  json facets = json::array();
  for (const auto& f : twelve.facets())
    facets.push_back({{"normal", {to_string(f.normal[0]), to_string(f.normal[1]), to_string(f.normal[2])}},
                      {"offset", to_string(f.offset)}});
  const Numerology n34 = numerology_34(make_tuple(Rational(3, 10), Rational(3, 10), Rational(7, 10), Rational(-3, 10)));
  r.data = {{"facets", facets},
            {"twelve_vs_listed", {{"identical", cmp.identical}, {"only_in_twelve", only}}},
            {"numerology_34_example", {{"accepted", n34.accepted}, {"a1", to_string(n34.a1)}, {"a2", to_string(n34.a2)},
                                       {"a3", to_string(n34.a3)}, {"theta", to_string(n34.theta)}}}};
  return r;
}

SuiteReport run_scaling_experiment(const ExperimentConfig& config) {
  SuiteReport r{"scaling", {}, Table{}, json::object()};
  const ExponentTuple& alpha = config.alpha;
  if (!is_admissible(alpha)) throw ConfigError("scaling exponent tuple is not admissible");
  const HullMembership hm = hull_contains(HullSpec::twelve_point(), alpha, true, 0.0);
  json warnings = json::array();
  if (!hm.strict)
    warnings.push_back("alpha is not strictly inside the twelve-point hull (exact margin " + to_string(hm.margin) +
                       "); the experiment proceeds");
  const std::optional<int> bad = bad_index(alpha);

  auto rng = check_rng(config, "scaling");
  const ModelFamilyParams& base = config.family;
  const double lo = to_double(base.spatial_window.lo), hi = to_double(base.spatial_window.hi);
  std::array<std::vector<std::pair<double, double>>, 4> sets;
  for (auto& s : sets) s = random_set(rng, lo, hi, config.set_intervals);

  r.table->header = {"dilation", "E1", "E2", "E3", "E4", "E_major", "C", "lambda_re", "lambda_im", "ratio", "shells"};
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  json rows = json::array();
  for (int d : config.dilations) {
    const double scale = std::ldexp(1.0, d);
    const Rational rs = pow2(d);
    ModelFamilyParams p = base;
    p.p_scale_min += d;
    p.p_scale_max += d;
    p.spatial_window = Interval{base.spatial_window.lo * rs, base.spatial_window.hi * rs};
    p.frequency_window = Interval{base.frequency_window.lo / rs, base.frequency_window.hi / rs};
    ModelFamilies fam = generate_model_families(p);
    const GridSpec grid = model_grid(fam, config.grid);
    std::array<GridSet, 4> e;
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<std::pair<double, double>> iv;
      for (const auto& [a, b] : sets[i]) iv.emplace_back(a * scale, b * scale);
      e[i] = GridSet::from_intervals(grid, iv);
      if (!(e[i].measure() > 0.0)) throw DomainError("scaling sets need positive measure");
    }
    std::array<GridSet, 4> used = e;
    double C = 0.0;
    std::map<int, int> shells;
    if (bad) {
      const ExceptionalSet ex = exceptional_set(e, *bad);
      C = ex.C;
      used[static_cast<std::size_t>(*bad - 1)] = ex.major;
      for (const auto& p_tile : fam.p_family.members()) ++shells[distance_shell(p_tile, ex.omega)];
    }
    const ModelInstance inst =
        make_model_instance(std::move(fam), grid, TruncationFunction::constant(grid, config.n2));
    const Complex lambda = model_form(inst, used[0].indicator(), used[1].indicator(), used[2].indicator(),
                                      used[3].indicator());
    double norm = 1.0;
    for (std::size_t i = 0; i < 4; ++i) norm *= std::pow(used[i].measure(), to_double(alpha[i]));
    const double ratio = std::abs(lambda) / norm;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    std::string shell_text;
    json shell_json = json::object();
    for (const auto& [l, n] : shells) {
      shell_text += (shell_text.empty() ? "" : ";") + std::to_string(l) + ":" + std::to_string(n);
      shell_json[std::to_string(l)] = n;
    }
    const double major = bad ? used[static_cast<std::size_t>(*bad - 1)].measure() : 0.0;
    r.table->rows.push_back({std::to_string(d), format_double(e[0].measure()), format_double(e[1].measure()),
                             format_double(e[2].measure()), format_double(e[3].measure()), format_double(major),
                             format_double(C), format_double(lambda.real()), format_double(lambda.imag()),
                             format_double(ratio), shell_text});
    rows.push_back({{"dilation", d}, {"measures", {e[0].measure(), e[1].measure(), e[2].measure(), e[3].measure()}},
                    {"major", major}, {"C", C}, {"lambda", {lambda.real(), lambda.imag()}}, {"ratio", ratio},
                    {"shells", shell_json}});
  }
  const double spread = rmin > 0.0 ? rmax / rmin : std::numeric_limits<double>::infinity();
  CheckResult c = at_most("scaling_ratio_band", spread, config.tolerance("scaling_band", 100.0),
                          json{{"min_ratio", rmin}, {"max_ratio", rmax}, {"warnings", warnings}});
  c.passed = c.passed && rmin > 0.0 && std::isfinite(rmax);
  r.checks.push_back(c);
  r.data = {{"alpha", tuple_to_json(alpha)}, {"hull_margin", to_string(hm.margin)}, {"rows", rows},
            {"warnings", warnings}};
  return r;
}

SuiteReport run_eval(const ExperimentConfig& config) {
  SuiteReport r{"eval", {}, std::nullopt, json::object()};
  const GridSpec g = operator_grid();
  const GridFunction ind = indicator(g, 0.0, 1.0);
  const ScaleRange range{config.eval_k_min, config.eval_k_max};
  const SmoothingKernel w = SmoothingKernel::from_profile(CutoffProfile::autocorrelation(config.bump));
  const Majorization mj = majorization_constant(w, w);
  const double T = direct_Tstar(ind, ind, ind, config.eval_x, range);
  const double S = smoothed_Tstar(ind, ind, ind, config.eval_x, w, w, range.shifted(mj.c));

  const ModelFamilies fam = generate_model_families(config.family);
  const GridSpec mg = model_grid(fam, config.grid);
  const ModelInstance inst = make_model_instance(fam, mg, TruncationFunction::constant(mg, config.n2));
  const double lo = to_double(config.family.spatial_window.lo), hi = to_double(config.family.spatial_window.hi);
  const GridFunction f = GridSet::from_intervals(mg, {{lo, hi}}).indicator();
  const Complex lambda = model_form(inst, f, f, f, f);
  r.checks.push_back(at_least("eval_majorization", T > 0.0 ? mj.constant * S / T : 1.0, 1.0));
  r.data = {{"x", config.eval_x},
            {"k_range", {range.k_min, range.k_max}},
            {"direct_Tstar", T},
            {"smoothed_Tstar", S},
            {"majorization_constant", mj.constant},
            {"model_form", {lambda.real(), lambda.imag()}},
            {"instance_hash", hex64(fnv1a(model_families_to_json(inst.families).dump()))}};
  return r;
}

SuiteReport run_families(const ExperimentConfig& config) {
  SuiteReport r{"families", {}, std::nullopt, json::object()};
  const ModelFamilies fam = generate_model_families(config.family);
  int bad = 0;
  for (const TileFamily* f : {&fam.p_family, &fam.q_family}) {
    if (!is_rank1(*f).rank1) ++bad;
    for (const auto& part : split_sparse(*f).parts)
      if (!is_sparse(part).sparse) ++bad;
  }
  r.checks.push_back(at_most("families_rank1_sparse", bad, 0,
                             json{{"p_tiles", fam.p_family.size()}, {"q_tiles", fam.q_family.size()}}));
  r.data = {{"families", model_families_to_json(fam)}};
  return r;
}

SuiteReport run_suite(const ExperimentConfig& config) {
  const std::string& e = config.experiment;
  if (e == "identities") return run_identity_suite(config);
  if (e == "oracles") return run_oracle_suite(config);
  if (e == "scaling") return run_scaling_experiment(config);
  if (e == "hull") return run_hull_suite(config);
  if (e == "eval") return run_eval(config);
  if (e == "families") return run_families(config);
  throw ConfigError("unknown experiment '" + e + "'");
}

CheckResult replay_counterexample(const json& ce) {
  const std::string kind = ce.at("kind").get<std::string>();
  const TileFamily f = family_from_json(ce.at("family"));
  std::vector<CoeffSequence> a;
  for (const auto& c : ce.at("coeffs")) a.push_back(coeffs_from_json(c));
  const int index = ce.at("index").get<int>();
  const TopOptions tops{ce.value("top_depth", 1)};
  if (kind == "size") {
    const SizeVerdict v = size_verdict(f, a.at(0), index, tops);
    return at_most("replay_size", std::abs(v.formula - v.exhaustive), kRelSlack * std::max(1.0, v.exhaustive),
                   json{{"formula", v.formula}, {"exhaustive", v.exhaustive}});
  }
  if (kind == "energy") {
    const EnergyVerdict v = energy_verdict(f, a.at(0), index, tops);
    CheckResult r = at_most("replay_energy", v.greedy, v.exhaustive * (1.0 + kRelSlack),
                            json{{"greedy", v.greedy}, {"exhaustive", v.exhaustive}, {"witness_ok", v.witness_ok}});
    r.passed = v.ok();
    return r;
  }
  if (kind == "partition") {
    const PartitionReport rep = partition_forests(f, a.at(0), index, PartitionOptions{tops, 10.0, 0.0});
    return at_most("replay_partition", partition_violations(f, a.at(0), index, rep, tops), 0);
  }
  if (kind == "tree") {
    const TreeTop top{dyadic_from_json(ce.at("top").at("spatial")), dyadic_from_json(ce.at("top").at("freq")), index,
                      false};
    const Tree tree{top, tree_members(f, top)};
    const TreeEstimate e = single_tree_estimate(f, tree, a.at(0), a.at(1), a.at(2), tops);
    return at_most("replay_tree", e.lhs, e.rhs * (1.0 + kRelSlack), json{{"lhs", e.lhs}, {"rhs", e.rhs}});
  }
  throw ConfigError("unknown counterexample kind '" + kind + "'");
}

}  // namespace tiletide
