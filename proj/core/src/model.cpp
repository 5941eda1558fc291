#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "tiletide/error.hpp"
#include "tiletide/operators.hpp"

namespace tiletide {
namespace {

const std::vector<TileId>& links_of(const ModelInstance& instance, TileId p) {
  static const std::vector<TileId> none;
  auto it = instance.families.links.find(p);
  return it == instance.families.links.end() ? none : it->second;
}

const std::array<WavePacket, 3>& p_packets(const ModelInstance& instance, TileId p) {
  auto it = instance.p_packets.find(p);
  if (it == instance.p_packets.end()) throw DomainError("tri-tile " + std::to_string(p) + " is not in the P family");
  return it->second;
}

void check_grid(const ModelInstance& instance, const GridFunction& f) {
  if (!(f.grid() == instance.grid)) throw DomainError("input grid does not match the model instance");
}

// B_P spectra keyed by the linked Q set; tri-tiles sharing (scale, omega_{P_2}) share one entry.
class BPCache {
 public:
  BPCache(const ModelInstance& instance, const Spectrum& f1, const Spectrum& f2)
      : instance_(instance), f1_(f1), f2_(f2) {}

  const Spectrum& get(TileId p) {
    const auto& links = links_of(instance_, p);
    auto it = cache_.find(links);
    if (it == cache_.end()) it = cache_.emplace(links, model_BP_spectrum(instance_, p, f1_, f2_)).first;
    return it->second;
  }

 private:
  const ModelInstance& instance_;
  const Spectrum& f1_;
  const Spectrum& f2_;
  std::map<std::vector<TileId>, Spectrum> cache_;
};

double inv_sqrt_length(const TriTile& t) { return 1.0 / std::sqrt(to_double(t.spatial_length())); }

}  // namespace

GridSpec model_grid(const ModelFamilies& families, const ModelGridOptions& options) {
  if (!(options.samples_per_unit >= kMinSamplesPerUnit) || !(options.bins_per_unit >= kMinSamplesPerUnit))
    throw ConfigError("model grid needs at least 8 samples per |I| and 8 bins per |omega|");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double min_len = lo, min_freq = lo, max_abs = 0.0;
  for (const TileFamily* fam : {&families.p_family, &families.q_family})
    for (const auto& m : fam->members()) {
      lo = std::min(lo, to_double(m.spatial_interval().lo));
      hi = std::max(hi, to_double(m.spatial_interval().hi));
      min_len = std::min(min_len, to_double(m.spatial_length()));
      for (int t = 1; t <= 3; ++t) {
        const Interval& w = m.freq_interval(t);
        min_freq = std::min(min_freq, to_double(w.length()));
        max_abs = std::max({max_abs, std::abs(to_double(w.lo)), std::abs(to_double(w.hi))});
      }
    }
  if (!std::isfinite(lo)) throw DomainError("model families are empty");
  double dx = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(min_len / options.samples_per_unit))));
  // Nyquist clears every frequency interval by one finest |omega|.
  while (0.5 / dx <= max_abs + min_freq) dx /= 2.0;
  const double length = std::max(2.0 * (hi - lo), options.bins_per_unit / min_freq);
  std::size_t n = 2;
  while (static_cast<double>(n) * dx < length) n *= 2;
  const double center = 0.5 * (lo + hi);
  return make_grid(center - 0.5 * static_cast<double>(n) * dx, dx, n);
}

ModelInstance make_model_instance(ModelFamilies families, const GridSpec& grid, TruncationFunction n2,
                                  const InstanceChecks& checks) {
  if (!(n2.grid == grid)) throw DomainError("truncation function must live on the model grid");
  for (const auto* fam : {&families.p_family, &families.q_family}) {
    const Rank1Check r = is_rank1(*fam);
    if (!r.rank1) {
      const auto& v = *r.violation;
      throw DomainError("family is not rank 1: clause " + std::to_string(v.clause) + " fails for tri-tiles " +
                        std::to_string(v.first) + ", " + std::to_string(v.second));
    }
  }
  ModelInstance inst;
  inst.grid = grid;
  inst.n2 = std::move(n2);
  const auto build = [&](const TileFamily& fam, std::map<TileId, std::array<WavePacket, 3>>& out) {
    std::set<std::pair<int, int>> checked;  // (scale, component)
    for (const auto& m : fam.members()) {
      std::array<WavePacket, 3> pk;
      for (int t = 1; t <= 3; ++t) {
        pk[static_cast<std::size_t>(t - 1)] = make_wave_packet(grid, m.tile(t));
        // Packets of one scale and component are translates; one representative is checked.
        if (checked.emplace(m.scale(), t).second) {
          const auto rep = verify_adapted(pk[static_cast<std::size_t>(t - 1)].to_grid(), m.tile(t), checks.adapted_M);
          if (!(rep.constant <= checks.adapted_limit))
            throw DomainError("packet of tri-tile " + std::to_string(m.id()) + " is not adapted: constant " +
                              std::to_string(rep.constant));
        }
      }
      out.emplace(m.id(), std::move(pk));
    }
  };
  build(families.p_family, inst.p_packets);
  build(families.q_family, inst.q_packets);
  inst.families = std::move(families);
  return inst;
}

Spectrum model_BP_spectrum(const ModelInstance& instance, TileId p, const Spectrum& f1, const Spectrum& f2) {
  p_packets(instance, p);
  Spectrum acc{instance.grid, std::vector<Complex>(instance.grid.n)};
  for (TileId q : links_of(instance, p)) {
    const auto& pk = instance.q_packets.at(q);
    const double w = inv_sqrt_length(instance.families.q_family.at(q));
    const Complex c = w * pk[0].pair_with(f1) * pk[1].pair_with(f2);
    if (c != Complex{}) pk[2].accumulate(acc, c);
  }
  return acc;
}

GridFunction model_BP(const ModelInstance& instance, TileId p, const GridFunction& f1, const GridFunction& f2) {
  check_grid(instance, f1);
  check_grid(instance, f2);
  return inverse_dft(model_BP_spectrum(instance, p, forward_dft(f1), forward_dft(f2)));
}

Complex model_form(const ModelInstance& instance, const GridFunction& f1, const GridFunction& f2,
                   const GridFunction& f3, const GridFunction& f4) {
  for (const auto* f : {&f1, &f2, &f3, &f4}) check_grid(instance, *f);
  const Spectrum s1 = forward_dft(f1), s2 = forward_dft(f2), s3 = forward_dft(f3);
  BPCache cache(instance, s1, s2);
  Complex total{};
  for (const auto& p : instance.families.p_family.members()) {
    const auto& pk = p_packets(instance, p.id());
    const Complex a1 = pk[0].pair_with(s3);
    if (a1 == Complex{}) continue;
    const Complex a2 = pk[1].pair_with(cache.get(p.id()));
    if (a2 == Complex{}) continue;
    const GridFunction phi3 = truncate_packet(pk[2].to_grid(), p.tile(3), instance.n2);
    total += inv_sqrt_length(p) * a1 * a2 * inner_product(f4, phi3);
  }
  return total;
}

ModelCoefficients coeff_extract(const ModelInstance& instance, const GridFunction& f1, const GridFunction& f2,
                                const GridFunction& f3, const GridFunction& f4) {
  for (const auto* f : {&f1, &f2, &f3, &f4}) check_grid(instance, *f);
  const Spectrum s1 = forward_dft(f1), s2 = forward_dft(f2), s3 = forward_dft(f3);
  BPCache cache(instance, s1, s2);
  std::map<int, Spectrum> truncated;  // per P scale
  ModelCoefficients c;
  c.a1.component = 1;
  c.a2.component = 2;
  c.a3.component = 3;
  for (const auto& p : instance.families.p_family.members()) {
    const auto& pk = p_packets(instance, p.id());
    auto it = truncated.find(p.scale());
    if (it == truncated.end())
      it = truncated.emplace(p.scale(), forward_dft(truncate_function(f4, p.scale(), instance.n2))).first;
    c.a1.values[p.id()] = pk[0].pair_with(s3);
    c.a2.values[p.id()] = pk[1].pair_with(cache.get(p.id()));
    c.a3.values[p.id()] = pk[2].pair_with(it->second);
  }
  return c;
}

Complex form_from_coefficients(const TileFamily& family, const ModelCoefficients& c, const std::vector<TileId>& ids) {
  Complex total{};
  for (TileId id : ids) {
    const TriTile& p = family.at(id);
    total += inv_sqrt_length(p) * c.a1.at(id) * c.a2.at(id) * c.a3.at(id);
  }
  return total;
}

Complex form_from_coefficients(const TileFamily& family, const ModelCoefficients& c) {
  std::vector<TileId> ids;
  for (const auto& p : family.members()) ids.push_back(p.id());
  return form_from_coefficients(family, c, ids);
}

}  // namespace tiletide
