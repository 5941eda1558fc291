#pragma once

#include <array>
#include <map>
#include <vector>

#include "tiletide/grid.hpp"
#include "tiletide/packets.hpp"
#include "tiletide/sizeenergy.hpp"
#include "tiletide/spectral.hpp"

namespace tiletide {

// printed: 1/(h1 h2), value 4 on constants. probabilistic: 1/(4 h1 h2), value 1 on constants.
enum class AveragingConvention { printed, probabilistic };

struct QuadratureOptions {
  // Trapezoid nodes per axis; the step is the smallest dx * 2^j that fits.
  std::size_t max_nodes = 257;
  AveragingConvention convention = AveragingConvention::printed;
};

// Inclusive range of dyadic exponents, shared by k1 and k2.
struct ScaleRange {
  int k_min = 0;
  int k_max = 0;

  ScaleRange shifted(int c) const { return {k_min + c, k_max + c}; }
};

// |f| at an arbitrary point: linear interpolation of |samples|, zero off the grid.
double abs_at(const GridFunction& f, double x);

// Average of |f1(x-s) f2(x+s+t) f3(x-t)| over |s| <= 2^k1, |t| <= 2^k2.
double direct_T(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, int k1, int k2, double x,
                const QuadratureOptions& options = {});
double direct_Tstar(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, double x,
                    const ScaleRange& range, const QuadratureOptions& options = {});

// Spatial weight w = inverse transform of a cutoff, truncated where |w| < cutoff * w(0).
struct SmoothingKernel {
  CutoffProfile profile;
  double radius = 1.0;  // support of the truncated weight, in units of 2^k
  double w0 = 1.0;      // w(0)
  std::vector<double> table;  // w on [0, radius], linear interpolation between entries

  static SmoothingKernel from_profile(const CutoffProfile& profile, double cutoff = 1e-4);
  double operator()(double s) const;
};

// 2^(-k1-k2) integral of |f1(x-s) f2(x+s+t) f3(x-t)| w1(s/2^k1) w2(t/2^k2).
double smoothed_T(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, int k1, int k2, double x,
                  const SmoothingKernel& w1, const SmoothingKernel& w2, const QuadratureOptions& options = {});
double smoothed_Tstar(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, double x,
                      const SmoothingKernel& w1, const SmoothingKernel& w2, const ScaleRange& range,
                      const QuadratureOptions& options = {});

// Smallest c >= 0 with w1(s/2^c) w2(t/2^c) >= 1/2 on [-1, 1]^2; then
// T(k1, k2) <= constant * smoothed_T(k1 + c, k2 + c) with constant = 2 * 4^c.
struct Majorization {
  int c = 0;
  double constant = 0.0;
  double min_weight = 0.0;  // min of w1 w2 over the rescaled square
};

Majorization majorization_constant(const SmoothingKernel& w1, const SmoothingKernel& w2,
                                   AveragingConvention convention = AveragingConvention::printed);

// ---- discrete model form ----

struct ModelInstance {
  ModelFamilies families;
  GridSpec grid{};
  TruncationFunction n2{};
  std::map<TileId, std::array<WavePacket, 3>> p_packets;
  std::map<TileId, std::array<WavePacket, 3>> q_packets;
};

struct ModelGridOptions {
  double samples_per_unit = 16.0;  // per finest |I|
  double bins_per_unit = 16.0;     // per finest |omega|
};

// Power-of-two grid covering every spatial interval twice over and resolving every frequency interval.
GridSpec model_grid(const ModelFamilies& families, const ModelGridOptions& options = {});

struct InstanceChecks {
  double adapted_M = 2.0;
  // Largest admissible adaptedness constant of the representative packets.
  double adapted_limit = 100.0;
};

// Builds packets; throws DomainError if a family is not rank 1 or a representative packet is not adapted.
ModelInstance make_model_instance(ModelFamilies families, const GridSpec& grid, TruncationFunction n2,
                                  const InstanceChecks& checks = {});

// Sum over linked Q of |I_Q|^(-1/2) <f1, phi_Q^1> <f2, phi_Q^2> phi_Q^3, as a spectrum.
Spectrum model_BP_spectrum(const ModelInstance& instance, TileId p, const Spectrum& f1, const Spectrum& f2);
GridFunction model_BP(const ModelInstance& instance, TileId p, const GridFunction& f1, const GridFunction& f2);

// Spatial route: the f4 pairing uses truncate_packet on each phi_P^3.
Complex model_form(const ModelInstance& instance, const GridFunction& f1, const GridFunction& f2,
                   const GridFunction& f3, const GridFunction& f4);

struct ModelCoefficients {
  CoeffSequence a1;  // <f3, phi_P^1>
  CoeffSequence a2;  // <B_P(f1, f2), phi_P^2>
  CoeffSequence a3;  // <f4 1_{|I_P| >= 2^N2}, phi_P^3>
};

// Spectral route: f4 is truncated per P scale and paired in frequency.
ModelCoefficients coeff_extract(const ModelInstance& instance, const GridFunction& f1, const GridFunction& f2,
                                const GridFunction& f3, const GridFunction& f4);

// Sum over the given P ids of |I_P|^(-1/2) a1 a2 a3.
Complex form_from_coefficients(const TileFamily& family, const ModelCoefficients& c, const std::vector<TileId>& ids);
Complex form_from_coefficients(const TileFamily& family, const ModelCoefficients& c);

}  // namespace tiletide
