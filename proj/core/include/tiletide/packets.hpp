#pragma once

#include <cstdint>
#include <vector>

#include "tiletide/grid.hpp"
#include "tiletide/spectral.hpp"

namespace tiletide {

// Base bump (1 - 4x^2)^power on [-1/2, 1/2], sampled with an odd sample count.
struct BumpParams {
  int power = 3;
  std::size_t samples = 1025;
};

enum class CutoffKind { autocorrelation, plateau };

// Smooth even cutoff. Autocorrelation form is tabulated; plateau form is closed-form.
class CutoffProfile {
 public:
  static CutoffProfile autocorrelation(const BumpParams& base);
  static CutoffProfile plateau(int order);

  CutoffKind kind() const { return kind_; }
  int order() const { return order_; }
  double support_radius() const { return kind_ == CutoffKind::plateau ? 2.0 : 1.0; }

  double operator()(double xi) const;
  // m-th derivative; plateau form only, m < order.
  double derivative(double xi, int m) const;
  // Integral of alpha(xi) * exp(2 pi i xi s) over the real line (real by evenness).
  double inverse_transform(double s) const;
  // Second difference at the origin on the tabulation spacing (autocorrelation form).
  double laplacian_at_zero() const;
  // Tabulation step of the autocorrelation form; 0 for plateau.
  double table_step() const { return step_; }

 private:
  CutoffKind kind_ = CutoffKind::plateau;
  int order_ = 2;
  // Plateau: smoothstep coefficients, index = power of x.
  std::vector<double> poly_;
  // Autocorrelation: samples on [-1, 1] with spacing step_, centre at index mid_.
  std::vector<double> table_;
  double step_ = 0.0;
  std::size_t mid_ = 0;
};

// C^(order-1) polynomial smoothstep: 0 at x<=0, 1 at x>=1.
double polynomial_smoothstep(double x, int order);
// C-infinity smoothstep built from exp(-1/x).
double smooth_step(double x);

// Least-squares slope exponent of the envelope of |inverse transform| on log-spaced s.
double fitted_decay_exponent(const CutoffProfile& profile, double s_lo, double s_hi);

// theta(2^i s) with theta(s) = alpha(s) - alpha(2s).
double theta_scaled(const CutoffProfile& profile, int i, double s);

// gamma(xi - l/3), gamma^2 = b / sum_l b(. - l/3), b supported on [0.2, 0.8].
double gamma_partition(std::int64_t l, double xi);
double gamma_bump(double xi);
// max |sum_l gamma(xi - l/3)^2 - 1| over the points.
double partition_check(const std::vector<double>& points);

// (1 + ((x - c)/len)^2)^(-M/2).
double chi_tilde(double center, double length, double x, double M);
double chi_tilde(const Interval& I, double x, double M);

// L2-normalized packet stored by its nonzero DFT bins.
class WavePacket {
 public:
  WavePacket() = default;
  WavePacket(GridSpec grid, std::int64_t first_bin, std::vector<Complex> values, double center,
             double length);

  const GridSpec& grid() const { return grid_; }
  std::int64_t first_bin() const { return first_bin_; }
  const std::vector<Complex>& values() const { return values_; }
  double center() const { return center_; }
  double length() const { return length_; }

  Spectrum spectrum() const;
  GridFunction to_grid() const;
  // <f, phi> from the spectrum of f.
  Complex pair_with(const Spectrum& f) const;
  // Adds coefficient * spectrum into acc (same grid).
  void accumulate(Spectrum& acc, Complex coefficient) const;

 private:
  GridSpec grid_{};
  std::int64_t first_bin_ = 0;
  std::vector<Complex> values_;
  double center_ = 0.0;
  double length_ = 1.0;
};

// Fraction of omega kept by the frequency bump.
inline constexpr double kPacketSupportFraction = 0.9;
// Minimal samples per |I| and DFT bins per |omega|.
inline constexpr double kMinSamplesPerUnit = 8.0;

// Packet of the tile; modulation n translates it by n|I|. Throws ConfigError if unresolved.
WavePacket make_wave_packet(const GridSpec& grid, const Tile& tile, std::int64_t modulation = 0);
GridFunction wave_packet(const GridSpec& grid, const Tile& tile, std::int64_t modulation = 0);

struct AdaptednessReport {
  double M = 0.0;
  double constant = 0.0;
  std::size_t points = 0;
};

// Smallest C with |phi| <= C |I|^(-1/2) chi^M over grid points where chi^M >= floor.
AdaptednessReport verify_adapted(const GridFunction& phi, const Tile& tile, double M, double floor = 1e-12);

// Energy fraction of the DFT of phi outside (9/10) omega.
double spectral_leakage(const GridFunction& phi, const Tile& tile);

// Centered maximal average over radii 2^k dx (k >= 0) plus the radius-0 value |f(x)|.
GridFunction hl_maximal(const GridFunction& f);

// Integer scale threshold per cell; |I_P| >= 2^{N2(x)} keeps the sample.
inline constexpr int kScaleMinusInfinity = -(1 << 15);
inline constexpr int kScalePlusInfinity = 1 << 15;

struct TruncationFunction {
  GridSpec grid{};
  std::vector<int> values;

  static TruncationFunction constant(const GridSpec& grid, int value);
  // value_left for x < x_star, value_right for x >= x_star.
  static TruncationFunction step(const GridSpec& grid, double x_star, int value_left, int value_right);
};

// 0/1 mask of cells where 2^scale >= 2^{N2}.
std::vector<std::uint8_t> truncation_mask(const TruncationFunction& n2, int spatial_scale);
GridFunction truncate_packet(const GridFunction& phi, const Tile& tile, const TruncationFunction& n2);
GridFunction truncate_function(const GridFunction& f, int spatial_scale, const TruncationFunction& n2);

}  // namespace tiletide
