#include "tiletide/packets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tiletide/error.hpp"
#include "tiletide/quadrature.hpp"

namespace tiletide {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double poly_eval(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
  return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c, int m) {
  std::vector<double> d = c;
  for (int k = 0; k < m; ++k) {
    if (d.size() <= 1) return {0.0};
    std::vector<double> next(d.size() - 1);
    for (std::size_t i = 1; i < d.size(); ++i) next[i - 1] = d[i] * static_cast<double>(i);
    d = std::move(next);
  }
  return d;
}

std::vector<double> smoothstep_coefficients(int order) {
  const int n = order - 1;
  std::vector<double> c(static_cast<std::size_t>(2 * n + 2), 0.0);
  for (int k = 0; k <= n; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    c[static_cast<std::size_t>(n + 1 + k)] = sign * binomial(n + k, k) * binomial(2 * n + 1, n - k);
  }
  return c;
}

double packet_bump(double u) {
  const double v = u / (kPacketSupportFraction / 2.0);
  if (std::abs(v) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - v * v));
}

}  // namespace

double polynomial_smoothstep(double x, int order) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return poly_eval(smoothstep_coefficients(order), x);
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

CutoffProfile CutoffProfile::plateau(int order) {
  if (order < 2) throw DomainError("plateau smoothness order must be at least 2");
  CutoffProfile p;
  p.kind_ = CutoffKind::plateau;
  p.order_ = order;
  p.poly_ = smoothstep_coefficients(order);
  return p;
}

CutoffProfile CutoffProfile::autocorrelation(const BumpParams& base) {
  if (base.power < 1) throw DomainError("bump power must be positive");
  if (base.samples < 5 || base.samples % 2 == 0) throw DomainError("bump sample count must be odd and >= 5");
  const std::size_t m = base.samples;
  const double h = 1.0 / static_cast<double>(m - 1);
  std::vector<double> theta(m);
  double peak = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = -0.5 + static_cast<double>(i) * h;
    theta[i] = std::pow(std::max(0.0, 1.0 - 4.0 * x * x), base.power);
    peak = std::max(peak, theta[i]);
  }
  if (!(peak > 0.0)) throw DomainError("degenerate base bump");

  // theta * theta on [-1, 1], squared, normalized to unit mass.
  const std::size_t len = 2 * m - 1;
  std::vector<double> g(len, 0.0);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t lo = k >= m - 1 ? k - (m - 1) : 0;
    const std::size_t hi = std::min(k, m - 1);
    double acc = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) acc += theta[i] * theta[k - i];
    g[k] = h * acc;
  }
  double mass = 0.0;
  for (auto& v : g) {
    v = v * v;
    mass += v;
  }
  mass *= h;
  if (!(mass > 0.0)) throw DomainError("degenerate base bump");
  for (auto& v : g) v /= mass;

  CutoffProfile p;
  p.kind_ = CutoffKind::autocorrelation;
  p.order_ = base.power;
  p.table_ = std::move(g);
  p.step_ = h;
  p.mid_ = m - 1;
  return p;
}

double CutoffProfile::operator()(double xi) const {
  const double a = std::abs(xi);
  if (kind_ == CutoffKind::plateau) {
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return 1.0 - poly_eval(poly_, a - 1.0);
  }
  if (a >= 1.0) return 0.0;
  const double pos = a / step_;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  const double left = table_[mid_ + i];
  const double right = (mid_ + i + 1 < table_.size()) ? table_[mid_ + i + 1] : 0.0;
  return left + frac * (right - left);
}

double CutoffProfile::derivative(double xi, int m) const {
  if (kind_ != CutoffKind::plateau) throw DomainError("derivatives need the plateau form");
  if (m < 0) throw DomainError("negative derivative order");
  if (m == 0) return (*this)(xi);
  const double a = std::abs(xi);
  if (a <= 1.0 || a >= 2.0) return 0.0;
  const double d = -poly_eval(poly_derivative(poly_, m), a - 1.0);
  return (xi < 0.0 && m % 2 == 1) ? -d : d;
}

double CutoffProfile::inverse_transform(double s) const {
  if (kind_ == CutoffKind::autocorrelation) {
    double acc = 0.0;
    for (std::size_t k = 0; k < table_.size(); ++k) {
      const double y = (static_cast<double>(k) - static_cast<double>(mid_)) * step_;
      acc += table_[k] * std::cos(kTwoPi * y * s);
    }
    return acc * step_;
  }
  const double plateau_part = (s == 0.0) ? 2.0 : std::sin(kTwoPi * s) / (std::numbers::pi * s);
  const int panels = std::max(4, static_cast<int>(std::ceil(4.0 * std::abs(s))) + 4);
  const double ramp_part = 2.0 * gauss_legendre_composite(
                                     [&](double xi) {
                                       return (1.0 - poly_eval(poly_, xi - 1.0)) * std::cos(kTwoPi * xi * s);
                                     },
                                     1.0, 2.0, panels);
  return plateau_part + ramp_part;
}

double CutoffProfile::laplacian_at_zero() const {
  if (kind_ == CutoffKind::plateau) return 0.0;
  return (table_[mid_ + 1] - 2.0 * table_[mid_] + table_[mid_ - 1]) / (step_ * step_);
}

double fitted_decay_exponent(const CutoffProfile& profile, double s_lo, double s_hi) {
  if (!(s_lo > 0.0) || !(s_hi > s_lo)) throw DomainError("decay fit needs 0 < s_lo < s_hi");
  constexpr int kCenters = 16;
  constexpr int kWindow = 48;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int c = 0; c < kCenters; ++c) {
    const double s = s_lo * std::pow(s_hi / s_lo, static_cast<double>(c) / (kCenters - 1));
    double env = 0.0;
    for (int w = 0; w < kWindow; ++w) {
      const double t = s * (1.0 + 0.25 * static_cast<double>(w) / (kWindow - 1));
      env = std::max(env, std::abs(profile.inverse_transform(t)));
    }
    if (env > 1e-15) {
      xs.push_back(std::log(s));
      ys.push_back(std::log(env));
    }
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

double theta_scaled(const CutoffProfile& profile, int i, double s) {
  if (profile.kind() != CutoffKind::plateau) throw DomainError("theta needs the plateau form");
  return profile(std::ldexp(s, i)) - profile(std::ldexp(s, i + 1));
}

double gamma_bump(double xi) { return smooth_step((xi - 0.2) / 0.2) * smooth_step((0.8 - xi) / 0.2); }

namespace {

double gamma_denominator(double xi) {
  // Translates l/3 with xi - l/3 in (0.2, 0.8).
  const auto lo = static_cast<std::int64_t>(std::floor(3.0 * (xi - 0.8)));
  const auto hi = static_cast<std::int64_t>(std::ceil(3.0 * (xi - 0.2)));
  double acc = 0.0;
  for (std::int64_t l = lo; l <= hi; ++l) acc += gamma_bump(xi - static_cast<double>(l) / 3.0);
  return acc;
}

double gamma_value(double xi) {
  const double b = gamma_bump(xi);
  if (b == 0.0) return 0.0;
  return std::sqrt(b / gamma_denominator(xi));
}

}  // namespace

double gamma_partition(std::int64_t l, double xi) { return gamma_value(xi - static_cast<double>(l) / 3.0); }

double partition_check(const std::vector<double>& points) {
  double worst = 0.0;
  for (double xi : points) {
    const auto lo = static_cast<std::int64_t>(std::floor(3.0 * (xi - 0.8)));
    const auto hi = static_cast<std::int64_t>(std::ceil(3.0 * (xi - 0.2)));
    double acc = 0.0;
    for (std::int64_t l = lo; l <= hi; ++l) {
      const double g = gamma_partition(l, xi);
      acc += g * g;
    }
    worst = std::max(worst, std::abs(acc - 1.0));
  }
  return worst;
}

double chi_tilde(double center, double length, double x, double M) {
  if (!(length > 0.0)) throw DomainError("chi_tilde needs |I| > 0");
  const double u = (x - center) / length;
  return std::pow(1.0 + u * u, -M / 2.0);
}

double chi_tilde(const Interval& I, double x, double M) {
  return chi_tilde(to_double(I.center()), to_double(I.length()), x, M);
}

WavePacket::WavePacket(GridSpec grid, std::int64_t first_bin, std::vector<Complex> values, double center,
                       double length)
    : grid_(grid), first_bin_(first_bin), values_(std::move(values)), center_(center), length_(length) {}

Spectrum WavePacket::spectrum() const {
  Spectrum s{grid_, std::vector<Complex>(grid_.n)};
  accumulate(s, 1.0);
  return s;
}

GridFunction WavePacket::to_grid() const { return inverse_dft(spectrum()); }

Complex WavePacket::pair_with(const Spectrum& f) const {
  if (!(f.grid == grid_)) throw DomainError("grid mismatch");
  Complex acc{};
  for (std::size_t k = 0; k < values_.size(); ++k) {
    acc += f.values[grid_.slot(first_bin_ + static_cast<std::int64_t>(k))] * std::conj(values_[k]);
  }
  return acc / grid_.length();
}

void WavePacket::accumulate(Spectrum& acc, Complex coefficient) const {
  if (!(acc.grid == grid_)) throw DomainError("grid mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    acc.values[grid_.slot(first_bin_ + static_cast<std::int64_t>(k))] += coefficient * values_[k];
  }
}

WavePacket make_wave_packet(const GridSpec& grid, const Tile& tile, std::int64_t modulation) {
  const double x_center = to_double(tile.spatial.center());
  const double x_len = to_double(tile.spatial.length());
  const double w_center = to_double(tile.freq.center());
  const double w_len = to_double(tile.freq.length());
  const double half = kPacketSupportFraction * w_len / 2.0;
  std::ostringstream why;
  if (x_len / grid.dx < kMinSamplesPerUnit) {
    why << "grid spacing " << grid.dx << " resolves |I| = " << x_len << " with fewer than 8 samples";
  } else if (w_len * grid.length() < kMinSamplesPerUnit) {
    why << "grid length " << grid.length() << " resolves |omega| = " << w_len << " with fewer than 8 bins";
  } else if (std::abs(w_center) + half >= grid.nyquist()) {
    why << "frequency support near " << w_center << " exceeds the Nyquist limit " << grid.nyquist();
  }
  if (!why.str().empty()) throw ConfigError("unresolvable tile: " + why.str());

  const double L = grid.length();
  const auto first = static_cast<std::int64_t>(std::floor((w_center - half) * L)) + 1;
  const auto last = static_cast<std::int64_t>(std::ceil((w_center + half) * L)) - 1;
  const double shift = x_center + static_cast<double>(modulation) * x_len;
  std::vector<Complex> values;
  values.reserve(static_cast<std::size_t>(last - first + 1));
  double energy = 0.0;
  for (std::int64_t m = first; m <= last; ++m) {
    const double xi = static_cast<double>(m) / L;
    const double a = packet_bump((xi - w_center) / w_len);
    values.push_back(a * std::polar(1.0, -kTwoPi * xi * shift));
    energy += a * a;
  }
  if (!(energy > 0.0)) throw ConfigError("unresolvable tile: no DFT bins inside the packet support");
  const double norm = std::sqrt(L / energy);
  for (auto& v : values) v *= norm;
  return WavePacket(grid, first, std::move(values), x_center, x_len);
}

GridFunction wave_packet(const GridSpec& grid, const Tile& tile, std::int64_t modulation) {
  return make_wave_packet(grid, tile, modulation).to_grid();
}

AdaptednessReport verify_adapted(const GridFunction& phi, const Tile& tile, double M, double floor) {
  const double c = to_double(tile.spatial.center());
  const double len = to_double(tile.spatial.length());
  AdaptednessReport r;
  r.M = M;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double w = chi_tilde(c, len, phi.grid().x(i), M);
    if (w < floor) continue;
    r.constant = std::max(r.constant, std::abs(phi[i]) * std::sqrt(len) / w);
    ++r.points;
  }
  return r;
}

double spectral_leakage(const GridFunction& phi, const Tile& tile) {
  const Spectrum s = forward_dft(phi);
  const double w_center = to_double(tile.freq.center());
  const double half = kPacketSupportFraction * to_double(tile.freq.length()) / 2.0;
  double inside = 0.0;
  double outside = 0.0;
  for (std::size_t m = 0; m < s.values.size(); ++m) {
    const double xi = s.grid.bin_frequency(s.grid.signed_bin(m));
    const double e = std::norm(s.values[m]);
    if (std::abs(xi - w_center) < half) {
      inside += e;
    } else {
      outside += e;
    }
  }
  const double total = inside + outside;
  return total > 0.0 ? outside / total : 0.0;
}

GridFunction hl_maximal(const GridFunction& f) {
  const std::size_t n = f.size();
  std::vector<double> prefix(n + 1, 0.0);
  std::vector<double> absf(n);
  for (std::size_t i = 0; i < n; ++i) {
    absf[i] = std::abs(f[i]);
    prefix[i + 1] = prefix[i] + absf[i];
  }
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = absf[i];
    const auto ii = static_cast<std::int64_t>(i);
    const auto nn = static_cast<std::int64_t>(n);
    for (std::int64_t r = 1;; r *= 2) {
      const std::int64_t lo = ii - r;
      const std::int64_t hi = ii + r;
      const std::int64_t a = std::max<std::int64_t>(lo, 0);
      const std::int64_t b = std::min<std::int64_t>(hi, nn - 1);
      double sum = prefix[static_cast<std::size_t>(b + 1)] - prefix[static_cast<std::size_t>(a)];
      if (lo >= 0) sum -= 0.5 * absf[static_cast<std::size_t>(lo)];
      if (hi <= nn - 1) sum -= 0.5 * absf[static_cast<std::size_t>(hi)];
      best = std::max(best, sum / (2.0 * static_cast<double>(r)));
      if (lo <= 0 && hi >= nn - 1) break;
    }
    out[i] = best;
  }
  return GridFunction(f.grid(), std::move(out));
}

TruncationFunction TruncationFunction::constant(const GridSpec& grid, int value) {
  return TruncationFunction{grid, std::vector<int>(grid.n, value)};
}

TruncationFunction TruncationFunction::step(const GridSpec& grid, double x_star, int value_left, int value_right) {
  TruncationFunction t{grid, std::vector<int>(grid.n)};
  for (std::size_t i = 0; i < grid.n; ++i) t.values[i] = grid.x(i) < x_star ? value_left : value_right;
  return t;
}

std::vector<std::uint8_t> truncation_mask(const TruncationFunction& n2, int spatial_scale) {
  std::vector<std::uint8_t> mask(n2.values.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = spatial_scale >= n2.values[i] ? 1 : 0;
  return mask;
}

GridFunction truncate_function(const GridFunction& f, int spatial_scale, const TruncationFunction& n2) {
  if (!(f.grid() == n2.grid)) throw DomainError("grid mismatch");
  const auto mask = truncation_mask(n2, spatial_scale);
  GridFunction out = f;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask[i]) out[i] = 0.0;
  }
  return out;
}

GridFunction truncate_packet(const GridFunction& phi, const Tile& tile, const TruncationFunction& n2) {
  return truncate_function(phi, exact_log2(tile.spatial.length()), n2);
}

}  // namespace tiletide
