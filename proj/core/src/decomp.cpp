#include "tiletide/decomp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "tiletide/error.hpp"
#include "tiletide/quadrature.hpp"

namespace tiletide {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kScaleGapMin = 10;

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// phi^(m)(t) for phi(t) = beta(t) - beta(2t).
double phi_derivative(const CutoffProfile& beta, int m, double t) {
  return beta.derivative(t, m) - std::ldexp(beta.derivative(2.0 * t, m), m);
}

void require_plateau(const CutoffProfile& beta) {
  if (beta.kind() != CutoffKind::plateau) throw DomainError("carving needs the plateau form");
}

// Five-point central differences, orders 1 and 2.
template <class F>
double central_difference(F&& f, double x, double h, int m) {
  if (m == 1) return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
  if (m == 2) return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
  return f(x);
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

double carved_derivative(const CutoffProfile& beta, int j, int m, double t) {
  return std::ldexp(phi_derivative(beta, m, std::ldexp(t, j)), j * m);
}

double carving_term(const CutoffProfile& beta, int j, int m, double delta, double u) {
  return std::pow(0.5 * delta, m) / factorial(m) * carved_derivative(beta, j, m, u);
}

double TaylorCarving::term_sup(int m) const {
  if (m < 0 || m > order) throw DomainError("term index out of range");
  return sup_abs(terms[static_cast<std::size_t>(m)]);
}

double TaylorCarving::remainder_sup() const { return sup_abs(remainder); }
double TaylorCarving::target_sup() const { return sup_abs(target); }

double TaylorCarving::reconstruction_residual() const {
  double worst = 0.0;
  for (std::size_t q = 0; q < target.size(); ++q) {
    double sum = remainder[q];
    for (const auto& term : terms) sum += term[q];
    worst = std::max(worst, std::abs(target[q] - sum));
  }
  const double scale = target_sup();
  return scale > 0.0 ? worst / scale : worst;
}

TaylorCarving taylor_carve(const CutoffProfile& beta, int i, int j, int order, const CarvingGrid& grid) {
  require_plateau(beta);
  if (i - j <= kScaleGapMin) throw DomainError("carving needs i - j > 10");
  if (order < 0) throw DomainError("negative carving order");
  if (order + 1 > beta.order() - 1) throw DomainError("plateau profile is not smooth enough for this order");
  if (grid.delta_samples < 2 || grid.u_samples < 2) throw DomainError("carving grid too small");

  TaylorCarving c;
  c.order = order;
  c.i = i;
  c.j = j;

  // supp theta_i: 2^(-i-1) < |delta| < 2^(-i+1).
  const std::size_t half = grid.delta_samples / 2;
  for (std::size_t k = 0; k < half; ++k) {
    const double v = 0.5 + 1.5 * (static_cast<double>(k) + 0.5) / static_cast<double>(half);
    c.delta.push_back(-std::ldexp(v, -i));
    c.delta.push_back(std::ldexp(v, -i));
  }
  std::sort(c.delta.begin(), c.delta.end());
  // Covers supp phi_j = {2^(-j-1) < |u| < 2^(-j+1)} with margin.
  const double u_max = std::ldexp(2.25, -j);
  for (std::size_t b = 0; b < grid.u_samples; ++b)
    c.u.push_back(-u_max + 2.0 * u_max * static_cast<double>(b) / static_cast<double>(grid.u_samples - 1));

  const std::size_t nd = c.delta.size();
  const std::size_t nu = c.u.size();
  c.terms.assign(static_cast<std::size_t>(order) + 1, std::vector<double>(nd * nu, 0.0));
  c.remainder.assign(nd * nu, 0.0);
  c.target.assign(nd * nu, 0.0);

  for (int m = 0; m <= order; ++m) {
    double s = 0.0;
    for (double u : c.u) s = std::max(s, std::abs(phi_derivative(beta, m, std::ldexp(u, j))));
    c.starred_bound = std::max(c.starred_bound, s);
  }

  std::vector<double> breaks;
  for (double r : {0.5, 1.0, 2.0}) {
    breaks.push_back(std::ldexp(r, -j));
    breaks.push_back(-std::ldexp(r, -j));
  }
  std::sort(breaks.begin(), breaks.end());
  // Piecewise polynomial integrand of degree <= order + 2 r - 1.
  const int points = std::max(8, (order + 2 * beta.order() + 2) / 2 + 1);
  const double inv_fact = 1.0 / factorial(order);

  for (std::size_t a = 0; a < nd; ++a) {
    const double h = 0.5 * c.delta[a];
    for (std::size_t b = 0; b < nu; ++b) {
      const double u = c.u[b];
      const std::size_t q = a * nu + b;
      c.target[q] = carved_derivative(beta, j, 0, u + h);
      for (int m = 0; m <= order; ++m) c.terms[static_cast<std::size_t>(m)][q] = carving_term(beta, j, m, c.delta[a], u);

      // (1/n!) int_0^h (h - tau)^n phi_j^(n+1)(u + tau) dtau, split at the breakpoints.
      const double lo = std::min(0.0, h);
      const double hi = std::max(0.0, h);
      std::vector<double> cuts{lo};
      for (double x : breaks)
        if (x - u > lo && x - u < hi) cuts.push_back(x - u);
      cuts.push_back(hi);
      double integral = 0.0;
      for (std::size_t p = 0; p + 1 < cuts.size(); ++p)
        integral += gauss_legendre_integral(
            [&](double tau) { return std::pow(h - tau, order) * carved_derivative(beta, j, order + 1, u + tau); },
            cuts[p], cuts[p + 1], points);
      c.remainder[q] = (h >= 0.0 ? integral : -integral) * inv_fact;
    }
  }
  return c;
}

double derivative_identity_residual(const CutoffProfile& beta, int j, int order) {
  require_plateau(beta);
  const double h = std::ldexp(1e-3, -j);
  const double u_max = std::ldexp(2.25, -j);
  constexpr int kPoints = 901;
  double worst = 0.0;
  for (int m = 1; m <= std::min(order, 2); ++m) {
    double err = 0.0;
    double sup = 0.0;
    for (int b = 0; b < kPoints; ++b) {
      const double u = -u_max + 2.0 * u_max * b / (kPoints - 1);
      const double fd =
          central_difference([&](double x) { return carved_derivative(beta, j, 0, x); }, u, h, m);
      const double exact = std::ldexp(phi_derivative(beta, m, std::ldexp(u, j)), j * m);
      err = std::max(err, std::abs(fd - exact));
      sup = std::max(sup, std::abs(exact));
    }
    worst = std::max(worst, sup > 0.0 ? err / sup : err);
  }
  return worst;
}

std::vector<SymbolDerivative> symbol_derivative_scaling(const CutoffProfile& beta, int i, int j, int m) {
  require_plateau(beta);
  if (m < 0 || m + 2 >= beta.order()) throw DomainError("derivative order exceeds profile smoothness");
  const auto theta_star = [&](double d) { return std::ldexp(theta_scaled(beta, i, d) * std::pow(d, m), i * m); };
  const auto phi_star = [&](double u) { return phi_derivative(beta, m, std::ldexp(u, j)); };
  constexpr int kPoints = 601;
  const double hd = std::ldexp(1e-3, -i);
  const double hu = std::ldexp(1e-3, -j);

  std::array<double, 3> theta_sup{};
  std::array<double, 3> phi_sup{};
  for (int k = 0; k < kPoints; ++k) {
    const double d = std::ldexp(-2.1 + 4.2 * k / (kPoints - 1), -i);
    const double u = std::ldexp(-2.1 + 4.2 * k / (kPoints - 1), -j);
    for (int a = 0; a <= 2; ++a) {
      theta_sup[static_cast<std::size_t>(a)] =
          std::max(theta_sup[static_cast<std::size_t>(a)], std::abs(central_difference(theta_star, d, hd, a)));
      phi_sup[static_cast<std::size_t>(a)] =
          std::max(phi_sup[static_cast<std::size_t>(a)], std::abs(central_difference(phi_star, u, hu, a)));
    }
  }
  std::vector<SymbolDerivative> out;
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b) {
      // tau is a product, so the sup of a mixed derivative factors.
      const double sup = theta_sup[static_cast<std::size_t>(a)] * phi_sup[static_cast<std::size_t>(b)];
      out.push_back({a, b, std::ldexp(sup, -(a * i + b * j))});
    }
  return out;
}

double SquareSpec::side() const { return std::ldexp(1.0, scale); }

double SquareSpec::lo(int t) const {
  const double idx = static_cast<double>(t == 1 ? index1 : index2);
  return side() * (idx + to_double(shift_value(offset)));
}

SquareWindow default_square_window() {
  // Gaussian core (sd 0.04) cut off smoothly on [0.1, 0.2] and [0.8, 0.9]; below 1e-12 at the cut.
  return [](double eta) {
    const double z = (eta - 0.5) / 0.04;
    return std::exp(-0.5 * z * z) * smooth_step((eta - 0.1) / 0.1) * smooth_step((0.9 - eta) / 0.1);
  };
}

Complex CoeffMatrix::at(int n1, int n2) const {
  if (std::abs(n1) > n_max || std::abs(n2) > n_max) throw DomainError("coefficient index out of range");
  const auto w = static_cast<std::size_t>(2 * n_max + 1);
  return values[static_cast<std::size_t>(n1 + n_max) * w + static_cast<std::size_t>(n2 + n_max)];
}

double CoeffMatrix::ring_max(int R) const {
  if (R < 0 || R > n_max) throw DomainError("ring out of range");
  double best = 0.0;
  for (int n1 = -R; n1 <= R; ++n1)
    for (int n2 = -R; n2 <= R; ++n2)
      if (std::max(std::abs(n1), std::abs(n2)) == R) best = std::max(best, std::abs(at(n1, n2)));
  return best;
}

Complex CoeffMatrix::reconstruct(double eta1, double eta2) const {
  const double rho = to_double(shift_value(square.offset));
  Complex acc{0.0, 0.0};
  for (int n1 = -n_max; n1 <= n_max; ++n1)
    for (int n2 = -n_max; n2 <= n_max; ++n2)
      acc += at(n1, n2) * std::polar(1.0, kTwoPi * (n1 * (rho + eta1) + n2 * (rho + eta2)));
  return acc;
}

double CoeffMatrix::decay_exponent(int r_lo, int r_hi, double floor) const {
  if (r_lo < 1 || r_hi > n_max || r_hi <= r_lo) throw DomainError("bad ring range");
  double peak = 0.0;
  for (const auto& v : values) peak = std::max(peak, std::abs(v));
  std::vector<double> xs;
  std::vector<double> ys;
  for (int R = r_lo; R <= r_hi; ++R) {
    const double v = ring_max(R);
    if (v > floor * peak) {
      xs.push_back(std::log(static_cast<double>(R)));
      ys.push_back(std::log(v));
    }
  }
  if (xs.size() < 2) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sx += xs[k];
    sy += ys[k];
    sxx += xs[k] * xs[k];
    sxy += xs[k] * ys[k];
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double coefficient_integrand(const SquareSpec& square, int theta_scale, const CutoffProfile& alpha,
                             const SquareWindow& w1, const SquareWindow& w2, double eta1, double eta2) {
  const double a = w1(eta1);
  const double b = w2(eta2);
  if (a == 0.0 || b == 0.0) return 0.0;
  // xi2 - xi1 without forming the (possibly large) endpoints.
  const double gap = static_cast<double>(square.index2 - square.index1) + (eta2 - eta1);
  return theta_scaled(alpha, theta_scale, square.side() * gap) * a * b;
}

CoeffMatrix fourier_coeffs(const SquareSpec& square, int theta_scale, const CutoffProfile& alpha,
                           const SquareWindow& w1, const SquareWindow& w2, const CoeffOptions& options) {
  if (options.n_max < 1) throw DomainError("n_max must be positive");
  std::size_t M = 64;
  while (M < options.min_points || M < static_cast<std::size_t>(2 * options.n_max + 2)) M *= 2;
  if (M > options.max_points) throw ConfigError("coefficient quadrature cap below the minimal resolution");

  const int n_max = options.n_max;
  const auto width = static_cast<std::size_t>(2 * n_max + 1);
  const double rho = to_double(shift_value(square.offset));

  const auto compute = [&](std::size_t points) {
    std::vector<Complex> data(points * points);
    const double inv = 1.0 / static_cast<double>(points);
    for (std::size_t k1 = 0; k1 < points; ++k1)
      for (std::size_t k2 = 0; k2 < points; ++k2)
        data[k1 * points + k2] = coefficient_integrand(square, theta_scale, alpha, w1, w2,
                                                       static_cast<double>(k1) * inv, static_cast<double>(k2) * inv);
    fft2d(data, points, points, -1);
    std::vector<Complex> out(width * width);
    const double norm = inv * inv;
    for (int n1 = -n_max; n1 <= n_max; ++n1)
      for (int n2 = -n_max; n2 <= n_max; ++n2) {
        const std::size_t s1 = static_cast<std::size_t>((n1 + static_cast<long>(points)) % static_cast<long>(points));
        const std::size_t s2 = static_cast<std::size_t>((n2 + static_cast<long>(points)) % static_cast<long>(points));
        // exp(-2 pi i n . lo / |Q|) reduces to the fractional offset.
        const Complex phase = std::polar(1.0, -kTwoPi * (n1 + n2) * rho);
        out[static_cast<std::size_t>(n1 + n_max) * width + static_cast<std::size_t>(n2 + n_max)] =
            data[s1 * points + s2] * norm * phase;
      }
    return out;
  };

  std::vector<Complex> current = compute(M);
  double change = std::numeric_limits<double>::infinity();
  while (M * 2 <= options.max_points) {
    std::vector<Complex> finer = compute(M * 2);
    change = 0.0;
    for (std::size_t q = 0; q < finer.size(); ++q) change = std::max(change, std::abs(finer[q] - current[q]));
    current = std::move(finer);
    M *= 2;
    if (change < options.tolerance) break;
  }
  if (!(change < options.tolerance))
    throw ConfigError("coefficient quadrature under-resolved: change " + std::to_string(change) + " at " +
                      std::to_string(M) + " points");

  CoeffMatrix c;
  c.n_max = n_max;
  c.square = square;
  c.theta_scale = theta_scale;
  c.points = M;
  c.last_change = change;
  c.values = std::move(current);
  return c;
}

double error_term_bound(int m, int k) {
  if (m <= 1) throw DomainError("error-term bookkeeping needs m >= 2");
  if (k <= kScaleGapMin) throw DomainError("scale gap must exceed 10");
  return std::ldexp(1.0, -(m - 1) * k);
}

}  // namespace tiletide
