#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tiletide/grid.hpp"
#include "tiletide/packets.hpp"

namespace tiletide {

// Sample counts for the (delta, u) box, delta = xi1 - xi2, u = xi3 - (xi1 + xi2)/2.
struct CarvingGrid {
  std::size_t delta_samples = 48;
  std::size_t u_samples = 241;
};

// Expansion of phi_j(xi3 - xi2) = phi_j(u + delta/2) about u, with phi = beta - beta(2.).
struct TaylorCarving {
  int order = 0;
  int i = 0;
  int j = 0;
  std::vector<double> delta;  // both bands of supp theta_i
  std::vector<double> u;
  // terms[m][a * u.size() + b] = (delta_a/2)^m / m! * phi_j^(m)(u_b).
  std::vector<std::vector<double>> terms;
  // Integral-form Taylor remainder, evaluated independently of the terms.
  std::vector<double> remainder;
  std::vector<double> target;
  // max over m of sup |phi*_{m,j}|.
  double starred_bound = 0.0;

  double term_sup(int m) const;
  double remainder_sup() const;
  double target_sup() const;
  // max |target - sum terms - remainder| / sup |target|.
  double reconstruction_residual() const;
};

// phi_j^(m)(t) = 2^(jm) phi^(m)(2^j t) for phi(t) = beta(t) - beta(2t).
double carved_derivative(const CutoffProfile& beta, int j, int m, double t);
// (delta/2)^m / m! * phi_j^(m)(u).
double carving_term(const CutoffProfile& beta, int j, int m, double delta, double u);

TaylorCarving taylor_carve(const CutoffProfile& beta, int i, int j, int order, const CarvingGrid& grid = {});

// max |finite-difference phi_j^(m) - 2^(jm) phi*_{m,j}| relative to sup, for m = 1, 2.
double derivative_identity_residual(const CutoffProfile& beta, int j, int order);

struct SymbolDerivative {
  int d_delta = 0;
  int d_u = 0;
  // sup |d^a_delta d^b_u tau| * 2^(-(a i + b j)).
  double normalized_sup = 0.0;
};

// Finite-difference derivatives (order <= 2) of tau = theta*_{i,m}(delta) phi*_{m,j}(u).
std::vector<SymbolDerivative> symbol_derivative_scaling(const CutoffProfile& beta, int i, int j, int m);

// Square Q = omega_1 x omega_2 with side 2^scale; omega_t = 2^scale (index_t + offset + (0,1)).
// offset is the realized fractional position, not a sign-twisted mesh shift.
struct SquareSpec {
  int scale = 0;
  std::int64_t index1 = 0;
  std::int64_t index2 = 0;
  Shift offset = Shift::zero;

  double side() const;
  double lo(int t) const;
};

struct CoeffOptions {
  int n_max = 32;
  std::size_t min_points = 64;
  std::size_t max_points = 1024;
  double tolerance = 1e-9;
};

// Window on the normalized coordinate eta in [0, 1].
using SquareWindow = std::function<double(double)>;

SquareWindow default_square_window();

struct CoeffMatrix {
  int n_max = 0;
  SquareSpec square{};
  int theta_scale = 0;
  std::size_t points = 0;
  double last_change = 0.0;
  std::vector<Complex> values;  // (2 n_max + 1)^2, n1-major

  Complex at(int n1, int n2) const;
  // max |C| over max(|n1|, |n2|) == R.
  double ring_max(int R) const;
  // Fourier series value at xi_t = lo_t + side * eta_t.
  Complex reconstruct(double eta1, double eta2) const;
  // -slope of log ring_max against log R on [r_lo, r_hi]; +inf if fewer than two rings clear the floor.
  double decay_exponent(int r_lo, int r_hi, double floor = 1e-13) const;
};

CoeffMatrix fourier_coeffs(const SquareSpec& square, int theta_scale, const CutoffProfile& alpha,
                           const SquareWindow& w1, const SquareWindow& w2, const CoeffOptions& options = {});

// theta_i(xi2 - xi1) w1(eta1) w2(eta2) at xi_t = lo_t + side * eta_t.
double coefficient_integrand(const SquareSpec& square, int theta_scale, const CutoffProfile& alpha,
                             const SquareWindow& w1, const SquareWindow& w2, double eta1, double eta2);

// 2^k * 2^(-mk) = 2^(-(m-1)k); m >= 2, k > 10.
double error_term_bound(int m, int k);

}  // namespace tiletide
