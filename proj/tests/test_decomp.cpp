#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tiletide/decomp.hpp"
#include "tiletide/error.hpp"

using namespace tiletide;

namespace {

const CutoffProfile& alpha() {
  static const CutoffProfile a = CutoffProfile::plateau(8);
  return a;
}

CoeffMatrix matrix(int i, Shift s) {
  return fourier_coeffs(SquareSpec{-i - 3, 1000, 1010, s}, i, alpha(), default_square_window(), default_square_window());
}

// 2-D composite Simpson of the coefficient integral; test-local oracle.
Complex direct_coefficient(const SquareSpec& q, int i, int n1, int n2, int panels) {
  const double rho = to_double(shift_value(q.offset));
  const double h = 1.0 / panels;
  const auto w = [](int k, int n) { return (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0); };
  Complex acc{};
  for (int a = 0; a <= panels; ++a)
    for (int b = 0; b <= panels; ++b) {
      const double e1 = a * h, e2 = b * h;
      const double f = coefficient_integrand(q, i, alpha(), default_square_window(), default_square_window(), e1, e2);
      if (f == 0.0) continue;
      acc += w(a, panels) * w(b, panels) * f *
             std::polar(1.0, -2 * std::numbers::pi * (n1 * (rho + e1) + n2 * (rho + e2)));
    }
  return acc * (h * h / 9.0);
}

// phi_j(t) = beta(2^j t) - beta(2^(j+1) t), straight from the profile.
double phi_j(int j, double t) { return alpha()(std::ldexp(t, j)) - alpha()(std::ldexp(t, j + 1)); }

}  // namespace

TEST(Coefficients, MatchDirectQuadrature) {
  for (Shift s : {Shift::zero, Shift::third}) {
    const CoeffMatrix m = matrix(4, s);
    for (auto [n1, n2] : {std::pair{0, 0}, {1, -2}, {3, 5}}) {
      const Complex ref = direct_coefficient(m.square, 4, n1, n2, 600);
      EXPECT_NEAR(std::abs(m.at(n1, n2) - ref), 0.0, 1e-10) << n1 << "," << n2;
    }
  }
}

TEST(Coefficients, DecayFasterThanSixthPower) {
  for (Shift s : {Shift::zero, Shift::third, Shift::two_thirds}) EXPECT_GT(matrix(4, s).decay_exponent(4, 32), 6.0);
}

TEST(Coefficients, ScaleInvariantAcrossFiveScales) {
  const CoeffMatrix a = matrix(3, Shift::two_thirds), b = matrix(8, Shift::two_thirds);
  for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_NEAR(std::abs(a.values[k] - b.values[k]), 0.0, 1e-8);
}

TEST(Coefficients, SeriesReconstructsIntegrand) {
  const CoeffMatrix m = matrix(5, Shift::third);
  for (double e1 : {0.15, 0.4, 0.5, 0.83})
    for (double e2 : {0.2, 0.5, 0.61}) {
      const double ref = coefficient_integrand(m.square, 5, alpha(), default_square_window(), default_square_window(), e1, e2);
      EXPECT_NEAR(std::abs(m.reconstruct(e1, e2) - ref), 0.0, 1e-8);
    }
}

TEST(Coefficients, ErrorTermBound) {
  EXPECT_DOUBLE_EQ(error_term_bound(3, 11), std::ldexp(1.0, -22));
  EXPECT_THROW(error_term_bound(1, 11), DomainError);
}

TEST(Taylor, TermsMatchFiniteDifferences) {
  const double h = 1e-4;
  for (int j : {0, 2}) {
    const double t = std::ldexp(0.7, -j);
    const double fd1 = (phi_j(j, t + h) - phi_j(j, t - h)) / (2 * h);
    EXPECT_NEAR(carved_derivative(alpha(), j, 1, t), fd1, 1e-5 * std::ldexp(1.0, 2 * j));
    EXPECT_NEAR(carved_derivative(alpha(), j, 0, t), phi_j(j, t), 1e-15);
    EXPECT_NEAR(carving_term(alpha(), j, 2, 0.3, t), 0.0225 / 2 * carved_derivative(alpha(), j, 2, t), 1e-12);
  }
}

TEST(Taylor, TargetIsTheShiftedCarvedCutoff) {
  const TaylorCarving c = taylor_carve(alpha(), 14, 2, 1);
  for (std::size_t a = 0; a < c.delta.size(); a += 7)
    for (std::size_t b = 0; b < c.u.size(); b += 13)
      EXPECT_NEAR(c.target[a * c.u.size() + b], phi_j(2, c.u[b] + c.delta[a] / 2), 1e-14);
}

TEST(Taylor, ReconstructionAndRemainderScaling) {
  for (int order : {0, 1, 2}) {
    const TaylorCarving g12 = taylor_carve(alpha(), 14, 2, order);
    const TaylorCarving g16 = taylor_carve(alpha(), 18, 2, order);
    EXPECT_LE(g12.reconstruction_residual(), 1e-9);
    EXPECT_LE(g16.reconstruction_residual(), 1e-9);
    const double ratio = g12.remainder_sup() / g16.remainder_sup();
    const double expected = std::ldexp(1.0, 4 * (order + 1));
    EXPECT_GT(ratio, expected / 2);
    EXPECT_LT(ratio, expected * 2);
  }
}

TEST(Taylor, DerivativeIdentity) {
  for (int j : {1, 3}) EXPECT_LE(derivative_identity_residual(alpha(), j, 2), 1e-5);
}

TEST(Taylor, SymbolDerivativesScaleUniformly) {
  const auto a = symbol_derivative_scaling(alpha(), 14, 2, 1);
  const auto b = symbol_derivative_scaling(alpha(), 18, 2, 1);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].d_delta, b[k].d_delta);
    EXPECT_LT(b[k].normalized_sup, 4 * a[k].normalized_sup + 1e-12);
    EXPECT_LT(a[k].normalized_sup, 4 * b[k].normalized_sup + 1e-12);
  }
}
