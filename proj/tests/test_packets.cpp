#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "tiletide/error.hpp"
#include "tiletide/packets.hpp"

using namespace tiletide;

namespace {

// Composite Simpson on [a, b] with an even panel count; test-local oracle.
template <class F>
double simpson(F&& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return acc * h / 3.0;
}

Tile tile_at(int scale, std::int64_t idx, std::int64_t fidx, Shift s = Shift::zero) {
  return make_tile(DyadicInterval{scale, idx, Shift::zero}, DyadicInterval{-scale, fidx, s});
}

}  // namespace

TEST(Smoothstep, EndpointsAndSymmetry) {
  for (int order : {2, 4, 8}) {
    EXPECT_DOUBLE_EQ(polynomial_smoothstep(0.0, order), 0.0);
    EXPECT_DOUBLE_EQ(polynomial_smoothstep(1.0, order), 1.0);
    for (double x : {0.1, 0.3, 0.45}) EXPECT_NEAR(polynomial_smoothstep(x, order) + polynomial_smoothstep(1 - x, order), 1.0, 1e-12);
  }
  EXPECT_EQ(smooth_step(-1.0), 0.0);
  EXPECT_EQ(smooth_step(2.0), 1.0);
  EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-15);
}

TEST(Profiles, PlateauShape) {
  const CutoffProfile a = CutoffProfile::plateau(8);
  EXPECT_EQ(a(0.0), 1.0);
  EXPECT_EQ(a(1.0), 1.0);
  EXPECT_EQ(a(-2.0), 0.0);
  EXPECT_EQ(a(1.5), a(-1.5));
  EXPECT_THROW(CutoffProfile::plateau(1), DomainError);
  double prev = 1.0;
  for (double x = 1.0; x <= 2.0; x += 0.01) {
    EXPECT_LE(a(x), prev + 1e-15);
    prev = a(x);
  }
}

TEST(Profiles, PlateauDerivativeMatchesFiniteDifference) {
  const CutoffProfile a = CutoffProfile::plateau(8);
  const double h = 1e-5;
  for (double x : {1.2, 1.5, 1.77})
    EXPECT_NEAR(a.derivative(x, 1), (a(x + h) - a(x - h)) / (2 * h), 1e-7);
}

TEST(Profiles, InverseTransformMatchesQuadrature) {
  for (const CutoffProfile& p : {CutoffProfile::plateau(6), CutoffProfile::autocorrelation(BumpParams{})}) {
    const double R = p.support_radius();
    for (double s : {0.0, 0.3, 1.7}) {
      // Panel pairs align with the tabulation nodes of the autocorrelation form.
      const double ref = simpson([&](double xi) { return p(xi) * std::cos(2 * std::numbers::pi * xi * s); }, -R, R,
                                 static_cast<int>(8192 * R));
      // The tabulated form carries an O(step^2) quadrature difference; the plateau form is closed up to rounding.
      const double tol = p.kind() == CutoffKind::plateau ? 1e-9 : 1e-5;
      EXPECT_NEAR(p.inverse_transform(s), ref, tol) << s;
    }
  }
}

TEST(Profiles, AutocorrelationHasUnitMassInUnitBall) {
  const CutoffProfile a = CutoffProfile::autocorrelation(BumpParams{});
  EXPECT_NEAR(simpson([&](double xi) { return a(xi); }, -1.0, 1.0, 8192), 1.0, 1e-9);
  EXPECT_EQ(a(0.3), a(-0.3));
  EXPECT_EQ(a(1.0), 0.0);
  EXPECT_GT(a(0.5), 0.0);
  EXPECT_LT(a.laplacian_at_zero(), 0.0);
}

TEST(Cutoffs, ThetaTelescopes) {
  // Property: the partial sums of theta_i(s) collapse to alpha(2^k1 s) - alpha(2^(N+1) s).
  const CutoffProfile a = CutoffProfile::plateau(8);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double s = u(rng);
    const int k1 = static_cast<int>(trial % 9) - 4;
    double sum = 0.0;
    for (int i = k1; i <= 6; ++i) sum += theta_scaled(a, i, s);
    EXPECT_NEAR(sum, a(std::ldexp(s, k1)) - a(std::ldexp(s, 7)), 1e-12);
  }
}

TEST(Cutoffs, ThetaVanishesNearOrigin) {
  const CutoffProfile a = CutoffProfile::plateau(8);
  for (int i : {-3, 0, 4}) {
    EXPECT_EQ(theta_scaled(a, i, std::ldexp(0.49, -i)), 0.0);
    EXPECT_EQ(theta_scaled(a, i, std::ldexp(2.01, -i)), 0.0);
  }
}

TEST(Cutoffs, GammaPartitionOfUnity) {
  std::vector<double> pts;
  for (int k = 0; k < 3001; ++k) pts.push_back(-5.0 + k * (10.0 / 3000));
  EXPECT_LE(partition_check(pts), 1e-10);
  EXPECT_EQ(gamma_bump(0.1), 0.0);
  EXPECT_GT(gamma_bump(0.5), 0.0);
}

TEST(Cutoffs, DecayExponentOfSmoothProfileIsLarge) {
  EXPECT_GT(fitted_decay_exponent(CutoffProfile::plateau(8), 4.0, 32.0), 6.0);
}

TEST(Packets, NormalizedAndFrequencyLocalized) {
  const GridSpec g = make_grid(-32.0, 1.0 / 64, 4096);
  for (const Tile& t : {tile_at(0, 0, 3), tile_at(-2, 1, -5, Shift::third), tile_at(1, -1, 2, Shift::two_thirds)}) {
    const GridFunction phi = wave_packet(g, t);
    EXPECT_NEAR(l2_norm(phi), 1.0, 1e-10);
    EXPECT_LE(spectral_leakage(phi, t), 1e-12);
    EXPECT_LE(verify_adapted(phi, t, 2.0).constant, 100.0);
  }
}

TEST(Packets, ModulationTranslatesByMultiplesOfLength) {
  const GridSpec g = make_grid(-32.0, 1.0 / 64, 4096);
  const Tile t = tile_at(-1, 0, 1);
  const GridFunction a = wave_packet(g, t, 0), b = wave_packet(g, t, 3);
  const std::size_t shift = 3 * 32;  // 3 |I| / dx
  for (std::size_t i = 0; i + shift < g.n; i += 7) EXPECT_NEAR(std::abs(b[i + shift]), std::abs(a[i]), 1e-12);
}

TEST(Packets, SpectralPairingMatchesSpatialInnerProduct) {
  const GridSpec g = make_grid(-16.0, 1.0 / 32, 1024);
  const Tile t = tile_at(0, 2, -3);
  const WavePacket pk = make_wave_packet(g, t);
  const GridFunction f = GridFunction::sample(g, [](double x) { return Complex(std::exp(-x * x / 9), std::sin(x)); });
  const Complex spatial = inner_product(f, pk.to_grid());
  const Complex spectral = pk.pair_with(forward_dft(f));
  EXPECT_NEAR(std::abs(spatial - spectral), 0.0, 1e-12);
}

TEST(Packets, CoarseGridIsRejected) {
  const GridSpec coarse = make_grid(-8.0, 0.25, 64);  // 4 samples per |I|
  EXPECT_THROW(make_wave_packet(coarse, tile_at(0, 0, 0)), ConfigError);
}

TEST(Maximal, DominatesAndAveragesIndicator) {
  const GridSpec g = make_grid(-8.0, 1.0 / 64, 1024);
  const GridFunction f = GridFunction::sample(g, [](double x) { return Complex(x >= 0 && x < 1 ? 1.0 : 0.0); });
  const GridFunction m = hl_maximal(f);
  for (std::size_t i = 0; i < g.n; ++i) EXPECT_GE(m[i].real() + 1e-15, std::abs(f[i]));
  // From x = 3 the radius-4 window holds the whole unit mass: 1 / 8.
  EXPECT_NEAR(m[g.cell(3.0)].real(), 1.0 / 8, 1e-2);
  const GridFunction one = GridFunction::sample(g, [](double) { return Complex(1.0); });
  EXPECT_NEAR(hl_maximal(one)[512].real(), 1.0, 1e-12);
}

TEST(Truncation, MaskKeepsLargeScales) {
  const GridSpec g = make_grid(0.0, 0.25, 16);
  const TruncationFunction n2 = TruncationFunction::step(g, 2.0, -1, 1);
  const auto keep0 = truncation_mask(n2, 0);
  EXPECT_EQ(keep0[0], 1);
  EXPECT_EQ(keep0[15], 0);
  const auto keep1 = truncation_mask(n2, 1);
  EXPECT_EQ(keep1[15], 1);
  const GridFunction f = GridFunction::sample(g, [](double) { return Complex(1.0); });
  const GridFunction t = truncate_function(f, 0, n2);
  EXPECT_EQ(t[3], Complex(1.0));
  EXPECT_EQ(t[12], Complex(0.0));
}
