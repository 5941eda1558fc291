#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace tiletide {

using Complex = std::complex<double>;

// Uniform periodic sample lattice x_n = x0 + n*dx, n = 0..n-1.
struct GridSpec {
  double x0 = 0.0;
  double dx = 1.0;
  std::size_t n = 2;

  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double length() const { return static_cast<double>(n) * dx; }
  // Signed bin number of FFT slot m: m for m < n/2, m - n otherwise.
  std::int64_t signed_bin(std::size_t m) const;
  std::size_t slot(std::int64_t bin) const;
  double bin_frequency(std::int64_t bin) const { return static_cast<double>(bin) / length(); }
  double nyquist() const { return 0.5 / dx; }
  // Cell containing x, clamped to the grid.
  std::size_t cell(double x) const;
  bool operator==(const GridSpec& other) const = default;
};

GridSpec make_grid(double x0, double dx, std::size_t n);

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(GridSpec grid, std::vector<Complex> samples);

  static GridFunction zeros(const GridSpec& grid);
  static GridFunction sample(const GridSpec& grid, const std::function<Complex(double)>& f);

  const GridSpec& grid() const { return grid_; }
  const std::vector<Complex>& samples() const { return samples_; }
  std::vector<Complex>& samples() { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const Complex& operator[](std::size_t i) const { return samples_[i]; }
  Complex& operator[](std::size_t i) { return samples_[i]; }

 private:
  GridSpec grid_{};
  std::vector<Complex> samples_;
};

// Continuous-transform samples F(xi_m) ~ dx * sum_n f_n exp(-2 pi i xi_m x_n), FFT slot order.
struct Spectrum {
  GridSpec grid{};
  std::vector<Complex> values;
};

Spectrum forward_dft(const GridFunction& f);
GridFunction inverse_dft(const Spectrum& spectrum);

// dx * sum f * conj(g).
Complex inner_product(const GridFunction& f, const GridFunction& g);
// (1/(n dx)) * sum F * conj(G); equals inner_product of the inverse transforms.
Complex spectral_inner_product(const Spectrum& f, const Spectrum& g);

double l2_norm(const GridFunction& f);

// In-place 2-D transform of a row-major rows x cols array; sign -1 forward, +1 backward, unnormalized.
void fft2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols, int sign);

// Finite union of grid cells [x_n, x_n + dx).
struct GridSet {
  GridSpec grid{};
  std::vector<std::uint8_t> mask;

  static GridSet empty(const GridSpec& grid);
  // Cells whose left endpoint lies in [a, b).
  static GridSet from_intervals(const GridSpec& grid, const std::vector<std::pair<double, double>>& intervals);

  double measure() const;
  std::size_t count() const;
  GridFunction indicator() const;
  GridSet minus(const GridSet& other) const;
  GridSet unite(const GridSet& other) const;
};

}  // namespace tiletide
