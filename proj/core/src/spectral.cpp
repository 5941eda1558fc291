#include "tiletide/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "tiletide/error.hpp"

namespace tiletide {
namespace {

// FFTW's planner is not thread-safe; plans are cached per shape and executed on caller buffers.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, std::size_t cols, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(rows, cols, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<Complex> scratch(rows * cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rows == 1 ? fftw_plan_dft_1d(static_cast<int>(cols), buf, buf, sign, flags)
                               : fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                                                  sign, flags);
    if (plan == nullptr) throw ConfigError("FFT plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

void transform(std::vector<Complex>& data, std::size_t rows, std::size_t cols, int sign) {
  fftw_plan plan = plans().get(rows, cols, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

void require_same_grid(const GridSpec& a, const GridSpec& b) {
  if (!(a == b)) throw DomainError("grid mismatch");
}

}  // namespace

std::int64_t GridSpec::signed_bin(std::size_t m) const {
  const auto mm = static_cast<std::int64_t>(m);
  const auto nn = static_cast<std::int64_t>(n);
  return mm < (nn + 1) / 2 ? mm : mm - nn;
}

std::size_t GridSpec::slot(std::int64_t bin) const {
  const auto nn = static_cast<std::int64_t>(n);
  std::int64_t s = bin % nn;
  if (s < 0) s += nn;
  return static_cast<std::size_t>(s);
}

std::size_t GridSpec::cell(double x) const {
  const double t = std::floor((x - x0) / dx);
  if (t < 0) return 0;
  if (t >= static_cast<double>(n)) return n - 1;
  return static_cast<std::size_t>(t);
}

GridSpec make_grid(double x0, double dx, std::size_t n) {
  if (!(dx > 0) || !std::isfinite(dx)) throw ConfigError("grid spacing must be positive");
  if (n < 2) throw ConfigError("grid needs at least two samples");
  return GridSpec{x0, dx, n};
}

GridFunction::GridFunction(GridSpec grid, std::vector<Complex> samples)
    : grid_(grid), samples_(std::move(samples)) {
  if (samples_.size() != grid_.n) throw DomainError("sample count does not match grid");
  if (!(grid_.dx > 0)) throw DomainError("grid spacing must be positive");
}

GridFunction GridFunction::zeros(const GridSpec& grid) {
  return GridFunction(grid, std::vector<Complex>(grid.n));
}

GridFunction GridFunction::sample(const GridSpec& grid, const std::function<Complex(double)>& f) {
  std::vector<Complex> s(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) s[i] = f(grid.x(i));
  return GridFunction(grid, std::move(s));
}

Spectrum forward_dft(const GridFunction& f) {
  const GridSpec& g = f.grid();
  std::vector<Complex> data = f.samples();
  transform(data, 1, g.n, FFTW_FORWARD);
  for (std::size_t m = 0; m < g.n; ++m) {
    const double xi = g.bin_frequency(g.signed_bin(m));
    data[m] *= g.dx * std::polar(1.0, -2.0 * std::numbers::pi * xi * g.x0);
  }
  return Spectrum{g, std::move(data)};
}

GridFunction inverse_dft(const Spectrum& spectrum) {
  const GridSpec& g = spectrum.grid;
  if (spectrum.values.size() != g.n) throw DomainError("spectrum size does not match grid");
  std::vector<Complex> data(g.n);
  const double scale = 1.0 / g.length();
  for (std::size_t m = 0; m < g.n; ++m) {
    const double xi = g.bin_frequency(g.signed_bin(m));
    data[m] = spectrum.values[m] * scale * std::polar(1.0, 2.0 * std::numbers::pi * xi * g.x0);
  }
  transform(data, 1, g.n, FFTW_BACKWARD);
  return GridFunction(g, std::move(data));
}

Complex inner_product(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f.grid(), g.grid());
  Complex acc{};
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
  return acc * f.grid().dx;
}

Complex spectral_inner_product(const Spectrum& f, const Spectrum& g) {
  require_same_grid(f.grid, g.grid);
  Complex acc{};
  for (std::size_t i = 0; i < f.values.size(); ++i) acc += f.values[i] * std::conj(g.values[i]);
  return acc / f.grid.length();
}

double l2_norm(const GridFunction& f) { return std::sqrt(inner_product(f, f).real()); }

void fft2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols, int sign) {
  if (data.size() != rows * cols) throw DomainError("2-D transform shape mismatch");
  transform(data, rows, cols, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD);
}

GridSet GridSet::empty(const GridSpec& grid) { return GridSet{grid, std::vector<std::uint8_t>(grid.n, 0)}; }

GridSet GridSet::from_intervals(const GridSpec& grid, const std::vector<std::pair<double, double>>& intervals) {
  GridSet s = empty(grid);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    for (const auto& [a, b] : intervals) {
      if (a <= x && x < b) {
        s.mask[i] = 1;
        break;
      }
    }
  }
  return s;
}

std::size_t GridSet::count() const {
  std::size_t c = 0;
  for (auto v : mask) c += v ? 1 : 0;
  return c;
}

double GridSet::measure() const { return static_cast<double>(count()) * grid.dx; }

GridFunction GridSet::indicator() const {
  std::vector<Complex> s(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) s[i] = mask[i] ? 1.0 : 0.0;
  return GridFunction(grid, std::move(s));
}

GridSet GridSet::minus(const GridSet& other) const {
  require_same_grid(grid, other.grid);
  GridSet s = *this;
  for (std::size_t i = 0; i < grid.n; ++i) s.mask[i] = (mask[i] && !other.mask[i]) ? 1 : 0;
  return s;
}

GridSet GridSet::unite(const GridSet& other) const {
  require_same_grid(grid, other.grid);
  GridSet s = *this;
  for (std::size_t i = 0; i < grid.n; ++i) s.mask[i] = (mask[i] || other.mask[i]) ? 1 : 0;
  return s;
}

}  // namespace tiletide
