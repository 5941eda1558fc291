#include "tiletide/operators.hpp"

#include <algorithm>
#include <cmath>

#include "tiletide/error.hpp"

namespace tiletide {
namespace {

constexpr std::size_t kKernelTable = 4096;

struct Nodes {
  double step = 0.0;
  std::int64_t half = 0;  // nodes at j * step for |j| <= half
};

// Smallest step dx * 2^j with 2 * extent / step <= max_nodes - 1.
Nodes plan_nodes(double extent, double dx, std::size_t max_nodes) {
  if (max_nodes < 3) throw ConfigError("quadrature needs at least three nodes per axis");
  if (extent < dx) throw DomainError("averaging radius is smaller than one grid cell");
  double step = dx;
  while (2.0 * extent / step > static_cast<double>(max_nodes - 1)) step *= 2.0;
  return Nodes{step, static_cast<std::int64_t>(std::floor(extent / step + 1e-9))};
}

void check_shared(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3) {
  if (!(f1.grid() == f2.grid()) || !(f1.grid() == f3.grid())) throw DomainError("inputs must share one grid");
}

// sum_{j1, j2} v1[j1] v3[j2] b[j1 + j2] over symmetric node sets; v carries the quadrature weights.
double box_sum(const std::vector<double>& v1, const std::vector<double>& v3, const std::vector<double>& b,
               std::int64_t h1, std::int64_t h2) {
  double total = 0.0;
  for (std::int64_t j1 = -h1; j1 <= h1; ++j1) {
    const double a = v1[static_cast<std::size_t>(j1 + h1)];
    if (a == 0.0) continue;
    double row = 0.0;
    const std::size_t base = static_cast<std::size_t>(j1 + h1);
    for (std::int64_t j2 = -h2; j2 <= h2; ++j2) {
      const std::size_t k = static_cast<std::size_t>(j2 + h2);
      row += v3[k] * b[base + k];
    }
    total += a * row;
  }
  return total;
}

// Samples |f1(x - s)| w(s), |f3(x - t)| w(t) and |f2(x + m step)| for |m| <= h1 + h2.
template <class W1, class W2>
double integrate(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, double x, const Nodes& n1,
                 const Nodes& n2, W1 weight1, W2 weight2) {
  if (n1.step != n2.step) {
    // Equal steps keep x + s + t on the shared lattice; refine the coarser axis.
    const double step = std::min(n1.step, n2.step);
    Nodes a{step, static_cast<std::int64_t>(std::llround(static_cast<double>(n1.half) * n1.step / step))};
    Nodes b{step, static_cast<std::int64_t>(std::llround(static_cast<double>(n2.half) * n2.step / step))};
    return integrate(f1, f2, f3, x, a, b, weight1, weight2);
  }
  const double step = n1.step;
  std::vector<double> v1(static_cast<std::size_t>(2 * n1.half + 1));
  std::vector<double> v3(static_cast<std::size_t>(2 * n2.half + 1));
  for (std::int64_t j = -n1.half; j <= n1.half; ++j) {
    const double s = static_cast<double>(j) * step;
    const double edge = (j == -n1.half || j == n1.half) ? 0.5 : 1.0;
    v1[static_cast<std::size_t>(j + n1.half)] = edge * weight1(s) * abs_at(f1, x - s);
  }
  for (std::int64_t j = -n2.half; j <= n2.half; ++j) {
    const double t = static_cast<double>(j) * step;
    const double edge = (j == -n2.half || j == n2.half) ? 0.5 : 1.0;
    v3[static_cast<std::size_t>(j + n2.half)] = edge * weight2(t) * abs_at(f3, x - t);
  }
  const std::int64_t reach = n1.half + n2.half;
  std::vector<double> b(static_cast<std::size_t>(2 * reach + 1));
  for (std::int64_t m = -reach; m <= reach; ++m)
    b[static_cast<std::size_t>(m + reach)] = abs_at(f2, x + static_cast<double>(m) * step);
  return box_sum(v1, v3, b, n1.half, n2.half) * step * step;
}

double normalization(AveragingConvention c) { return c == AveragingConvention::printed ? 1.0 : 0.25; }

void check_range(const ScaleRange& r) {
  if (r.k_min > r.k_max) throw DomainError("empty scale range");
}

}  // namespace

double abs_at(const GridFunction& f, double x) {
  const GridSpec& g = f.grid();
  const double u = (x - g.x0) / g.dx;
  const double fl = std::floor(u);
  if (fl < 0.0 || fl > static_cast<double>(g.n - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(fl);
  const double frac = u - fl;
  const double left = std::abs(f[i]);
  if (frac == 0.0 || i + 1 >= g.n) return frac == 0.0 ? left : 0.0;
  return left + frac * (std::abs(f[i + 1]) - left);
}

double direct_T(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, int k1, int k2, double x,
                const QuadratureOptions& options) {
  check_shared(f1, f2, f3);
  const double h1 = std::ldexp(1.0, k1);
  const double h2 = std::ldexp(1.0, k2);
  const Nodes n1 = plan_nodes(h1, f1.grid().dx, options.max_nodes);
  const Nodes n2 = plan_nodes(h2, f1.grid().dx, options.max_nodes);
  const auto one = [](double) { return 1.0; };
  return normalization(options.convention) * integrate(f1, f2, f3, x, n1, n2, one, one) / (h1 * h2);
}

double direct_Tstar(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, double x,
                    const ScaleRange& range, const QuadratureOptions& options) {
  check_range(range);
  double best = 0.0;
  for (int k1 = range.k_min; k1 <= range.k_max; ++k1)
    for (int k2 = range.k_min; k2 <= range.k_max; ++k2) best = std::max(best, direct_T(f1, f2, f3, k1, k2, x, options));
  return best;
}

SmoothingKernel SmoothingKernel::from_profile(const CutoffProfile& profile, double cutoff) {
  SmoothingKernel k;
  k.profile = profile;
  k.w0 = profile.inverse_transform(0.0);
  if (!(k.w0 > 0.0)) throw DomainError("smoothing weight must be positive at the origin");
  // Radius: smallest power of two past which sampled |w| stays below cutoff * w(0) up to 8x further out.
  for (double r = 1.0; r <= 256.0; r *= 2.0) {
    bool small = true;
    for (int i = 0; i <= 512 && small; ++i) {
      const double s = r * (1.0 + 7.0 * i / 512.0);
      small = std::abs(profile.inverse_transform(s)) < cutoff * k.w0;
    }
    if (small) {
      k.radius = r;
      break;
    }
    k.radius = 2.0 * r;
  }
  k.table.resize(kKernelTable + 1);
  for (std::size_t i = 0; i <= kKernelTable; ++i)
    k.table[i] = profile.inverse_transform(k.radius * static_cast<double>(i) / kKernelTable);
  return k;
}

double SmoothingKernel::operator()(double s) const {
  const double u = std::abs(s) / radius * kKernelTable;
  if (u >= static_cast<double>(kKernelTable)) return 0.0;
  if (table.empty()) return profile.inverse_transform(s);
  const auto i = static_cast<std::size_t>(u);
  const double frac = u - static_cast<double>(i);
  return table[i] + frac * (table[i + 1] - table[i]);
}

double smoothed_T(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, int k1, int k2, double x,
                  const SmoothingKernel& w1, const SmoothingKernel& w2, const QuadratureOptions& options) {
  check_shared(f1, f2, f3);
  const double h1 = std::ldexp(1.0, k1);
  const double h2 = std::ldexp(1.0, k2);
  const Nodes n1 = plan_nodes(w1.radius * h1, f1.grid().dx, options.max_nodes);
  const Nodes n2 = plan_nodes(w2.radius * h2, f1.grid().dx, options.max_nodes);
  return integrate(
             f1, f2, f3, x, n1, n2, [&](double s) { return w1(s / h1); }, [&](double t) { return w2(t / h2); }) /
         (h1 * h2);
}

double smoothed_Tstar(const GridFunction& f1, const GridFunction& f2, const GridFunction& f3, double x,
                      const SmoothingKernel& w1, const SmoothingKernel& w2, const ScaleRange& range,
                      const QuadratureOptions& options) {
  check_range(range);
  double best = 0.0;
  for (int k1 = range.k_min; k1 <= range.k_max; ++k1)
    for (int k2 = range.k_min; k2 <= range.k_max; ++k2)
      best = std::max(best, smoothed_T(f1, f2, f3, k1, k2, x, w1, w2, options));
  return best;
}

Majorization majorization_constant(const SmoothingKernel& w1, const SmoothingKernel& w2,
                                   AveragingConvention convention) {
  const auto min_on = [](const SmoothingKernel& w, double r) {
    double m = w(0.0);
    for (int i = 1; i <= 2048; ++i) m = std::min(m, w(r * i / 2048.0));
    return m;
  };
  for (int c = 0; c <= 20; ++c) {
    const double r = std::ldexp(1.0, -c);
    const double a = min_on(w1, r);
    const double b = min_on(w2, r);
    if (a > 0.0 && b > 0.0 && a * b >= 0.5) {
      const double constant = 2.0 * std::ldexp(1.0, 2 * c) * normalization(convention);
      return Majorization{c, constant, a * b};
    }
  }
  throw SearchError("smoothing weights stay below 1/2 near the origin");
}

}  // namespace tiletide
