#include "tiletide/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "tiletide/error.hpp"

namespace tiletide {

const GaussRule& gauss_legendre(int points) {
  if (points < 1 || points > 128) throw DomainError("Gauss-Legendre order out of range");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(points));
  rule.weights.resize(static_cast<std::size_t>(points));
  const int n = points;
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pm = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(points, std::move(rule)).first->second;
}

}  // namespace tiletide
