#pragma once

#include <vector>

namespace tiletide {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussRule& gauss_legendre(int points);

template <class F>
double gauss_legendre_integral(F&& f, double a, double b, int points = 20) {
  const GaussRule& rule = gauss_legendre(points);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return acc * half;
}

template <class F>
double gauss_legendre_composite(F&& f, double a, double b, int panels, int points = 16) {
  double acc = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) acc += gauss_legendre_integral(f, a + p * h, a + (p + 1) * h, points);
  return acc;
}

}  // namespace tiletide
