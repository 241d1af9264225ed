#include "irkmg/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>
#include <numbers>

#include "irkmg/error.hpp"

namespace irkmg
{

void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights)
{
  require(n >= 1, "gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  // Returns (P_n(x), P_n'(x)).
  const auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; k++)
    {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };
  for (int i = 0; i < n; i++)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; it++)
    {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
      {
        break;
      }
    }
    const double dp = legendre(x).second;
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

const std::vector<QuadraturePoint> &triangle_rule(int degree)
{
  require(degree >= 0 && degree <= 40, "triangle_rule: unsupported degree");
  static std::mutex mutex;
  static std::map<int, std::vector<QuadraturePoint>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(degree);
  if (it != cache.end())
  {
    return it->second;
  }

  // Under xi = s, eta = t(1-s) a degree-d polynomial becomes degree d+1 in s (with the
  // Jacobian 1-s) and degree d in t.
  const int n = (degree + 3) / 2;
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  std::vector<QuadraturePoint> rule;
  rule.reserve(n * n);
  for (int i = 0; i < n; i++)
  {
    for (int j = 0; j < n; j++)
    {
      const double s = x[i], t = x[j];
      rule.push_back({s, t * (1.0 - s), w[i] * w[j] * (1.0 - s)});
    }
  }
  return cache.emplace(degree, std::move(rule)).first->second;
}

}  // namespace irkmg
