#include "heston_deepcal/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "heston_deepcal/error.hpp"

namespace hdc {

namespace {

GaussLegendreRule compute_rule(std::size_t n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
        p0 = p1;
        p1 = p2;
      }
      dp = dn * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

std::shared_ptr<const GaussLegendreRule> gauss_legendre(std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidConfig, "Gauss-Legendre rule needs at least one node");
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const GaussLegendreRule>(compute_rule(n));
  return slot;
}

MappedRule gauss_legendre_on(std::size_t n, double a, double b) {
  const auto rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  MappedRule out;
  out.nodes.resize(n);
  out.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.nodes[i] = mid + half * rule->nodes[i];
    out.weights[i] = half * rule->weights[i];
  }
  return out;
}

}  // namespace hdc
