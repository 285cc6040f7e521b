#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace hdc {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rules are computed once per node count (Newton iteration on P_n) and cached;
// the returned rule is immutable and safe to share across threads.
std::shared_ptr<const GaussLegendreRule> gauss_legendre(std::size_t n);

// Nodes and weights mapped to [a, b].
struct MappedRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

MappedRule gauss_legendre_on(std::size_t n, double a, double b);

}  // namespace hdc
