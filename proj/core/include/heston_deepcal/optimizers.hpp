#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hdc {

// Objective over a box. Must be safe to call concurrently.
using Objective = std::function<double(std::span<const double>)>;

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
  // Equal sizes, finite, lower <= upper componentwise (a collapsed axis is allowed).
  void validate() const;
  bool contains(std::span<const double> x) const;
  void clamp(std::span<double> x) const;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> best_history;  // best objective after each iteration/generation
};

struct NmConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  std::size_t max_iters = 5000;
  double x_tol = 1e-10;  // max vertex distance (inf-norm) from the best vertex
  double f_tol = 1e-14;  // spread of vertex values

  void validate() const;
};

// Downhill simplex. The initial simplex is start plus 5% of each bound width
// per axis (stepping inward when the upper bound would be crossed). Trial
// points are clamped into the box. Stops when either the value spread drops
// to f_tol or the simplex shrinks below x_tol (converged = true), or after
// max_iters iterations (converged = false).
OptimResult nelder_mead(const Objective& objective, std::span<const double> start, const NmConfig& cfg,
                        const Bounds& bounds);

enum class DeStrategy { Rand1Bin, Best1Bin };

DeStrategy parse_de_strategy(const std::string& name);
std::string to_string(DeStrategy strategy);

struct DeConfig {
  std::size_t pop_size = 40;
  double f_weight = 0.8;
  double crossover = 0.9;
  DeStrategy strategy = DeStrategy::Rand1Bin;
  std::size_t max_gens = 200;
  double tol = 1e-12;  // stop when max - min population objective falls below this
  std::uint64_t seed = 7;
  std::size_t threads = 0;

  void validate() const;
};

// a + F (b - c)
std::vector<double> de_mutant(std::span<const double> a, std::span<const double> b,
                              std::span<const double> c, double f_weight);

// Synchronous DE: every trial of a generation is built from the previous
// population, evaluated (possibly in parallel), then replaces its target when
// f(trial) <= f(target). Out-of-box trial coordinates are redrawn uniformly
// inside the box. All random draws happen on the calling thread in a fixed
// order, so results do not depend on the worker count.
OptimResult differential_evolution(const Objective& objective, const Bounds& bounds, const DeConfig& cfg);

}  // namespace hdc
