#include "heston_deepcal/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "heston_deepcal/error.hpp"
#include "heston_deepcal/parallel.hpp"
#include "heston_deepcal/random.hpp"

namespace hdc {

namespace {

double safe_eval(const Objective& objective, std::span<const double> x) {
  const double value = objective(x);
  return std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
}

}  // namespace

void Bounds::validate() const {
  if (lower.empty() || lower.size() != upper.size())
    fail(ErrorCode::InvalidConfig, "bounds need matching non-empty lower/upper vectors");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
      fail(ErrorCode::InvalidConfig, "bounds need finite lower <= upper on axis " + std::to_string(i));
  }
}

bool Bounds::contains(std::span<const double> x) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

void Bounds::clamp(std::span<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
}

void NmConfig::validate() const {
  if (!(expansion > reflection && reflection > contraction && contraction > 0.0 && contraction < 1.0))
    fail(ErrorCode::InvalidConfig, "Nelder-Mead needs expansion > reflection > contraction > 0");
  if (!(shrink > 0.0 && shrink < 1.0)) fail(ErrorCode::InvalidConfig, "Nelder-Mead shrink must lie in (0, 1)");
  if (max_iters == 0) fail(ErrorCode::InvalidConfig, "Nelder-Mead needs max_iters >= 1");
}

OptimResult nelder_mead(const Objective& objective, std::span<const double> start, const NmConfig& cfg,
                        const Bounds& bounds) {
  cfg.validate();
  bounds.validate();
  const std::size_t n = bounds.dim();
  if (start.size() != n) fail(ErrorCode::ShapeMismatch, "start point dimension does not match bounds");
  if (!bounds.contains(start)) fail(ErrorCode::InvalidConfig, "start point lies outside the bounds");

  OptimResult result;
  std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(start.begin(), start.end()));
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double width = bounds.upper[i] - bounds.lower[i];
    double step = 0.05 * width;
    if (simplex[i + 1][i] + step > bounds.upper[i]) step = -step;
    simplex[i + 1][i] += step;
  }
  auto eval = [&](std::span<const double> x) {
    ++result.evaluations;
    return safe_eval(objective, x);
  };
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), reflected(n), expanded(n), contracted(n);
  auto point_along = [&](double coeff, const std::vector<double>& from, std::vector<double>& out) {
    // centroid + coeff * (from - centroid), clamped
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coeff * (from[j] - centroid[j]);
    bounds.clamp(out);
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    double x_spread = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        x_spread = std::max(x_spread, std::fabs(simplex[i][j] - simplex[best][j]));
    const double f_spread = values[worst] - values[best];
    if (std::isfinite(values[best]) && (f_spread <= cfg.f_tol || x_spread <= cfg.x_tol)) {
      result.converged = true;
      break;
    }
    if (result.iterations >= cfg.max_iters) break;
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }

    point_along(-cfg.reflection, simplex[worst], reflected);
    const double f_reflected = eval(reflected);

    if (f_reflected < values[best]) {
      point_along(-cfg.expansion, simplex[worst], expanded);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
    } else if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
    } else {
      bool accepted = false;
      if (f_reflected < values[worst]) {
        point_along(cfg.contraction, reflected, contracted);
        const double f_contracted = eval(contracted);
        if (f_contracted <= f_reflected) {
          simplex[worst] = contracted;
          values[worst] = f_contracted;
          accepted = true;
        }
      } else {
        point_along(cfg.contraction, simplex[worst], contracted);
        const double f_contracted = eval(contracted);
        if (f_contracted < values[worst]) {
          simplex[worst] = contracted;
          values[worst] = f_contracted;
          accepted = true;
        }
      }
      if (!accepted) {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t j = 0; j < n; ++j)
            simplex[i][j] = simplex[best][j] + cfg.shrink * (simplex[i][j] - simplex[best][j]);
          values[i] = eval(simplex[i]);
        }
      }
    }
    result.best_history.push_back(*std::min_element(values.begin(), values.end()));
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.value = *best_it;
  return result;
}

DeStrategy parse_de_strategy(const std::string& name) {
  if (name == "rand1bin") return DeStrategy::Rand1Bin;
  if (name == "best1bin") return DeStrategy::Best1Bin;
  fail(ErrorCode::InvalidConfig, "unknown DE strategy '" + name + "' (rand1bin|best1bin)");
}

std::string to_string(DeStrategy strategy) {
  return strategy == DeStrategy::Rand1Bin ? "rand1bin" : "best1bin";
}

void DeConfig::validate() const {
  if (pop_size < 8) fail(ErrorCode::InvalidConfig, "DE population must be >= 8");
  if (!(f_weight >= 0.0) || !std::isfinite(f_weight)) fail(ErrorCode::InvalidConfig, "DE weight F must be >= 0");
  if (!(crossover >= 0.0 && crossover <= 1.0)) fail(ErrorCode::InvalidConfig, "DE crossover must lie in [0, 1]");
  if (max_gens == 0) fail(ErrorCode::InvalidConfig, "DE needs max_gens >= 1");
  if (!(tol >= 0.0)) fail(ErrorCode::InvalidConfig, "DE tol must be >= 0");
}

std::vector<double> de_mutant(std::span<const double> a, std::span<const double> b, std::span<const double> c,
                              double f_weight) {
  if (a.size() != b.size() || a.size() != c.size())
    fail(ErrorCode::ShapeMismatch, "DE mutation vectors differ in length");
  std::vector<double> out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + f_weight * (b[j] - c[j]);
  return out;
}

OptimResult differential_evolution(const Objective& objective, const Bounds& bounds, const DeConfig& cfg) {
  cfg.validate();
  bounds.validate();
  const std::size_t dim = bounds.dim();
  const std::size_t np = cfg.pop_size;
  CounterRng rng(cfg.seed, 0xDE);

  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  for (auto& member : pop)
    for (std::size_t j = 0; j < dim; ++j) member[j] = rng.uniform(bounds.lower[j], bounds.upper[j]);

  OptimResult result;
  std::vector<double> fitness(np);
  auto evaluate_all = [&](const std::vector<std::vector<double>>& points, std::vector<double>& out) {
    parallel_for(
        points.size(),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) out[i] = safe_eval(objective, points[i]);
        },
        cfg.threads);
    result.evaluations += points.size();
  };
  evaluate_all(pop, fitness);

  auto best_index = [&] {
    return static_cast<std::size_t>(std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
  };
  auto spread = [&] {
    const auto [lo, hi] = std::minmax_element(fitness.begin(), fitness.end());
    return *hi - *lo;
  };

  std::vector<std::vector<double>> trials(np, std::vector<double>(dim));
  std::vector<double> trial_fitness(np);
  while (true) {
    const double current_spread = spread();
    if (current_spread < cfg.tol || (cfg.tol == 0.0 && current_spread == 0.0)) {
      result.converged = true;
      break;
    }
    if (result.iterations >= cfg.max_gens) break;
    ++result.iterations;

    const std::size_t best = best_index();
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t a = best;
      if (cfg.strategy == DeStrategy::Rand1Bin) {
        do a = rng.below(np);
        while (a == i);
      }
      std::size_t b, c;
      do b = rng.below(np);
      while (b == i || b == a);
      do c = rng.below(np);
      while (c == i || c == a || c == b);

      const auto mutant = de_mutant(pop[a], pop[b], pop[c], cfg.f_weight);
      const std::size_t forced = rng.below(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        const bool take = rng.uniform() < cfg.crossover || j == forced;
        double value = take ? mutant[j] : pop[i][j];
        if (value < bounds.lower[j] || value > bounds.upper[j])
          value = rng.uniform(bounds.lower[j], bounds.upper[j]);
        trials[i][j] = value;
      }
    }
    evaluate_all(trials, trial_fitness);
    for (std::size_t i = 0; i < np; ++i) {
      if (trial_fitness[i] <= fitness[i]) {
        pop[i] = trials[i];
        fitness[i] = trial_fitness[i];
      }
    }
    result.best_history.push_back(fitness[best_index()]);
  }

  const std::size_t best = best_index();
  result.x = pop[best];
  result.value = fitness[best];
  return result;
}

}  // namespace hdc
