#pragma once

// Reference computations written independently of the library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 200000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// E[min(X, cap)] for X ~ Pareto(shape, scale), by integrating the density.
inline double clipped_pareto_mean(double shape, double scale, double cap) {
  auto density = [&](double x) { return shape * std::pow(scale, shape) / std::pow(x, shape + 1.0); };
  const double body = simpson([&](double x) { return x * density(x); }, scale, cap);
  const double tail = std::pow(scale / cap, shape);
  return body + cap * tail;
}

// M/M/1 queueing delay with arrival rate lam and service rate mu.
inline double mm1_wait(double lam, double mu) {
  const double rho = lam / mu;
  return rho / (mu - lam);
}

// Projection of (a, b) onto {x + y = 1, x, y >= 0} via the KKT conditions.
inline std::pair<double, double> project_two_simplex(double a, double b) {
  const double x = std::clamp((1.0 + a - b) / 2.0, 0.0, 1.0);
  return {x, 1.0 - x};
}

// Second moment of shift + Exp(rate), by integrating against the density.
inline double shifted_exp_second_moment(double shift, double rate) {
  const double upper = shift + 60.0 / rate;
  return simpson([&](double x) { return x * x * rate * std::exp(-rate * (x - shift)); }, shift, upper);
}

struct NetClass {
  double lambda;
  double mean;    // E[S2]
  double second;  // E[S2^2]
  double weight;  // coefficient of (W2 + S2) in the objective
};

// Networking-phase weighted objective sum_j weight_j (W2_j + S2_j) for a
// given priority order (indices into `classes`), from the non-preemptive
// priority M/G/1 mean-wait formula.
inline double priority_network_cost(const std::vector<NetClass>& classes, const std::vector<int>& order) {
  double residual = 0.0;
  for (const auto& c : classes) residual += c.lambda * c.second / 2.0;
  double above = 0.0;
  double cost = 0.0;
  for (int k : order) {
    const auto& c = classes[static_cast<std::size_t>(k)];
    const double through = above + c.lambda * c.mean;
    if (through >= 1.0) return INFINITY;
    cost += c.weight * (residual / ((1.0 - above) * (1.0 - through)) + c.mean);
    above = through;
  }
  return cost;
}

// Minimum cost over all orders, and every order achieving it within tol.
inline std::pair<double, std::vector<std::vector<int>>> best_orders(const std::vector<NetClass>& classes,
                                                                    double rel_tol = 1e-12) {
  std::vector<int> order(classes.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::pair<double, std::vector<int>>> all;
  do {
    all.emplace_back(priority_network_cost(classes, order), order);
  } while (std::next_permutation(order.begin(), order.end()));
  double best = INFINITY;
  for (const auto& [cost, _] : all) best = std::min(best, cost);
  std::vector<std::vector<int>> winners;
  for (const auto& [cost, o] : all)
    if (cost <= best * (1.0 + rel_tol)) winners.push_back(o);
  return {best, winners};
}

}  // namespace oracle
