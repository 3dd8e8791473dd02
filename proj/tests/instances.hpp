#pragma once

// Instance families shared by the unit and acceptance tests.

#include <algorithm>
#include <random>
#include <vector>

#include "aoisched/aoisched.hpp"

namespace fixtures {

using namespace aoisched;

// J=4 classes on Table I VMs 1 and 2 with small sizes, so every queue is
// moderately loaded and the shifted service has a short shift.
inline SystemConfig small_validation_config(MomentMode mode = MomentMode::Exact) {
  SystemConfig c;
  c.theta = 0.5;
  c.moment_mode = mode;
  c.aoi_weighting = AoiNetworkWeighting::Unweighted;
  const auto table = table_one_vms();
  c.vms = {table[0], table[1]};
  const double lambda[] = {0.06, 0.05, 0.04, 0.03};
  const double d[] = {0.2, 0.3, 0.4, 0.5};
  const double e[] = {0.04, 0.05, 0.06, 0.05};
  for (int j = 0; j < 4; ++j) c.classes.push_back({j + 1, lambda[j], std::nullopt, d[j], e[j], {}});
  return c;
}

// Cross-validation instance: like the one above but with output sizes on the
// same scale as compute sizes, so both phases take a few ms as in the
// evaluation setting. Networking runs at about 0.63, both VMs below 0.35.
inline SystemConfig balanced_validation_config(MomentMode mode = MomentMode::Exact) {
  auto c = small_validation_config(mode);
  const double lambda[] = {0.04, 0.035, 0.03, 0.025};
  const double e[] = {0.25, 0.2, 0.35, 0.3};
  for (std::size_t j = 0; j < 4; ++j) {
    c.classes[j].lambda = lambda[j];
    c.classes[j].e_size = e[j];
  }
  return c;
}

// Random family: J in [2, 8], V in [2, 5] Table I profiles, Pareto sizes,
// lambda_j proportional to 1 / (j + 1) scaled to a networking load in
// [0.3, 0.9], theta uniform in [0, 1].
inline SystemConfig random_instance(std::uint64_t seed, std::size_t max_classes = 8) {
  std::mt19937_64 rng(seed * 7919 + 17);
  std::uniform_int_distribution<std::size_t> classes(2, max_classes), vms(2, 5);
  std::uniform_real_distribution<double> load(0.3, 0.9), unit(0.0, 1.0);
  PaperStyleOptions o;
  o.classes = classes(rng);
  o.vms = vms(rng);
  o.network_load = load(rng);
  o.theta = unit(rng);
  o.seed = seed;
  auto c = make_paper_style_config(o);
  auto table = table_one_vms();
  std::shuffle(table.begin(), table.end(), rng);
  for (std::size_t v = 0; v < c.vms.size(); ++v) c.vms[v] = {static_cast<int>(v) + 1, table[v].alpha, table[v].beta};
  return c;
}

// Row-stochastic matrix with Dirichlet(1) rows.
inline Matrix random_schedule(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  Matrix p(rows, cols);
  for (std::size_t j = 0; j < rows; ++j) {
    double sum = 0.0;
    for (std::size_t v = 0; v < cols; ++v) sum += (p(j, v) = e(rng));
    for (std::size_t v = 0; v < cols; ++v) p(j, v) /= sum;
  }
  return p;
}

// Random schedules inside the stable region (every VM below 1 - margin).
inline std::vector<Matrix> random_stable_schedules(const SystemConfig& c, std::size_t count, std::uint64_t seed,
                                                   double margin = 1e-3) {
  std::mt19937_64 rng(seed);
  std::vector<Matrix> out;
  for (int attempt = 0; out.size() < count && attempt < 200000; ++attempt) {
    auto p = random_schedule(c.num_classes(), c.num_vms(), rng);
    if (stability_report(p, c, margin).stable) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace fixtures
