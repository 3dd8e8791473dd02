// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (capped at 125).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../instances.hpp"
#include "../oracles.hpp"
#include "aoisched/aoisched.hpp"

using namespace aoisched;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto ex = run_tradeoff_example();
  const double secs = seconds_since(t0);
  const bool ok = std::abs(ex.policy1.weighted_aoi - 27.55) <= 1e-9 && std::abs(ex.policy2.weighted_aoi - 32.05) <= 1e-9 &&
                  std::abs(ex.policy1.weighted_completion - 77.55) <= 1e-9 &&
                  std::abs(ex.policy2.weighted_completion - 57.05) <= 1e-9 && secs < 1.0;
  return {ok, fmt("ages %.12g vs %.12g, completions %.12g vs %.12g, %.3f s", ex.policy1.weighted_aoi,
                  ex.policy2.weighted_aoi, ex.policy1.weighted_completion, ex.policy2.weighted_completion, secs)};
}

// ---------------------------------------------------------------- 2 and 10

struct CrossValidation {
  SystemConfig config;
  ScheduleMatrix schedule;
  SimResult sim;
  double max_intensity = 0.0;
  double seconds = 0.0;
};

const CrossValidation& cross_validation() {
  static const CrossValidation cv = [] {
    CrossValidation out;
    out.config = fixtures::balanced_validation_config(MomentMode::Exact);
    out.schedule = optimize_pps(out.config).schedule;
    const auto st = stability_report(out.schedule, out.config, 0.0);
    for (double r : st.vm_intensity) out.max_intensity = std::max(out.max_intensity, r);
    out.max_intensity = std::max(out.max_intensity, st.network_intensity);
    SimConfig sim;
    sim.horizon = 1e6;
    sim.replications = 10;
    sim.seed = 2024;
    const auto t0 = Clock::now();
    out.sim = run_simulation(out.config, out.schedule, sim);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return cv;
}

struct MetricCheck {
  int failures = 0;
  int compute_stage_failures = 0;  // W1, S1, S2 only
  std::string missed;
  double worst_ratio = 0.0;  // |error| / allowed
  std::string worst;
};

void check_metric(MetricCheck& m, const std::string& name, int id, const Estimate& e, double analytic, double rel) {
  const double allowed = std::max(3.0 * e.std_error, rel * std::abs(analytic));
  const double err = std::abs(e.mean - analytic);
  const double ratio = allowed > 0.0 ? err / allowed : (err > 0.0 ? INFINITY : 0.0);
  if (ratio > 1.0) {
    ++m.failures;
    if (name != "W2" && name != "A" && name != "C") ++m.compute_stage_failures;
    m.missed += (m.missed.empty() ? "" : " ") + name + std::to_string(id);
  }
  if (ratio > m.worst_ratio) {
    m.worst_ratio = ratio;
    m.worst = fmt("%s class %d: sim %.4g vs analytic %.4g", name.c_str(), id, e.mean, analytic);
  }
}

MetricCheck compare_to_analytics(const CrossValidation& cv, MomentMode mode) {
  auto config = cv.config;
  config.moment_mode = mode;
  const auto report = analyze(cv.schedule, config);
  MetricCheck m;
  for (std::size_t j = 0; j < config.num_classes(); ++j) {
    const auto& s = cv.sim.classes[j];
    const auto& a = report.classes[j];
    check_metric(m, "W1", a.id, s.wait_compute, a.wait_compute, 0.05);
    check_metric(m, "S1", a.id, s.service_compute, a.service_compute, 0.05);
    check_metric(m, "S2", a.id, s.service_network, a.service_network, 0.05);
    check_metric(m, "W2", a.id, s.wait_network, a.wait_network, 0.15);
    check_metric(m, "A", a.id, s.aoi, a.aoi, 0.15);
    check_metric(m, "C", a.id, s.completion, a.completion, 0.15);
  }
  return m;
}

Outcome criterion2() {
  const auto& cv = cross_validation();
  const auto m = compare_to_analytics(cv, MomentMode::Exact);
  const bool ok = m.failures == 0 && cv.max_intensity <= 0.7 && !cv.sim.any_unstable() && cv.seconds < 120.0;
  return {ok, fmt("max rho %.3f, %d metric misses [%s], worst %.2f of tolerance (%s), %.1f s", cv.max_intensity,
                  m.failures, m.missed.c_str(), m.worst_ratio, m.worst.c_str(), cv.seconds)};
}

Outcome criterion10() {
  const auto& cv = cross_validation();
  auto exact = cv.config;
  auto literal = cv.config;
  literal.moment_mode = MomentMode::PaperLiteral;
  const auto re = analyze(cv.schedule, exact);
  const auto rl = analyze(cv.schedule, literal);
  bool differ = true;
  for (std::size_t j = 0; j < exact.num_classes(); ++j)
    differ = differ && std::abs(re.classes[j].wait_compute - rl.classes[j].wait_compute) > 1e-9;
  const auto me = compare_to_analytics(cv, MomentMode::Exact);
  const auto ml = compare_to_analytics(cv, MomentMode::PaperLiteral);
  const bool ok = differ && me.failures == 0 && ml.failures > 0;
  return {ok, fmt("E[W1] class 1: exact %.4g, literal %.4g; cross-validation misses exact %d (%d in W1/S1/S2), "
                  "literal %d (%d in W1/S1/S2)",
                  re.classes[0].wait_compute, rl.classes[0].wait_compute, me.failures, me.compute_stage_failures,
                  ml.failures, ml.compute_stage_failures)};
}

// ---------------------------------------------------------------- 3

Outcome criterion3() {
  PaperStyleOptions o;
  o.theta = 0.3;
  const auto config = make_paper_style_config(o);
  const auto trace = optimize_pps(config);
  const auto& f = trace.objective;
  const double final_value = f.back();
  const double at200 = f[std::min<std::size_t>(200, f.size() - 1)];
  double worst_rise = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) worst_rise = std::max(worst_rise, f[k] - f[k - 1]);
  const double gap = std::abs(at200 - final_value) / std::abs(final_value);
  const bool ok = gap <= 1e-3 && worst_rise <= 1e-12;
  return {ok, fmt("%d iterations, gap at 200 = %.3g, largest rise %.3g", trace.iterations, gap, worst_rise)};
}

// ---------------------------------------------------------------- 4

Outcome criterion4() {
  double worst = 0.0;
  int points = 0;
  for (std::uint64_t inst = 0; inst < 5; ++inst) {
    const auto config = fixtures::random_instance(400 + inst);
    for (const auto& p : fixtures::random_stable_schedules(config, 20, 900 + inst, 0.05)) {
      const auto g = objective_gradient(p, config);
      const auto fd = objective_gradient_fd(p, config);
      double diff = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < p.rows(); ++j)
        for (std::size_t v = 0; v < p.cols(); ++v) {
          diff = std::max(diff, std::abs(g(j, v) - fd(j, v)));
          scale = std::max(scale, std::abs(fd(j, v)));
        }
      worst = std::max(worst, diff / scale);
      ++points;
    }
  }
  return {points == 100 && worst < 1e-5, fmt("%d points, worst relative error %.3g", points, worst)};
}

// ---------------------------------------------------------------- 5

Outcome criterion5() {
  int violations = 0, pairs = 0;
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 5; ++inst) {
    const auto config = fixtures::random_instance(500 + inst);
    const auto pts = fixtures::random_stable_schedules(config, 2000, 1500 + inst);
    for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
      const auto& p = pts[k];
      const auto& q = pts[k + 1];
      Matrix mid(p.rows(), p.cols());
      for (std::size_t j = 0; j < p.rows(); ++j)
        for (std::size_t v = 0; v < p.cols(); ++v) mid(j, v) = 0.5 * (p(j, v) + q(j, v));
      const double excess = objective(mid, config) - 0.5 * (objective(p, config) + objective(q, config));
      if (excess > 1e-9) ++violations;
      worst = std::max(worst, excess);
      ++pairs;
    }
  }
  return {pairs == 5000 && violations == 0,
          fmt("%d pairs, %d midpoint violations, largest excess %.3g ms", pairs, violations, worst)};
}

// ---------------------------------------------------------------- 6

Outcome criterion6() {
  int misses = 0;
  std::string first_miss;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const auto config = fixtures::random_instance(600 + inst, 5);
    const auto net = net_service_moments(config);
    const double total = config.total_rate();
    std::vector<oracle::NetClass> classes;
    for (std::size_t j = 0; j < config.num_classes(); ++j) {
      const double share = config.classes[j].lambda / total;
      const double weight = share * (config.theta + (1.0 - config.theta) * aoi_network_factor(config, j));
      classes.push_back({config.classes[j].lambda, net.mean[j], net.second[j], weight});
    }
    const auto [best, winners] = oracle::best_orders(classes);
    std::vector<int> wsept;
    for (int id : wsept_order(config)) wsept.push_back(id - 1);
    const double cost = oracle::priority_network_cost(classes, wsept);
    if (cost > best * (1.0 + 1e-12)) {
      ++misses;
      if (first_miss.empty())
        first_miss = fmt(" (first: instance %d, theta %.2f, excess %.3g%%)", static_cast<int>(inst), config.theta,
                         100.0 * (cost / best - 1.0));
    }
  }
  return {misses == 0, fmt("%d of 20 instances where WSEPT is not a minimizer%s", misses, first_miss.c_str())};
}

// ---------------------------------------------------------------- 7

Outcome criterion7() {
  int stable = 0;
  int losses[4] = {0, 0, 0, 0};
  const Policy others[] = {Policy::Rca, Policy::Pca, Policy::OcaFcfs};
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto config = fixtures::random_instance(seed);
    if (!validate_config(config).empty()) continue;
    ++stable;
    const double pps = evaluate_policy(Policy::Pps, config).report.objective;
    for (int k = 0; k < 3; ++k) {
      double other = INFINITY;
      try {
        other = evaluate_policy(others[k], config).report.objective;
      } catch (const std::runtime_error&) {
        // an unstable baseline cannot beat PPS
      }
      if (pps > other * (1.0 + 1e-9)) ++losses[k + 1];
    }
  }

  PaperStyleOptions o;
  o.theta = 0.0;
  o.lambda_scale = 1.8;
  const auto heavy = make_paper_style_config(o);
  double improvement = NAN;
  std::string heavy_note;
  try {
    const double pps = evaluate_policy(Policy::Pps, heavy).report.weighted_aoi;
    const double pca = evaluate_policy(Policy::Pca, heavy).report.weighted_aoi;
    improvement = 1.0 - pps / pca;
  } catch (const std::runtime_error& e) {
    heavy_note = std::string(" heavy load error: ") + e.what();
  }
  const bool ok = stable >= 1 && losses[1] + losses[2] + losses[3] == 0 && improvement >= 0.10;
  return {ok, fmt("%d stable instances, PPS worse than RCA-ON %d, PCA-ON %d, OCA-FCFS %d; 1.8x load AoI gain %.1f%%%s",
                  stable, losses[1], losses[2], losses[3], 100.0 * improvement, heavy_note.c_str())};
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
  PaperStyleOptions o;
  auto config = make_paper_style_config(o);
  OptimizerSettings settings;
  settings.rel_tol = 1e-12;
  double prev_c = INFINITY, prev_a = -INFINITY;
  double worst_c = 0.0, worst_a = 0.0;
  for (int k = 0; k <= 10; ++k) {
    config.theta = 0.1 * k;
    const auto r = evaluate_policy(Policy::Pps, config, settings).report;
    worst_c = std::max(worst_c, r.weighted_completion - prev_c);
    worst_a = std::max(worst_a, prev_a - r.weighted_aoi);
    prev_c = r.weighted_completion;
    prev_a = r.weighted_aoi;
  }
  return {worst_c <= 1e-9 && worst_a <= 1e-9,
          fmt("largest completion rise %.3g ms, largest AoI drop %.3g ms", worst_c, worst_a)};
}

// ---------------------------------------------------------------- 9

Outcome criterion9() {
  auto config = fixtures::small_validation_config(MomentMode::Exact);
  config.aoi_weighting = AoiNetworkWeighting::PaperTheorem1;
  const double W = 1e5;
  const int windows = 10;
  std::vector<double> rates;
  for (const auto& c : config.classes) rates.push_back(c.lambda);
  const auto records = generate_poisson_trace({{W * windows, rates}}, 77);

  OnlineSettings settings;
  settings.window_length = W;
  settings.sim.replications = 5;
  settings.sim.seed = 99;
  const auto online = online_driver(records, config, settings);
  const auto offline = offline_reference(records, config, settings);

  double worst_rate = 0.0;
  std::size_t min_arrivals = SIZE_MAX;
  for (const auto& w : online.windows) {
    if (w.index == 0) continue;
    for (std::size_t j = 0; j < rates.size(); ++j) {
      worst_rate = std::max(worst_rate, std::abs(w.estimate.rates[j] - rates[j]) / rates[j]);
      min_arrivals = std::min<std::size_t>(min_arrivals, w.estimate.counts[j]);
    }
  }
  std::size_t per_window = SIZE_MAX;
  for (int k = 0; k < windows; ++k) {
    const auto est = estimate_rates(records, rates.size(), W, static_cast<std::size_t>(k));
    std::size_t total = 0;
    for (auto c : est.counts) total += c;
    per_window = std::min(per_window, total);
  }
  const double gap = std::abs(online.sim.objective.mean - offline.objective.mean) / offline.objective.mean;
  const bool ok = per_window >= 1000 && worst_rate <= 0.10 && gap <= 0.05;
  return {ok, fmt("%zu arrivals in the sparsest window, worst rate error %.2f%%, objective gap %.2f%% (%.4g vs %.4g ms)",
                  per_window, 100.0 * worst_rate, 100.0 * gap, online.sim.objective.mean, offline.objective.mean)};
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "deterministic three-job example", criterion1},
      {2, "analytics vs simulation cross-validation", criterion2},
      {3, "PGD convergence within 200 iterations", criterion3},
      {4, "analytic gradient vs central differences", criterion4},
      {5, "midpoint convexity of the objective", criterion5},
      {6, "WSEPT optimality by exhaustive search", criterion6},
      {7, "policy dominance", criterion7},
      {8, "theta tradeoff frontier", criterion8},
      {9, "online tracking of a stationary trace", criterion9},
      {10, "moment-mode exposure", criterion10},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return std::min(failed, 125);
}
