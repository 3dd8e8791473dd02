#include <gtest/gtest.h>

#include <map>

#include "aoisched/simulator.hpp"
#include "aoisched/tradeoff_example.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace aoisched;

namespace {

SystemConfig mm1_config() {
  SystemConfig c;
  c.classes.push_back({1, 0.05, std::nullopt, 1.0, 0.01, {}});
  c.vms.push_back({1, 0.1, 0.0});
  c.network = {112.0, 0.0};
  return c;
}

SimConfig quick(double horizon = 2e5, int reps = 4) {
  SimConfig s;
  s.horizon = horizon;
  s.replications = reps;
  return s;
}

}  // namespace

TEST(SampleShiftedExp, DeterministicAndSupport) {
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_shifted_exp(3.0, 5.0, rng, ServiceMode::Deterministic), 5.0);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(sample_shifted_exp(82.0, 10.0, rng), 10.0);
}

TEST(SampleShiftedExp, MeanWithinThreeStandardErrors) {
  RandomStream rng(2);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_shifted_exp(82.0, 10.0, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, 10.0 + 1.0 / 82.0, 3.0 * se);
}

TEST(TradeoffExample, ReproducesPrintedValues) {
  const auto ex = run_tradeoff_example();
  const std::vector<double> c1{70, 77, 1.1}, a1{70, 27, 1.1}, c2{70, 22, 70.1}, a2{70, 22, 20.1};
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(ex.policy1.completion[j], c1[j], 1e-9);
    EXPECT_NEAR(ex.policy1.aoi[j], a1[j], 1e-9);
    EXPECT_NEAR(ex.policy2.completion[j], c2[j], 1e-9);
    EXPECT_NEAR(ex.policy2.aoi[j], a2[j], 1e-9);
  }
  EXPECT_NEAR(ex.policy1.weighted_aoi, 27.55, 1e-9);
  EXPECT_NEAR(ex.policy2.weighted_aoi, 32.05, 1e-9);
  EXPECT_NEAR(ex.policy1.weighted_completion, 77.55, 1e-9);
  EXPECT_NEAR(ex.policy2.weighted_completion, 57.05, 1e-9);
}

TEST(ScriptedArrivals, EmptySystemAndErrors) {
  auto c = mm1_config();
  const auto one = scripted_arrivals(c, {{0.0, 1, 1, 4.0, 2.5}}, {});
  ASSERT_EQ(one.jobs.size(), 1u);
  EXPECT_DOUBLE_EQ(one.jobs[0].completion(), 6.5);
  EXPECT_EQ(one.jobs[0].compute_start, one.jobs[0].release);
  EXPECT_EQ(one.jobs[0].net_start, one.jobs[0].compute_end);

  const auto none = scripted_arrivals(c, {}, {});
  EXPECT_TRUE(none.jobs.empty());
  EXPECT_EQ(none.classes[0].jobs, 0u);

  EXPECT_THROW(scripted_arrivals(c, {{0.0, 1, 2, 1.0, 1.0}}, {}), ConfigError);
}

TEST(RunSimulation, MM1WaitMatchesClosedForm) {
  const auto c = mm1_config();
  const auto r = run_simulation(c, Matrix(1, 1, 1.0), quick(1e6, 10));
  const auto& w = r.classes[0].wait_compute;
  EXPECT_NEAR(w.mean, oracle::mm1_wait(0.05, 0.1), std::max(3.0 * w.std_error, 1e-9));
  EXPECT_NEAR(r.vm_utilization[0], 0.5, 0.02);
}

TEST(RunSimulation, InterdepartureDiagnostics) {
  const auto c = mm1_config();
  const auto r = run_simulation(c, Matrix(1, 1, 1.0), quick(1e6, 10));
  const auto& m = r.interdeparture.mean;
  EXPECT_NEAR(m.mean, 1.0 / c.total_rate(), 3.0 * m.std_error + 1e-9);
  EXPECT_NEAR(r.interdeparture.cv, 1.0, 0.03);
}

TEST(RunSimulation, WarmupExcluded) {
  const auto c = mm1_config();
  auto s = quick(1e5, 1);
  s.warmup_fraction = 0.5;
  const auto r = run_simulation(c, Matrix(1, 1, 1.0), s);
  const double expected = 0.05 * 0.5e5;
  EXPECT_NEAR(static_cast<double>(r.classes[0].jobs), expected, 5.0 * std::sqrt(expected));
}

TEST(RunSimulation, SamplePathInvariants) {
  const auto c = fixtures::small_validation_config();
  auto s = quick(2e4, 1);
  s.record_jobs = true;
  const auto p = Matrix::uniform_rows(c.num_classes(), c.num_vms());
  const auto r = run_simulation(c, p, s);
  ASSERT_GT(r.jobs.size(), 1000u);

  auto jobs = r.jobs;
  std::map<int, std::vector<JobLogRow>> by_vm;
  for (const auto& j : jobs) {
    const double parts = (j.compute_start - j.release) + (j.compute_end - j.compute_start) +
                         (j.net_start - j.compute_end) + (j.net_end - j.net_start);
    EXPECT_NEAR(j.completion(), parts, 1e-9);
    EXPECT_LE(j.aoi(), j.completion() + 1e-9);
    by_vm[j.vm_id].push_back(j);
  }
  std::sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.net_start < b.net_start; });
  for (std::size_t i = 1; i < jobs.size(); ++i) EXPECT_GE(jobs[i].net_start, jobs[i - 1].net_end - 1e-9);
  for (auto& [vm, list] : by_vm) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.compute_start < b.compute_start; });
    for (std::size_t i = 1; i < list.size(); ++i) EXPECT_GE(list[i].compute_start, list[i - 1].compute_end - 1e-9);
  }
  std::map<int, std::vector<JobLogRow>> by_class;
  for (const auto& j : r.jobs) by_class[j.class_id].push_back(j);
  for (auto& [cls, list] : by_class) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.compute_end < b.compute_end; });
    for (std::size_t i = 1; i < list.size(); ++i) EXPECT_GE(list[i].net_start, list[i - 1].net_start);
  }
}

TEST(RunSimulation, FcfsServesInNetworkArrivalOrder) {
  const auto c = fixtures::small_validation_config();
  auto s = quick(2e4, 1);
  s.record_jobs = true;
  s.networking_discipline = NetworkDiscipline::Fcfs;
  auto jobs = run_simulation(c, Matrix::uniform_rows(4, 2), s).jobs;
  std::sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.compute_end < b.compute_end; });
  for (std::size_t i = 1; i < jobs.size(); ++i) EXPECT_GE(jobs[i].net_start, jobs[i - 1].net_start);
}

TEST(RunSimulation, PriorityFavoursTopClass) {
  auto c = fixtures::small_validation_config();
  for (auto& k : c.classes) k.d_size = 0.01;  // light compute, networking at load 0.8
  scale_arrival_rates(c, 0.8 / network_intensity(c));
  const auto r = run_simulation(c, Matrix::uniform_rows(4, 2), quick(2e5, 4));
  const auto order = wsept_order(c);
  const auto top = static_cast<std::size_t>(order.front() - 1);
  const auto bottom = static_cast<std::size_t>(order.back() - 1);
  EXPECT_LT(r.classes[top].wait_network.mean, r.classes[bottom].wait_network.mean);
}

// With negligible compute the networking queue sees Poisson input, so the
// non-preemptive priority formula should hold within sampling error.
TEST(RunSimulation, PoissonInputNetworkMatchesPriorityFormula) {
  auto c = fixtures::small_validation_config();
  for (auto& k : c.classes) k.d_size = 1e-5;
  scale_arrival_rates(c, 0.6 / network_intensity(c));
  const auto p = Matrix::uniform_rows(4, 2);
  const auto r = run_simulation(c, p, quick(1e6, 6));
  const auto a = analyze(p, c);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto& w = r.classes[j].wait_network;
    EXPECT_NEAR(w.mean, a.classes[j].wait_network, std::max(4.0 * w.std_error, 0.02 * a.classes[j].wait_network));
  }
}

TEST(RunSimulation, ReproducibleAndThreadIndependent) {
  const auto c = fixtures::small_validation_config();
  const auto p = Matrix::uniform_rows(4, 2);
  auto s = quick(5e4, 3);
  const auto a = run_simulation(c, p, s);
  const auto b = run_simulation(c, p, s);
  s.parallel = false;
  const auto d = run_simulation(c, p, s);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(a.classes[j].completion.mean, b.classes[j].completion.mean);
    EXPECT_EQ(a.classes[j].completion.mean, d.classes[j].completion.mean);
    EXPECT_EQ(a.classes[j].jobs, d.classes[j].jobs);
  }
  s.seed = 2;
  EXPECT_NE(run_simulation(c, p, s).objective.mean, a.objective.mean);
}

TEST(RunSimulation, FlagsOverloadedVm) {
  auto c = fixtures::small_validation_config();
  Matrix p(4, 2);
  for (std::size_t j = 0; j < 4; ++j) p(j, 1) = 1.0;
  for (auto& k : c.classes) k.lambda *= 2.0;
  ASSERT_FALSE(stability_report(p, c).stable);
  const auto r = run_simulation(c, p, quick(2e5, 2));
  EXPECT_TRUE(r.vm_unstable[1]);
  EXPECT_FALSE(r.vm_unstable[0]);
  EXPECT_TRUE(r.any_unstable());
}

TEST(RunSimulation, UpdateAgeMatchesPoissonFreshness) {
  auto c = mm1_config();
  c.classes[0].mu = 0.02;
  auto s = quick(1e6, 4);
  s.simulate_updates = true;
  const auto r = run_simulation(c, Matrix(1, 1, 1.0), s);
  const auto& k = r.classes[0];
  const double y = k.aoi.mean - k.service_compute.mean - k.wait_network.mean - k.service_network.mean;
  EXPECT_NEAR(y, 1.0 / 0.02, 0.05 / 0.02);

  auto two = fixtures::small_validation_config();
  two.classes[0].mu = 0.01;
  two.classes[1].mu = 0.03;
  two.classes[2].mu = 0.05;
  two.classes[3].mu = 0.05;
  two.classes[0].info_set = {1, 2};
  s.record_jobs = true;
  s.replications = 1;
  const auto r2 = run_simulation(two, Matrix::uniform_rows(4, 2), s);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& j : r2.jobs) {
    EXPECT_GE(j.update_age, 0.0);
    if (j.class_id == 1) {
      sum += j.update_age;
      ++n;
    }
  }
  EXPECT_NEAR(sum / n, 1.0 / 0.04, 0.05 / 0.04);

  two.classes[3].mu.reset();
  EXPECT_THROW(run_simulation(two, Matrix::uniform_rows(4, 2), s), ConfigError);
}

TEST(SimConfig, Validation) {
  SimConfig s;
  s.horizon = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.warmup_fraction = 1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.replications = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Estimate, StudentInterval) {
  const auto e = estimate_from({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(e.mean, 2.0);
  EXPECT_NEAR(e.std_error, 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(e.ci_half_width, 4.302652729911275 * e.std_error, 1e-9);
}
