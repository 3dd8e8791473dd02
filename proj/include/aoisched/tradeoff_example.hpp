#pragma once

// Three-job, two-VM scenario showing that minimising completion time and
// minimising age of information can prefer different schedules.
//
// All jobs are released at t = 0 in the order J1, J2, J3. Compute times are
// (50, 15, 1) ms and networking times (20, 7, 0.1) ms. Policy 1 runs J1 then
// J2 on VM 1 and J3 on VM 2; policy 2 runs J1 then J3 on VM 1 and J2 on VM 2.
// The weighted sums cover J2 (weight 1) and J3 (weight 1/2).

#include <array>
#include <string>
#include <vector>

#include "aoisched/model.hpp"
#include "aoisched/simulator.hpp"

namespace aoisched {

struct ExamplePolicyOutcome {
  std::string name;
  std::vector<int> vm_of_job;      // 1-based VM per job
  std::vector<double> completion;  // per job, ms
  std::vector<double> aoi;         // per job, ms
  double weighted_completion = 0.0;
  double weighted_aoi = 0.0;
};

struct TradeoffExample {
  ExamplePolicyOutcome policy1;
  ExamplePolicyOutcome policy2;
};

inline constexpr std::array<double, 3> kExampleComputeTimes{50.0, 15.0, 1.0};
inline constexpr std::array<double, 3> kExampleNetworkTimes{20.0, 7.0, 0.1};
inline constexpr std::array<double, 3> kExampleWeights{0.0, 1.0, 0.5};

inline ExamplePolicyOutcome run_example_policy(const std::string& name, const std::vector<int>& vm_of_job) {
  SystemConfig config;
  for (int j = 1; j <= 3; ++j) config.classes.push_back({j, 1.0, std::nullopt, 1.0, 1.0, {}});
  config.vms = {{1, 1.0, 0.0}, {2, 1.0, 0.0}};

  std::vector<ScriptedJob> jobs;
  for (std::size_t j = 0; j < 3; ++j)
    jobs.push_back({0.0, static_cast<int>(j) + 1, vm_of_job[j], kExampleComputeTimes[j], kExampleNetworkTimes[j]});
  const auto result = scripted_arrivals(config, jobs, SimConfig{});

  ExamplePolicyOutcome out;
  out.name = name;
  out.vm_of_job = vm_of_job;
  out.completion.assign(3, 0.0);
  out.aoi.assign(3, 0.0);
  for (const auto& row : result.jobs) {
    const auto j = static_cast<std::size_t>(row.class_id - 1);
    out.completion[j] = row.completion();
    out.aoi[j] = row.aoi();
  }
  for (std::size_t j = 0; j < 3; ++j) {
    out.weighted_completion += kExampleWeights[j] * out.completion[j];
    out.weighted_aoi += kExampleWeights[j] * out.aoi[j];
  }
  return out;
}

inline TradeoffExample run_tradeoff_example() {
  return {run_example_policy("policy1", {1, 1, 2}), run_example_policy("policy2", {1, 2, 1})};
}

}  // namespace aoisched
