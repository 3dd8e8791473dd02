#pragma once

// Closed-form steady-state analysis of the two-phase system.
//
// Compute phase: each VM is an M/G/1 FCFS queue fed by the thinned Poisson
// streams p(j,v) * lambda_j, with Pollaczek-Khinchine waiting time.
// Networking phase: one non-preemptive priority M/G/1 queue with classes
// ordered by decreasing (w_j + g_j) / E_j, or FCFS for the baseline.

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoisched/errors.hpp"
#include "aoisched/matrix.hpp"
#include "aoisched/model.hpp"

namespace aoisched {

struct Moments {
  double mean = 0.0;
  double second = 0.0;
};

inline Moments shifted_exp_moments(double shift, double rate, MomentMode mode) {
  const double inv = 1.0 / rate;
  Moments m;
  m.mean = shift + inv;
  if (mode == MomentMode::Exact) {
    m.second = shift * shift + 2.0 * shift * inv + 2.0 * inv * inv;
  } else {
    m.second = shift * shift + shift + (shift + 2.0) * inv;
  }
  return m;
}

inline Moments compute_service_moments(const VmProfile& v, const JobClass& j, MomentMode mode) {
  return shifted_exp_moments(compute_shift(v, j), compute_rate(v, j), mode);
}

inline Moments network_service_moments(const NetworkProfile& n, const JobClass& j, MomentMode mode) {
  return shifted_exp_moments(network_shift(n, j), network_rate(n, j), mode);
}

namespace detail {

inline void check_shape(const ScheduleMatrix& p, const SystemConfig& config) {
  if (p.rows() != config.num_classes() || p.cols() != config.num_vms())
    throw std::invalid_argument("schedule is " + std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
                                " but config has " + std::to_string(config.num_classes()) + " classes and " +
                                std::to_string(config.num_vms()) + " VMs");
}

inline std::string vm_label(std::size_t v) { return "VM " + std::to_string(v + 1); }

// Per-(class, VM) service moments, computed once per config.
struct ComputeMomentTable {
  Matrix mean;
  Matrix second;

  explicit ComputeMomentTable(const SystemConfig& config)
      : mean(config.num_classes(), config.num_vms()), second(config.num_classes(), config.num_vms()) {
    for (std::size_t j = 0; j < config.num_classes(); ++j)
      for (std::size_t v = 0; v < config.num_vms(); ++v) {
        const auto m = compute_service_moments(config.vms[v], config.classes[j], config.moment_mode);
        mean(j, v) = m.mean;
        second(j, v) = m.second;
      }
  }
};

// Sufficient statistics of one VM queue: Lambda_v, rho_v = Lambda_v E[Z],
// and Lambda_v E[Z^2].
struct VmLoad {
  double arrival_rate = 0.0;
  double intensity = 0.0;
  double rate_times_second = 0.0;
};

inline std::vector<VmLoad> vm_loads(const ScheduleMatrix& p, const SystemConfig& config,
                                    const ComputeMomentTable& table) {
  std::vector<VmLoad> loads(config.num_vms());
  for (std::size_t j = 0; j < config.num_classes(); ++j) {
    const double lam = config.classes[j].lambda;
    for (std::size_t v = 0; v < config.num_vms(); ++v) {
      const double flow = p(j, v) * lam;
      loads[v].arrival_rate += flow;
      loads[v].intensity += flow * table.mean(j, v);
      loads[v].rate_times_second += flow * table.second(j, v);
    }
  }
  return loads;
}

}  // namespace detail

// Lambda_v = sum_j p(j,v) lambda_j.
inline std::vector<double> vm_arrival_rates(const ScheduleMatrix& p, const SystemConfig& config) {
  detail::check_shape(p, config);
  std::vector<double> rates(config.num_vms(), 0.0);
  for (std::size_t j = 0; j < config.num_classes(); ++j)
    for (std::size_t v = 0; v < config.num_vms(); ++v) rates[v] += p(j, v) * config.classes[j].lambda;
  return rates;
}

// Mixture moments E[Z_1v], E[Z_1v^2] with weights p(j,v) lambda_j / Lambda_v.
// Idle VMs (Lambda_v = 0) report zero moments.
inline std::vector<Moments> vm_aggregate_moments(const ScheduleMatrix& p, const SystemConfig& config) {
  detail::check_shape(p, config);
  const detail::ComputeMomentTable table(config);
  const auto loads = detail::vm_loads(p, config, table);
  std::vector<Moments> out(config.num_vms());
  for (std::size_t v = 0; v < config.num_vms(); ++v) {
    if (loads[v].arrival_rate <= 0.0) continue;
    out[v].mean = loads[v].intensity / loads[v].arrival_rate;
    out[v].second = loads[v].rate_times_second / loads[v].arrival_rate;
  }
  return out;
}

// Pollaczek-Khinchine mean wait: Lambda E[Z^2] / (2 (1 - Lambda E[Z])).
inline double vm_waiting_time(double arrival_rate, double mean, double second,
                              const std::string& resource = "VM") {
  if (arrival_rate <= 0.0) return 0.0;
  const double rho = arrival_rate * mean;
  if (rho >= 1.0) throw StabilityError(resource, rho);
  return arrival_rate * second / (2.0 * (1.0 - rho));
}

// Class ids in decreasing (w_j + g_j) / E_j; ties keep ascending id.
inline std::vector<int> wsept_order(const SystemConfig& config) {
  const double total = config.total_rate();
  std::vector<std::size_t> idx(config.num_classes());
  std::iota(idx.begin(), idx.end(), 0);
  auto key = [&](std::size_t j) {
    const double weight = config.completion_weight(j) + config.aoi_weight(j);
    return total > 0.0 ? weight / config.classes[j].e_size : 0.0;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) > key(b); });
  std::vector<int> ids;
  for (auto j : idx) ids.push_back(config.classes[j].id);
  return ids;
}

struct NetworkMoments {
  std::vector<double> mean;    // E[S_2j]
  std::vector<double> second;  // per-class second moment
  double aggregate_second = 0.0;  // E[Z_2^2] = sum_j (lambda_j / Lambda) second_j
};

inline NetworkMoments net_service_moments(const SystemConfig& config) {
  NetworkMoments out;
  const double total = config.total_rate();
  for (const auto& c : config.classes) {
    const auto m = network_service_moments(config.network, c, config.moment_mode);
    out.mean.push_back(m.mean);
    out.second.push_back(m.second);
    if (total > 0.0) out.aggregate_second += c.lambda / total * m.second;
  }
  return out;
}

// Non-preemptive priority M/G/1 waits for an explicit priority order (class
// ids, highest priority first). Result is indexed by class position.
inline std::vector<double> priority_waiting_times(const SystemConfig& config, const std::vector<int>& order) {
  const auto net = net_service_moments(config);
  const double load_term = config.total_rate() * net.aggregate_second;
  std::vector<double> waits(config.num_classes(), 0.0);
  double above = 0.0;
  for (std::size_t level = 0; level < order.size(); ++level) {
    const auto j = static_cast<std::size_t>(order[level] - 1);
    const double through = above + config.classes[j].lambda * net.mean[j];
    if (through >= 1.0) throw StabilityError("networking priority level " + std::to_string(level + 1), through);
    waits[j] = load_term / (2.0 * (1.0 - through) * (1.0 - above));
    above = through;
  }
  return waits;
}

inline std::vector<double> priority_waiting_times(const SystemConfig& config) {
  return priority_waiting_times(config, wsept_order(config));
}

inline double fcfs_waiting_time(const SystemConfig& config) {
  const auto net = net_service_moments(config);
  double rho = 0.0;
  for (std::size_t j = 0; j < config.num_classes(); ++j) rho += config.classes[j].lambda * net.mean[j];
  if (rho >= 1.0) throw StabilityError("networking queue", rho);
  return config.total_rate() * net.aggregate_second / (2.0 * (1.0 - rho));
}

inline std::vector<double> network_waiting_times(const SystemConfig& config, NetworkDiscipline discipline) {
  if (discipline == NetworkDiscipline::Fcfs) return std::vector<double>(config.num_classes(), fcfs_waiting_time(config));
  return priority_waiting_times(config);
}

// Factor applied to the networking terms of E[A_j].
inline double aoi_network_factor(const SystemConfig& config, std::size_t j) {
  return config.aoi_weighting == AoiNetworkWeighting::PaperTheorem1 ? config.classes[j].lambda / config.total_rate()
                                                                     : 1.0;
}

struct ClassAnalytics {
  int id = 0;
  double lambda = 0.0;
  double wait_compute = 0.0;     // sum_v p(j,v) E[W_1v]
  double service_compute = 0.0;  // sum_v p(j,v) E[S_1jv]
  double wait_network = 0.0;
  double service_network = 0.0;
  double aoi = 0.0;
  double completion = 0.0;
};

struct AnalyticReport {
  std::vector<ClassAnalytics> classes;
  std::vector<double> vm_arrival_rates;
  std::vector<double> vm_intensity;
  std::vector<double> vm_wait;
  std::vector<int> priority_order;
  double network_intensity = 0.0;
  double weighted_completion = 0.0;  // sum_j (lambda_j / lambda) E[C_j]
  double weighted_aoi = 0.0;         // sum_j (lambda_j / lambda) E[A_j]
  double objective = 0.0;            // theta * weighted_completion + (1 - theta) * weighted_aoi
  NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept;
};

inline AnalyticReport analyze(const ScheduleMatrix& p, const SystemConfig& config,
                              NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept) {
  detail::check_shape(p, config);
  const detail::ComputeMomentTable table(config);
  const auto loads = detail::vm_loads(p, config, table);

  AnalyticReport r;
  r.discipline = discipline;
  for (std::size_t v = 0; v < config.num_vms(); ++v) {
    const auto& l = loads[v];
    r.vm_arrival_rates.push_back(l.arrival_rate);
    r.vm_intensity.push_back(l.intensity);
    if (l.arrival_rate <= 0.0) {
      r.vm_wait.push_back(0.0);
      continue;
    }
    if (l.intensity >= 1.0) throw StabilityError(detail::vm_label(v), l.intensity);
    r.vm_wait.push_back(l.rate_times_second / (2.0 * (1.0 - l.intensity)));
  }

  const auto net = net_service_moments(config);
  r.network_intensity = network_intensity(config);
  r.priority_order = wsept_order(config);
  const auto net_waits = network_waiting_times(config, discipline);

  const double total = config.total_rate();
  for (std::size_t j = 0; j < config.num_classes(); ++j) {
    ClassAnalytics c;
    c.id = config.classes[j].id;
    c.lambda = config.classes[j].lambda;
    for (std::size_t v = 0; v < config.num_vms(); ++v) {
      c.wait_compute += p(j, v) * r.vm_wait[v];
      c.service_compute += p(j, v) * table.mean(j, v);
    }
    c.wait_network = net_waits[j];
    c.service_network = net.mean[j];
    c.aoi = c.service_compute + aoi_network_factor(config, j) * (c.wait_network + c.service_network);
    c.completion = c.wait_compute + c.service_compute + c.wait_network + c.service_network;
    const double share = c.lambda / total;
    r.weighted_completion += share * c.completion;
    r.weighted_aoi += share * c.aoi;
    r.classes.push_back(c);
  }
  r.objective = config.theta * r.weighted_completion + (1.0 - config.theta) * r.weighted_aoi;
  return r;
}

inline std::vector<double> expected_aoi(const ScheduleMatrix& p, const SystemConfig& config,
                                        NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept) {
  std::vector<double> out;
  for (const auto& c : analyze(p, config, discipline).classes) out.push_back(c.aoi);
  return out;
}

inline std::vector<double> expected_completion(const ScheduleMatrix& p, const SystemConfig& config,
                                               NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept) {
  std::vector<double> out;
  for (const auto& c : analyze(p, config, discipline).classes) out.push_back(c.completion);
  return out;
}

inline double objective(const ScheduleMatrix& p, const SystemConfig& config,
                        NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept) {
  return analyze(p, config, discipline).objective;
}

struct StabilityReport {
  std::vector<double> vm_intensity;
  std::vector<double> network_cumulative;  // cumulative rho per priority level, WSEPT order
  double network_intensity = 0.0;
  double margin = 0.0;
  bool stable = true;
};

// Never throws on load; stable iff every intensity is below 1 - margin.
inline StabilityReport stability_report(const ScheduleMatrix& p, const SystemConfig& config, double margin = 1e-3) {
  detail::check_shape(p, config);
  const detail::ComputeMomentTable table(config);
  StabilityReport s;
  s.margin = margin;
  for (const auto& l : detail::vm_loads(p, config, table)) s.vm_intensity.push_back(l.intensity);
  double cumulative = 0.0;
  for (int id : wsept_order(config)) {
    const auto& c = config.classes[static_cast<std::size_t>(id - 1)];
    cumulative += c.lambda * mean_network_time(config.network, c);
    s.network_cumulative.push_back(cumulative);
  }
  s.network_intensity = cumulative;
  const double bound = 1.0 - margin;
  s.stable = s.network_intensity < bound &&
             std::all_of(s.vm_intensity.begin(), s.vm_intensity.end(), [&](double r) { return r < bound; });
  return s;
}

}  // namespace aoisched
