#pragma once

// Projected gradient descent over row-stochastic scheduling matrices,
// baseline schedules, and the two-stage (TOR switch, VM) extension.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "aoisched/analytics.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/matrix.hpp"
#include "aoisched/model.hpp"

namespace aoisched {

struct OptimizerSettings {
  int max_iters = 10000;
  double rel_tol = 1e-8;
  double initial_step = 0.1;  // first trial step, as a fraction of 1 / max|gradient|
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  double stability_margin = 1e-3;
  std::uint64_t seed = 1;
  bool finite_difference_gradient = false;  // debugging fallback
  NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept;

  void validate() const {
    if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
    if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) throw ConfigError("armijo_shrink must be in (0,1)");
    if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
    if (!(initial_step > 0.0)) throw ConfigError("initial_step must be > 0");
    if (!(stability_margin >= 0.0 && stability_margin < 1.0)) throw ConfigError("stability_margin must be in [0,1)");
  }
};

struct OptimizeTrace {
  std::vector<double> objective;  // objective[0] is the starting point
  ScheduleMatrix schedule;
  int iterations = 0;
  bool converged = false;
};

// Euclidean projection of one vector onto the probability simplex (sort based).
inline void project_simplex(std::span<double> x) {
  if (x.empty()) return;
  std::vector<double> u(x.begin(), x.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    prefix += u[k];
    const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
    if (u[k] - candidate > 0.0) tau = candidate;
  }
  for (double& xi : x) xi = std::max(xi - tau, 0.0);
}

inline ScheduleMatrix project_simplex_rows(Matrix m) {
  for (std::size_t r = 0; r < m.rows(); ++r) project_simplex(m.row(r));
  return m;
}

namespace detail {

// Objective, gradient and admissibility for a fixed config. Networking terms
// do not depend on the schedule and are folded into a constant.
class ScheduleObjective {
 public:
  ScheduleObjective(const SystemConfig& config, NetworkDiscipline discipline, double margin)
      : config_(config), table_(config), margin_(margin) {
    const auto net = net_service_moments(config);
    const auto waits = network_waiting_times(config, discipline);
    const double total = config.total_rate();
    for (std::size_t j = 0; j < config.num_classes(); ++j) {
      const double net_time = waits[j] + net.mean[j];
      network_constant_ += config.classes[j].lambda / total *
                           (config.theta * net_time + (1.0 - config.theta) * aoi_network_factor(config, j) * net_time);
    }
  }

  const SystemConfig& config() const { return config_; }

  double value(const ScheduleMatrix& p) const {
    const auto loads = vm_loads(p, config_, table_);
    double sum = 0.0;
    for (std::size_t v = 0; v < loads.size(); ++v) {
      const auto& l = loads[v];
      if (l.intensity >= 1.0) throw StabilityError(vm_label(v), l.intensity);
      sum += l.intensity + config_.theta * l.arrival_rate * l.rate_times_second / (2.0 * (1.0 - l.intensity));
    }
    return sum / config_.total_rate() + network_constant_;
  }

  Matrix gradient(const ScheduleMatrix& p) const {
    const auto loads = vm_loads(p, config_, table_);
    const double total = config_.total_rate();
    const double theta = config_.theta;
    Matrix g(p.rows(), p.cols());
    for (std::size_t v = 0; v < loads.size(); ++v) {
      const auto& l = loads[v];
      if (l.intensity >= 1.0) throw StabilityError(vm_label(v), l.intensity);
      const double slack = 1.0 - l.intensity;
      const double wait = l.rate_times_second / (2.0 * slack);
      for (std::size_t j = 0; j < p.rows(); ++j) {
        const double m = table_.mean(j, v);
        const double s = table_.second(j, v);
        const double d_wait_sum =
            wait + l.arrival_rate * (s / (2.0 * slack) + l.rate_times_second * m / (2.0 * slack * slack));
        g(j, v) = config_.classes[j].lambda / total * (m + theta * d_wait_sum);
      }
    }
    return g;
  }

  Matrix finite_difference_gradient(const ScheduleMatrix& p, double rel_step = 1e-6) const {
    Matrix g(p.rows(), p.cols());
    Matrix probe = p;
    for (std::size_t j = 0; j < p.rows(); ++j)
      for (std::size_t v = 0; v < p.cols(); ++v) {
        const double h = rel_step * std::max(1.0, std::abs(p(j, v)));
        const double saved = probe(j, v);
        probe(j, v) = saved + h;
        const double up = value(probe);
        probe(j, v) = saved - h;
        const double down = value(probe);
        probe(j, v) = saved;
        g(j, v) = (up - down) / (2.0 * h);
      }
    return g;
  }

  bool admissible(const ScheduleMatrix& p) const {
    const double bound = 1.0 - margin_;
    for (const auto& l : vm_loads(p, config_, table_))
      if (!(l.intensity < bound)) return false;
    return true;
  }

  const ComputeMomentTable& table() const { return table_; }

 private:
  const SystemConfig& config_;
  ComputeMomentTable table_;
  double margin_;
  double network_constant_ = 0.0;
};

inline void require_network_feasible(const SystemConfig& config, double margin) {
  const double rho = network_intensity(config);
  if (!(rho < 1.0 - margin))
    throw InfeasibleError("networking queue overloaded: intensity " + std::to_string(rho) + " exceeds " +
                          std::to_string(1.0 - margin));
}

inline void require_compute_feasible(const SystemConfig& config, double margin) {
  double demand = 0.0;
  for (const auto& c : config.classes) demand += c.lambda * c.d_size;
  double capacity = 0.0;
  for (const auto& v : config.vms) capacity += 1.0 / unit_service_time(v);
  capacity *= 1.0 - margin;
  if (!(demand < capacity * (1.0 - 1e-9)))
    throw InfeasibleError("compute VMs overloaded: aggregate demand " + std::to_string(demand) +
                          " exceeds usable capacity " + std::to_string(capacity));
}

}  // namespace detail

// Nearest (Euclidean) schedule to `start` that is row-stochastic and keeps
// every VM intensity at or below 1 - margin. Dykstra's alternating projection
// between the product of row simplices and the product of per-column
// half-spaces sum_j lambda_j m(j,v) p(j,v) <= 1 - margin.
inline ScheduleMatrix project_to_stable(const Matrix& start, const SystemConfig& config, double margin) {
  detail::require_compute_feasible(config, margin);
  const detail::ComputeMomentTable table(config);
  const std::size_t rows = config.num_classes();
  const std::size_t cols = config.num_vms();
  const double target = (1.0 - margin) - 1e-7;

  Matrix a(rows, cols);
  std::vector<double> a_norm2(cols, 0.0);
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t v = 0; v < cols; ++v) {
      a(j, v) = config.classes[j].lambda * table.mean(j, v);
      a_norm2[v] += a(j, v) * a(j, v);
    }

  auto project_halfspaces = [&](Matrix& x) {
    for (std::size_t v = 0; v < cols; ++v) {
      double dot = 0.0;
      for (std::size_t j = 0; j < rows; ++j) dot += a(j, v) * x(j, v);
      if (dot <= target) continue;
      const double scale = (dot - target) / a_norm2[v];
      for (std::size_t j = 0; j < rows; ++j) x(j, v) -= scale * a(j, v);
    }
  };

  Matrix x = start;
  Matrix inc_rows(rows, cols);
  Matrix inc_cols(rows, cols);
  Matrix y;
  const detail::ScheduleObjective check(config, NetworkDiscipline::PriorityWsept, margin);
  for (int it = 0; it < 200000; ++it) {
    Matrix shifted = x;
    for (std::size_t i = 0; i < shifted.values().size(); ++i) shifted.values()[i] += inc_rows.values()[i];
    y = project_simplex_rows(shifted);
    for (std::size_t i = 0; i < shifted.values().size(); ++i)
      inc_rows.values()[i] = shifted.values()[i] - y.values()[i];

    Matrix shifted2 = y;
    for (std::size_t i = 0; i < shifted2.values().size(); ++i) shifted2.values()[i] += inc_cols.values()[i];
    Matrix next = shifted2;
    project_halfspaces(next);
    for (std::size_t i = 0; i < next.values().size(); ++i)
      inc_cols.values()[i] = shifted2.values()[i] - next.values()[i];

    const double change = max_abs_difference(next, x);
    x = std::move(next);
    if (change < 1e-13 && check.admissible(y)) return y;
  }
  if (check.admissible(y)) return y;
  throw InfeasibleError("could not project schedule into the stable region");
}

// Uniform 1/V, moved to the nearest stable schedule when uniform overloads a VM.
inline ScheduleMatrix feasible_init(const SystemConfig& config, double margin = 1e-3) {
  detail::require_network_feasible(config, margin);
  auto uniform = Matrix::uniform_rows(config.num_classes(), config.num_vms());
  const detail::ScheduleObjective check(config, NetworkDiscipline::PriorityWsept, margin);
  if (check.admissible(uniform)) return uniform;
  return project_to_stable(uniform, config, margin);
}

// d objective / d p(j,v). Throws StabilityError at or beyond rho_v = 1.
inline Matrix objective_gradient(const ScheduleMatrix& p, const SystemConfig& config,
                                 NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept) {
  detail::check_shape(p, config);
  return detail::ScheduleObjective(config, discipline, 0.0).gradient(p);
}

inline Matrix objective_gradient_fd(const ScheduleMatrix& p, const SystemConfig& config, double rel_step = 1e-6,
                                    NetworkDiscipline discipline = NetworkDiscipline::PriorityWsept) {
  detail::check_shape(p, config);
  return detail::ScheduleObjective(config, discipline, 0.0).finite_difference_gradient(p, rel_step);
}

// Projected gradient descent with Armijo backtracking over matrices whose
// rows lie on probability simplices. Trial points rejected by `admissible`
// are treated like failed Armijo tests (the step is shrunk), so every
// accepted iterate is admissible.
template <class Value, class Gradient, class Admissible>
OptimizeTrace minimize_row_stochastic(Matrix start, Value&& value, Gradient&& gradient, Admissible&& admissible,
                                      const OptimizerSettings& settings) {
  settings.validate();
  OptimizeTrace trace;
  Matrix x = project_simplex_rows(std::move(start));
  double fx = value(x);
  trace.objective.push_back(fx);
  double step = 0.0;

  for (int it = 1; it <= settings.max_iters; ++it) {
    const Matrix g = gradient(x);
    double gmax = 0.0;
    for (double gi : g.values()) gmax = std::max(gmax, std::abs(gi));
    if (gmax == 0.0) {
      trace.converged = true;
      break;
    }
    double t = step > 0.0 ? 2.0 * step : settings.initial_step / gmax;

    bool accepted = false;
    Matrix y;
    double fy = fx;
    for (int attempt = 0; attempt < 80; ++attempt, t *= settings.armijo_shrink) {
      Matrix trial = x;
      for (std::size_t i = 0; i < trial.values().size(); ++i) trial.values()[i] -= t * g.values()[i];
      y = project_simplex_rows(std::move(trial));
      double slope = 0.0;
      double moved = 0.0;
      for (std::size_t i = 0; i < y.values().size(); ++i) {
        const double d = y.values()[i] - x.values()[i];
        slope += g.values()[i] * d;
        moved = std::max(moved, std::abs(d));
      }
      if (moved < 1e-15) break;
      if (!admissible(y)) continue;
      fy = value(y);
      if (fy <= fx + settings.armijo_slope * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Either the projected step vanishes or no descent step exists at
      // working precision; both mean the iterate is stationary.
      trace.converged = true;
      break;
    }
    const double decrease = fx - fy;
    x = std::move(y);
    fx = fy;
    step = t;
    trace.objective.push_back(fx);
    trace.iterations = it;
    if (decrease <= settings.rel_tol * std::max(std::abs(fx), 1e-300)) {
      trace.converged = true;
      break;
    }
  }
  trace.schedule = std::move(x);
  return trace;
}

// Optimal probabilistic VM assignment for the weighted AoI / completion objective.
inline OptimizeTrace optimize_pps(const SystemConfig& config, const OptimizerSettings& settings = {}) {
  settings.validate();
  const double margin = settings.stability_margin;
  auto start = feasible_init(config, margin);
  const detail::ScheduleObjective f(config, settings.discipline, margin);
  auto grad = [&](const Matrix& p) {
    return settings.finite_difference_gradient ? f.finite_difference_gradient(p) : f.gradient(p);
  };
  return minimize_row_stochastic(
      std::move(start), [&](const Matrix& p) { return f.value(p); }, grad,
      [&](const Matrix& p) { return f.admissible(p); }, settings);
}

// RCA-ON: uniform assignment (made stable if needed).
inline ScheduleMatrix baseline_rca(const SystemConfig& config, double margin = 1e-3) {
  return feasible_init(config, margin);
}

enum class PcaMode {
  PaperLiteral,  // p(j,v) proportional to the mean service time on v
  InverseTime,   // p(j,v) proportional to the service rate 1 / mean time
};

inline ScheduleMatrix pca_rows(const SystemConfig& config, PcaMode mode) {
  Matrix p(config.num_classes(), config.num_vms());
  for (std::size_t j = 0; j < config.num_classes(); ++j) {
    double sum = 0.0;
    for (std::size_t v = 0; v < config.num_vms(); ++v) {
      const double mean = compute_shift(config.vms[v], config.classes[j]) + 1.0 / compute_rate(config.vms[v], config.classes[j]);
      p(j, v) = mode == PcaMode::PaperLiteral ? mean : 1.0 / mean;
      sum += p(j, v);
    }
    for (double& x : p.row(j)) x /= sum;
  }
  return p;
}

// PCA-ON: proportional assignment, projected into the stable region if needed.
inline ScheduleMatrix baseline_pca(const SystemConfig& config, PcaMode mode = PcaMode::PaperLiteral,
                                   double margin = 1e-3) {
  detail::require_network_feasible(config, margin);
  auto p = pca_rows(config, mode);
  const detail::ScheduleObjective check(config, NetworkDiscipline::PriorityWsept, margin);
  if (check.admissible(p)) return p;
  return project_to_stable(p, config, margin);
}

enum class Policy { Pps, Rca, Pca, OcaFcfs };

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::Pps: return "pps";
    case Policy::Rca: return "rca";
    case Policy::Pca: return "pca";
    case Policy::OcaFcfs: return "ocafcfs";
  }
  return "?";
}

inline Policy parse_policy(std::string_view s) {
  if (s == "pps") return Policy::Pps;
  if (s == "rca") return Policy::Rca;
  if (s == "pca") return Policy::Pca;
  if (s == "ocafcfs" || s == "oca-fcfs") return Policy::OcaFcfs;
  throw ConfigError("unknown policy '" + std::string(s) + "'");
}

inline NetworkDiscipline policy_discipline(Policy p) {
  return p == Policy::OcaFcfs ? NetworkDiscipline::Fcfs : NetworkDiscipline::PriorityWsept;
}

struct PolicyEvaluation {
  Policy policy = Policy::Pps;
  ScheduleMatrix schedule;
  AnalyticReport report;
  int iterations = 0;
};

inline PolicyEvaluation evaluate_policy(Policy policy, const SystemConfig& config, OptimizerSettings settings = {},
                                        PcaMode pca_mode = PcaMode::PaperLiteral) {
  PolicyEvaluation out;
  out.policy = policy;
  settings.discipline = policy_discipline(policy);
  switch (policy) {
    case Policy::Pps:
    case Policy::OcaFcfs: {
      auto trace = optimize_pps(config, settings);
      out.schedule = std::move(trace.schedule);
      out.iterations = trace.iterations;
      break;
    }
    case Policy::Rca: out.schedule = baseline_rca(config, settings.stability_margin); break;
    case Policy::Pca: out.schedule = baseline_pca(config, pca_mode, settings.stability_margin); break;
  }
  out.report = analyze(out.schedule, config, settings.discipline);
  return out;
}

// Two-stage assignment: a TOR switch u with probability pi(j,u), then VM v
// under that switch with probability p_tor(u,v).
struct TwoStageSchedule {
  Matrix pi;     // J x m
  Matrix p_tor;  // m x V
};

struct TwoStageExpansion {
  Matrix q;                   // J x (m*V); column u*V + v holds q(j,u,v)
  std::vector<double> rates;  // Lambda(u,v), same flattening
};

inline TwoStageExpansion expand_two_stage(const TwoStageSchedule& ts, const SystemConfig& config) {
  const std::size_t jobs = ts.pi.rows();
  const std::size_t tors = ts.pi.cols();
  const std::size_t per_tor = ts.p_tor.cols();
  if (ts.p_tor.rows() != tors) throw std::invalid_argument("pi columns must match p_tor rows");
  if (jobs != config.num_classes()) throw std::invalid_argument("pi rows must match the number of classes");
  TwoStageExpansion out{Matrix(jobs, tors * per_tor), std::vector<double>(tors * per_tor, 0.0)};
  for (std::size_t j = 0; j < jobs; ++j)
    for (std::size_t u = 0; u < tors; ++u)
      for (std::size_t v = 0; v < per_tor; ++v) {
        const double q = ts.pi(j, u) * ts.p_tor(u, v);
        out.q(j, u * per_tor + v) = q;
        out.rates[u * per_tor + v] += config.classes[j].lambda * q;
      }
  return out;
}

struct TwoStageResult {
  TwoStageSchedule schedule;
  std::vector<double> objective;  // after each half-round
};

// Alternating minimisation: optimise pi with p_tor fixed, then p_tor with pi
// fixed. `config.vms` lists the m*V VMs flattened as u*V + v.
inline TwoStageResult optimize_two_stage(const SystemConfig& config, std::size_t tors, const OptimizerSettings& settings = {},
                                         int rounds = 10) {
  if (tors == 0 || config.num_vms() % tors != 0)
    throw ConfigError("number of VMs must be a multiple of the number of TOR switches");
  const std::size_t per_tor = config.num_vms() / tors;
  detail::require_network_feasible(config, settings.stability_margin);
  const detail::ScheduleObjective f(config, settings.discipline, settings.stability_margin);

  TwoStageResult out{{Matrix::uniform_rows(config.num_classes(), tors), Matrix::uniform_rows(tors, per_tor)}, {}};
  if (!f.admissible(expand_two_stage(out.schedule, config).q))
    throw InfeasibleError("uniform two-stage schedule overloads a VM");

  auto q_of = [&](const Matrix& pi, const Matrix& p_tor) { return expand_two_stage({pi, p_tor}, config).q; };
  for (int round = 0; round < rounds; ++round) {
    const Matrix p_fixed = out.schedule.p_tor;
    auto over_pi = minimize_row_stochastic(
        out.schedule.pi, [&](const Matrix& pi) { return f.value(q_of(pi, p_fixed)); },
        [&](const Matrix& pi) {
          const Matrix gq = f.gradient(q_of(pi, p_fixed));
          Matrix g(pi.rows(), pi.cols());
          for (std::size_t j = 0; j < pi.rows(); ++j)
            for (std::size_t u = 0; u < tors; ++u)
              for (std::size_t v = 0; v < per_tor; ++v) g(j, u) += gq(j, u * per_tor + v) * p_fixed(u, v);
          return g;
        },
        [&](const Matrix& pi) { return f.admissible(q_of(pi, p_fixed)); }, settings);
    out.schedule.pi = over_pi.schedule;
    out.objective.push_back(over_pi.objective.back());

    const Matrix pi_fixed = out.schedule.pi;
    auto over_p = minimize_row_stochastic(
        out.schedule.p_tor, [&](const Matrix& pt) { return f.value(q_of(pi_fixed, pt)); },
        [&](const Matrix& pt) {
          const Matrix gq = f.gradient(q_of(pi_fixed, pt));
          Matrix g(pt.rows(), pt.cols());
          for (std::size_t j = 0; j < pi_fixed.rows(); ++j)
            for (std::size_t u = 0; u < tors; ++u)
              for (std::size_t v = 0; v < per_tor; ++v) g(u, v) += gq(j, u * per_tor + v) * pi_fixed(j, u);
          return g;
        },
        [&](const Matrix& pt) { return f.admissible(q_of(pi_fixed, pt)); }, settings);
    out.schedule.p_tor = over_p.schedule;
    out.objective.push_back(over_p.objective.back());
  }
  return out;
}

}  // namespace aoisched
