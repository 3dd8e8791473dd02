#pragma once

// Domain types for the two-phase compute/networking system.
//
// Units: times in ms, rates in 1/ms. Job sizes D (compute) and E (output) are
// dimensionless multipliers: a class-j job on VM v has service time
// beta_v * D_j + Exp(alpha_v / D_j), and networking time
// zeta * E_j + Exp(gamma / E_j).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoisched/errors.hpp"
#include "aoisched/rng.hpp"

namespace aoisched {

enum class MomentMode {
  Exact,         // true second moment of shift + Exp(rate)
  PaperLiteral,  // shift^2 + shift + (shift + 2) / rate
};

// How the networking terms enter the expected AoI of a class.
enum class AoiNetworkWeighting {
  PaperTheorem1,  // scaled by lambda_j / Lambda
  Unweighted,     // per-job decomposition S1 + W2 + S2
};

enum class NetworkDiscipline { PriorityWsept, Fcfs };

inline std::string_view to_string(MomentMode m) {
  return m == MomentMode::Exact ? "exact" : "paper_literal";
}
inline std::string_view to_string(AoiNetworkWeighting w) {
  return w == AoiNetworkWeighting::PaperTheorem1 ? "paper_theorem1" : "unweighted";
}
inline std::string_view to_string(NetworkDiscipline d) {
  return d == NetworkDiscipline::PriorityWsept ? "priority_wsept" : "fcfs";
}

inline MomentMode parse_moment_mode(std::string_view s) {
  if (s == "exact") return MomentMode::Exact;
  if (s == "paper_literal" || s == "paper-literal") return MomentMode::PaperLiteral;
  throw ConfigError("unknown moment_mode '" + std::string(s) + "'");
}
inline AoiNetworkWeighting parse_aoi_weighting(std::string_view s) {
  if (s == "paper_theorem1" || s == "paper-theorem1") return AoiNetworkWeighting::PaperTheorem1;
  if (s == "unweighted") return AoiNetworkWeighting::Unweighted;
  throw ConfigError("unknown aoi_network_weighting '" + std::string(s) + "'");
}
inline NetworkDiscipline parse_discipline(std::string_view s) {
  if (s == "priority_wsept" || s == "priority" || s == "wsept") return NetworkDiscipline::PriorityWsept;
  if (s == "fcfs") return NetworkDiscipline::Fcfs;
  throw ConfigError("unknown networking discipline '" + std::string(s) + "'");
}

struct JobClass {
  int id = 0;                 // 1-based, contiguous
  double lambda = 0.0;        // arrival rate, 1/ms
  std::optional<double> mu;   // information update rate, 1/ms (simulator only)
  double d_size = 1.0;        // compute size D_j
  double e_size = 1.0;        // output size E_j
  std::vector<int> info_set;  // classes whose updates job j reads; empty means {id}
};

struct VmProfile {
  int id = 0;
  double alpha = 1.0;  // exponential rate per unit size, 1/ms
  double beta = 0.0;   // deterministic shift per unit size, ms
};

struct NetworkProfile {
  double gamma = 112.0;  // 1/ms
  double zeta = 18.0;    // ms
};

// Pareto(shape, scale) job sizes, clipped at cap_multiplier times the mean.
struct ParetoSpec {
  double shape = 2.0;
  double scale = 300.0;
  double cap_multiplier = 5.0;

  double mean() const { return shape * scale / (shape - 1.0); }
  double cap() const { return cap_multiplier * mean(); }

  void validate() const {
    if (!(shape > 1.0)) throw ConfigError("pareto.shape must be > 1 (finite mean)");
    if (!(scale > 0.0)) throw ConfigError("pareto.scale must be > 0");
    if (!(cap_multiplier > 0.0)) throw ConfigError("pareto.cap_multiplier must be > 0");
  }
};

struct SystemConfig {
  std::vector<JobClass> classes;
  std::vector<VmProfile> vms;
  NetworkProfile network;
  double theta = 0.5;
  MomentMode moment_mode = MomentMode::Exact;
  AoiNetworkWeighting aoi_weighting = AoiNetworkWeighting::PaperTheorem1;
  ParetoSpec pareto;
  std::uint64_t seed = 1;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::size_t num_vms() const noexcept { return vms.size(); }

  double total_rate() const {
    double sum = 0.0;
    for (const auto& c : classes) sum += c.lambda;
    return sum;
  }

  // w_j = theta * lambda_j / lambda and g_j = (1 - theta) * lambda_j / lambda.
  double completion_weight(std::size_t j) const { return theta * classes[j].lambda / total_rate(); }
  double aoi_weight(std::size_t j) const { return (1.0 - theta) * classes[j].lambda / total_rate(); }
};

// Parameters of the shifted exponential service of class j on VM v.
inline double compute_shift(const VmProfile& v, const JobClass& j) { return v.beta * j.d_size; }
inline double compute_rate(const VmProfile& v, const JobClass& j) { return v.alpha / j.d_size; }
inline double network_shift(const NetworkProfile& n, const JobClass& j) { return n.zeta * j.e_size; }
inline double network_rate(const NetworkProfile& n, const JobClass& j) { return n.gamma / j.e_size; }

// Mean time per unit compute size on VM v: beta_v + 1 / alpha_v.
inline double unit_service_time(const VmProfile& v) { return v.beta + 1.0 / v.alpha; }

inline double mean_network_time(const NetworkProfile& n, const JobClass& j) {
  return network_shift(n, j) + 1.0 / network_rate(n, j);
}

// Sum_j lambda_j E[S2_j].
inline double network_intensity(const SystemConfig& config) {
  double rho = 0.0;
  for (const auto& c : config.classes) rho += c.lambda * mean_network_time(config.network, c);
  return rho;
}

struct Violation {
  std::string field;
  std::string message;
};

inline std::vector<Violation> validate_config(const SystemConfig& config) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) { out.push_back({std::move(field), std::move(msg)}); };

  if (!(config.theta >= 0.0 && config.theta <= 1.0)) add("theta", "theta out of [0,1]");

  if (config.classes.empty()) add("classes", "at least one job class is required");
  for (std::size_t i = 0; i < config.classes.size(); ++i) {
    const auto& c = config.classes[i];
    const std::string f = "classes[" + std::to_string(i) + "]";
    if (c.id != static_cast<int>(i) + 1) add(f + ".id", "class ids must be contiguous 1..J in order");
    if (!(c.lambda > 0.0)) add(f + ".lambda", "lambda must be > 0");
    if (!(c.d_size > 0.0)) add(f + ".d_size", "d_size must be > 0");
    if (!(c.e_size > 0.0)) add(f + ".e_size", "e_size must be > 0");
    if (c.mu && !(*c.mu > 0.0)) add(f + ".mu", "mu must be > 0 when given");
    for (int member : c.info_set) {
      if (member < 1 || member > static_cast<int>(config.classes.size()))
        add(f + ".info_set", "info_set references unknown class " + std::to_string(member));
    }
  }

  if (config.vms.empty()) add("vms", "at least one VM is required");
  for (std::size_t i = 0; i < config.vms.size(); ++i) {
    const auto& v = config.vms[i];
    const std::string f = "vms[" + std::to_string(i) + "]";
    if (v.id != static_cast<int>(i) + 1) add(f + ".id", "VM ids must be contiguous 1..V in order");
    if (!(v.alpha > 0.0)) add(f + ".alpha", "alpha must be > 0");
    if (!(v.beta >= 0.0)) add(f + ".beta", "beta must be >= 0");
  }

  if (!(config.network.gamma > 0.0)) add("network.gamma", "gamma must be > 0");
  if (!(config.network.zeta >= 0.0)) add("network.zeta", "zeta must be >= 0");

  const auto& p = config.pareto;
  if (!(p.shape > 1.0)) add("pareto.shape", "shape must be > 1");
  if (!(p.scale > 0.0)) add("pareto.scale", "scale must be > 0");
  if (!(p.cap_multiplier > 0.0)) add("pareto.cap_multiplier", "cap_multiplier must be > 0");

  if (!out.empty()) return out;  // the load checks below assume sane fields

  const double rho_net = network_intensity(config);
  if (rho_net >= 1.0)
    add("network", "networking queue unstable (rho = " + std::to_string(rho_net) + ")");

  // A fractional schedule can spread load freely, so a stable schedule exists
  // iff total compute demand is below the summed VM capacities.
  double demand = 0.0;
  for (const auto& c : config.classes) demand += c.lambda * c.d_size;
  double capacity = 0.0;
  for (const auto& v : config.vms) capacity += 1.0 / unit_service_time(v);
  if (demand >= capacity)
    add("vms", "compute capacity insufficient (demand " + std::to_string(demand) +
                   " >= capacity " + std::to_string(capacity) + ")");
  return out;
}

// Raw Pareto(shape, scale) draw by inversion.
inline double sample_pareto(const ParetoSpec& spec, RandomStream& rng) {
  return spec.scale * std::pow(rng.uniform_open_zero(), -1.0 / spec.shape);
}

// One size per class (sizes are per-class constants), clipped at the cap.
inline std::vector<double> sample_class_sizes(const ParetoSpec& spec, std::size_t count, std::uint64_t seed) {
  spec.validate();
  RandomStream rng(seed);
  std::vector<double> sizes(count);
  for (auto& s : sizes) s = std::min(sample_pareto(spec, rng), spec.cap());
  return sizes;
}

// VM speed profiles used for evaluation (nodes 1..10).
inline std::vector<VmProfile> table_one_vms() {
  constexpr double alphas[] = {82, 76, 71, 65, 60, 51, 44, 39, 34, 29};
  constexpr double betas[] = {10, 12, 13, 17, 16, 18, 20, 21, 23, 25};
  std::vector<VmProfile> vms;
  for (int i = 0; i < 10; ++i) vms.push_back({i + 1, alphas[i], betas[i]});
  return vms;
}

// Desk-scale instance in the evaluation style: lambda_j = lambda_b / (j + 1),
// Pareto sizes, Table I VMs (cycled when more than ten are requested) and the
// evaluation networking server. lambda_b is chosen so that the networking
// queue runs at `network_load` before `lambda_scale` is applied.
struct PaperStyleOptions {
  std::size_t classes = 20;
  std::size_t vms = 5;
  double theta = 0.3;
  double network_load = 0.5;
  double lambda_scale = 1.0;
  std::uint64_t seed = 1;
  ParetoSpec pareto;
  MomentMode moment_mode = MomentMode::Exact;
  AoiNetworkWeighting aoi_weighting = AoiNetworkWeighting::PaperTheorem1;
};

inline SystemConfig make_paper_style_config(const PaperStyleOptions& o) {
  SystemConfig c;
  c.theta = o.theta;
  c.moment_mode = o.moment_mode;
  c.aoi_weighting = o.aoi_weighting;
  c.pareto = o.pareto;
  c.seed = o.seed;
  const auto table = table_one_vms();
  for (std::size_t v = 0; v < o.vms; ++v) {
    VmProfile p = table[v % table.size()];
    p.id = static_cast<int>(v) + 1;
    c.vms.push_back(p);
  }
  const auto d = sample_class_sizes(o.pareto, o.classes, derive_seed(o.seed, 0, static_cast<std::uint64_t>(StreamId::ComputeSizes)));
  const auto e = sample_class_sizes(o.pareto, o.classes, derive_seed(o.seed, 0, static_cast<std::uint64_t>(StreamId::OutputSizes)));
  for (std::size_t j = 0; j < o.classes; ++j) {
    JobClass jc;
    jc.id = static_cast<int>(j) + 1;
    jc.lambda = 1.0 / static_cast<double>(j + 2);
    jc.d_size = d[j];
    jc.e_size = e[j];
    c.classes.push_back(jc);
  }
  const double base = o.network_load / network_intensity(c);
  for (auto& jc : c.classes) jc.lambda *= base * o.lambda_scale;
  return c;
}

inline void scale_arrival_rates(SystemConfig& config, double factor) {
  for (auto& c : config.classes) c.lambda *= factor;
}

}  // namespace aoisched
