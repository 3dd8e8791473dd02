// Command-line front end: optimize, simulate, sweep, online, example-fig3.
//
// Exit codes: 0 success, 1 internal error, 2 user or configuration error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aoisched/aoisched.hpp"

namespace fs = std::filesystem;
using namespace aoisched;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out_dir = ".";
  std::string moment_mode;
  double margin = 1e-3;
};

struct SimFlags {
  double horizon = 1e6;
  double warmup = 0.2;
  int replications = 10;
  bool deterministic = false;
  bool updates = false;
  bool job_log = false;
  bool serial = false;

  SimConfig to_config(std::uint64_t seed) const {
    SimConfig s;
    s.horizon = horizon;
    s.warmup_fraction = warmup;
    s.replications = replications;
    s.seed = seed;
    s.service_mode = deterministic ? ServiceMode::Deterministic : ServiceMode::ShiftedExponential;
    s.simulate_updates = updates;
    s.record_jobs = job_log;
    s.parallel = !serial;
    s.validate();
    return s;
  }

  json to_json() const {
    return {{"horizon", horizon},           {"warmup_fraction", warmup}, {"replications", replications},
            {"deterministic", deterministic}, {"simulate_updates", updates}, {"job_log", job_log}};
  }
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--horizon", f.horizon, "Simulated ms of arrivals")->capture_default_str();
  cmd->add_option("--warmup", f.warmup, "Warmup fraction of the horizon")->capture_default_str();
  cmd->add_option("--replications", f.replications, "Independent replications")->capture_default_str();
  cmd->add_flag("--deterministic", f.deterministic, "Use the shifts only (no exponential part)");
  cmd->add_flag("--simulate-updates", f.updates, "Measure Y_j from Poisson update processes (needs mu)");
  cmd->add_flag("--job-log", f.job_log, "Write the per-job event log of replication 0");
  cmd->add_flag("--serial", f.serial, "Run replications on one thread");
}

struct Output {
  fs::path dir;
  RunManifest manifest;

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write_json(const std::string& name, json body) {
    manifest.finished_at = utc_timestamp();
    body["manifest"] = manifest.to_json();
    write_text(path(name), body.dump(2) + "\n");
  }

  void finish() {
    manifest.finished_at = utc_timestamp();
    write_text(path("manifest.json"), manifest.to_json().dump(2) + "\n");
  }
};

Output make_output(const GlobalOptions& g, const std::string& command) {
  Output out;
  out.dir = g.out_dir;
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + g.out_dir + "': " + ec.message());
  out.manifest.command = command;
  out.manifest.started_at = utc_timestamp();
  out.manifest.seeds = {g.seed};
  return out;
}

SystemConfig load_resolved_config(const std::string& path, const GlobalOptions& g, std::optional<double> theta) {
  auto c = load_config(path);
  if (!g.moment_mode.empty()) c.moment_mode = parse_moment_mode(g.moment_mode);
  if (g.seed_given) c.seed = g.seed;
  if (theta) c.theta = *theta;
  require_valid(c);
  return c;
}

json global_json(const GlobalOptions& g) {
  return {{"seed", g.seed}, {"out_dir", g.out_dir}, {"moment_mode", g.moment_mode}, {"margin", g.margin}};
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string config;
  std::optional<double> theta;
  OptimizerSettings settings;
  std::string discipline = "priority_wsept";
};

int cmd_optimize(const GlobalOptions& g, OptimizeArgs a) {
  const auto config = load_resolved_config(a.config, g, a.theta);
  a.settings.stability_margin = g.margin;
  a.settings.seed = g.seed;
  a.settings.discipline = parse_discipline(a.discipline);
  auto out = make_output(g, "optimize");
  out.manifest.config_hash = config_hash(config);
  out.manifest.settings = {{"global", global_json(g)},
                           {"config_path", a.config},
                           {"theta", config.theta},
                           {"max_iters", a.settings.max_iters},
                           {"rel_tol", a.settings.rel_tol},
                           {"initial_step", a.settings.initial_step},
                           {"armijo_shrink", a.settings.armijo_shrink},
                           {"discipline", a.discipline},
                           {"config", config_to_json(config)}};

  const auto trace = optimize_pps(config, a.settings);
  const auto report = analyze(trace.schedule, config, a.settings.discipline);
  save_matrix(trace.schedule, out.path("schedule.txt"));
  write_text(out.path("convergence.csv"), convergence_csv(trace));
  write_text(out.path("analytic_report.csv"), analytic_report_csv(report));
  json body = analytic_report_json(report);
  body["iterations"] = trace.iterations;
  body["converged"] = trace.converged;
  out.write_json("analytic_report.json", body);
  out.finish();

  std::cout << "iterations " << trace.iterations << (trace.converged ? " (converged)" : " (max_iters reached)")
            << "\nobjective " << report.objective << " ms\nweighted completion " << report.weighted_completion
            << " ms\nweighted aoi " << report.weighted_aoi << " ms\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string policy;
  std::string schedule;
  std::string pca_mode = "paper_literal";
  std::string discipline;
  std::optional<double> theta;
  SimFlags sim;
};

PcaMode parse_pca_mode(const std::string& s) {
  if (s == "paper_literal" || s == "paper-literal") return PcaMode::PaperLiteral;
  if (s == "inverse_time" || s == "inverse-time") return PcaMode::InverseTime;
  throw ConfigError("unknown pca mode '" + s + "'");
}

int cmd_simulate(const GlobalOptions& g, const SimulateArgs& a) {
  const auto config = load_resolved_config(a.config, g, a.theta);
  auto sim = a.sim.to_config(g.seed);
  auto out = make_output(g, "simulate");
  out.manifest.config_hash = config_hash(config);

  ScheduleMatrix p;
  std::string source;
  if (!a.schedule.empty()) {
    p = load_matrix(a.schedule);
    if (p.rows() != config.num_classes() || p.cols() != config.num_vms())
      throw ConfigError("schedule '" + a.schedule + "' is " + std::to_string(p.rows()) + "x" +
                        std::to_string(p.cols()) + ", config needs " + std::to_string(config.num_classes()) + "x" +
                        std::to_string(config.num_vms()));
    if (!is_row_stochastic(p, 1e-9)) throw ConfigError("schedule rows must be probability vectors");
    sim.networking_discipline = a.discipline.empty() ? NetworkDiscipline::PriorityWsept : parse_discipline(a.discipline);
    source = a.schedule;
  } else {
    const auto policy = parse_policy(a.policy);
    OptimizerSettings settings;
    settings.stability_margin = g.margin;
    settings.seed = g.seed;
    const auto eval = evaluate_policy(policy, config, settings, parse_pca_mode(a.pca_mode));
    p = eval.schedule;
    sim.networking_discipline = policy_discipline(policy);
    source = std::string(to_string(policy));
  }
  out.manifest.settings = {{"global", global_json(g)},    {"config_path", a.config},
                           {"schedule_source", source},    {"pca_mode", a.pca_mode},
                           {"networking_discipline", std::string(to_string(sim.networking_discipline))},
                           {"sim", a.sim.to_json()},       {"config", config_to_json(config)}};
  for (int r = 0; r < sim.replications; ++r)
    out.manifest.notes.push_back("replication " + std::to_string(r) + " streams derive from (seed, " +
                                 std::to_string(r) + ", stream id)");

  const auto result = run_simulation(config, p, sim);
  save_matrix(p, out.path("schedule.txt"));
  write_text(out.path("sim_report.csv"), sim_result_csv(result));
  json body = sim_result_json(result);
  try {
    body["analytic"] = analytic_report_json(analyze(p, config, sim.networking_discipline));
  } catch (const StabilityError& e) {
    body["analytic"] = {{"error", e.what()}};
  }
  out.write_json("sim_report.json", body);
  if (sim.record_jobs) write_text(out.path("jobs.csv"), job_log_csv(result.jobs));
  out.finish();

  std::cout << "policy " << source << "\nobjective " << result.objective.mean << " +- "
            << result.objective.ci_half_width << " ms\nweighted completion " << result.weighted_completion.mean
            << " ms\nweighted aoi " << result.weighted_aoi.mean << " ms\n";
  if (result.any_unstable()) std::cout << "warning: at least one queue grew without bound\n";
  return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string axis;
  std::vector<double> values;
  double from = 0.0, to = 1.0, step = 0.1;
  bool simulate = false;
  std::optional<double> theta;
  SimFlags sim;
};

std::vector<double> sweep_points(const SweepArgs& a) {
  if (!a.values.empty()) return a.values;
  if (!(a.step > 0.0)) throw ConfigError("--step must be > 0");
  if (a.to < a.from) throw ConfigError("--to must be >= --from");
  std::vector<double> pts;
  const auto n = static_cast<long>(std::floor((a.to - a.from) / a.step + 1e-9));
  for (long i = 0; i <= n; ++i) pts.push_back(a.from + static_cast<double>(i) * a.step);
  return pts;
}

// Four contiguous class groups with relative base rates (2/150, 4/150, 6/250,
// 3/150), normalised so that scale 1 saturates the networking queue.
SystemConfig weight_group_config(SystemConfig c, double scale) {
  const double base[] = {2.0 / 150.0, 4.0 / 150.0, 6.0 / 250.0, 3.0 / 150.0};
  const std::size_t J = c.num_classes();
  for (std::size_t j = 0; j < J; ++j) c.classes[j].lambda = base[j * 4 / J];
  const double load = network_intensity(c);
  for (auto& k : c.classes) k.lambda *= scale / load;
  return c;
}

SystemConfig sweep_config(const SystemConfig& base, const std::string& axis, double value) {
  SystemConfig c = base;
  if (axis == "theta") {
    c.theta = value;
  } else if (axis == "lambda-scale") {
    scale_arrival_rates(c, value);
  } else if (axis == "vms") {
    if (value < 1.0 || value != std::floor(value)) throw ConfigError("vms sweep values must be positive integers");
    const auto table = table_one_vms();
    c.vms.clear();
    for (std::size_t v = 0; v < static_cast<std::size_t>(value); ++v) {
      VmProfile p = table[v % table.size()];
      p.id = static_cast<int>(v) + 1;
      c.vms.push_back(p);
    }
  } else if (axis == "weights") {
    c = weight_group_config(c, value);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (theta, vms, lambda-scale, weights)");
  }
  return c;
}

int cmd_sweep(const GlobalOptions& g, const SweepArgs& a) {
  const auto base = load_resolved_config(a.config, g, a.theta);
  const auto points = sweep_points(a);
  sweep_config(base, a.axis, points.front());  // reject bad axis before any work
  const auto sim = a.sim.to_config(g.seed);
  auto out = make_output(g, "sweep");
  out.manifest.config_hash = config_hash(base);
  out.manifest.settings = {{"global", global_json(g)}, {"config_path", a.config}, {"axis", a.axis},
                           {"points", points},          {"simulate", a.simulate},  {"sim", a.sim.to_json()},
                           {"config", config_to_json(base)}};

  std::ostringstream csv;
  csv << std::setprecision(17) << "point,axis,axis_value,policy,metric,value,status\n";
  auto row = [&](std::size_t i, double x, std::string_view policy, const std::string& metric, double v,
                 const std::string& status) {
    csv << i << ',' << a.axis << ',' << x << ',' << policy << ',' << metric << ',' << v << ',' << status << '\n';
  };
  OptimizerSettings settings;
  settings.stability_margin = g.margin;
  settings.seed = g.seed;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = points[i];
    SystemConfig c;
    try {
      c = sweep_config(base, a.axis, x);
      require_valid(c);
    } catch (const ConfigError& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      std::replace(msg.begin(), msg.end(), ',', ';');
      row(i, x, "all", "objective", std::nan(""), "infeasible: " + msg);
      ++flagged;
      continue;
    }
    for (auto policy : {Policy::Pps, Policy::Rca, Policy::Pca, Policy::OcaFcfs}) {
      try {
        const auto eval = evaluate_policy(policy, c, settings);
        const auto& r = eval.report;
        row(i, x, to_string(policy), "objective", r.objective, "ok");
        row(i, x, to_string(policy), "weighted_completion", r.weighted_completion, "ok");
        row(i, x, to_string(policy), "weighted_aoi", r.weighted_aoi, "ok");
        if (a.axis == "weights") {
          const std::size_t J = c.num_classes();
          for (std::size_t grp = 0; grp < 4; ++grp) {
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < J; ++j)
              if (j * 4 / J == grp) {
                num += c.classes[j].lambda * r.classes[j].aoi;
                den += c.classes[j].lambda;
              }
            if (den > 0.0) row(i, x, to_string(policy), "group" + std::to_string(grp + 1) + "_weighted_aoi", num / den, "ok");
          }
        }
        if (a.simulate) {
          auto s = sim;
          s.networking_discipline = policy_discipline(policy);
          const auto res = run_simulation(c, eval.schedule, s);
          const std::string status = res.any_unstable() ? "unstable" : "ok";
          row(i, x, to_string(policy), "sim_objective", res.objective.mean, status);
          row(i, x, to_string(policy), "sim_objective_ci", res.objective.ci_half_width, status);
          row(i, x, to_string(policy), "sim_weighted_completion", res.weighted_completion.mean, status);
          row(i, x, to_string(policy), "sim_weighted_aoi", res.weighted_aoi.mean, status);
        }
      } catch (const std::runtime_error& e) {
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        row(i, x, to_string(policy), "objective", std::nan(""), "infeasible: " + msg);
        ++flagged;
      }
    }
  }
  write_text(out.path("sweep.csv"), csv.str());
  out.manifest.notes.push_back(std::to_string(flagged) + " sweep rows flagged infeasible");
  out.finish();
  std::cout << "wrote " << out.path("sweep.csv") << " (" << points.size() << " points, " << flagged
            << " flagged)\n";
  return 0;
}

// ---------------------------------------------------------------- online

struct OnlineArgs {
  std::string config;
  std::string trace;
  std::string class_map;
  bool synthetic = false;
  int windows = 10;
  double window = 0.0;
  std::optional<double> theta;
  SimFlags sim;
};

int cmd_online(const GlobalOptions& g, const OnlineArgs& a) {
  const auto config = load_resolved_config(a.config, g, a.theta);
  if (a.synthetic == !a.trace.empty()) throw ConfigError("give exactly one of --trace or --synthetic");
  auto out = make_output(g, "online");
  out.manifest.config_hash = config_hash(config);

  std::vector<TraceRecord> records;
  bool rank_bucketed = false;
  std::string trace_source;
  double window = a.window;
  if (a.synthetic) {
    if (a.windows < 2) throw ConfigError("--windows must be >= 2");
    std::vector<double> rates;
    for (const auto& k : config.classes) rates.push_back(k.lambda);
    if (window <= 0.0) window = std::max(1e5, 1000.0 / config.total_rate());
    records = generate_poisson_trace({{window * a.windows, rates}}, derive_seed(g.seed, 0, static_cast<std::uint64_t>(StreamId::Trace)));
    write_trace_csv(records, out.path("synthetic_trace.csv"));
    trace_source = "synthetic stationary Poisson trace from the config rates";
  } else {
    std::optional<std::map<std::string, int>> map;
    if (!a.class_map.empty()) map = read_class_map(a.class_map);
    auto t = ingest_trace(a.trace, config.num_classes(), map);
    records = std::move(t.records);
    rank_bucketed = t.rank_bucketed;
    if (window <= 0.0) window = default_window_length(records);
    trace_source = a.trace;
  }
  if (rank_bucketed)
    out.manifest.notes.push_back("no class map given: keys assigned to classes by frequency-rank bucketing");

  OnlineSettings settings;
  settings.window_length = window;
  settings.optimizer.stability_margin = g.margin;
  settings.optimizer.seed = g.seed;
  settings.sim = a.sim.to_config(g.seed);
  out.manifest.settings = {{"global", global_json(g)}, {"config_path", a.config}, {"trace", trace_source},
                           {"class_map", a.class_map},  {"window_length", window},  {"sim", a.sim.to_json()},
                           {"config", config_to_json(config)}};

  const auto result = online_driver(records, config, settings);
  std::ostringstream csv;
  csv << std::setprecision(17) << "window,objective_estimate,fallback";
  for (std::size_t j = 1; j <= config.num_classes(); ++j) csv << ",rate_" << j;
  csv << '\n';
  fs::create_directories(out.dir / "schedules");
  for (const auto& w : result.windows) {
    csv << w.index << ',' << w.objective_estimate << ',' << (w.fallback ? 1 : 0);
    for (std::size_t j = 0; j < config.num_classes(); ++j)
      csv << ',' << (w.estimate.rates.empty() ? std::nan("") : w.estimate.rates[j]);
    csv << '\n';
    save_matrix(w.schedule, (out.dir / "schedules" / ("window_" + std::to_string(w.index) + ".txt")).string());
    if (w.fallback) out.manifest.notes.push_back("window " + std::to_string(w.index) + ": " + w.note);
  }
  write_text(out.path("windows.csv"), csv.str());

  json body;
  body["window_length"] = window;
  body["windows"] = result.windows.size();
  body["online"] = sim_result_json(result.sim);
  std::cout << "windows " << result.windows.size() << " of " << window << " ms\nonline objective "
            << result.sim.objective.mean << " +- " << result.sim.objective.ci_half_width << " ms\n";
  if (a.synthetic) {
    const auto offline = offline_reference(records, config, settings);
    const double gap = std::abs(result.sim.objective.mean - offline.objective.mean) / offline.objective.mean;
    body["offline"] = sim_result_json(offline);
    body["relative_gap"] = gap;
    std::cout << "offline objective " << offline.objective.mean << " +- " << offline.objective.ci_half_width
              << " ms\nrelative gap " << gap << '\n';
  }
  out.write_json("online_report.json", body);
  out.finish();
  return 0;
}

// ---------------------------------------------------------------- example-fig3

int cmd_example(const GlobalOptions& g) {
  auto out = make_output(g, "example-fig3");
  out.manifest.settings = {{"global", global_json(g)}};
  const auto ex = run_tradeoff_example();
  std::ostringstream csv;
  csv << std::setprecision(17) << "policy,job,vm,completion,aoi\n";
  json body;
  for (const auto* p : {&ex.policy1, &ex.policy2}) {
    for (std::size_t j = 0; j < 3; ++j)
      csv << p->name << ',' << j + 1 << ',' << p->vm_of_job[j] << ',' << p->completion[j] << ',' << p->aoi[j] << '\n';
    body[p->name] = {{"vm_of_job", p->vm_of_job},
                     {"completion", p->completion},
                     {"aoi", p->aoi},
                     {"weighted_completion", p->weighted_completion},
                     {"weighted_aoi", p->weighted_aoi}};
    std::cout << p->name << ": weighted age " << p->weighted_aoi << ", weighted completion "
              << p->weighted_completion << '\n';
  }
  write_text(out.path("fig3.csv"), csv.str());
  out.write_json("fig3.json", body);
  out.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information / completion-time scheduling for two-phase compute and networking queues"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GlobalOptions g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Directory for reports")->capture_default_str();
  app.add_option("--moment-mode", g.moment_mode, "Override moment_mode: exact or paper_literal");
  app.add_option("--margin", g.margin, "Stability margin on traffic intensities")->capture_default_str();

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "Optimise the scheduling probabilities");
  opt->add_option("config", oa.config, "System config (JSON)")->required();
  opt->add_option("--theta", oa.theta, "Override theta");
  opt->add_option("--max-iters", oa.settings.max_iters)->capture_default_str();
  opt->add_option("--rel-tol", oa.settings.rel_tol)->capture_default_str();
  opt->add_option("--initial-step", oa.settings.initial_step)->capture_default_str();
  opt->add_option("--armijo-shrink", oa.settings.armijo_shrink)->capture_default_str();
  opt->add_option("--discipline", oa.discipline, "priority_wsept or fcfs")->capture_default_str();
  opt->add_flag("--fd-gradient", oa.settings.finite_difference_gradient, "Use finite-difference gradients");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulate a policy or a schedule file");
  sim->add_option("config", sa.config, "System config (JSON)")->required();
  auto* pol = sim->add_option("--policy", sa.policy, "pps, rca, pca or ocafcfs");
  auto* sched = sim->add_option("--schedule", sa.schedule, "Schedule matrix file");
  pol->excludes(sched);
  sim->add_option("--pca-mode", sa.pca_mode, "paper_literal or inverse_time")->capture_default_str();
  sim->add_option("--discipline", sa.discipline, "Networking discipline for --schedule")->needs(sched);
  sim->add_option("--theta", sa.theta, "Override theta");
  add_sim_flags(sim, sa.sim);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Optimise and compare policies along one axis");
  sweep->add_option("config", wa.config, "System config (JSON)")->required();
  sweep->add_option("--axis", wa.axis, "theta, vms, lambda-scale or weights")->required();
  sweep->add_option("--values", wa.values, "Explicit sweep values");
  sweep->add_option("--from", wa.from)->capture_default_str();
  sweep->add_option("--to", wa.to)->capture_default_str();
  sweep->add_option("--step", wa.step)->capture_default_str();
  sweep->add_flag("--simulate", wa.simulate, "Also simulate every policy at every point");
  sweep->add_option("--theta", wa.theta, "Override theta");
  add_sim_flags(sweep, wa.sim);

  OnlineArgs na;
  auto* online = app.add_subcommand("online", "Window-based online scheduling over a trace");
  online->add_option("config", na.config, "Template config (JSON)")->required();
  auto* trace = online->add_option("--trace", na.trace, "Trace CSV (timestamp_ms,key)");
  online->add_option("--class-map", na.class_map, "CSV key,class_id")->needs(trace);
  online->add_flag("--synthetic", na.synthetic, "Generate a stationary Poisson trace from the config rates");
  online->add_option("--windows", na.windows, "Windows in the synthetic trace")->capture_default_str();
  online->add_option("--window", na.window, "Window length in ms (default: max(1e5, 1000 arrivals))");
  online->add_option("--theta", na.theta, "Override theta");
  add_sim_flags(online, na.sim);

  auto* example = app.add_subcommand("example-fig3", "Three-job example where the two metrics disagree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*opt) return cmd_optimize(g, oa);
    if (*sim) {
      if (sa.policy.empty() && sa.schedule.empty()) throw ConfigError("simulate needs --policy or --schedule");
      return cmd_simulate(g, sa);
    }
    if (*sweep) return cmd_sweep(g, wa);
    if (*online) return cmd_online(g, na);
    if (*example) return cmd_example(g);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const StabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
