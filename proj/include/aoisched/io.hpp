#pragma once

// File formats: JSON system configs, schedule matrix files, CSV/JSON reports
// and the run manifest embedded in every report. See docs/formats.md.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aoisched/analytics.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/matrix.hpp"
#include "aoisched/model.hpp"
#include "aoisched/optimizer.hpp"
#include "aoisched/simulator.hpp"

namespace aoisched {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------- configs

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <class T>
T get_field(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": missing or wrong type");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get_field<T>(obj, key, where);
}

inline ParetoSpec pareto_from_json(const json& j) {
  reject_unknown_keys(j, {"shape", "scale", "cap_multiplier"}, "pareto");
  ParetoSpec p;
  p.shape = get_or(j, "shape", p.shape, "pareto");
  p.scale = get_or(j, "scale", p.scale, "pareto");
  p.cap_multiplier = get_or(j, "cap_multiplier", p.cap_multiplier, "pareto");
  return p;
}

}  // namespace detail

// Accepts either explicit `classes` + `vms` arrays or a `generate` block that
// builds an evaluation-style instance. Missing d_size / e_size are Pareto
// draws indexed by class position.
inline SystemConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(
      j, {"theta", "moment_mode", "aoi_network_weighting", "seed", "network", "pareto", "vms", "classes", "generate"},
      "config");
  const auto seed = detail::get_or<std::uint64_t>(j, "seed", 1, "config");
  const auto pareto = j.contains("pareto") ? detail::pareto_from_json(j.at("pareto")) : ParetoSpec{};
  const auto mode = parse_moment_mode(detail::get_or<std::string>(j, "moment_mode", "exact", "config"));
  const auto weighting =
      parse_aoi_weighting(detail::get_or<std::string>(j, "aoi_network_weighting", "paper_theorem1", "config"));
  const double theta = detail::get_or(j, "theta", 0.5, "config");

  SystemConfig c;
  if (j.contains("generate")) {
    if (j.contains("classes") || j.contains("vms"))
      throw ConfigError("config: 'generate' cannot be combined with 'classes' or 'vms'");
    const auto& g = j.at("generate");
    detail::reject_unknown_keys(g, {"classes", "vms", "network_load", "lambda_scale"}, "generate");
    PaperStyleOptions o;
    o.classes = detail::get_or<std::size_t>(g, "classes", o.classes, "generate");
    o.vms = detail::get_or<std::size_t>(g, "vms", o.vms, "generate");
    o.network_load = detail::get_or(g, "network_load", o.network_load, "generate");
    o.lambda_scale = detail::get_or(g, "lambda_scale", o.lambda_scale, "generate");
    if (o.classes == 0 || o.vms == 0) throw ConfigError("generate: classes and vms must be >= 1");
    if (!(o.network_load > 0.0)) throw ConfigError("generate.network_load must be > 0");
    pareto.validate();
    o.theta = theta;
    o.seed = seed;
    o.pareto = pareto;
    o.moment_mode = mode;
    o.aoi_weighting = weighting;
    c = make_paper_style_config(o);
  } else {
    c.theta = theta;
    c.seed = seed;
    c.pareto = pareto;
    c.moment_mode = mode;
    c.aoi_weighting = weighting;
    if (!j.contains("classes") || !j.at("classes").is_array()) throw ConfigError("config: 'classes' array is required");
    if (!j.contains("vms") || !j.at("vms").is_array()) throw ConfigError("config: 'vms' array is required");

    const auto& classes = j.at("classes");
    std::optional<std::vector<double>> d_draws, e_draws;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const auto& e = classes[i];
      const std::string where = "classes[" + std::to_string(i) + "]";
      if (!e.is_object()) throw ConfigError(where + ": must be an object");
      detail::reject_unknown_keys(e, {"id", "lambda", "mu", "d_size", "e_size", "info_set"}, where);
      JobClass jc;
      jc.id = detail::get_or<int>(e, "id", static_cast<int>(i) + 1, where);
      jc.lambda = detail::get_field<double>(e, "lambda", where);
      if (e.contains("mu")) jc.mu = detail::get_field<double>(e, "mu", where);
      if (e.contains("d_size")) {
        jc.d_size = detail::get_field<double>(e, "d_size", where);
      } else {
        if (!d_draws)
          d_draws = sample_class_sizes(pareto, classes.size(),
                                       derive_seed(seed, 0, static_cast<std::uint64_t>(StreamId::ComputeSizes)));
        jc.d_size = (*d_draws)[i];
      }
      if (e.contains("e_size")) {
        jc.e_size = detail::get_field<double>(e, "e_size", where);
      } else {
        if (!e_draws)
          e_draws = sample_class_sizes(pareto, classes.size(),
                                       derive_seed(seed, 0, static_cast<std::uint64_t>(StreamId::OutputSizes)));
        jc.e_size = (*e_draws)[i];
      }
      if (e.contains("info_set")) jc.info_set = detail::get_field<std::vector<int>>(e, "info_set", where);
      c.classes.push_back(jc);
    }
    const auto& vms = j.at("vms");
    for (std::size_t i = 0; i < vms.size(); ++i) {
      const auto& e = vms[i];
      const std::string where = "vms[" + std::to_string(i) + "]";
      if (!e.is_object()) throw ConfigError(where + ": must be an object");
      detail::reject_unknown_keys(e, {"id", "alpha", "beta"}, where);
      c.vms.push_back({detail::get_or<int>(e, "id", static_cast<int>(i) + 1, where),
                       detail::get_field<double>(e, "alpha", where), detail::get_field<double>(e, "beta", where)});
    }
  }
  if (j.contains("network")) {
    const auto& n = j.at("network");
    detail::reject_unknown_keys(n, {"gamma", "zeta"}, "network");
    c.network.gamma = detail::get_or(n, "gamma", c.network.gamma, "network");
    c.network.zeta = detail::get_or(n, "zeta", c.network.zeta, "network");
  }
  return c;
}

inline json config_to_json(const SystemConfig& c) {
  json j;
  j["theta"] = c.theta;
  j["moment_mode"] = std::string(to_string(c.moment_mode));
  j["aoi_network_weighting"] = std::string(to_string(c.aoi_weighting));
  j["seed"] = c.seed;
  j["network"] = {{"gamma", c.network.gamma}, {"zeta", c.network.zeta}};
  j["pareto"] = {{"shape", c.pareto.shape}, {"scale", c.pareto.scale}, {"cap_multiplier", c.pareto.cap_multiplier}};
  j["vms"] = json::array();
  for (const auto& v : c.vms) j["vms"].push_back({{"id", v.id}, {"alpha", v.alpha}, {"beta", v.beta}});
  j["classes"] = json::array();
  for (const auto& k : c.classes) {
    json e = {{"id", k.id}, {"lambda", k.lambda}, {"d_size", k.d_size}, {"e_size", k.e_size}};
    if (k.mu) e["mu"] = *k.mu;
    if (!k.info_set.empty()) e["info_set"] = k.info_set;
    j["classes"].push_back(e);
  }
  return j;
}

inline SystemConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const SystemConfig& config, const std::string& path) {
  write_text(path, config_to_json(config).dump(2) + "\n");
}

// Throws ConfigError listing every violation.
inline void require_valid(const SystemConfig& config) {
  const auto violations = validate_config(config);
  if (violations.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& v : violations) msg += "\n  " + v.field + ": " + v.message;
  throw ConfigError(msg);
}

// ---------------------------------------------------------------- matrices

// Layout:
//   # comment lines (any number)
//   <rows> <cols>
//   row-major values, one matrix row per line
inline std::string matrix_to_text(const Matrix& m, const std::string& comment = "schedule p(j,v): row = class, column = VM") {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# " << comment << '\n' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
    out << '\n';
  }
  return out.str();
}

inline Matrix matrix_from_text(const std::string& text, const std::string& source = "matrix") {
  std::istringstream in(text);
  std::string line;
  std::ostringstream body;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    body << line << '\n';
  }
  std::istringstream values(body.str());
  long long rows = 0, cols = 0;
  if (!(values >> rows >> cols) || rows <= 0 || cols <= 0)
    throw ConfigError(source + ": expected '<rows> <cols>' header");
  Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (!(values >> m(r, c))) throw ConfigError(source + ": expected " + std::to_string(rows * cols) + " values");
  std::string extra;
  if (values >> extra) throw ConfigError(source + ": trailing data after matrix values");
  return m;
}

inline Matrix load_matrix(const std::string& path) { return matrix_from_text(read_text(path), path); }

inline void save_matrix(const Matrix& m, const std::string& path) { write_text(path, matrix_to_text(m)); }

// ---------------------------------------------------------------- manifest

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const SystemConfig& config) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config_to_json(config).dump());
  return out.str();
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

struct RunManifest {
  std::string command;
  json settings = json::object();
  std::vector<std::uint64_t> seeds;
  std::string version = kToolVersion;
  std::string config_hash;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> notes;

  json to_json() const {
    return {{"command", command},   {"settings", settings},       {"seeds", seeds},
            {"version", version},   {"config_hash", config_hash}, {"started_at", started_at},
            {"finished_at", finished_at}, {"notes", notes}};
  }
};

// ---------------------------------------------------------------- reports

namespace detail {

inline std::ostringstream csv_stream() {
  std::ostringstream out;
  out << std::setprecision(17);
  return out;
}

inline json estimate_json(const Estimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci_half_width", e.ci_half_width}, {"samples", e.samples}};
}

}  // namespace detail

inline std::string analytic_report_csv(const AnalyticReport& r) {
  auto out = detail::csv_stream();
  out << "class_id,lambda,wait_compute,service_compute,wait_network,service_network,aoi,completion\n";
  for (const auto& c : r.classes)
    out << c.id << ',' << c.lambda << ',' << c.wait_compute << ',' << c.service_compute << ',' << c.wait_network << ','
        << c.service_network << ',' << c.aoi << ',' << c.completion << '\n';
  return out.str();
}

inline json analytic_report_json(const AnalyticReport& r) {
  json j;
  j["discipline"] = std::string(to_string(r.discipline));
  j["objective"] = r.objective;
  j["weighted_completion"] = r.weighted_completion;
  j["weighted_aoi"] = r.weighted_aoi;
  j["network_intensity"] = r.network_intensity;
  j["priority_order"] = r.priority_order;
  j["vm_arrival_rates"] = r.vm_arrival_rates;
  j["vm_intensity"] = r.vm_intensity;
  j["vm_wait"] = r.vm_wait;
  j["classes"] = json::array();
  for (const auto& c : r.classes)
    j["classes"].push_back({{"id", c.id},
                            {"lambda", c.lambda},
                            {"wait_compute", c.wait_compute},
                            {"service_compute", c.service_compute},
                            {"wait_network", c.wait_network},
                            {"service_network", c.service_network},
                            {"aoi", c.aoi},
                            {"completion", c.completion}});
  return j;
}

inline std::string sim_result_csv(const SimResult& r) {
  auto out = detail::csv_stream();
  out << "class_id,jobs";
  for (const char* m : {"completion", "aoi", "wait_compute", "service_compute", "wait_network", "service_network"})
    out << ',' << m << "_mean," << m << "_ci";
  out << '\n';
  for (const auto& c : r.classes) {
    out << c.id << ',' << c.jobs;
    for (const Estimate* e :
         {&c.completion, &c.aoi, &c.wait_compute, &c.service_compute, &c.wait_network, &c.service_network})
      out << ',' << e->mean << ',' << e->ci_half_width;
    out << '\n';
  }
  return out.str();
}

inline json sim_result_json(const SimResult& r) {
  json j;
  j["replications"] = r.replications;
  j["objective"] = detail::estimate_json(r.objective);
  j["weighted_completion"] = detail::estimate_json(r.weighted_completion);
  j["weighted_aoi"] = detail::estimate_json(r.weighted_aoi);
  j["vm_utilization"] = r.vm_utilization;
  j["vm_unstable"] = r.vm_unstable;
  j["network_unstable"] = r.network_unstable;
  j["interdeparture"] = {{"mean", detail::estimate_json(r.interdeparture.mean)},
                         {"cv", r.interdeparture.cv},
                         {"gaps", r.interdeparture.gaps}};
  j["classes"] = json::array();
  for (const auto& c : r.classes)
    j["classes"].push_back({{"id", c.id},
                            {"jobs", c.jobs},
                            {"completion", detail::estimate_json(c.completion)},
                            {"aoi", detail::estimate_json(c.aoi)},
                            {"wait_compute", detail::estimate_json(c.wait_compute)},
                            {"service_compute", detail::estimate_json(c.service_compute)},
                            {"wait_network", detail::estimate_json(c.wait_network)},
                            {"service_network", detail::estimate_json(c.service_network)}});
  return j;
}

inline std::string job_log_csv(const std::vector<JobLogRow>& rows) {
  auto out = detail::csv_stream();
  out << "serial,class_id,vm_id,release,compute_start,compute_end,net_start,net_end,update_age\n";
  for (const auto& r : rows)
    out << r.serial << ',' << r.class_id << ',' << r.vm_id << ',' << r.release << ',' << r.compute_start << ','
        << r.compute_end << ',' << r.net_start << ',' << r.net_end << ',' << r.update_age << '\n';
  return out.str();
}

inline std::string convergence_csv(const OptimizeTrace& t) {
  auto out = detail::csv_stream();
  out << "iteration,objective\n";
  for (std::size_t i = 0; i < t.objective.size(); ++i) out << i << ',' << t.objective[i] << '\n';
  return out.str();
}

inline std::vector<double> read_convergence_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<double> values;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    values.push_back(std::stod(line.substr(comma + 1)));
  }
  return values;
}

}  // namespace aoisched
