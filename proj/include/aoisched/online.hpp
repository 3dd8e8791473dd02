#pragma once

// Window-based arrival-rate estimation and the online scheduling driver.
//
// Window k covers [k W, (k + 1) W). The schedule used in window k >= 1 is the
// optimum for the rates counted in window k - 1; window 0 has no estimate and
// runs the template's feasible start.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aoisched/analytics.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/model.hpp"
#include "aoisched/optimizer.hpp"
#include "aoisched/rng.hpp"
#include "aoisched/simulator.hpp"

namespace aoisched {

struct TraceRecord {
  double timestamp = 0.0;  // ms since trace start
  std::string key;         // opaque class identifier from the trace
  int class_id = 0;        // assigned class, 1-based
};

struct Trace {
  std::vector<TraceRecord> records;  // sorted by timestamp
  bool rank_bucketed = false;        // true when no explicit class map was used
  std::size_t distinct_keys = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

// CSV with rows `key,class_id`; an optional header line is skipped.
inline std::map<std::string, int> read_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open class map '" + path + "'");
  std::map<std::string, int> map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = detail::split_csv_line(line);
    const auto id = f.size() >= 2 ? detail::parse_number(f[1]) : std::nullopt;
    if (!id) {
      if (line_no == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected `key,class_id`");
    }
    map[f[0]] = static_cast<int>(*id);
  }
  return map;
}

// Keys ranked by decreasing frequency (ties by key); rank r of K keys goes to
// class floor(r * J / K) + 1, so the most frequent keys land in class 1.
inline std::map<std::string, int> rank_bucket_classes(const std::vector<TraceRecord>& records, std::size_t num_classes) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) ++counts[r.key];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<std::string, int> map;
  const std::size_t K = ranked.size();
  for (std::size_t r = 0; r < K; ++r) map[ranked[r].first] = static_cast<int>(r * num_classes / K) + 1;
  return map;
}

// Reads `timestamp_ms,key[,...]` rows (header optional, extra columns ignored).
inline Trace ingest_trace(const std::string& path, std::size_t num_classes,
                          const std::optional<std::map<std::string, int>>& class_map = std::nullopt) {
  if (num_classes == 0) throw ConfigError("number of classes must be >= 1");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace '" + path + "'");
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto f = detail::split_csv_line(line);
    const auto ts = f.empty() ? std::nullopt : detail::parse_number(f[0]);
    if (!ts) {
      if (trace.records.empty() && line_no == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed timestamp");
    }
    if (f.size() < 2 || f[1].empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": missing key");
    if (!(*ts >= 0.0) || !std::isfinite(*ts))
      throw ConfigError(path + ":" + std::to_string(line_no) + ": timestamp must be finite and >= 0");
    trace.records.push_back({*ts, f[1], 0});
  }
  if (trace.records.empty()) throw ConfigError("trace '" + path + "' contains no records");
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });

  const auto map = class_map ? *class_map : rank_bucket_classes(trace.records, num_classes);
  trace.rank_bucketed = !class_map.has_value();
  for (auto& r : trace.records) {
    const auto it = map.find(r.key);
    if (it == map.end()) throw ConfigError("trace key '" + r.key + "' is missing from the class map");
    if (it->second < 1 || it->second > static_cast<int>(num_classes))
      throw ConfigError("class map sends key '" + r.key + "' to class " + std::to_string(it->second) +
                        " outside 1.." + std::to_string(num_classes));
    r.class_id = it->second;
  }
  trace.distinct_keys = map.size();
  return trace;
}

struct TraceWindow {
  double window_length = 0.0;
  std::size_t index = 0;
  std::vector<std::size_t> counts;  // per class
  std::vector<double> rates;        // counts / window_length, 1/ms
};

inline TraceWindow estimate_rates(const std::vector<TraceRecord>& records, std::size_t num_classes,
                                  double window_length, std::size_t index) {
  if (!(window_length > 0.0)) throw ConfigError("window length must be > 0");
  TraceWindow w{window_length, index, std::vector<std::size_t>(num_classes, 0), std::vector<double>(num_classes, 0.0)};
  const double lo = static_cast<double>(index) * window_length;
  const double hi = lo + window_length;
  auto first = std::lower_bound(records.begin(), records.end(), lo,
                                [](const TraceRecord& r, double t) { return r.timestamp < t; });
  for (auto it = first; it != records.end() && it->timestamp < hi; ++it) {
    if (it->class_id >= 1 && it->class_id <= static_cast<int>(num_classes))
      ++w.counts[static_cast<std::size_t>(it->class_id - 1)];
  }
  for (std::size_t j = 0; j < num_classes; ++j) w.rates[j] = static_cast<double>(w.counts[j]) / window_length;
  return w;
}

// One constant-rate segment of a synthetic trace.
struct RateSegment {
  double duration = 0.0;
  std::vector<double> rates;  // per class, 1/ms
};

// Poisson arrivals with piecewise-constant per-class rates; keys are
// "class-<id>" and class ids are preassigned.
inline std::vector<TraceRecord> generate_poisson_trace(const std::vector<RateSegment>& segments, std::uint64_t seed) {
  RandomStream rng(seed, 0, StreamId::Trace);
  std::vector<TraceRecord> out;
  double start = 0.0;
  for (const auto& seg : segments) {
    double total = 0.0;
    for (double r : seg.rates) total += r;
    const double end = start + seg.duration;
    double t = start;
    while (total > 0.0) {
      t += rng.exponential(total);
      if (t >= end) break;
      const int cls = static_cast<int>(rng.discrete(seg.rates)) + 1;
      out.push_back({t, "class-" + std::to_string(cls), cls});
    }
    start = end;
  }
  return out;
}

inline void write_trace_csv(const std::vector<TraceRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trace '" + path + "'");
  out.precision(17);
  out << "timestamp_ms,key\n";
  for (const auto& r : records) out << r.timestamp << ',' << r.key << '\n';
}

// Default window: 1e5 ms, or long enough for 1000 expected arrivals.
inline double default_window_length(const std::vector<TraceRecord>& records) {
  if (records.empty()) return 1e5;
  const double span = std::max(records.back().timestamp, 1e-9);
  const double rate = static_cast<double>(records.size()) / span;
  return std::max(1e5, 1000.0 / rate);
}

struct OnlineSettings {
  double window_length = 1e5;
  OptimizerSettings optimizer;
  SimConfig sim;
};

struct OnlineWindow {
  std::size_t index = 0;
  TraceWindow estimate;  // rates from window index - 1 (empty for window 0)
  ScheduleMatrix schedule;
  std::vector<int> priority_order;
  double objective_estimate = std::numeric_limits<double>::quiet_NaN();
  bool fallback = false;
  std::string note;
};

struct OnlineResult {
  std::vector<OnlineWindow> windows;
  SimResult sim;                 // jobs released in windows >= 1
  SystemConfig weighting_config;  // template with whole-trace average rates
};

namespace detail {

inline std::vector<TraceArrival> to_arrivals(const std::vector<TraceRecord>& records) {
  std::vector<TraceArrival> a;
  a.reserve(records.size());
  for (const auto& r : records) a.push_back({r.timestamp, r.class_id - 1});
  return a;
}

inline std::size_t window_count(const std::vector<TraceRecord>& records, double window_length) {
  return static_cast<std::size_t>(std::floor(records.back().timestamp / window_length)) + 1;
}

inline SystemConfig with_rates(const SystemConfig& config, const std::vector<double>& rates) {
  SystemConfig c = config;
  for (std::size_t j = 0; j < c.classes.size(); ++j) c.classes[j].lambda = rates[j];
  return c;
}

// Optimises over the classes with positive rate; the rest get uniform rows.
inline ScheduleMatrix solve_for_rates(const SystemConfig& config, const OptimizerSettings& settings) {
  SystemConfig reduced = config;
  reduced.classes.clear();
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < config.classes.size(); ++j) {
    if (config.classes[j].lambda <= 0.0) continue;
    JobClass c = config.classes[j];
    c.id = static_cast<int>(reduced.classes.size()) + 1;
    c.info_set.clear();
    reduced.classes.push_back(c);
    kept.push_back(j);
  }
  if (kept.empty()) throw InfeasibleError("no arrivals in the estimation window");
  const auto solved = optimize_pps(reduced, settings).schedule;
  auto p = Matrix::uniform_rows(config.num_classes(), config.num_vms());
  for (std::size_t r = 0; r < kept.size(); ++r)
    for (std::size_t v = 0; v < config.num_vms(); ++v) p(kept[r], v) = solved(r, v);
  return p;
}

inline SystemConfig average_rate_config(const std::vector<TraceRecord>& records, const SystemConfig& tmpl,
                                        double from, double to) {
  std::vector<double> rates(tmpl.num_classes(), 0.0);
  for (const auto& r : records)
    if (r.timestamp >= from && r.timestamp < to) rates[static_cast<std::size_t>(r.class_id - 1)] += 1.0;
  for (double& x : rates) x /= (to - from);
  return with_rates(tmpl, rates);
}

}  // namespace detail

inline OnlineResult online_driver(const std::vector<TraceRecord>& records, const SystemConfig& config_template,
                                  const OnlineSettings& settings) {
  if (records.empty()) throw ConfigError("empty trace");
  const double W = settings.window_length;
  if (!(W > 0.0)) throw ConfigError("window length must be > 0");
  const std::size_t n = detail::window_count(records, W);
  if (n < 2) throw ConfigError("online driver needs at least two windows of data (got 1)");
  const std::size_t J = config_template.num_classes();

  OnlineResult out;
  SchedulePlan plan;
  plan.window_length = W;

  OnlineWindow first;
  first.index = 0;
  first.schedule = feasible_init(config_template, settings.optimizer.stability_margin);
  first.priority_order = wsept_order(config_template);
  first.note = "no prior window; template start";
  out.windows.push_back(first);

  for (std::size_t k = 1; k < n; ++k) {
    OnlineWindow w;
    w.index = k;
    w.estimate = estimate_rates(records, J, W, k - 1);
    const auto est_config = detail::with_rates(config_template, w.estimate.rates);
    const auto& prev = out.windows.back();
    try {
      auto p = detail::solve_for_rates(est_config, settings.optimizer);
      if (!is_row_stochastic(p, 1e-9) || !stability_report(p, est_config, settings.optimizer.stability_margin).stable)
        throw InfeasibleError("solved schedule failed the feasibility check");
      w.objective_estimate = objective(p, est_config);
      w.schedule = std::move(p);
      w.priority_order = wsept_order(est_config);
    } catch (const std::exception& e) {
      w.schedule = prev.schedule;
      w.priority_order = prev.priority_order;
      w.fallback = true;
      w.note = std::string("kept previous schedule: ") + e.what();
    }
    out.windows.push_back(std::move(w));
  }
  for (const auto& w : out.windows) {
    plan.schedules.push_back(w.schedule);
    plan.priority_orders.push_back(w.priority_order);
  }

  const double measure_to = static_cast<double>(n) * W;
  out.weighting_config = detail::average_rate_config(records, config_template, W, measure_to);
  out.sim = run_trace_simulation(out.weighting_config, detail::to_arrivals(records), plan, settings.sim, W, measure_to);
  return out;
}

// Same trace and seeds, but one fixed schedule optimised for `true_config`.
inline SimResult offline_reference(const std::vector<TraceRecord>& records, const SystemConfig& true_config,
                                   const OnlineSettings& settings) {
  if (records.empty()) throw ConfigError("empty trace");
  const double W = settings.window_length;
  const std::size_t n = detail::window_count(records, W);
  const auto p = optimize_pps(true_config, settings.optimizer).schedule;
  SchedulePlan plan{std::numeric_limits<double>::infinity(), {p}, {wsept_order(true_config)}};
  const double measure_to = static_cast<double>(n) * W;
  const auto weighting = detail::average_rate_config(records, true_config, W, measure_to);
  return run_trace_simulation(weighting, detail::to_arrivals(records), plan, settings.sim, W, measure_to);
}

}  // namespace aoisched
