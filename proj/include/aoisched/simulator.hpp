#pragma once

// Event-driven simulation of the two-phase system.
//
// Jobs arrive (Poisson per class, or replayed from a trace/script), pick a VM
// with the schedule probabilities, queue FCFS at that VM, and then enter a
// single non-preemptive networking server that serves either by class
// priority (FIFO within a class) or in global FCFS order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "aoisched/analytics.hpp"
#include "aoisched/errors.hpp"
#include "aoisched/matrix.hpp"
#include "aoisched/model.hpp"
#include "aoisched/rng.hpp"

namespace aoisched {

enum class ServiceMode { ShiftedExponential, Deterministic };

inline std::string_view to_string(ServiceMode m) {
  return m == ServiceMode::ShiftedExponential ? "shifted_exponential" : "deterministic";
}

struct SimConfig {
  double horizon = 1e6;  // ms of arrivals
  double warmup_fraction = 0.2;
  int replications = 10;
  std::uint64_t seed = 1;
  NetworkDiscipline networking_discipline = NetworkDiscipline::PriorityWsept;
  ServiceMode service_mode = ServiceMode::ShiftedExponential;
  bool simulate_updates = false;
  bool record_jobs = false;  // per-job log of the first replication
  bool parallel = true;      // run replications on separate threads

  void validate() const {
    if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must be in [0,1)");
    if (replications < 1) throw ConfigError("replications must be >= 1");
  }
};

// shift + Exp(rate); exactly `shift` in deterministic mode.
inline double sample_shifted_exp(double rate, double shift, RandomStream& rng,
                                 ServiceMode mode = ServiceMode::ShiftedExponential) {
  if (mode == ServiceMode::Deterministic) return shift;
  return shift + rng.exponential(rate);
}

// Replication-level point estimate with a Student-t 95% interval.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_half_width = 0.0;
  int samples = 0;
};

inline Estimate estimate_from(const std::vector<double>& values) {
  Estimate e;
  e.samples = static_cast<int>(values.size());
  if (values.empty()) {
    e.mean = std::numeric_limits<double>::quiet_NaN();
    return e;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  e.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return e;
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  const double n = static_cast<double>(values.size());
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  const boost::math::students_t dist(n - 1.0);
  e.ci_half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * e.std_error;
  return e;
}

struct ClassSimStats {
  int id = 0;
  std::size_t jobs = 0;  // summed over replications
  Estimate completion;
  Estimate aoi;
  Estimate wait_compute;
  Estimate service_compute;
  Estimate wait_network;
  Estimate service_network;
};

struct JobLogRow {
  std::uint64_t serial = 0;
  int class_id = 0;
  int vm_id = 0;
  double release = 0.0;
  double compute_start = 0.0;
  double compute_end = 0.0;
  double net_start = 0.0;
  double net_end = 0.0;
  double update_age = 0.0;  // Y_j, zero unless updates are simulated

  double completion() const { return net_end - release; }
  double aoi() const { return update_age + (compute_end - compute_start) + (net_end - compute_end); }
};

struct InterdepartureStats {
  Estimate mean;  // mean gap between compute-phase departures (all VMs), ms
  double cv = 0.0;  // pooled coefficient of variation of the gaps
  std::size_t gaps = 0;
};

struct SimResult {
  std::vector<ClassSimStats> classes;
  std::vector<double> vm_utilization;
  std::vector<bool> vm_unstable;
  bool network_unstable = false;
  Estimate weighted_completion;
  Estimate weighted_aoi;
  Estimate objective;
  InterdepartureStats interdeparture;
  std::vector<JobLogRow> jobs;  // only when record_jobs
  int replications = 0;

  bool any_unstable() const {
    return network_unstable || std::any_of(vm_unstable.begin(), vm_unstable.end(), [](bool b) { return b; });
  }
};

// Routing probabilities and networking priorities in force over time. The
// plan switches every `window_length` ms; the last entry persists.
struct SchedulePlan {
  double window_length = std::numeric_limits<double>::infinity();
  std::vector<ScheduleMatrix> schedules;
  std::vector<std::vector<int>> priority_orders;  // class ids, highest priority first

  static SchedulePlan fixed(const ScheduleMatrix& p, const SystemConfig& config) {
    return {std::numeric_limits<double>::infinity(), {p}, {wsept_order(config)}};
  }

  std::size_t index_at(double t) const {
    if (!std::isfinite(window_length)) return 0;
    const auto k = static_cast<std::size_t>(std::max(0.0, std::floor(t / window_length)));
    return std::min(k, schedules.size() - 1);
  }
};

struct PendingArrival {
  double time = 0.0;
  int class_index = 0;  // 0-based
  int vm_index = -1;    // forced VM, or -1 to route with the schedule
  double compute_time = std::numeric_limits<double>::quiet_NaN();  // forced service times
  double network_time = std::numeric_limits<double>::quiet_NaN();
};

// Yields arrivals in nondecreasing time order; nullopt ends the stream.
using ArrivalSource = std::function<std::optional<PendingArrival>()>;

namespace detail {

struct ReplicationOutput {
  std::vector<std::size_t> count;
  std::vector<double> sum_completion, sum_aoi, sum_w1, sum_s1, sum_w2, sum_s2;
  std::vector<double> busy;  // per VM within the measurement window
  std::vector<bool> vm_unstable;
  bool network_unstable = false;
  double gap_sum = 0.0, gap_sq = 0.0;
  std::size_t gaps = 0;
  std::vector<JobLogRow> jobs;
};

class Engine {
 public:
  Engine(const SystemConfig& config, const SimConfig& sim, const SchedulePlan& plan, std::uint64_t replication,
         double measure_from, double measure_to, ArrivalSource arrivals)
      : config_(config),
        sim_(sim),
        plan_(plan),
        from_(measure_from),
        to_(measure_to),
        arrivals_(std::move(arrivals)),
        routing_(sim.seed, replication, StreamId::Routing),
        compute_rng_(sim.seed, replication, StreamId::ComputeService),
        network_rng_(sim.seed, replication, StreamId::NetworkService),
        update_rng_(sim.seed, replication, StreamId::Updates),
        vm_queue_(config.num_vms()),
        vm_busy_(config.num_vms(), false),
        vm_busy_since_(config.num_vms(), 0.0),
        class_queue_(config.num_classes()),
        last_update_(config.num_classes(), 0.0),
        next_update_(config.num_classes(), 0.0) {
    const std::size_t J = config.num_classes();
    out_.count.assign(J, 0);
    for (auto* v : {&out_.sum_completion, &out_.sum_aoi, &out_.sum_w1, &out_.sum_s1, &out_.sum_w2, &out_.sum_s2})
      v->assign(J, 0.0);
    out_.busy.assign(config.num_vms(), 0.0);
    if (sim.simulate_updates) {
      for (std::size_t i = 0; i < J; ++i) {
        if (!config.classes[i].mu) throw ConfigError("simulate_updates requires mu for every class");
        next_update_[i] = update_rng_.exponential(*config.classes[i].mu);
      }
    }
    if (std::isfinite(to_) && to_ > from_) {
      for (int k = 1; k <= kCheckpoints; ++k)
        push(from_ + (to_ - from_) * k / kCheckpoints, EventKind::Checkpoint, 0);
    }
  }

  ReplicationOutput run(bool record_jobs) {
    record_ = record_jobs;
    schedule_next_arrival();
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      now_ = e.time;
      switch (e.kind) {
        case EventKind::JobArrival: on_arrival(); break;
        case EventKind::ComputeDeparture: on_compute_departure(e.index); break;
        case EventKind::NetworkDeparture: on_network_departure(e.index); break;
        case EventKind::Checkpoint: on_checkpoint(); break;
      }
    }
    finish();
    return std::move(out_);
  }

 private:
  static constexpr int kCheckpoints = 8;

  enum class EventKind : std::uint8_t { JobArrival, ComputeDeparture, NetworkDeparture, Checkpoint };

  struct Event {
    double time;
    std::uint64_t seq;
    EventKind kind;
    std::uint32_t index;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  struct Job {
    int cls;
    int vm;
    double release;
    double compute_start;
    double compute_end;
    double net_start;
    double update_age;
    double forced_compute;
    double forced_network;
  };

  void push(double t, EventKind kind, std::uint32_t index) { events_.push({t, seq_++, kind, index}); }

  void schedule_next_arrival() {
    pending_ = arrivals_();
    if (pending_) push(pending_->time, EventKind::JobArrival, 0);
  }

  void on_arrival() {
    const PendingArrival a = *pending_;
    int vm = a.vm_index;
    if (vm < 0) {
      const auto& p = plan_.schedules[plan_.index_at(now_)];
      vm = static_cast<int>(routing_.discrete(p.row(static_cast<std::size_t>(a.class_index))));
    }
    if (vm < 0 || vm >= static_cast<int>(config_.num_vms()))
      throw ConfigError("job assigned to unknown VM " + std::to_string(vm + 1));
    const auto idx = static_cast<std::uint32_t>(jobs_.size());
    jobs_.push_back({a.class_index, vm, now_, 0, 0, 0, 0, a.compute_time, a.network_time});
    auto& q = vm_queue_[static_cast<std::size_t>(vm)];
    q.push_back(idx);
    if (!vm_busy_[static_cast<std::size_t>(vm)]) start_compute(static_cast<std::size_t>(vm));
    schedule_next_arrival();
  }

  void start_compute(std::size_t vm) {
    auto& q = vm_queue_[vm];
    const std::uint32_t idx = q.front();
    q.pop_front();
    Job& job = jobs_[idx];
    job.compute_start = now_;
    if (sim_.simulate_updates) job.update_age = update_age(static_cast<std::size_t>(job.cls));
    const auto& vp = config_.vms[vm];
    const auto& cp = config_.classes[static_cast<std::size_t>(job.cls)];
    const double service = std::isnan(job.forced_compute)
                               ? sample_shifted_exp(compute_rate(vp, cp), compute_shift(vp, cp), compute_rng_,
                                                    sim_.service_mode)
                               : job.forced_compute;
    vm_busy_[vm] = true;
    vm_busy_since_[vm] = now_;
    push(now_ + service, EventKind::ComputeDeparture, idx);
  }

  double update_age(std::size_t cls) {
    const auto& members = config_.classes[cls].info_set;
    double latest = -std::numeric_limits<double>::infinity();
    auto advance = [&](std::size_t i) {
      while (next_update_[i] <= now_) {
        last_update_[i] = next_update_[i];
        next_update_[i] += update_rng_.exponential(*config_.classes[i].mu);
      }
      latest = std::max(latest, last_update_[i]);
    };
    if (members.empty()) {
      advance(cls);
    } else {
      for (int id : members) advance(static_cast<std::size_t>(id - 1));
    }
    return now_ - latest;
  }

  void add_busy(std::size_t vm, double start, double end) {
    const double lo = std::max(start, from_);
    const double hi = std::min(end, to_);
    if (hi > lo) out_.busy[vm] += hi - lo;
  }

  void on_compute_departure(std::uint32_t idx) {
    Job& job = jobs_[idx];
    const auto vm = static_cast<std::size_t>(job.vm);
    job.compute_end = now_;
    add_busy(vm, vm_busy_since_[vm], now_);
    vm_busy_[vm] = false;
    if (now_ >= from_ && now_ <= to_) {
      if (last_departure_) {
        const double gap = now_ - *last_departure_;
        out_.gap_sum += gap;
        out_.gap_sq += gap * gap;
        ++out_.gaps;
      }
      last_departure_ = now_;
    }
    if (!vm_queue_[vm].empty()) start_compute(vm);

    if (sim_.networking_discipline == NetworkDiscipline::Fcfs) {
      fcfs_queue_.push_back(idx);
    } else {
      class_queue_[static_cast<std::size_t>(job.cls)].push_back(idx);
    }
    ++net_backlog_;
    if (!net_busy_) start_network();
  }

  std::optional<std::uint32_t> pick_network_job() {
    if (sim_.networking_discipline == NetworkDiscipline::Fcfs) {
      if (fcfs_queue_.empty()) return std::nullopt;
      const auto idx = fcfs_queue_.front();
      fcfs_queue_.pop_front();
      return idx;
    }
    for (int id : plan_.priority_orders[plan_.index_at(now_)]) {
      auto& q = class_queue_[static_cast<std::size_t>(id - 1)];
      if (q.empty()) continue;
      const auto idx = q.front();
      q.pop_front();
      return idx;
    }
    return std::nullopt;
  }

  void start_network() {
    const auto next = pick_network_job();
    if (!next) return;
    --net_backlog_;
    Job& job = jobs_[*next];
    job.net_start = now_;
    const auto& cp = config_.classes[static_cast<std::size_t>(job.cls)];
    const double service =
        std::isnan(job.forced_network)
            ? sample_shifted_exp(network_rate(config_.network, cp), network_shift(config_.network, cp), network_rng_,
                                 sim_.service_mode)
            : job.forced_network;
    net_busy_ = true;
    push(now_ + service, EventKind::NetworkDeparture, *next);
  }

  void on_network_departure(std::uint32_t idx) {
    const Job& job = jobs_[idx];
    net_busy_ = false;
    const auto c = static_cast<std::size_t>(job.cls);
    const double w1 = job.compute_start - job.release;
    const double s1 = job.compute_end - job.compute_start;
    const double w2 = job.net_start - job.compute_end;
    const double s2 = now_ - job.net_start;
    if (job.release >= from_ && job.release < to_) {
      ++out_.count[c];
      out_.sum_w1[c] += w1;
      out_.sum_s1[c] += s1;
      out_.sum_w2[c] += w2;
      out_.sum_s2[c] += s2;
      out_.sum_completion[c] += now_ - job.release;
      out_.sum_aoi[c] += job.update_age + s1 + w2 + s2;
    }
    if (record_) {
      out_.jobs.push_back({idx, config_.classes[c].id, job.vm + 1, job.release, job.compute_start, job.compute_end,
                           job.net_start, now_, job.update_age});
    }
    start_network();
  }

  void on_checkpoint() {
    backlog_samples_.push_back(net_backlog_);
    vm_samples_.emplace_back();
    for (const auto& q : vm_queue_) vm_samples_.back().push_back(q.size());
  }

  static bool grew_monotonically(const std::vector<std::size_t>& s) {
    if (s.size() < 2 || s.back() < 20) return false;
    for (std::size_t i = 1; i < s.size(); ++i)
      if (s[i] < s[i - 1]) return false;
    return s.back() > s.front();
  }

  void finish() {
    out_.network_unstable = grew_monotonically(backlog_samples_);
    out_.vm_unstable.assign(config_.num_vms(), false);
    for (std::size_t v = 0; v < config_.num_vms(); ++v) {
      std::vector<std::size_t> series;
      for (const auto& snap : vm_samples_) series.push_back(snap[v]);
      out_.vm_unstable[v] = grew_monotonically(series);
    }
  }

  const SystemConfig& config_;
  const SimConfig& sim_;
  const SchedulePlan& plan_;
  double from_;
  double to_;
  ArrivalSource arrivals_;
  RandomStream routing_;
  RandomStream compute_rng_;
  RandomStream network_rng_;
  RandomStream update_rng_;

  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::optional<PendingArrival> pending_;
  std::vector<Job> jobs_;
  std::vector<std::deque<std::uint32_t>> vm_queue_;
  std::vector<bool> vm_busy_;
  std::vector<double> vm_busy_since_;
  std::vector<std::deque<std::uint32_t>> class_queue_;
  std::deque<std::uint32_t> fcfs_queue_;
  bool net_busy_ = false;
  std::size_t net_backlog_ = 0;
  std::vector<double> last_update_;
  std::vector<double> next_update_;
  std::optional<double> last_departure_;
  std::vector<std::size_t> backlog_samples_;
  std::vector<std::vector<std::size_t>> vm_samples_;
  ReplicationOutput out_;
  bool record_ = false;
};

inline SimResult aggregate(const SystemConfig& config, const std::vector<ReplicationOutput>& reps, double window) {
  SimResult r;
  r.replications = static_cast<int>(reps.size());
  const std::size_t J = config.num_classes();
  const double total = config.total_rate();
  std::vector<double> rep_wc, rep_wa, rep_obj, rep_gap;
  double gap_sum = 0.0, gap_sq = 0.0;
  std::size_t gaps = 0;
  for (const auto& rep : reps) {
    double wc = 0.0, wa = 0.0, weight = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      if (rep.count[j] == 0) continue;
      const double n = static_cast<double>(rep.count[j]);
      const double share = config.classes[j].lambda / total;
      wc += share * rep.sum_completion[j] / n;
      wa += share * rep.sum_aoi[j] / n;
      weight += share;
    }
    if (weight > 0.0) {
      rep_wc.push_back(wc);
      rep_wa.push_back(wa);
      rep_obj.push_back(config.theta * wc + (1.0 - config.theta) * wa);
    }
    if (rep.gaps > 0) rep_gap.push_back(rep.gap_sum / static_cast<double>(rep.gaps));
    gap_sum += rep.gap_sum;
    gap_sq += rep.gap_sq;
    gaps += rep.gaps;
  }
  r.weighted_completion = estimate_from(rep_wc);
  r.weighted_aoi = estimate_from(rep_wa);
  r.objective = estimate_from(rep_obj);

  for (std::size_t j = 0; j < J; ++j) {
    ClassSimStats s;
    s.id = config.classes[j].id;
    std::vector<double> c, a, w1, s1, w2, s2;
    for (const auto& rep : reps) {
      s.jobs += rep.count[j];
      if (rep.count[j] == 0) continue;
      const double n = static_cast<double>(rep.count[j]);
      c.push_back(rep.sum_completion[j] / n);
      a.push_back(rep.sum_aoi[j] / n);
      w1.push_back(rep.sum_w1[j] / n);
      s1.push_back(rep.sum_s1[j] / n);
      w2.push_back(rep.sum_w2[j] / n);
      s2.push_back(rep.sum_s2[j] / n);
    }
    s.completion = estimate_from(c);
    s.aoi = estimate_from(a);
    s.wait_compute = estimate_from(w1);
    s.service_compute = estimate_from(s1);
    s.wait_network = estimate_from(w2);
    s.service_network = estimate_from(s2);
    r.classes.push_back(s);
  }

  r.vm_utilization.assign(config.num_vms(), 0.0);
  r.vm_unstable.assign(config.num_vms(), false);
  for (const auto& rep : reps) {
    for (std::size_t v = 0; v < config.num_vms(); ++v) {
      if (window > 0.0 && std::isfinite(window))
        r.vm_utilization[v] += rep.busy[v] / window / static_cast<double>(reps.size());
      if (rep.vm_unstable[v]) r.vm_unstable[v] = true;
    }
    if (rep.network_unstable) r.network_unstable = true;
  }

  r.interdeparture.mean = estimate_from(rep_gap);
  r.interdeparture.gaps = gaps;
  if (gaps > 1) {
    const double mean = gap_sum / static_cast<double>(gaps);
    const double var = gap_sq / static_cast<double>(gaps) - mean * mean;
    r.interdeparture.cv = std::sqrt(std::max(var, 0.0)) / mean;
  }
  return r;
}

// Poisson superposition: total rate Lambda, class chosen with lambda_j / Lambda.
inline ArrivalSource poisson_arrivals(const SystemConfig& config, std::uint64_t seed, std::uint64_t replication,
                                      double horizon) {
  struct State {
    RandomStream rng;
    std::vector<double> rates;
    double total;
    double t = 0.0;
  };
  auto state = std::make_shared<State>(State{RandomStream(seed, replication, StreamId::Arrivals), {}, 0.0});
  for (const auto& c : config.classes) state->rates.push_back(c.lambda);
  state->total = config.total_rate();
  return [state, horizon]() -> std::optional<PendingArrival> {
    if (state->total <= 0.0) return std::nullopt;
    state->t += state->rng.exponential(state->total);
    if (state->t >= horizon) return std::nullopt;
    PendingArrival a;
    a.time = state->t;
    a.class_index = static_cast<int>(state->rng.discrete(state->rates));
    return a;
  };
}

template <class MakeSource>
SimResult run_replications(const SystemConfig& config, const SimConfig& sim, const SchedulePlan& plan,
                           double measure_from, double measure_to, MakeSource&& make_source) {
  std::vector<ReplicationOutput> reps(static_cast<std::size_t>(sim.replications));
  auto one = [&](int r) {
    Engine engine(config, sim, plan, static_cast<std::uint64_t>(r), measure_from, measure_to,
                  make_source(static_cast<std::uint64_t>(r)));
    return engine.run(sim.record_jobs && r == 0);
  };
  if (sim.parallel && sim.replications > 1) {
    std::vector<std::future<ReplicationOutput>> futures;
    for (int r = 0; r < sim.replications; ++r) futures.push_back(std::async(std::launch::async, one, r));
    for (std::size_t r = 0; r < futures.size(); ++r) reps[r] = futures[r].get();
  } else {
    for (int r = 0; r < sim.replications; ++r) reps[static_cast<std::size_t>(r)] = one(r);
  }
  auto result = aggregate(config, reps, measure_to - measure_from);
  if (sim.record_jobs && !reps.empty()) result.jobs = std::move(reps.front().jobs);
  return result;
}

inline void check_plan(const SchedulePlan& plan, const SystemConfig& config) {
  if (plan.schedules.empty() || plan.priority_orders.size() != plan.schedules.size())
    throw std::invalid_argument("schedule plan needs one priority order per schedule");
  for (const auto& p : plan.schedules) {
    check_shape(p, config);
    if (!is_row_stochastic(p, 1e-9)) throw std::invalid_argument("schedule rows must be probability vectors");
  }
}

}  // namespace detail

// Poisson arrivals over [0, horizon); statistics from jobs released after
// warmup_fraction * horizon. Each replication r uses streams derived from
// (sim.seed, r).
inline SimResult run_simulation(const SystemConfig& config, const ScheduleMatrix& p, const SimConfig& sim) {
  sim.validate();
  const auto plan = SchedulePlan::fixed(p, config);
  detail::check_plan(plan, config);
  const double from = sim.warmup_fraction * sim.horizon;
  return detail::run_replications(config, sim, plan, from, sim.horizon, [&](std::uint64_t r) {
    return detail::poisson_arrivals(config, sim.seed, r, sim.horizon);
  });
}

struct TraceArrival {
  double time = 0.0;
  int class_index = 0;  // 0-based
};

// Replays fixed arrival times; routing and service stay random. Statistics
// cover jobs released in [measure_from, measure_to).
inline SimResult run_trace_simulation(const SystemConfig& config, const std::vector<TraceArrival>& arrivals,
                                      const SchedulePlan& plan, const SimConfig& sim, double measure_from,
                                      double measure_to) {
  sim.validate();
  detail::check_plan(plan, config);
  return detail::run_replications(config, sim, plan, measure_from, measure_to, [&](std::uint64_t) {
    auto pos = std::make_shared<std::size_t>(0);
    return ArrivalSource([&arrivals, pos]() -> std::optional<PendingArrival> {
      if (*pos >= arrivals.size()) return std::nullopt;
      const auto& a = arrivals[(*pos)++];
      PendingArrival out;
      out.time = a.time;
      out.class_index = a.class_index;
      return out;
    });
  });
}

struct ScriptedJob {
  double release = 0.0;
  int class_id = 1;
  int vm_id = 1;  // explicit assignment
  double compute_time = 0.0;
  double network_time = 0.0;
};

// Replays an exact scenario with fixed assignments and service times. Jobs
// released at the same instant enter in list order. Every job is counted and
// logged.
inline SimResult scripted_arrivals(const SystemConfig& config, std::vector<ScriptedJob> jobs, SimConfig sim) {
  for (const auto& j : jobs) {
    if (j.vm_id < 1 || j.vm_id > static_cast<int>(config.num_vms()))
      throw ConfigError("scripted job assigned to unknown VM " + std::to_string(j.vm_id));
    if (j.class_id < 1 || j.class_id > static_cast<int>(config.num_classes()))
      throw ConfigError("scripted job references unknown class " + std::to_string(j.class_id));
  }
  std::stable_sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) { return a.release < b.release; });
  sim.replications = 1;
  sim.record_jobs = true;
  sim.parallel = false;
  sim.service_mode = ServiceMode::Deterministic;
  const auto plan = SchedulePlan::fixed(Matrix::uniform_rows(config.num_classes(), config.num_vms()), config);
  const double inf = std::numeric_limits<double>::infinity();
  return detail::run_replications(config, sim, plan, -inf, inf, [&](std::uint64_t) {
    auto pos = std::make_shared<std::size_t>(0);
    return ArrivalSource([&jobs, pos]() -> std::optional<PendingArrival> {
      if (*pos >= jobs.size()) return std::nullopt;
      const auto& j = jobs[(*pos)++];
      PendingArrival a;
      a.time = j.release;
      a.class_index = j.class_id - 1;
      a.vm_index = j.vm_id - 1;
      a.compute_time = j.compute_time;
      a.network_time = j.network_time;
      return a;
    });
  });
}

}  // namespace aoisched
