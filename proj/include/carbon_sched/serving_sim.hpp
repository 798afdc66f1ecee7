#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "carbon_sched/config_graph.hpp"
#include "carbon_sched/core.hpp"
#include "carbon_sched/fleet_config.hpp"
#include "carbon_sched/profiles.hpp"

namespace carbon_sched {

enum class ArrivalProcess {
  Poisson,
  Periodic,  // fixed inter-arrival 1/rate; used for hand-derived oracles
};

struct Workload {
  double arrival_rate_rps = 1.0;
  double duration_s = 60.0;
  std::uint64_t seed = 0;
  ArrivalProcess arrivals = ArrivalProcess::Poisson;
  // Drop the first max(100, 5%) completions from latency statistics.
  bool warmup = true;

  void validate() const {
    if (!(arrival_rate_rps > 0.0) || !std::isfinite(arrival_rate_rps)) {
      throw InvalidArgument("arrival rate must be positive and finite");
    }
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
      throw InvalidArgument("workload duration must be positive and finite");
    }
  }
};

struct SimOptions {
  std::optional<double> l_tail_ms;
  // Per-instance time (ms) before which the instance cannot serve; empty means all start idle at 0.
  std::vector<double> available_from_ms;
};

struct SimReport {
  double p95_ms = 0.0;
  double mean_latency_ms = 0.0;
  std::int64_t completed = 0;
  std::int64_t latency_samples = 0;
  double throughput_rps = 0.0;
  double window_s = 0.0;
  double energy_wh_active = 0.0;
  double energy_wh_idle = 0.0;
  double energy_wh_total = 0.0;
  double energy_wh_per_request = 0.0;     // active energy per completed request
  double amortized_wh_per_request = 0.0;  // total energy (active + idle) per completed request
  std::vector<std::int64_t> per_instance_counts;
  std::vector<std::int64_t> per_variant_counts;  // index 0 is v1
  std::optional<bool> sla_met;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc;
    doc["p95_ms"] = p95_ms;
    doc["mean_latency_ms"] = mean_latency_ms;
    doc["completed"] = completed;
    doc["latency_samples"] = latency_samples;
    doc["throughput_rps"] = throughput_rps;
    doc["window_s"] = window_s;
    doc["energy_wh_active"] = energy_wh_active;
    doc["energy_wh_idle"] = energy_wh_idle;
    doc["energy_wh_total"] = energy_wh_total;
    doc["energy_wh_per_request"] = energy_wh_per_request;
    doc["amortized_wh_per_request"] = amortized_wh_per_request;
    doc["per_instance_counts"] = per_instance_counts;
    nlohmann::ordered_json variants = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < per_variant_counts.size(); ++i) {
      variants["v" + std::to_string(i + 1)] = per_variant_counts[i];
    }
    doc["per_variant_counts"] = variants;
    if (sla_met) {
      doc["sla_met"] = *sla_met;
    } else {
      doc["sla_met"] = nullptr;
    }
    return doc;
  }
};

// Nearest-rank 95th percentile: element ceil(0.95 N) (1-based) of the sorted values.
inline double p95(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("p95 of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  const std::size_t n = sorted.size();
  const std::size_t rank = (95 * n + 99) / 100;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

// Request-weighted mean accuracy of the variants that served the completed requests.
inline double overall_accuracy(const SimReport& report, const ProfileTable& profile) {
  if (report.completed <= 0) throw InvalidArgument("overall accuracy needs at least one completed request");
  double acc = 0.0;
  for (std::size_t i = 0; i < report.per_variant_counts.size(); ++i) {
    acc += static_cast<double>(report.per_variant_counts[i]) * profile.accuracy(VariantId(static_cast<int>(i + 1)));
  }
  return acc / static_cast<double>(report.completed);
}

inline std::int64_t warmup_exclusions(std::int64_t completed) {
  const std::int64_t five_pct = (completed * 5 + 99) / 100;
  return std::max<std::int64_t>(100, five_pct);
}

inline std::vector<double> generate_arrivals_ms(const Workload& w) {
  std::vector<double> out;
  const double horizon_ms = w.duration_s * 1000.0;
  if (w.arrivals == ArrivalProcess::Periodic) {
    const double gap_ms = 1000.0 / w.arrival_rate_rps;
    for (std::int64_t k = 0;; ++k) {
      const double t = static_cast<double>(k) * gap_ms;
      if (t >= horizon_ms) break;
      out.push_back(t);
    }
    return out;
  }
  std::mt19937_64 rng(derive_seed(w.seed, 0));
  std::exponential_distribution<double> gap(w.arrival_rate_rps / 1000.0);
  out.reserve(static_cast<std::size_t>(w.arrival_rate_rps * w.duration_s * 1.1) + 16);
  double t = gap(rng);
  while (t < horizon_ms) {
    out.push_back(t);
    t += gap(rng);
  }
  return out;
}

// Single global FIFO queue; idle instances pull the head request in the order
// they became idle. Events at equal timestamps process completions first.
inline SimReport simulate(const FleetConfig& fc, const ProfileTable& profile, const Workload& w,
                          const SimOptions& opts = {}) {
  w.validate();
  if (fc.instance_count() == 0) throw SimulationError("fleet has no service instances");
  (void)build_graph(fc, profile);  // memory feasibility

  struct Instance {
    VariantId variant;
    const ServiceProfile* service;
    double idle_w;
    double busy_ms = 0.0;
  };
  std::vector<Instance> instances;
  instances.reserve(fc.instance_count());
  for (std::size_t i = 0; i < fc.slots().size(); ++i) {
    const auto v = fc.assignments()[i];
    const auto s = fc.slots()[i].slice;
    instances.push_back({v, &profile.service(v, s), profile.idle_power_w(s)});
  }
  if (!opts.available_from_ms.empty() && opts.available_from_ms.size() != instances.size()) {
    throw SimulationError("availability offsets do not match the instance count");
  }

  const auto arrivals = generate_arrivals_ms(w);
  std::mt19937_64 service_rng(derive_seed(w.seed, 1));
  auto draw_service = [&](const ServiceProfile& sp) {
    switch (sp.dist) {
      case ServiceDist::Deterministic: return sp.mean_service_ms;
      case ServiceDist::Exponential: {
        std::exponential_distribution<double> d(1.0 / sp.mean_service_ms);
        return d(service_rng);
      }
      case ServiceDist::Lognormal: {
        const double mu = std::log(sp.mean_service_ms) - 0.5 * sp.sigma * sp.sigma;
        std::lognormal_distribution<double> d(mu, sp.sigma);
        return d(service_rng);
      }
    }
    return sp.mean_service_ms;
  };

  struct Event {
    double time;
    std::uint64_t seq;
    std::size_t instance;
    std::int64_t request;  // -1: instance becomes available
    bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  std::uint64_t seq = 0;

  std::deque<std::size_t> idle;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const double from = opts.available_from_ms.empty() ? 0.0 : opts.available_from_ms[i];
    if (from <= 0.0) {
      idle.push_back(i);
    } else {
      events.push({from, seq++, i, -1});
    }
  }

  std::deque<std::int64_t> queue;
  std::vector<double> latencies;
  latencies.reserve(arrivals.size());
  SimReport report;
  report.per_instance_counts.assign(instances.size(), 0);
  report.per_variant_counts.assign(static_cast<std::size_t>(profile.variant_count()), 0);
  double last_completion_ms = 0.0;

  auto dispatch = [&](double now) {
    while (!queue.empty() && !idle.empty()) {
      const auto inst = idle.front();
      idle.pop_front();
      const auto req = queue.front();
      queue.pop_front();
      const double st = draw_service(*instances[inst].service);
      instances[inst].busy_ms += st;
      events.push({now + st, seq++, inst, req});
    }
  };

  std::size_t next_arrival = 0;
  while (next_arrival < arrivals.size() || !events.empty()) {
    const bool take_event =
        !events.empty() && (next_arrival >= arrivals.size() || events.top().time <= arrivals[next_arrival]);
    if (take_event) {
      const Event ev = events.top();
      events.pop();
      if (ev.request >= 0) {
        auto& inst = instances[ev.instance];
        latencies.push_back(ev.time - arrivals[static_cast<std::size_t>(ev.request)]);
        report.per_instance_counts[ev.instance] += 1;
        report.per_variant_counts[inst.variant.index()] += 1;
        report.energy_wh_active += inst.service->energy_wh_per_request;
        last_completion_ms = ev.time;
      }
      idle.push_back(ev.instance);
      dispatch(ev.time);
    } else {
      const double now = arrivals[next_arrival];
      queue.push_back(static_cast<std::int64_t>(next_arrival));
      ++next_arrival;
      dispatch(now);
    }
  }

  report.completed = static_cast<std::int64_t>(latencies.size());
  report.window_s = std::max(w.duration_s, last_completion_ms / 1000.0);
  const double window_ms = report.window_s * 1000.0;
  for (const auto& inst : instances) {
    const double idle_ms = std::max(0.0, window_ms - inst.busy_ms);
    report.energy_wh_idle += inst.idle_w * idle_ms / 3.6e6;
  }
  report.energy_wh_total = report.energy_wh_active + report.energy_wh_idle;
  report.throughput_rps = static_cast<double>(report.completed) / report.window_s;

  if (report.completed > 0) {
    std::span<const double> stats(latencies);
    const auto skip = warmup_exclusions(report.completed);
    if (w.warmup && skip < report.completed) stats = stats.subspan(static_cast<std::size_t>(skip));
    report.latency_samples = static_cast<std::int64_t>(stats.size());
    report.p95_ms = p95(stats);
    double sum = 0.0;
    for (double x : stats) sum += x;
    report.mean_latency_ms = sum / static_cast<double>(stats.size());
    report.energy_wh_per_request = report.energy_wh_active / static_cast<double>(report.completed);
    report.amortized_wh_per_request = report.energy_wh_total / static_cast<double>(report.completed);
  }
  if (opts.l_tail_ms) report.sla_met = report.completed > 0 && report.p95_ms <= *opts.l_tail_ms;
  return report;
}

// Arrival rate that loads `fc` to `utilization_target` of its aggregate service rate.
inline double calibrate_arrival_rate(const FleetConfig& fc, const ProfileTable& profile, double utilization_target) {
  if (!(utilization_target > 0.0 && utilization_target < 1.0)) {
    throw InvalidArgument("utilization target must lie in (0, 1)");
  }
  double rate = 0.0;
  for (std::size_t i = 0; i < fc.slots().size(); ++i) {
    rate += 1000.0 / profile.service(fc.assignments()[i], fc.slots()[i].slice).mean_service_ms;
  }
  return utilization_target * rate;
}

}  // namespace carbon_sched
