#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "carbon_sched/annealer.hpp"
#include "carbon_sched/evaluator.hpp"
#include "carbon_sched/schemes.hpp"
#include "carbon_sched/serving_sim.hpp"
#include "carbon_sched/trace.hpp"

namespace carbon_sched {

struct ControllerParams {
  double reopt_threshold = 0.05;
  double reconfig_downtime_s = 30.0;  // per reconfigured GPU
  double trace_step_s = 300.0;

  void validate() const {
    if (!(reopt_threshold > 0.0)) throw InvalidArgument("re-optimization threshold must be positive");
    if (!(reconfig_downtime_s >= 0.0)) throw InvalidArgument("reconfiguration downtime must be non-negative");
    if (!(trace_step_s > 0.0)) throw InvalidArgument("trace step must be positive");
  }
};

// Relative intensity change since the last optimization exceeds the threshold.
inline bool reopt_needed(CarbonIntensity prev, CarbonIntensity ci, const ControllerParams& p) {
  if (prev.value() == 0.0) return true;
  return std::abs(ci.value() - prev.value()) / prev.value() > p.reopt_threshold;
}

// Workload used to score candidates: `window_s` of Poisson traffic at the
// rate that loads BASE to `utilization`.
inline Workload evaluation_workload(int n, const ProfileTable& profile, double utilization, double window_s,
                                    std::uint64_t seed) {
  Workload w;
  w.arrival_rate_rps = calibrate_arrival_rate(base_config(n, profile), profile, utilization);
  w.duration_s = window_s;
  w.seed = seed;
  return w;
}

// SLA target: p95 latency of the BASE fleet under the given workload.
inline double sla_from_base(int n, const ProfileTable& profile, const Workload& w) {
  return simulate(base_config(n, profile), profile, w).p95_ms;
}

struct RunInputs {
  int gpus = 4;
  double lambda = 0.5;
  double pue = 1.5;
  double utilization = 0.5;
  double eval_window_s = 600.0;
  std::uint64_t seed = 1;
  AnnealParams anneal;
  ControllerParams controller;
  std::optional<double> max_accuracy_loss_pct;
  std::optional<double> sla_ms;     // overrides the BASE-derived SLA
  std::optional<double> ci_base;    // overrides the trace mean intensity used for c_base
  bool strict_energy = false;
};

// Baseline quantities shared by every scheme of one experiment.
struct Baseline {
  Workload workload;
  SimReport base_report;
  ObjectiveParams objective;
};

inline Baseline make_baseline(const ProfileTable& profile, const RunInputs& in, double ci_base) {
  Baseline b;
  b.workload = evaluation_workload(in.gpus, profile, in.utilization, in.eval_window_s, derive_seed(in.seed, 0xE7A1));
  b.base_report = simulate(base_config(in.gpus, profile), profile, b.workload);
  const double l_tail = in.sla_ms.value_or(b.base_report.p95_ms);
  const double a_base = overall_accuracy(b.base_report, profile);
  const double c_base = b.base_report.amortized_wh_per_request / 1000.0 * ci_base;
  b.objective = ObjectiveParams(in.lambda, a_base, c_base, l_tail, in.pue);
  return b;
}

struct TimelineRow {
  double t = 0.0;
  double ci = 0.0;
  SchemeId scheme = SchemeId::Base;
  ConfigGraph graph;
  double p95_ms = 0.0;
  bool sla_met = true;
  double accuracy = 0.0;
  double gco2_per_request = 0.0;
  double cumulative_gco2 = 0.0;
  bool optimizing = false;
  bool downtime = false;
};

struct TimelineSummary {
  SchemeId scheme = SchemeId::Base;
  double span_s = 0.0;
  double total_gco2 = 0.0;
  double base_total_gco2 = 0.0;
  double carbon_saved_pct = 0.0;
  double mean_accuracy = 0.0;
  double accuracy_delta_pct = 0.0;
  double mean_p95_ms = 0.0;
  double p95_normalized = 0.0;
  double optimization_time_s = 0.0;
  double optimization_time_fraction_pct = 0.0;
  int optimization_events = 0;
  int evaluations = 0;
  int reconfigurations = 0;
  int steady_sla_violations = 0;
  double l_tail_ms = 0.0;
  double a_base = 0.0;
  double c_base = 0.0;
  double arrival_rate_rps = 0.0;
};

struct TimelineReport {
  std::vector<TimelineRow> rows;
  TimelineSummary summary;
  std::vector<EvalLogEntry> evals;

  std::string timeline_csv() const {
    std::string out =
        "t,ci,scheme,graph,p95_ms,sla_met,accuracy,gco2_per_request,cumulative_gco2,optimizing,downtime\n";
    for (const auto& r : rows) {
      out += fmt::format("{:.1f},{:.6g},{},{},{:.6f},{},{:.8f},{:.10g},{:.10g},{},{}\n", r.t, r.ci,
                         scheme_name(r.scheme), r.graph.to_string(), r.p95_ms, r.sla_met ? 1 : 0, r.accuracy,
                         r.gco2_per_request, r.cumulative_gco2, r.optimizing ? 1 : 0, r.downtime ? 1 : 0);
    }
    return out;
  }

  std::string evals_csv() const {
    std::string out = eval_log_csv_header() + "\n";
    for (std::size_t i = 0; i < evals.size(); ++i) out += eval_log_csv_row(evals[i], static_cast<int>(i)) + "\n";
    return out;
  }

  nlohmann::ordered_json summary_json() const {
    const auto& s = summary;
    nlohmann::ordered_json doc;
    doc["scheme"] = std::string(scheme_name(s.scheme));
    doc["span_s"] = s.span_s;
    doc["total_gco2"] = s.total_gco2;
    doc["base_total_gco2"] = s.base_total_gco2;
    doc["carbon_saved_pct"] = s.carbon_saved_pct;
    doc["mean_accuracy"] = s.mean_accuracy;
    doc["accuracy_delta_pct"] = s.accuracy_delta_pct;
    doc["mean_p95_ms"] = s.mean_p95_ms;
    doc["p95_normalized"] = s.p95_normalized;
    doc["optimization_time_s"] = s.optimization_time_s;
    doc["optimization_time_fraction_pct"] = s.optimization_time_fraction_pct;
    doc["optimization_events"] = s.optimization_events;
    doc["evaluations"] = s.evaluations;
    doc["reconfigurations"] = s.reconfigurations;
    doc["steady_sla_violations"] = s.steady_sla_violations;
    doc["l_tail_ms"] = s.l_tail_ms;
    doc["a_base"] = s.a_base;
    doc["c_base"] = s.c_base;
    doc["arrival_rate_rps"] = s.arrival_rate_rps;
    return doc;
  }
};

// GPUs whose partition or any slot assignment differs between two fleets.
inline std::vector<bool> changed_gpus(const FleetConfig& from, const FleetConfig& to) {
  const auto n = static_cast<std::size_t>(to.gpu_count());
  std::vector<bool> changed(n, false);
  std::vector<std::vector<VariantId>> per_gpu_from(n), per_gpu_to(n);
  for (std::size_t i = 0; i < from.slots().size(); ++i) {
    per_gpu_from[static_cast<std::size_t>(from.slots()[i].gpu)].push_back(from.assignments()[i]);
  }
  for (std::size_t i = 0; i < to.slots().size(); ++i) {
    per_gpu_to[static_cast<std::size_t>(to.slots()[i].gpu)].push_back(to.assignments()[i]);
  }
  for (std::size_t g = 0; g < n; ++g) {
    changed[g] = from.partitions()[g] != to.partitions()[g] || per_gpu_from[g] != per_gpu_to[g];
  }
  return changed;
}

// Trace-driven control loop. Each tick reports the active configuration's
// evaluated metrics; carbon accrues from the evaluation's energy rate scaled
// to the tick length. Searches run while the incumbent keeps serving and the
// winner is deployed at the first tick after the search time elapses.
inline TimelineReport run_trace(const CarbonTrace& trace, SchemeId scheme, const ProfileTable& profile,
                                const RunInputs& in) {
  in.anneal.validate();
  in.controller.validate();
  const auto& cp = in.controller;
  const int n = in.gpus;
  const Baseline baseline = make_baseline(profile, in, in.ci_base.value_or(trace.mean_intensity()));
  Evaluator evaluator(profile, n, baseline.workload, baseline.objective, in.strict_energy);
  evaluator.set_max_accuracy_loss(in.max_accuracy_loss_pct);
  const auto& obj = evaluator.objective();
  const double rate = baseline.workload.arrival_rate_rps;

  const ConfigGraph base_graph = build_graph(base_config(n, profile), profile);
  ConfigGraph active = scheme == SchemeId::Co2Opt ? build_graph(co2opt_config(n, profile), profile) : base_graph;
  std::optional<ConfigGraph> pending;
  double busy_until = -1.0;
  std::optional<CarbonIntensity> ci_at_last_opt;

  TimelineReport out;
  auto& sum = out.summary;
  sum.scheme = scheme;
  sum.l_tail_ms = obj.l_tail_ms;
  sum.a_base = obj.a_base;
  sum.c_base = obj.c_base;
  sum.arrival_rate_rps = rate;

  const double t0 = trace.start_s();
  const double t_end = trace.last_s() + cp.trace_step_s;
  sum.span_s = t_end - t0;
  const SimReport& base_rep = evaluator.report(base_graph);

  double cumulative = 0.0;
  double accuracy_sum = 0.0;
  double p95_sum = 0.0;
  std::int64_t tick = 0;
  for (double t = t0; t < t_end; t = t0 + static_cast<double>(++tick) * cp.trace_step_s) {
    const double dt = std::min(cp.trace_step_s, t_end - t);
    const CarbonIntensity ci = trace.intensity_at(t);
    TimelineRow row;
    row.t = t;
    row.ci = ci.value();
    row.scheme = scheme;

    std::optional<SimReport> downtime_report;
    auto deploy = [&](const ConfigGraph& next) {
      if (next == active) return;
      const auto from = realize(active, n, profile.topology());
      const auto to = realize(next, n, profile.topology());
      const auto changed = changed_gpus(from, to);
      ++sum.reconfigurations;
      active = next;
      if (cp.reconfig_downtime_s <= 0.0) return;
      SimOptions opts;
      opts.l_tail_ms = obj.l_tail_ms;
      opts.available_from_ms.reserve(to.slots().size());
      for (const auto& slot : to.slots()) {
        opts.available_from_ms.push_back(changed[static_cast<std::size_t>(slot.gpu)] ? cp.reconfig_downtime_s * 1000.0
                                                                                     : 0.0);
      }
      Workload w = baseline.workload;
      w.duration_s = dt;
      w.seed = derive_seed(in.seed, 0x10000 + static_cast<std::uint64_t>(tick));
      w.warmup = false;
      downtime_report = simulate(to, profile, w, opts);
      row.downtime = true;
    };

    if (pending && t >= busy_until) {
      deploy(*pending);
      pending.reset();
    }

    const bool searches = scheme == SchemeId::Clover || scheme == SchemeId::Blover || scheme == SchemeId::Oracle;
    const bool idle_controller = t >= busy_until;
    if (searches && idle_controller) {
      bool trigger = !ci_at_last_opt.has_value();
      if (!trigger) {
        trigger = scheme == SchemeId::Oracle ? ci != *ci_at_last_opt : reopt_needed(*ci_at_last_opt, ci, cp);
      }
      if (trigger) {
        ci_at_last_opt = ci;
        ++sum.optimization_events;
        std::mt19937_64 rng(derive_seed(in.seed, static_cast<std::uint64_t>(tick)));
        if (scheme == SchemeId::Oracle) {
          deploy(oracle_search(evaluator, ci).best.graph);
        } else {
          SearchOutcome res = scheme == SchemeId::Clover ? anneal(active, n, evaluator, ci, in.anneal, rng)
                                                         : blover_search(n, evaluator, ci, in.anneal, rng);
          sum.optimization_time_s += res.sim_time_spent_s;
          sum.evaluations += res.evaluations();
          out.evals.insert(out.evals.end(), res.log.begin(), res.log.end());
          busy_until = t + res.sim_time_spent_s;
          if (res.best.admissible) pending = res.best.graph;
          row.optimizing = res.sim_time_spent_s > 0.0;
          if (pending && t >= busy_until) {
            deploy(*pending);
            pending.reset();
          }
        }
      }
    } else if (searches && !idle_controller) {
      row.optimizing = true;
    }

    const SimReport& rep = downtime_report ? *downtime_report : evaluator.report(active);
    row.graph = active;
    row.p95_ms = rep.p95_ms;
    row.sla_met = rep.p95_ms <= obj.l_tail_ms;
    row.accuracy = overall_accuracy(rep, profile);
    const double requests = rate * dt;
    const double energy_wh = rep.energy_wh_total / rep.window_s * dt;
    const double gco2 = energy_wh / 1000.0 * ci.value() * obj.pue;
    row.gco2_per_request = requests > 0.0 ? gco2 / requests : 0.0;
    cumulative += gco2;
    row.cumulative_gco2 = cumulative;
    sum.base_total_gco2 += base_rep.energy_wh_total / base_rep.window_s * dt / 1000.0 * ci.value() * obj.pue;
    accuracy_sum += row.accuracy;
    p95_sum += row.p95_ms;
    if (!row.optimizing && !row.downtime && !row.sla_met) ++sum.steady_sla_violations;
    out.rows.push_back(std::move(row));
  }

  const double ticks = static_cast<double>(out.rows.size());
  sum.total_gco2 = cumulative;
  sum.carbon_saved_pct = (sum.base_total_gco2 - sum.total_gco2) / sum.base_total_gco2 * 100.0;
  sum.mean_accuracy = accuracy_sum / ticks;
  sum.accuracy_delta_pct = (sum.mean_accuracy - obj.a_base) / obj.a_base * 100.0;
  sum.mean_p95_ms = p95_sum / ticks;
  sum.p95_normalized = sum.mean_p95_ms / obj.l_tail_ms;
  sum.optimization_time_fraction_pct = sum.optimization_time_s / sum.span_s * 100.0;
  return out;
}

// CLOVER control loop where candidates losing more than `max_loss_pct`
// accuracy are inadmissible as the search result.
inline TimelineReport accuracy_threshold_mode(const CarbonTrace& trace, const ProfileTable& profile, RunInputs in,
                                              double max_loss_pct) {
  if (!(max_loss_pct >= 0.0)) throw InvalidArgument("accuracy loss limit must be non-negative");
  in.max_accuracy_loss_pct = max_loss_pct;
  return run_trace(trace, SchemeId::Clover, profile, in);
}

}  // namespace carbon_sched
