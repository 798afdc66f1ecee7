#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "carbon_sched/config_graph.hpp"
#include "carbon_sched/evaluator.hpp"

namespace carbon_sched {

enum class Cooling { Subtractive, Multiplicative };

struct AnnealParams {
  double t_init = 1.0;
  double cooling_step = 0.05;
  double t_floor = 0.1;
  int stall_limit = 5;
  double time_budget_s = 300.0;
  double eval_cost_s = 45.0;
  Cooling cooling = Cooling::Subtractive;

  void validate() const {
    if (!(t_floor > 0.0)) throw InvalidArgument("t_floor must be positive");
    if (!(t_init >= t_floor)) throw InvalidArgument("t_init must not be below t_floor");
    if (!(cooling_step > 0.0)) throw InvalidArgument("cooling_step must be positive");
    if (cooling == Cooling::Multiplicative && !(cooling_step < 1.0)) {
      throw InvalidArgument("multiplicative cooling_step must be below 1");
    }
    if (stall_limit < 1) throw InvalidArgument("stall_limit must be at least 1");
    if (!(time_budget_s > 0.0)) throw InvalidArgument("time budget must be positive");
    if (!(eval_cost_s >= 0.0)) throw InvalidArgument("evaluation cost must be non-negative");
  }

  double cool(double t) const {
    const double next = cooling == Cooling::Subtractive ? t - cooling_step : t * (1.0 - cooling_step);
    return std::max(t_floor, next);
  }
};

struct EvalLogEntry {
  int iter = 0;
  double temp = 0.0;
  int ged_from_center = 0;
  EvalResult result;
  bool accepted = false;
  bool new_best = false;
};

struct SearchOutcome {
  EvalResult best;
  std::vector<EvalLogEntry> log;
  double sim_time_spent_s = 0.0;

  int evaluations() const { return static_cast<int>(log.size()); }

  // 1-based index of the evaluation that produced the returned best.
  int evaluations_to_best() const {
    int at = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (log[i].new_best) at = static_cast<int>(i + 1);
    }
    return at;
  }

  double sla_violation_fraction() const {
    if (log.empty()) return 0.0;
    int bad = 0;
    for (const auto& e : log) bad += e.result.sla_met ? 0 : 1;
    return static_cast<double>(bad) / static_cast<double>(log.size());
  }
};

inline std::string eval_log_csv_header() { return "iter,temp,ged_from_center,f,h,p95_ms,sla_met,accepted,new_best"; }

inline std::string eval_log_csv_row(const EvalLogEntry& e, int iter_override = -1) {
  return fmt::format("{},{:.6f},{},{:.10g},{:.10g},{:.10g},{},{},{}", iter_override >= 0 ? iter_override : e.iter,
                     e.temp, e.ged_from_center, e.result.f_value, e.result.h_value, e.result.p95_ms,
                     e.result.sla_met ? 1 : 0, e.accepted ? 1 : 0, e.new_best ? 1 : 0);
}

inline std::string eval_log_csv(const std::vector<EvalLogEntry>& log) {
  std::string out = eval_log_csv_header() + "\n";
  for (const auto& e : log) out += eval_log_csv_row(e) + "\n";
  return out;
}

// Simulated annealing over an abstract state graph. `lift` maps a state to
// the fleet graph that gets evaluated; `neighbor` draws a neighbor state and
// throws NoNeighbor when none exists.
template <class Rng>
SearchOutcome anneal_states(const ConfigGraph& start, Evaluator& evaluator, CarbonIntensity ci, const AnnealParams& ap,
                            Rng& rng, const std::function<ConfigGraph(const ConfigGraph&, Rng&)>& neighbor,
                            const std::function<ConfigGraph(const ConfigGraph&)>& lift) {
  ap.validate();
  SearchOutcome out;
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  ConfigGraph center_state = start;
  EvalResult center = evaluator.evaluate(lift(center_state), ci);
  out.sim_time_spent_s += ap.eval_cost_s;
  out.best = center;
  out.log.push_back({0, ap.t_init, 0, center, true, true});

  double temp = ap.t_init;
  int stall = 0;
  int iter = 0;
  while (out.sim_time_spent_s < ap.time_budget_s && stall < ap.stall_limit) {
    ConfigGraph next_state;
    try {
      next_state = neighbor(center_state, rng);
    } catch (const NoNeighbor&) {
      break;
    }
    ++iter;
    EvalResult cand = evaluator.evaluate(lift(next_state), ci);
    out.sim_time_spent_s += ap.eval_cost_s;
    const double p = accept_prob(center.h_value, cand.h_value, temp);
    const bool accepted = p >= 1.0 || coin(rng) < p;
    const bool new_best = better_than(cand, out.best);
    if (new_best) {
      out.best = cand;
      stall = 0;
    } else {
      ++stall;
    }
    out.log.push_back({iter, temp, ged(center.graph, cand.graph), cand, accepted, new_best});
    if (accepted) {
      center_state = std::move(next_state);
      center = std::move(cand);
    }
    temp = ap.cool(temp);
  }
  return out;
}

// Annealing in the fleet graph space with GED-bounded neighbors.
template <class Rng>
SearchOutcome anneal(const ConfigGraph& start, int n, Evaluator& evaluator, CarbonIntensity ci, const AnnealParams& ap,
                     Rng& rng) {
  const auto& profile = evaluator.profile();
  (void)realize(start, n, profile.topology());  // start must be realizable
  std::function<ConfigGraph(const ConfigGraph&, Rng&)> neighbor = [&](const ConfigGraph& g, Rng& r) {
    return sample_neighbor(g, n, profile, r);
  };
  std::function<ConfigGraph(const ConfigGraph&)> lift = [](const ConfigGraph& g) { return g; };
  return anneal_states(start, evaluator, ci, ap, rng, neighbor, lift);
}

// Annealing restricted to standardized fleets, where every GPU carries the
// same partition and variant mixture. The state is the single-GPU graph.
template <class Rng>
SearchOutcome anneal_standardized(const ConfigGraph& per_gpu_start, Evaluator& evaluator, CarbonIntensity ci,
                                  const AnnealParams& ap, Rng& rng) {
  const auto& profile = evaluator.profile();
  const int n = evaluator.gpus();
  (void)realize(per_gpu_start, 1, profile.topology());
  std::function<ConfigGraph(const ConfigGraph&, Rng&)> neighbor = [&](const ConfigGraph& g, Rng& r) {
    return sample_neighbor(g, 1, profile, r);
  };
  std::function<ConfigGraph(const ConfigGraph&)> lift = [n](const ConfigGraph& g) { return replicate(g, n); };
  return anneal_states(per_gpu_start, evaluator, ci, ap, rng, neighbor, lift);
}

// Restricted annealing from several standardized starts; each start gets the
// full parameter set and the overall best is returned with the joined log.
template <class Rng>
SearchOutcome anneal_standardized_multistart(const std::vector<ConfigGraph>& per_gpu_starts, Evaluator& evaluator,
                                             CarbonIntensity ci, const AnnealParams& ap, Rng& rng) {
  if (per_gpu_starts.empty()) throw InvalidArgument("no standardized starts given");
  SearchOutcome total;
  bool first = true;
  for (const auto& s : per_gpu_starts) {
    auto run = anneal_standardized(s, evaluator, ci, ap, rng);
    if (first || better_than(run.best, total.best)) total.best = run.best;
    first = false;
    total.sim_time_spent_s += run.sim_time_spent_s;
    total.log.insert(total.log.end(), run.log.begin(), run.log.end());
  }
  return total;
}

}  // namespace carbon_sched
