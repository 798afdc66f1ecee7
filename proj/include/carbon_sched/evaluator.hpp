#pragma once

#include <cmath>
#include <optional>
#include <unordered_map>

#include "carbon_sched/config_graph.hpp"
#include "carbon_sched/objective.hpp"
#include "carbon_sched/serving_sim.hpp"

namespace carbon_sched {

struct EvalResult {
  ConfigGraph graph;
  double accuracy = 0.0;
  double energy_wh_per_request = 0.0;  // amortized: active + idle
  double p95_ms = 0.0;
  double delta_accuracy = 0.0;
  double delta_carbon = 0.0;
  double f_value = 0.0;
  double h_value = 0.0;
  bool sla_met = false;
  // sla_met and within the accuracy-loss limit, when one is set.
  bool admissible = false;
};

// Ordering used for best-tracking: admissible candidates beat inadmissible
// ones, then lower annealing energy wins. Equal energy keeps the incumbent.
inline bool better_than(const EvalResult& candidate, const EvalResult& incumbent) {
  if (candidate.admissible != incumbent.admissible) return candidate.admissible;
  return candidate.h_value < incumbent.h_value;
}

// Scores configuration graphs with the serving simulator. Simulation
// results depend only on the graph and the workload, so they are cached per
// graph; carbon intensity and objective weights are applied on top.
//
// Not thread-safe; use one evaluator per search thread.
class Evaluator {
 public:
  Evaluator(const ProfileTable& profile, int gpus, Workload workload, ObjectiveParams obj, bool strict_energy = false)
      : profile_(&profile), gpus_(gpus), workload_(workload), obj_(obj), strict_energy_(strict_energy) {
    obj_.validate();
    workload_.validate();
  }

  const ProfileTable& profile() const { return *profile_; }
  int gpus() const { return gpus_; }
  const Workload& workload() const { return workload_; }
  const ObjectiveParams& objective() const { return obj_; }
  void set_objective(const ObjectiveParams& obj) {
    obj.validate();
    obj_ = obj;
  }
  void set_max_accuracy_loss(std::optional<double> pct) { max_loss_pct_ = pct; }
  std::optional<double> max_accuracy_loss() const { return max_loss_pct_; }
  bool strict_energy() const { return strict_energy_; }

  const SimReport& report(const ConfigGraph& g) {
    auto it = cache_.find(g);
    if (it != cache_.end()) return it->second;
    const auto fc = realize(g, gpus_, profile_->topology());
    SimOptions opts;
    opts.l_tail_ms = obj_.l_tail_ms;
    auto rep = simulate(fc, *profile_, workload_, opts);
    ++simulations_;
    return cache_.emplace(g, std::move(rep)).first->second;
  }

  EvalResult evaluate(const ConfigGraph& g, CarbonIntensity ci) {
    const auto& rep = report(g);
    EvalResult r;
    r.graph = g;
    r.accuracy = overall_accuracy(rep, *profile_);
    r.energy_wh_per_request = rep.amortized_wh_per_request;
    r.p95_ms = rep.p95_ms;
    r.delta_accuracy = delta_accuracy(r.accuracy, obj_);
    r.delta_carbon = delta_carbon(r.energy_wh_per_request, ci, obj_);
    r.f_value = objective_f(r.delta_carbon, r.delta_accuracy, obj_.lambda);
    r.h_value = energy_h(r.f_value, r.p95_ms, obj_.l_tail_ms, strict_energy_);
    r.sla_met = r.p95_ms <= obj_.l_tail_ms;
    r.admissible = r.sla_met && (!max_loss_pct_ || r.delta_accuracy >= -*max_loss_pct_ - 1e-9);
    return r;
  }

  std::size_t simulations_run() const { return simulations_; }

 private:
  const ProfileTable* profile_;
  int gpus_;
  Workload workload_;
  ObjectiveParams obj_;
  bool strict_energy_;
  std::optional<double> max_loss_pct_;
  std::unordered_map<ConfigGraph, SimReport, ConfigGraphHash> cache_;
  std::size_t simulations_ = 0;
};

}  // namespace carbon_sched
