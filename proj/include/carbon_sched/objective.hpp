#pragma once

#include <cmath>

#include "carbon_sched/core.hpp"

namespace carbon_sched {

// Relative accuracy change (percent) against the all-largest-variant baseline.
inline double delta_accuracy(double accuracy, const ObjectiveParams& params) {
  if (!(accuracy > 0.0) || !(params.a_base > 0.0)) throw InvalidArgument("accuracies must be positive");
  return (accuracy - params.a_base) / params.a_base * 100.0;
}

// Relative carbon saving (percent) of a per-request energy at intensity `ci`.
inline double delta_carbon(double e_wh_per_request, CarbonIntensity ci, const ObjectiveParams& params) {
  if (!(params.c_base > 0.0)) throw InvalidArgument("c_base must be positive");
  const double carbon = e_wh_per_request / 1000.0 * ci.value();
  return (params.c_base - carbon) / params.c_base * 100.0;
}

inline double objective_f(double delta_carbon_pct, double delta_accuracy_pct, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidArgument("lambda must lie in [0, 1]");
  return lambda * delta_carbon_pct + (1.0 - lambda) * delta_accuracy_pct;
}

// Annealing energy: negated objective, scaled by how far p95 overshoots the
// SLA. The default form always raises the energy of an SLA violation; the
// strict form keeps -f * min(1, l_tail / p95), which lowers it when f < 0.
inline double energy_h(double f, double p95_ms, double l_tail_ms, bool strict_min_form = false) {
  if (!(p95_ms > 0.0) || !(l_tail_ms > 0.0)) throw InvalidArgument("latencies must be positive");
  if (p95_ms <= l_tail_ms) return -f;
  const double ratio = l_tail_ms / p95_ms;
  if (strict_min_form || f >= 0.0) return -f * ratio;
  return -f / ratio;
}

inline double accept_prob(double h_old, double h_new, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (h_new <= h_old) return 1.0;
  return std::exp(-(h_new - h_old) / temperature);
}

}  // namespace carbon_sched
