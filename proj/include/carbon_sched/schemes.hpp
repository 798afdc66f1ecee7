#pragma once

#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "carbon_sched/annealer.hpp"
#include "carbon_sched/config_graph.hpp"
#include "carbon_sched/evaluator.hpp"

namespace carbon_sched {

enum class SchemeId { Base, Co2Opt, Blover, Clover, Oracle };

inline constexpr std::array<SchemeId, 5> kAllSchemes = {SchemeId::Base, SchemeId::Co2Opt, SchemeId::Blover,
                                                        SchemeId::Clover, SchemeId::Oracle};

inline std::string_view scheme_name(SchemeId s) {
  switch (s) {
    case SchemeId::Base: return "base";
    case SchemeId::Co2Opt: return "co2opt";
    case SchemeId::Blover: return "blover";
    case SchemeId::Clover: return "clover";
    case SchemeId::Oracle: return "oracle";
  }
  return "?";
}

inline SchemeId parse_scheme(std::string_view text) {
  for (auto s : kAllSchemes) {
    if (text == scheme_name(s)) return s;
  }
  throw InvalidArgument("unknown scheme '" + std::string(text) + "'");
}

// Largest variant on every unpartitioned GPU.
inline FleetConfig base_config(int n, const ProfileTable& profile) {
  if (n < 1) throw InvalidArgument("gpu count must be positive");
  const auto v = profile.largest_variant();
  if (!profile.memory_feasible(v, SliceType::S7g)) throw ProfileError("largest variant does not fit a full GPU");
  return FleetConfig(std::vector<MigConfigId>(static_cast<std::size_t>(n), MigConfigId(1)),
                     std::vector<VariantId>(static_cast<std::size_t>(n), v), profile.topology());
}

// Smallest variant on every slice of the finest partition.
inline FleetConfig co2opt_config(int n, const ProfileTable& profile) {
  if (n < 1) throw InvalidArgument("gpu count must be positive");
  const auto v = profile.smallest_variant();
  const MigConfigId finest(kMigConfigCount);
  for (auto s : profile.topology().config_slices(finest)) {
    if (!profile.memory_feasible(v, s)) throw ProfileError("smallest variant does not fit the finest partition");
  }
  const std::size_t per_gpu = profile.topology().config_slices(finest).size();
  return FleetConfig(std::vector<MigConfigId>(static_cast<std::size_t>(n), finest),
                     std::vector<VariantId>(per_gpu * static_cast<std::size_t>(n), v), profile.topology());
}

// ---------------------------------------------------------------------------
// Random search over (partitions, assignments)
// ---------------------------------------------------------------------------

template <class Rng>
FleetConfig random_fleet(int n, const ProfileTable& profile, Rng& rng) {
  const auto& topo = profile.topology();
  std::uniform_int_distribution<int> pick_config(1, kMigConfigCount);
  std::uniform_int_distribution<int> pick_variant(1, profile.variant_count());
  auto slice_hostable = [&](SliceType s) {
    for (int v = 1; v <= profile.variant_count(); ++v) {
      if (profile.memory_feasible(VariantId(v), s)) return true;
    }
    return false;
  };
  std::vector<MigConfigId> parts;
  std::vector<VariantId> assign;
  for (int g = 0; g < n; ++g) {
    MigConfigId id;
    for (int attempt = 0;; ++attempt) {
      id = MigConfigId(pick_config(rng));
      bool ok = true;
      for (auto s : topo.config_slices(id)) ok = ok && slice_hostable(s);
      if (ok) break;
      if (attempt > 10000) throw ProfileError("no configuration can be hosted by any variant");
    }
    parts.push_back(id);
    for (auto s : topo.config_slices(id)) {
      VariantId v(pick_variant(rng));
      while (!profile.memory_feasible(v, s)) v = VariantId(pick_variant(rng));
      assign.push_back(v);
    }
  }
  return FleetConfig(std::move(parts), std::move(assign), topo);
}

// Random search with the annealer's termination rules. Every evaluation is a
// fresh uniform draw; the incumbent is not re-scored.
template <class Rng>
SearchOutcome blover_search(int n, Evaluator& evaluator, CarbonIntensity ci, const AnnealParams& ap, Rng& rng) {
  ap.validate();
  const auto& profile = evaluator.profile();
  SearchOutcome out;
  int stall = 0;
  int iter = 0;
  bool have_best = false;
  while (out.sim_time_spent_s < ap.time_budget_s && stall < ap.stall_limit) {
    const ConfigGraph g = build_graph(random_fleet(n, profile, rng), profile);
    EvalResult r = evaluator.evaluate(g, ci);
    out.sim_time_spent_s += ap.eval_cost_s;
    const bool new_best = !have_best || better_than(r, out.best);
    const int dist = have_best ? ged(out.best.graph, g) : 0;
    if (new_best) {
      out.best = r;
      have_best = true;
      stall = 0;
    } else {
      ++stall;
    }
    out.log.push_back({iter++, 0.0, dist, std::move(r), new_best, new_best});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive search over standardized fleets
// ---------------------------------------------------------------------------

struct OracleOutcome {
  EvalResult best;
  std::vector<EvalResult> candidates;  // enumeration order
  std::size_t enumerated = 0;
};

// Visits every (config id, per-slot variant assignment) replicated on all
// GPUs: ascending config id, then lexicographic assignments.
template <class Visit>
void for_each_standardized(const ProfileTable& profile, Visit&& visit) {
  const auto& topo = profile.topology();
  for (int id = 1; id <= kMigConfigCount; ++id) {
    const MigConfigId cid(id);
    const auto& slots = topo.config_slices(cid);
    std::vector<std::vector<VariantId>> options(slots.size());
    bool hostable = true;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      for (int v = 1; v <= profile.variant_count(); ++v) {
        if (profile.memory_feasible(VariantId(v), slots[i])) options[i].emplace_back(v);
      }
      hostable = hostable && !options[i].empty();
    }
    if (!hostable) continue;
    std::vector<std::size_t> digit(slots.size(), 0);
    while (true) {
      std::vector<VariantId> assign(slots.size());
      for (std::size_t i = 0; i < slots.size(); ++i) assign[i] = options[i][digit[i]];
      visit(cid, assign);
      std::size_t pos = slots.size();
      bool carry = true;
      while (carry && pos > 0) {
        --pos;
        if (++digit[pos] < options[pos].size()) {
          carry = false;
        } else {
          digit[pos] = 0;
        }
      }
      if (carry) break;
    }
  }
}

inline ConfigGraph standardized_graph(MigConfigId id, const std::vector<VariantId>& per_gpu, int n,
                                      const ProfileTable& profile) {
  FleetConfig one({id}, per_gpu, profile.topology());
  return replicate(build_graph(one, profile), n);
}

inline OracleOutcome oracle_search(Evaluator& evaluator, CarbonIntensity ci) {
  const auto& profile = evaluator.profile();
  const int n = evaluator.gpus();
  OracleOutcome out;
  std::optional<std::size_t> best_ok;
  std::optional<std::size_t> best_any;
  for_each_standardized(profile, [&](MigConfigId id, const std::vector<VariantId>& assign) {
    auto r = evaluator.evaluate(standardized_graph(id, assign, n, profile), ci);
    const std::size_t idx = out.candidates.size();
    if (r.admissible && (!best_ok || r.f_value > out.candidates[*best_ok].f_value)) best_ok = idx;
    if (!best_any || r.p95_ms < out.candidates[*best_any].p95_ms) best_any = idx;
    out.candidates.push_back(std::move(r));
  });
  out.enumerated = out.candidates.size();
  if (out.candidates.empty()) throw ProfileError("no standardized configuration can be hosted");
  out.best = out.candidates[best_ok ? *best_ok : *best_any];
  return out;
}

inline std::size_t oracle_enumeration_size(const ProfileTable& profile) {
  std::size_t count = 0;
  for_each_standardized(profile, [&](MigConfigId, const std::vector<VariantId>&) { ++count; });
  return count;
}

// Single-GPU starting graphs for restricted annealing: the unpartitioned GPU
// and the two-slice split, each slot holding the largest variant that fits.
// Neighbor moves preserve the parity of the instance count, so one start per
// parity class covers the standardized space.
inline std::vector<ConfigGraph> standardized_starts(const ProfileTable& profile) {
  std::vector<ConfigGraph> out;
  for (int id : {1, 2}) {
    const MigConfigId cid(id);
    std::vector<VariantId> assign;
    bool ok = true;
    for (auto s : profile.topology().config_slices(cid)) {
      std::optional<VariantId> pick;
      for (int v = profile.variant_count(); v >= 1 && !pick; --v) {
        if (profile.memory_feasible(VariantId(v), s)) pick = VariantId(v);
      }
      ok = ok && pick.has_value();
      if (pick) assign.push_back(*pick);
    }
    if (ok) out.push_back(build_graph(FleetConfig({cid}, assign, profile.topology()), profile));
  }
  return out;
}

}  // namespace carbon_sched
