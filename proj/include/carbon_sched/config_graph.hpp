#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "carbon_sched/core.hpp"
#include "carbon_sched/fleet_config.hpp"
#include "carbon_sched/mig_topology.hpp"
#include "carbon_sched/profiles.hpp"

namespace carbon_sched {

// Weighted bipartite graph from variant vertices to slice-type vertices. The
// weight of (v, s) counts the service instances of variant v on slices of
// type s; both vertex sets are fixed, so the graph is a dense weight matrix.
class ConfigGraph {
 public:
  ConfigGraph() = default;
  explicit ConfigGraph(int variant_count)
      : variant_count_(variant_count), weights_(static_cast<std::size_t>(variant_count) * kSliceTypeCount, 0) {
    if (variant_count < 1) throw InvalidArgument("a configuration graph needs at least one variant");
  }

  int variant_count() const { return variant_count_; }

  int weight(VariantId v, SliceType s) const { return weights_.at(cell(v, s)); }

  void set_weight(VariantId v, SliceType s, int w) {
    if (w < 0) throw InvalidArgument("edge weights are non-negative");
    weights_.at(cell(v, s)) = w;
  }

  void add_weight(VariantId v, SliceType s, int delta) { set_weight(v, s, weight(v, s) + delta); }

  int total_weight() const {
    int t = 0;
    for (int w : weights_) t += w;
    return t;
  }

  SliceCounts slice_counts() const {
    SliceCounts c{};
    for (int v = 1; v <= variant_count_; ++v) {
      for (auto s : kAllSlices) c[slice_index(s)] += weight(VariantId(v), s);
    }
    return c;
  }

  struct Edge {
    VariantId variant;
    SliceType slice;
    int weight;
  };

  // Non-zero edges, ordered by ascending variant then canonical slice order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int v = 1; v <= variant_count_; ++v) {
      for (auto s : kAllSlices) {
        const int w = weight(VariantId(v), s);
        if (w > 0) out.push_back({VariantId(v), s, w});
      }
    }
    return out;
  }

  const std::vector<int>& raw_weights() const { return weights_; }

  std::vector<int>& raw_weights_mut() { return weights_; }

  bool memory_feasible(const ProfileTable& profile) const {
    for (const auto& e : edges()) {
      if (!profile.memory_feasible(e.variant, e.slice)) return false;
    }
    return true;
  }

  // Compact text form, e.g. "v1@1g:6;v2@1g:1".
  std::string to_string() const {
    std::string out;
    for (const auto& e : edges()) {
      if (!out.empty()) out += ';';
      out += "v" + std::to_string(e.variant.value()) + "@" + std::string(slice_name(e.slice)) + ":" +
             std::to_string(e.weight);
    }
    return out.empty() ? "empty" : out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc;
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : edges()) {
      nlohmann::ordered_json row;
      row["variant"] = e.variant.value();
      row["slice"] = std::string(slice_name(e.slice));
      row["weight"] = e.weight;
      doc["edges"].push_back(row);
    }
    return doc;
  }

  friend bool operator==(const ConfigGraph&, const ConfigGraph&) = default;

 private:
  std::size_t cell(VariantId v, SliceType s) const {
    if (v.value() > variant_count_) {
      throw InvalidArgument("variant v" + std::to_string(v.value()) + " outside the graph catalog");
    }
    return v.index() * kSliceTypeCount + slice_index(s);
  }

  int variant_count_ = 0;
  std::vector<int> weights_;
};

struct ConfigGraphHash {
  std::size_t operator()(const ConfigGraph& g) const {
    std::uint64_t h = static_cast<std::uint64_t>(g.variant_count());
    for (int w : g.raw_weights()) h = splitmix64(h ^ static_cast<std::uint64_t>(w));
    return static_cast<std::size_t>(h);
  }
};

// ---------------------------------------------------------------------------
// Mapping between fleets and graphs
// ---------------------------------------------------------------------------

inline ConfigGraph build_graph(const FleetConfig& fc, const ProfileTable& profile) {
  ConfigGraph g(profile.variant_count());
  const auto& slots = fc.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto v = fc.assignments()[i];
    if (v.value() > profile.variant_count()) {
      throw InfeasibleAssignment("assignment references unknown variant v" + std::to_string(v.value()));
    }
    if (!profile.memory_feasible(v, slots[i].slice)) {
      throw InfeasibleAssignment("variant v" + std::to_string(v.value()) + " does not fit a " +
                                 std::string(slice_name(slots[i].slice)) + " slice");
    }
    g.add_weight(v, slots[i].slice, 1);
  }
  return g;
}

inline void require_compatible(const ConfigGraph& a, const ConfigGraph& b) {
  if (a.variant_count() != b.variant_count()) {
    throw IncompatibleGraphs("graphs are defined over different variant catalogs");
  }
}

// Graph edit distance with unit cost per unit of edge weight added or removed.
inline int ged(const ConfigGraph& a, const ConfigGraph& b) {
  require_compatible(a, b);
  int d = 0;
  const auto& wa = a.raw_weights();
  const auto& wb = b.raw_weights();
  for (std::size_t i = 0; i < wa.size(); ++i) d += std::abs(wa[i] - wb[i]);
  return d;
}

inline ConfigGraph merge(const ConfigGraph& a, const ConfigGraph& b) {
  require_compatible(a, b);
  ConfigGraph out = a;
  auto& w = out.raw_weights_mut();
  const auto& wb = b.raw_weights();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += wb[i];
  return out;
}

// Scales every weight by `k`, i.e. merges `k` copies of `g`.
inline ConfigGraph replicate(const ConfigGraph& g, int k) {
  ConfigGraph out = g;
  for (int& w : out.raw_weights_mut()) w *= k;
  return out;
}

// Deterministic inverse of build_graph: the first partition decomposition in
// backtracking order, then variants handed out to slots in canonical order
// with ascending variant ids per slice type.
inline FleetConfig realize(const ConfigGraph& g, int n, const MigTopology& topo = MigTopology::a100()) {
  auto parts = topo.decompose(g.slice_counts(), n);
  if (!parts) throw InfeasibleGraph("graph " + g.to_string() + " cannot be realized on " + std::to_string(n) + " GPUs");
  std::array<std::vector<VariantId>, kSliceTypeCount> pools;
  for (int v = g.variant_count(); v >= 1; --v) {
    for (auto s : kAllSlices) pools[slice_index(s)].insert(pools[slice_index(s)].end(), g.weight(VariantId(v), s), VariantId(v));
  }
  // pools are filled from the largest variant down, so pop_back yields ascending ids
  std::vector<VariantId> assignments;
  for (auto id : *parts) {
    for (auto s : topo.config_slices(id)) {
      auto& pool = pools[slice_index(s)];
      assignments.push_back(pool.back());
      pool.pop_back();
    }
  }
  return FleetConfig(*parts, std::move(assignments), topo);
}

// ---------------------------------------------------------------------------
// Neighborhood
// ---------------------------------------------------------------------------

inline constexpr int kNeighborGedThreshold = 4;

// A neighbor expressed as the edge deltas that turn the center into it.
struct GraphEdit {
  struct Delta {
    VariantId variant;
    SliceType slice;
    int delta;
  };
  std::vector<Delta> deltas;

  int cost() const {
    int c = 0;
    for (const auto& d : deltas) c += std::abs(d.delta);
    return c;
  }

  ConfigGraph apply(const ConfigGraph& g) const {
    ConfigGraph out = g;
    for (const auto& d : deltas) out.add_weight(d.variant, d.slice, d.delta);
    return out;
  }
};

namespace detail {

// Per-slice delta vectors over variants with prescribed sum and L1 cost.
inline void slice_options(const ConfigGraph& g, const ProfileTable& profile, SliceType s, int sum, int cost,
                          int variant, std::vector<GraphEdit::Delta>& current,
                          std::vector<std::vector<GraphEdit::Delta>>& out) {
  const int v_count = g.variant_count();
  if (variant > v_count) {
    if (sum == 0 && cost == 0) out.push_back(current);
    return;
  }
  const VariantId v(variant);
  const int w = g.weight(v, s);
  const bool can_add = profile.memory_feasible(v, s);
  const int lo = -std::min(w, cost);
  const int hi = can_add ? cost : 0;
  for (int d = lo; d <= hi; ++d) {
    const int rest_cost = cost - std::abs(d);
    const int rest_sum = sum - d;
    // remaining variants must absorb rest_sum using exactly rest_cost
    if (std::abs(rest_sum) > rest_cost || ((rest_cost - std::abs(rest_sum)) % 2) != 0) continue;
    if (d != 0) current.push_back({v, s, d});
    slice_options(g, profile, s, rest_sum, rest_cost, variant + 1, current, out);
    if (d != 0) current.pop_back();
  }
}

}  // namespace detail

// All graphs at GED 2 or 4 from `g` that stay memory-feasible and realizable
// on `n` GPUs. Each edit moves, adds or removes unit weights; edits that
// change the instance count repartition GPUs.
inline std::vector<GraphEdit> enumerate_neighbors(const ConfigGraph& g, int n, const ProfileTable& profile) {
  const auto& topo = profile.topology();
  const SliceCounts base = g.slice_counts();
  std::vector<GraphEdit> result;
  std::map<SliceCounts, bool> feasible_cache;

  // Enumerate slice-count changes dc with |dc|_1 even and <= threshold.
  SliceCounts dc{};
  std::function<void(std::size_t, int)> walk_counts = [&](std::size_t si, int budget) {
    if (si == kSliceTypeCount) {
      int l1 = 0;
      for (int x : dc) l1 += std::abs(x);
      if (l1 % 2 != 0) return;
      SliceCounts target{};
      for (std::size_t i = 0; i < kSliceTypeCount; ++i) target[i] = base[i] + dc[i];
      auto it = feasible_cache.find(target);
      if (it == feasible_cache.end()) it = feasible_cache.emplace(target, topo.is_feasible_fleet(target, n)).first;
      if (!it->second) return;
      // distribute extra swap cost (pairs of +1/-1 within a slice) over slices
      for (int total = std::max(2, l1); total <= kNeighborGedThreshold; total += 2) {
        const int extra = total - l1;
        std::vector<GraphEdit::Delta> acc;
        std::function<void(std::size_t, int)> walk_slices = [&](std::size_t sj, int extra_left) {
          if (sj == kSliceTypeCount) {
            if (extra_left == 0) result.push_back({acc});
            return;
          }
          const SliceType s = slice_at(sj);
          for (int e = 0; e <= extra_left; e += 2) {
            std::vector<std::vector<GraphEdit::Delta>> opts;
            std::vector<GraphEdit::Delta> cur;
            detail::slice_options(g, profile, s, dc[sj], std::abs(dc[sj]) + e, 1, cur, opts);
            for (const auto& o : opts) {
              const auto mark = acc.size();
              acc.insert(acc.end(), o.begin(), o.end());
              walk_slices(sj + 1, extra_left - e);
              acc.resize(mark);
            }
          }
        };
        walk_slices(0, extra);
      }
      return;
    }
    for (int d = -budget; d <= budget; ++d) {
      if (base[si] + d < 0) continue;
      dc[si] = d;
      walk_counts(si + 1, budget - std::abs(d));
    }
    dc[si] = 0;
  };
  walk_counts(0, kNeighborGedThreshold);
  return result;
}

// Uniform draw from enumerate_neighbors.
template <class Rng>
ConfigGraph sample_neighbor(const ConfigGraph& g, int n, const ProfileTable& profile, Rng& rng) {
  const auto edits = enumerate_neighbors(g, n, profile);
  if (edits.empty()) throw NoNeighbor("no legal neighbor of " + g.to_string());
  std::uniform_int_distribution<std::size_t> pick(0, edits.size() - 1);
  return edits[pick(rng)].apply(g);
}

}  // namespace carbon_sched
