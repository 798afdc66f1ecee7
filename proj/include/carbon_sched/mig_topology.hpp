#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "carbon_sched/core.hpp"

namespace carbon_sched {

// Slice multiset stored as a count per SliceType, indexed by slice_index().
using SliceCounts = std::array<int, kSliceTypeCount>;

inline int total_slices(const SliceCounts& c) { return std::accumulate(c.begin(), c.end(), 0); }

inline SliceCounts counts_of(const std::vector<SliceType>& slices) {
  SliceCounts c{};
  for (auto s : slices) ++c[slice_index(s)];
  return c;
}

inline std::vector<SliceType> slices_of(const SliceCounts& c) {
  std::vector<SliceType> out;
  for (std::size_t i = 0; i < kSliceTypeCount; ++i) out.insert(out.end(), c[i], slice_at(i));
  return out;
}

struct SliceSpec {
  SliceType slice = SliceType::S1g;
  int compute_units = 1;
  double memory_gb = 5.0;
};

// The legal per-GPU partition layouts of a partitionable accelerator and the
// per-slice capacities. The default table follows the A100-40GB geometry.
class MigTopology {
 public:
  using ConfigTable = std::array<std::vector<SliceType>, kMigConfigCount>;

  // Largest fleet the feasibility search accepts (slice counts are packed into bytes).
  static constexpr int kMaxGpus = 36;

  MigTopology(std::array<SliceSpec, kSliceTypeCount> specs, ConfigTable rows, int capacity_units = 7)
      : specs_(specs), rows_(std::move(rows)), capacity_units_(capacity_units) {
    validate();
    index_distinct();
  }

  static const MigTopology& a100() {
    static const MigTopology topo(default_specs(), default_rows());
    return topo;
  }

  static std::array<SliceSpec, kSliceTypeCount> default_specs() {
    return {{{SliceType::S7g, 7, 40.0},
             {SliceType::S4g, 4, 20.0},
             {SliceType::S3g, 3, 20.0},
             {SliceType::S2g, 2, 10.0},
             {SliceType::S1g, 1, 5.0}}};
  }

  static ConfigTable default_rows() {
    using S = SliceType;
    constexpr S g7 = S::S7g, g4 = S::S4g, g3 = S::S3g, g2 = S::S2g, g1 = S::S1g;
    return {{
        {g7},                          // 1
        {g4, g3},                      // 2
        {g4, g2, g1},                  // 3
        {g4, g1, g1, g1},              // 4
        {g3, g3},                      // 5
        {g3, g2, g1},                  // 6
        {g3, g1, g1, g1},              // 7
        {g3, g2, g2},                  // 8
        {g3, g2, g1, g1},              // 9
        {g3, g2, g1, g1},              // 10
        {g3, g1, g1, g1, g1},          // 11
        {g2, g2, g2, g1},              // 12
        {g2, g2, g1, g1, g1},          // 13
        {g2, g2, g1, g1, g1},          // 14
        {g2, g1, g1, g1, g1, g1},      // 15
        {g2, g2, g1, g1, g1},          // 16
        {g2, g1, g1, g1, g1, g1},      // 17
        {g2, g1, g1, g1, g1, g1},      // 18
        {g1, g1, g1, g1, g1, g1, g1},  // 19
    }};
  }

  // Override file: {"slices": [{"slice", "compute_units", "memory_gb"}],
  //                 "configs": [{"id", "slices": ["4g", ...]}]}.
  // Listed entries replace the corresponding rows of `base`.
  static MigTopology from_json(const nlohmann::json& doc, const MigTopology& base = a100()) {
    auto specs = base.specs_;
    auto rows = base.rows_;
    if (doc.contains("slices")) {
      for (const auto& row : doc.at("slices")) {
        auto s = parse_slice(row.at("slice").get<std::string>());
        auto& spec = specs[slice_index(s)];
        if (row.contains("compute_units")) spec.compute_units = row.at("compute_units").get<int>();
        if (row.contains("memory_gb")) spec.memory_gb = row.at("memory_gb").get<double>();
      }
    }
    if (doc.contains("configs")) {
      for (const auto& row : doc.at("configs")) {
        MigConfigId id(row.at("id").get<int>());
        std::vector<SliceType> slices;
        for (const auto& name : row.at("slices")) slices.push_back(parse_slice(name.get<std::string>()));
        rows[static_cast<std::size_t>(id.value() - 1)] = std::move(slices);
      }
    }
    return MigTopology(specs, std::move(rows), base.capacity_units_);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc;
    doc["slices"] = nlohmann::ordered_json::array();
    for (const auto& spec : specs_) {
      nlohmann::ordered_json row;
      row["slice"] = std::string(slice_name(spec.slice));
      row["compute_units"] = spec.compute_units;
      row["memory_gb"] = spec.memory_gb;
      doc["slices"].push_back(row);
    }
    doc["configs"] = nlohmann::ordered_json::array();
    for (int id = 1; id <= kMigConfigCount; ++id) {
      nlohmann::ordered_json row;
      row["id"] = id;
      row["slices"] = nlohmann::ordered_json::array();
      for (auto s : rows_[static_cast<std::size_t>(id - 1)]) row["slices"].push_back(std::string(slice_name(s)));
      doc["configs"].push_back(row);
    }
    return doc;
  }

  // Slices of one configuration, in canonical order (descending slice type).
  const std::vector<SliceType>& config_slices(MigConfigId id) const {
    return rows_[static_cast<std::size_t>(id.value() - 1)];
  }

  SliceCounts config_counts(MigConfigId id) const { return counts_of(config_slices(id)); }

  const SliceSpec& spec(SliceType s) const { return specs_[slice_index(s)]; }
  double slice_memory(SliceType s) const { return spec(s).memory_gb; }
  int compute_units(SliceType s) const { return spec(s).compute_units; }
  int capacity_units() const { return capacity_units_; }

  int compute_units(const SliceCounts& c) const {
    int total = 0;
    for (std::size_t i = 0; i < kSliceTypeCount; ++i) total += c[i] * specs_[i].compute_units;
    return total;
  }

  // True iff `c` splits into exactly `n` configuration multisets.
  bool is_feasible_fleet(const SliceCounts& c, int n) const { return decompose(c, n).has_value(); }

  // First decomposition of `c` into `n` configurations, searching GPU by GPU
  // over configuration ids in ascending order with non-decreasing choices.
  std::optional<std::vector<MigConfigId>> decompose(const SliceCounts& c, int n) const {
    if (n < 1) return std::nullopt;
    if (n > kMaxGpus) throw InvalidArgument("fleets larger than 36 GPUs are not supported");
    for (int v : c) {
      if (v < 0) return std::nullopt;
    }
    std::vector<MigConfigId> out;
    out.reserve(static_cast<std::size_t>(n));
    std::unordered_set<std::uint64_t> failed;
    SliceCounts remaining = c;
    if (search(remaining, n, 0, out, failed)) return out;
    return std::nullopt;
  }

  // Distinct multisets, each represented by its smallest configuration id.
  const std::vector<MigConfigId>& distinct_configs() const { return distinct_ids_; }

 private:
  void validate() const {
    for (std::size_t i = 0; i < kSliceTypeCount; ++i) {
      if (specs_[i].slice != slice_at(i)) throw InvalidConfig("slice specs must be listed in canonical order");
      if (specs_[i].memory_gb <= 0.0) throw InvalidConfig("slice memory must be positive");
      if (i > 0 && specs_[i].compute_units >= specs_[i - 1].compute_units) {
        throw InvalidConfig("slice compute units must strictly decrease along the slice order");
      }
    }
    if (capacity_units_ < 1) throw InvalidConfig("GPU capacity must be positive");
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const auto& row = rows_[r];
      if (row.empty()) throw InvalidConfig("configuration " + std::to_string(r + 1) + " has no slices");
      if (static_cast<int>(row.size()) > capacity_units_ || compute_units(counts_of(row)) > capacity_units_) {
        throw InvalidConfig("configuration " + std::to_string(r + 1) + " exceeds GPU capacity");
      }
    }
  }

  void index_distinct() {
    for (auto& row : rows_) {
      std::stable_sort(row.begin(), row.end(), larger_slice);
    }
    std::vector<SliceCounts> seen;
    for (int id = 1; id <= kMigConfigCount; ++id) {
      auto c = counts_of(rows_[static_cast<std::size_t>(id - 1)]);
      if (std::find(seen.begin(), seen.end(), c) == seen.end()) {
        seen.push_back(c);
        distinct_ids_.emplace_back(id);
        distinct_counts_.push_back(c);
      }
    }
    max_slices_per_gpu_ = 0;
    for (const auto& c : distinct_counts_) max_slices_per_gpu_ = std::max(max_slices_per_gpu_, total_slices(c));
  }

  static std::uint64_t memo_key(const SliceCounts& c, int gpus, std::size_t start) {
    std::uint64_t key = 0;
    for (int v : c) key = (key << 8) | static_cast<std::uint64_t>(v);
    key = (key << 8) | static_cast<std::uint64_t>(gpus);
    return (key << 8) | static_cast<std::uint64_t>(start);
  }

  bool search(SliceCounts& c, int gpus, std::size_t start, std::vector<MigConfigId>& out,
              std::unordered_set<std::uint64_t>& failed) const {
    const int slices = total_slices(c);
    if (gpus == 0) return slices == 0;
    if (slices < gpus || slices > gpus * max_slices_per_gpu_) return false;
    if (compute_units(c) > gpus * capacity_units_) return false;
    const auto key = memo_key(c, gpus, start);
    if (failed.contains(key)) return false;
    for (std::size_t j = start; j < distinct_counts_.size(); ++j) {
      const auto& d = distinct_counts_[j];
      bool fits = true;
      for (std::size_t i = 0; i < kSliceTypeCount; ++i) fits = fits && d[i] <= c[i];
      if (!fits) continue;
      for (std::size_t i = 0; i < kSliceTypeCount; ++i) c[i] -= d[i];
      out.push_back(distinct_ids_[j]);
      if (search(c, gpus - 1, j, out, failed)) return true;
      out.pop_back();
      for (std::size_t i = 0; i < kSliceTypeCount; ++i) c[i] += d[i];
    }
    failed.insert(key);
    return false;
  }

  std::array<SliceSpec, kSliceTypeCount> specs_;
  ConfigTable rows_;
  int capacity_units_;
  std::vector<MigConfigId> distinct_ids_;
  std::vector<SliceCounts> distinct_counts_;
  int max_slices_per_gpu_ = 0;
};

// Convenience wrappers over the default A100 table.
inline const std::vector<SliceType>& config_slices(MigConfigId id) { return MigTopology::a100().config_slices(id); }
inline double slice_memory(SliceType s) { return MigTopology::a100().slice_memory(s); }
inline bool is_feasible_fleet(const SliceCounts& c, int n) { return MigTopology::a100().is_feasible_fleet(c, n); }

}  // namespace carbon_sched
