#pragma once

#include <string>
#include <vector>

#include "carbon_sched/core.hpp"
#include "carbon_sched/mig_topology.hpp"

namespace carbon_sched {

// One service instance slot: which GPU it lives on and which slice type backs it.
struct SlotRef {
  int gpu = 0;
  SliceType slice = SliceType::S7g;
};

// Concrete deployment: one partition layout per GPU plus one variant per slice.
// Assignments are ordered by GPU index, then by canonical slice order within
// the GPU (descending slice type).
class FleetConfig {
 public:
  FleetConfig(std::vector<MigConfigId> partitions, std::vector<VariantId> assignments,
              const MigTopology& topo = MigTopology::a100())
      : partitions_(std::move(partitions)), assignments_(std::move(assignments)) {
    if (partitions_.empty()) throw InvalidConfig("a fleet needs at least one GPU");
    std::size_t m = 0;
    for (auto id : partitions_) m += topo.config_slices(id).size();
    if (m != assignments_.size()) {
      throw InvalidConfig("fleet has " + std::to_string(m) + " slices but " + std::to_string(assignments_.size()) +
                          " variant assignments");
    }
    slots_.reserve(m);
    for (std::size_t g = 0; g < partitions_.size(); ++g) {
      for (auto s : topo.config_slices(partitions_[g])) slots_.push_back({static_cast<int>(g), s});
    }
  }

  int gpu_count() const { return static_cast<int>(partitions_.size()); }
  std::size_t instance_count() const { return assignments_.size(); }

  const std::vector<MigConfigId>& partitions() const { return partitions_; }
  const std::vector<VariantId>& assignments() const { return assignments_; }
  const std::vector<SlotRef>& slots() const { return slots_; }

  friend bool operator==(const FleetConfig& a, const FleetConfig& b) {
    return a.partitions_ == b.partitions_ && a.assignments_ == b.assignments_;
  }

 private:
  std::vector<MigConfigId> partitions_;
  std::vector<VariantId> assignments_;
  std::vector<SlotRef> slots_;
};

}  // namespace carbon_sched
