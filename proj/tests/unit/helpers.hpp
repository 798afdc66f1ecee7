#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "carbon_sched/carbon_sched.hpp"

namespace test_support {

namespace cs = carbon_sched;

inline std::string data_path(const std::string& rel) { return std::string(CARBON_SCHED_DATA_DIR) + "/" + rel; }

// Every variant fits every slice; deterministic service of `ms` on every slice.
inline cs::ProfileTable uniform_profile(int variants, double ms = 10.0, double energy_wh = 0.001,
                                        double idle_w = 0.0) {
  std::vector<cs::VariantSpec> specs;
  cs::ProfileTable::Cells cells;
  for (int v = 0; v < variants; ++v) {
    specs.push_back({0.5 + 0.1 * v, 1.0});
    std::array<std::optional<cs::ServiceProfile>, cs::kSliceTypeCount> row;
    for (auto& c : row) c = cs::ServiceProfile{ms, cs::ServiceDist::Deterministic, 0.0, energy_wh};
    cells.push_back(row);
  }
  std::array<double, cs::kSliceTypeCount> idle{};
  idle.fill(idle_w);
  return cs::ProfileTable(specs, cells, idle);
}

inline cs::ConfigGraph graph(int variants, std::initializer_list<std::tuple<int, cs::SliceType, int>> edges) {
  cs::ConfigGraph g(variants);
  for (const auto& [v, s, w] : edges) g.set_weight(cs::VariantId(v), s, w);
  return g;
}

inline cs::FleetConfig fleet(std::vector<int> parts, std::vector<int> vars) {
  std::vector<cs::MigConfigId> p;
  for (int id : parts) p.emplace_back(id);
  std::vector<cs::VariantId> a;
  for (int v : vars) a.emplace_back(v);
  return cs::FleetConfig(p, a);
}

}  // namespace test_support
