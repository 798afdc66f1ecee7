#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "carbon_sched/core.hpp"
#include "carbon_sched/mig_topology.hpp"

namespace carbon_sched {

enum class ServiceDist { Deterministic, Exponential, Lognormal };

inline std::string_view dist_name(ServiceDist d) {
  switch (d) {
    case ServiceDist::Deterministic: return "deterministic";
    case ServiceDist::Exponential: return "exponential";
    case ServiceDist::Lognormal: return "lognormal";
  }
  return "?";
}

inline ServiceDist parse_dist(std::string_view text) {
  if (text == "deterministic") return ServiceDist::Deterministic;
  if (text == "exponential") return ServiceDist::Exponential;
  if (text == "lognormal") return ServiceDist::Lognormal;
  throw ProfileError("unknown service distribution '" + std::string(text) + "'");
}

struct VariantSpec {
  double accuracy = 1.0;  // fraction in (0, 1]
  double memory_gb = 1.0;
};

// Service behaviour of one variant on one slice type.
struct ServiceProfile {
  double mean_service_ms = 1.0;
  ServiceDist dist = ServiceDist::Deterministic;
  double sigma = 0.0;                 // lognormal shape, ignored otherwise
  double energy_wh_per_request = 0.0;  // active energy only
};

// Per-(variant, slice) latency and energy, per-variant accuracy and memory,
// per-slice idle power, plus the accelerator topology they refer to.
class ProfileTable {
 public:
  using Cells = std::vector<std::array<std::optional<ServiceProfile>, kSliceTypeCount>>;

  ProfileTable(std::vector<VariantSpec> variants, Cells cells, std::array<double, kSliceTypeCount> idle_w,
               MigTopology topology = MigTopology::a100())
      : variants_(std::move(variants)), cells_(std::move(cells)), idle_w_(idle_w), topology_(std::move(topology)) {
    validate();
  }

  static ProfileTable from_json(const nlohmann::json& doc);
  static ProfileTable load(const std::string& path);
  nlohmann::ordered_json to_json() const;

  int variant_count() const { return static_cast<int>(variants_.size()); }
  VariantId smallest_variant() const { return VariantId(1); }
  VariantId largest_variant() const { return VariantId(variant_count()); }

  const VariantSpec& variant(VariantId v) const {
    check_variant(v);
    return variants_[v.index()];
  }

  double accuracy(VariantId v) const { return variant(v).accuracy; }

  bool memory_feasible(VariantId v, SliceType s) const {
    return variant(v).memory_gb <= topology_.slice_memory(s);
  }

  bool has_service(VariantId v, SliceType s) const {
    check_variant(v);
    return cells_[v.index()][slice_index(s)].has_value();
  }

  const ServiceProfile& service(VariantId v, SliceType s) const {
    check_variant(v);
    const auto& cell = cells_[v.index()][slice_index(s)];
    if (!cell) {
      throw ProfileError("no service profile for v" + std::to_string(v.value()) + " on " +
                         std::string(slice_name(s)));
    }
    return *cell;
  }

  ServiceProfile& mutable_service(VariantId v, SliceType s) {
    check_variant(v);
    auto& cell = cells_[v.index()][slice_index(s)];
    if (!cell) throw ProfileError("no service profile to modify");
    return *cell;
  }

  double idle_power_w(SliceType s) const { return idle_w_[slice_index(s)]; }
  const MigTopology& topology() const { return topology_; }

  std::size_t service_row_count() const {
    std::size_t n = 0;
    for (const auto& row : cells_) {
      for (const auto& c : row) n += c.has_value() ? 1 : 0;
    }
    return n;
  }

  void validate() const {
    if (variants_.empty()) throw ProfileError("profile lists no variants");
    if (cells_.size() != variants_.size()) throw ProfileError("service table does not match the variant list");
    for (std::size_t i = 0; i < variants_.size(); ++i) {
      const auto& v = variants_[i];
      if (!(v.accuracy > 0.0 && v.accuracy <= 1.0)) throw ProfileError("accuracy must be a fraction in (0, 1]");
      if (!(v.memory_gb > 0.0) || !std::isfinite(v.memory_gb)) throw ProfileError("variant memory must be positive");
      if (i > 0 && !(v.accuracy > variants_[i - 1].accuracy)) {
        throw ProfileError("accuracy must increase strictly with the variant ordinal (v" + std::to_string(i + 1) +
                           " <= v" + std::to_string(i) + ")");
      }
    }
    for (double w : idle_w_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ProfileError("idle power must be non-negative");
    }
    for (std::size_t vi = 0; vi < cells_.size(); ++vi) {
      const VariantId v(static_cast<int>(vi + 1));
      std::optional<double> larger_mean;
      for (auto s : kAllSlices) {
        const auto& cell = cells_[vi][slice_index(s)];
        if (!cell) {
          if (memory_feasible(v, s)) {
            throw ProfileError("missing latency/energy rows for memory-feasible v" + std::to_string(v.value()) +
                               " on " + std::string(slice_name(s)));
          }
          continue;
        }
        if (!(cell->mean_service_ms > 0.0) || !std::isfinite(cell->mean_service_ms)) {
          throw ProfileError("mean service time must be positive");
        }
        if (!(cell->energy_wh_per_request >= 0.0) || !std::isfinite(cell->energy_wh_per_request)) {
          throw ProfileError("per-request energy must be non-negative");
        }
        if (cell->dist == ServiceDist::Lognormal && !(cell->sigma > 0.0)) {
          throw ProfileError("lognormal service rows need sigma > 0");
        }
        if (larger_mean && cell->mean_service_ms < *larger_mean) {
          throw ProfileError("mean service time of v" + std::to_string(v.value()) +
                             " must not decrease on smaller slices");
        }
        larger_mean = cell->mean_service_ms;
      }
    }
  }

 private:
  void check_variant(VariantId v) const {
    if (v.value() > variant_count()) throw ProfileError("unknown variant v" + std::to_string(v.value()));
  }

  std::vector<VariantSpec> variants_;
  Cells cells_;
  std::array<double, kSliceTypeCount> idle_w_;
  MigTopology topology_;
};

inline bool memory_feasible(VariantId v, SliceType s, const ProfileTable& t) { return t.memory_feasible(v, s); }

// ---------------------------------------------------------------------------
// Profile file
// ---------------------------------------------------------------------------
//
// {
//   "variants": [{"id": 1, "accuracy": 0.79, "memory_gb": 2.0}, ...],
//   "latency":  [{"variant": 1, "slice": "7g", "mean_service_ms": 8, "dist": "deterministic"},
//                {"variant": 1, "slice": "1g", "mean_service_ms": 16, "dist": "lognormal", "sigma": 0.2}],
//   "energy":   [{"variant": 1, "slice": "7g", "wh_per_request": 0.0004}, ...],
//   "idle":     [{"slice": "7g", "watts": 20}, ...],
//   "slices":   [{"slice": "1g", "memory_gb": 5}],   optional memory override
//   "topology": {...}                                 optional, see MigTopology::from_json
// }

inline ProfileTable ProfileTable::from_json(const nlohmann::json& doc) {
  try {
    MigTopology topo = MigTopology::a100();
    if (doc.contains("topology")) topo = MigTopology::from_json(doc.at("topology"), topo);
    if (doc.contains("slices")) {
      nlohmann::json override_doc;
      override_doc["slices"] = doc.at("slices");
      topo = MigTopology::from_json(override_doc, topo);
    }

    const auto& vrows = doc.at("variants");
    const std::size_t count = vrows.size();
    std::vector<VariantSpec> variants(count);
    std::vector<bool> seen(count, false);
    for (const auto& row : vrows) {
      const int id = row.at("id").get<int>();
      if (id < 1 || static_cast<std::size_t>(id) > count) {
        throw ProfileError("variant ids must be contiguous 1..V (got " + std::to_string(id) + ")");
      }
      if (seen[static_cast<std::size_t>(id - 1)]) throw ProfileError("duplicate variant id " + std::to_string(id));
      seen[static_cast<std::size_t>(id - 1)] = true;
      variants[static_cast<std::size_t>(id - 1)] = {row.at("accuracy").get<double>(), row.at("memory_gb").get<double>()};
    }

    auto variant_of = [&](const nlohmann::json& row) {
      const int id = row.at("variant").get<int>();
      if (id < 1 || static_cast<std::size_t>(id) > count) {
        throw ProfileError("row references unknown variant " + std::to_string(id));
      }
      return static_cast<std::size_t>(id - 1);
    };

    Cells cells(count);
    std::vector<std::array<bool, kSliceTypeCount>> has_energy(count, {false, false, false, false, false});
    for (const auto& row : doc.at("latency")) {
      const auto vi = variant_of(row);
      const auto s = parse_slice(row.at("slice").get<std::string>());
      auto& cell = cells[vi][slice_index(s)];
      if (cell) throw ProfileError("duplicate latency row for (v" + std::to_string(vi + 1) + ", " + std::string(slice_name(s)) + ")");
      ServiceProfile p;
      p.mean_service_ms = row.at("mean_service_ms").get<double>();
      p.dist = parse_dist(row.value("dist", std::string("deterministic")));
      p.sigma = row.value("sigma", 0.0);
      cell = p;
    }
    for (const auto& row : doc.at("energy")) {
      const auto vi = variant_of(row);
      const auto s = parse_slice(row.at("slice").get<std::string>());
      auto& cell = cells[vi][slice_index(s)];
      if (has_energy[vi][slice_index(s)]) {
        throw ProfileError("duplicate energy row for (v" + std::to_string(vi + 1) + ", " + std::string(slice_name(s)) + ")");
      }
      if (!cell) throw ProfileError("energy row without a latency row for v" + std::to_string(vi + 1));
      has_energy[vi][slice_index(s)] = true;
      cell->energy_wh_per_request = row.at("wh_per_request").get<double>();
    }
    for (std::size_t vi = 0; vi < count; ++vi) {
      for (std::size_t si = 0; si < kSliceTypeCount; ++si) {
        if (cells[vi][si] && !has_energy[vi][si]) {
          throw ProfileError("latency row without an energy row for v" + std::to_string(vi + 1));
        }
      }
    }

    std::array<double, kSliceTypeCount> idle{};
    std::array<bool, kSliceTypeCount> idle_seen{};
    if (doc.contains("idle")) {
      for (const auto& row : doc.at("idle")) {
        const auto s = parse_slice(row.at("slice").get<std::string>());
        if (idle_seen[slice_index(s)]) throw ProfileError("duplicate idle row for " + std::string(slice_name(s)));
        idle_seen[slice_index(s)] = true;
        idle[slice_index(s)] = row.at("watts").get<double>();
      }
    }
    return ProfileTable(std::move(variants), std::move(cells), idle, std::move(topo));
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(std::string("malformed profile: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ProfileError(std::string("malformed profile: ") + e.what());
  }
}

inline ProfileTable ProfileTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProfileError("cannot open profile file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError("cannot parse profile file " + path + ": " + e.what());
  }
  return from_json(doc);
}

inline nlohmann::ordered_json ProfileTable::to_json() const {
  nlohmann::ordered_json doc;
  doc["variants"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < variants_.size(); ++i) {
    nlohmann::ordered_json row;
    row["id"] = static_cast<int>(i + 1);
    row["accuracy"] = variants_[i].accuracy;
    row["memory_gb"] = variants_[i].memory_gb;
    doc["variants"].push_back(row);
  }
  doc["latency"] = nlohmann::ordered_json::array();
  doc["energy"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    for (auto s : kAllSlices) {
      const auto& cell = cells_[i][slice_index(s)];
      if (!cell) continue;
      nlohmann::ordered_json lat;
      lat["variant"] = static_cast<int>(i + 1);
      lat["slice"] = std::string(slice_name(s));
      lat["mean_service_ms"] = cell->mean_service_ms;
      lat["dist"] = std::string(dist_name(cell->dist));
      if (cell->dist == ServiceDist::Lognormal) lat["sigma"] = cell->sigma;
      doc["latency"].push_back(lat);
      nlohmann::ordered_json en;
      en["variant"] = static_cast<int>(i + 1);
      en["slice"] = std::string(slice_name(s));
      en["wh_per_request"] = cell->energy_wh_per_request;
      doc["energy"].push_back(en);
    }
  }
  doc["idle"] = nlohmann::ordered_json::array();
  for (auto s : kAllSlices) {
    nlohmann::ordered_json row;
    row["slice"] = std::string(slice_name(s));
    row["watts"] = idle_w_[slice_index(s)];
    doc["idle"].push_back(row);
  }
  doc["topology"] = topology_.to_json();
  return doc;
}

inline ProfileTable load_profiles(const std::string& path) { return ProfileTable::load(path); }

}  // namespace carbon_sched
