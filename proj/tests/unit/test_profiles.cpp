#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace carbon_sched;
using S = SliceType;

namespace {

nlohmann::json three_variant_doc() {
  nlohmann::json doc;
  doc["variants"] = nlohmann::json::array();
  doc["latency"] = nlohmann::json::array();
  doc["energy"] = nlohmann::json::array();
  const double acc[] = {0.70, 0.75, 0.80};
  for (int v = 1; v <= 3; ++v) {
    doc["variants"].push_back({{"id", v}, {"accuracy", acc[v - 1]}, {"memory_gb", 2.0}});
    double ms = 5.0 * v;
    for (auto s : kAllSlices) {
      doc["latency"].push_back({{"variant", v}, {"slice", std::string(slice_name(s))}, {"mean_service_ms", ms}});
      doc["energy"].push_back({{"variant", v}, {"slice", std::string(slice_name(s))}, {"wh_per_request", 0.001}});
      ms *= 1.5;
    }
  }
  doc["idle"] = nlohmann::json::array({{{"slice", "7g"}, {"watts", 20}}});
  return doc;
}

}  // namespace

TEST(Profiles, WellFormedThreeVariantTable) {
  const auto t = ProfileTable::from_json(three_variant_doc());
  EXPECT_EQ(t.variant_count(), 3);
  EXPECT_EQ(t.service_row_count(), 15u);
  EXPECT_EQ(t.idle_power_w(S::S7g), 20.0);
  EXPECT_EQ(t.idle_power_w(S::S1g), 0.0);
}

TEST(Profiles, AccuracyMustIncrease) {
  auto doc = three_variant_doc();
  doc["variants"][1]["accuracy"] = 0.60;
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);
}

TEST(Profiles, LatencyMustNotDropOnSmallerSlices) {
  auto doc = three_variant_doc();
  doc["latency"][4]["mean_service_ms"] = 1.0;  // v1 on 1g faster than on 2g
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);
}

TEST(Profiles, MissingOrMismatchedRows) {
  auto doc = three_variant_doc();
  doc["energy"].erase(doc["energy"].begin());
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);

  doc = three_variant_doc();
  doc["latency"].erase(doc["latency"].begin());
  doc["energy"].erase(doc["energy"].begin());
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);  // memory-feasible pair without a row

  doc = three_variant_doc();
  doc["latency"].push_back(doc["latency"][0]);
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);

  doc = three_variant_doc();
  doc["energy"][0]["variant"] = 9;
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);
}

TEST(Profiles, LargeVariantSkipsSmallSlices) {
  auto doc = three_variant_doc();
  doc["variants"][2]["memory_gb"] = 12.0;
  nlohmann::json lat = nlohmann::json::array(), en = nlohmann::json::array();
  for (std::size_t i = 0; i < doc["latency"].size(); ++i) {
    const auto& row = doc["latency"][i];
    const bool small = row["slice"] == "2g" || row["slice"] == "1g";
    if (row["variant"] == 3 && small) continue;
    lat.push_back(row);
    en.push_back(doc["energy"][i]);
  }
  doc["latency"] = lat;
  doc["energy"] = en;
  const auto t = ProfileTable::from_json(doc);
  EXPECT_FALSE(t.memory_feasible(VariantId(3), S::S1g));
  EXPECT_FALSE(t.memory_feasible(VariantId(3), S::S2g));
  EXPECT_TRUE(t.memory_feasible(VariantId(3), S::S3g));
  EXPECT_FALSE(t.has_service(VariantId(3), S::S1g));
}

TEST(Profiles, MemoryFeasibleExamples) {
  nlohmann::json doc = {
      {"variants", {{{"id", 1}, {"accuracy", 0.7}, {"memory_gb", 4.0}}, {{"id", 2}, {"accuracy", 0.8}, {"memory_gb", 12.0}}}},
      {"latency", nlohmann::json::array()},
      {"energy", nlohmann::json::array()}};
  for (auto s : kAllSlices) {
    doc["latency"].push_back({{"variant", 1}, {"slice", std::string(slice_name(s))}, {"mean_service_ms", 10}});
    doc["energy"].push_back({{"variant", 1}, {"slice", std::string(slice_name(s))}, {"wh_per_request", 0.0}});
  }
  for (std::string s : {"7g", "4g", "3g"}) {
    doc["latency"].push_back({{"variant", 2}, {"slice", s}, {"mean_service_ms", 20}});
    doc["energy"].push_back({{"variant", 2}, {"slice", s}, {"wh_per_request", 0.0}});
  }
  const auto t = ProfileTable::from_json(doc);
  EXPECT_TRUE(memory_feasible(VariantId(1), S::S1g, t));
  EXPECT_FALSE(memory_feasible(VariantId(2), S::S2g, t));
  EXPECT_TRUE(memory_feasible(VariantId(2), S::S3g, t));
}

TEST(Profiles, SliceMemoryOverride) {
  auto doc = three_variant_doc();
  doc["variants"][2]["memory_gb"] = 6.0;
  doc["slices"] = nlohmann::json::array({{{"slice", "1g"}, {"memory_gb", 6.0}}});
  const auto t = ProfileTable::from_json(doc);
  EXPECT_TRUE(t.memory_feasible(VariantId(3), S::S1g));
  EXPECT_EQ(t.topology().slice_memory(S::S1g), 6.0);
}

TEST(Profiles, LognormalNeedsSigma) {
  auto doc = three_variant_doc();
  doc["latency"][0]["dist"] = "lognormal";
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);
  doc["latency"][0]["sigma"] = 0.3;
  EXPECT_NO_THROW(ProfileTable::from_json(doc));
  doc["latency"][0]["dist"] = "weibull";
  EXPECT_THROW(ProfileTable::from_json(doc), ProfileError);
}

TEST(Profiles, JsonRoundTrip) {
  const auto t = ProfileTable::load(test_support::data_path("profiles/default.json"));
  const auto again = ProfileTable::from_json(nlohmann::json::parse(t.to_json().dump()));
  EXPECT_EQ(t.to_json().dump(), again.to_json().dump());
}

TEST(Profiles, ShippedTablesLoad) {
  const auto d = load_profiles(test_support::data_path("profiles/default.json"));
  EXPECT_EQ(d.variant_count(), 4);
  const auto s = load_profiles(test_support::data_path("profiles/small3.json"));
  EXPECT_EQ(s.variant_count(), 3);
  EXPECT_THROW(load_profiles(test_support::data_path("profiles/missing.json")), ProfileError);
}
