#include <gtest/gtest.h>

#include <set>

#include "helpers.hpp"

using namespace carbon_sched;
using S = SliceType;

namespace {

SliceCounts counts(std::initializer_list<std::pair<S, int>> items) {
  SliceCounts c{};
  for (auto [s, k] : items) c[slice_index(s)] += k;
  return c;
}

// Brute force over ordered n-tuples of config ids.
bool brute_feasible(const SliceCounts& target, int n) {
  std::vector<int> ids(static_cast<std::size_t>(n), 1);
  while (true) {
    SliceCounts sum{};
    for (int id : ids) {
      auto c = MigTopology::a100().config_counts(MigConfigId(id));
      for (std::size_t i = 0; i < kSliceTypeCount; ++i) sum[i] += c[i];
    }
    if (sum == target) return true;
    std::size_t pos = 0;
    while (pos < ids.size() && ++ids[pos] > kMigConfigCount) ids[pos++] = 1;
    if (pos == ids.size()) return false;
  }
}

}  // namespace

TEST(MigTopology, NamedRows) {
  EXPECT_EQ(config_slices(MigConfigId(19)), std::vector<S>(7, S::S1g));
  EXPECT_EQ(config_slices(MigConfigId(10)), (std::vector<S>{S::S3g, S::S2g, S::S1g, S::S1g}));
  EXPECT_EQ(config_slices(MigConfigId(3)), (std::vector<S>{S::S4g, S::S2g, S::S1g}));
  EXPECT_EQ(config_slices(MigConfigId(1)), std::vector<S>{S::S7g});
}

TEST(MigTopology, RejectsOutOfRangeIds) {
  EXPECT_THROW(MigConfigId(0), InvalidConfig);
  EXPECT_THROW(MigConfigId(20), InvalidConfig);
  EXPECT_NO_THROW(MigConfigId(19));
}

TEST(MigTopology, SliceMemory) {
  EXPECT_EQ(slice_memory(S::S1g), 5.0);
  EXPECT_EQ(slice_memory(S::S2g), 10.0);
  EXPECT_EQ(slice_memory(S::S7g), 40.0);
}

TEST(MigTopology, EveryRowFitsSevenComputeUnits) {
  const auto& topo = MigTopology::a100();
  for (int id = 1; id <= kMigConfigCount; ++id) {
    const auto c = topo.config_counts(MigConfigId(id));
    EXPECT_LE(topo.compute_units(c), 7) << "config " << id;
    EXPECT_LE(total_slices(c), 7) << "config " << id;
  }
}

TEST(MigTopology, RowsAreInCanonicalOrder) {
  for (int id = 1; id <= kMigConfigCount; ++id) {
    const auto& row = config_slices(MigConfigId(id));
    for (std::size_t i = 1; i < row.size(); ++i) EXPECT_LE(slice_index(row[i - 1]), slice_index(row[i]));
  }
}

TEST(MigTopology, DistinctMultisets) {
  // rows 10, 14/16 and 17/18 repeat earlier multisets
  EXPECT_EQ(MigTopology::a100().distinct_configs().size(), 14u);
}

TEST(IsFeasibleFleet, Examples) {
  EXPECT_TRUE(is_feasible_fleet(counts({{S::S7g, 1}}), 1));
  EXPECT_TRUE(is_feasible_fleet(counts({{S::S1g, 7}}), 1));
  EXPECT_FALSE(is_feasible_fleet(counts({{S::S7g, 1}, {S::S1g, 1}}), 1));
}

TEST(IsFeasibleFleet, EmptyGpuIsNotALayout) {
  EXPECT_FALSE(is_feasible_fleet(SliceCounts{}, 1));
  EXPECT_FALSE(is_feasible_fleet(counts({{S::S7g, 1}}), 2));
}

TEST(IsFeasibleFleet, MatchesBruteForceOnSmallFleets) {
  // every multiset whose size and compute fit n GPUs
  for (int n = 1; n <= 2; ++n) {
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= 2 * n; ++b)
        for (int c = 0; c <= 2 * n; ++c)
          for (int d = 0; d <= 3 * n; ++d)
            for (int e = 0; e <= 7 * n; ++e) {
              const SliceCounts target{a, b, c, d, e};
              if (7 * a + 4 * b + 3 * c + 2 * d + e > 7 * n) continue;
              ASSERT_EQ(is_feasible_fleet(target, n), brute_feasible(target, n))
                  << a << "," << b << "," << c << "," << d << "," << e << " n=" << n;
            }
  }
}

TEST(IsFeasibleFleet, PairwiseClosure) {
  const auto& topo = MigTopology::a100();
  for (int i = 1; i <= kMigConfigCount; ++i) {
    for (int j = 1; j <= kMigConfigCount; ++j) {
      auto c = topo.config_counts(MigConfigId(i));
      const auto d = topo.config_counts(MigConfigId(j));
      for (std::size_t k = 0; k < kSliceTypeCount; ++k) c[k] += d[k];
      EXPECT_TRUE(is_feasible_fleet(c, 2)) << i << "+" << j;
    }
  }
}

TEST(IsFeasibleFleet, DecompositionSumsToTarget) {
  const auto& topo = MigTopology::a100();
  const SliceCounts target{1, 1, 2, 1, 8};  // configs 1 + 4 + 6 + 11
  const auto parts = topo.decompose(target, 4);
  ASSERT_TRUE(parts.has_value());
  SliceCounts sum{};
  for (auto id : *parts) {
    const auto c = topo.config_counts(id);
    for (std::size_t k = 0; k < kSliceTypeCount; ++k) sum[k] += c[k];
  }
  EXPECT_EQ(sum, target);
}

TEST(IsFeasibleFleet, LargeFleetStaysFast) {
  const SliceCounts target{3, 5, 7, 9, 20};
  EXPECT_EQ(is_feasible_fleet(target, 20), is_feasible_fleet(target, 20));
  EXPECT_TRUE(is_feasible_fleet(SliceCounts{0, 0, 0, 0, 70}, 10));
  EXPECT_FALSE(is_feasible_fleet(SliceCounts{0, 0, 0, 0, 71}, 10));
}

TEST(MigTopology, JsonOverrideReplacesRows) {
  const auto doc = nlohmann::json::parse(R"({"configs": [{"id": 19, "slices": ["2g", "2g", "2g", "1g"]}]})");
  const auto topo = MigTopology::from_json(doc);
  EXPECT_EQ(topo.config_slices(MigConfigId(19)), (std::vector<S>{S::S2g, S::S2g, S::S2g, S::S1g}));
  EXPECT_EQ(topo.config_slices(MigConfigId(1)), std::vector<S>{S::S7g});
}

TEST(MigTopology, JsonOverrideRejectsUnknownIdAndOversizedRows) {
  EXPECT_THROW(MigTopology::from_json(nlohmann::json::parse(R"({"configs": [{"id": 20, "slices": ["1g"]}]})")),
               InvalidConfig);
  EXPECT_ANY_THROW(MigTopology::from_json(
      nlohmann::json::parse(R"({"configs": [{"id": 2, "slices": ["7g", "1g"]}]})")));
}
