#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace carbon_sched;

namespace {

struct Instance {
  ProfileTable profile;
  Baseline baseline;
  int gpus;
};

Instance small_instance(int gpus, double lambda = 0.5, double ci_base = 400.0) {
  auto p = load_profiles(test_support::data_path("profiles/small3.json"));
  RunInputs in;
  in.gpus = gpus;
  in.lambda = lambda;
  auto b = make_baseline(p, in, ci_base);
  return {std::move(p), std::move(b), gpus};
}

bool lex_not_worse(const EvalResult& later, const EvalResult& earlier) { return !better_than(earlier, later); }

}  // namespace

TEST(AnnealParams, Validation) {
  AnnealParams ap;
  EXPECT_NO_THROW(ap.validate());
  ap.t_floor = 0.0;
  EXPECT_THROW(ap.validate(), InvalidArgument);
  ap = AnnealParams{};
  ap.cooling_step = 0.0;
  EXPECT_THROW(ap.validate(), InvalidArgument);
  ap = AnnealParams{};
  ap.stall_limit = 0;
  EXPECT_THROW(ap.validate(), InvalidArgument);
  ap = AnnealParams{};
  ap.cooling = Cooling::Multiplicative;
  ap.cooling_step = 1.0;
  EXPECT_THROW(ap.validate(), InvalidArgument);
}

TEST(AnnealParams, CoolingClampsAtFloor) {
  AnnealParams ap;
  double t = ap.t_init;
  for (int i = 0; i < 18; ++i) t = ap.cool(t);
  EXPECT_NEAR(t, 0.1, 1e-12);
  EXPECT_EQ(ap.cool(0.1), 0.1);
  ap.cooling = Cooling::Multiplicative;
  EXPECT_NEAR(ap.cool(1.0), 0.95, 1e-12);
  EXPECT_EQ(ap.cool(0.1), 0.1);
}

TEST(Anneal, BestSequenceNeverWorsens) {
  auto inst = small_instance(2);
  Evaluator ev(inst.profile, 2, inst.baseline.workload, inst.baseline.objective);
  AnnealParams ap;
  ap.eval_cost_s = 1.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const auto start = build_graph(base_config(2, inst.profile), inst.profile);
    const auto out = anneal(start, 2, ev, CarbonIntensity(400.0), ap, rng);
    EvalResult best = out.log.front().result;
    for (const auto& e : out.log) {
      if (e.new_best) {
        ASSERT_TRUE(lex_not_worse(e.result, best));
        best = e.result;
      }
    }
    EXPECT_EQ(best.graph, out.best.graph);
  }
}

TEST(Anneal, StartingAtOptimumStopsAfterStallLimit) {
  // one GPU: the standardized space is the whole space
  auto inst = small_instance(1);
  Evaluator ev(inst.profile, 1, inst.baseline.workload, inst.baseline.objective);
  const auto oracle = oracle_search(ev, CarbonIntensity(400.0));
  AnnealParams ap;
  ap.eval_cost_s = 1.0;
  std::mt19937_64 rng(3);
  const auto out = anneal(oracle.best.graph, 1, ev, CarbonIntensity(400.0), ap, rng);
  EXPECT_LE(out.evaluations(), 6);
  EXPECT_EQ(out.best.graph, oracle.best.graph);
}

TEST(Anneal, BudgetBoundsEvaluations) {
  auto inst = small_instance(2);
  Evaluator ev(inst.profile, 2, inst.baseline.workload, inst.baseline.objective);
  AnnealParams ap;
  ap.stall_limit = 1000;
  std::mt19937_64 rng(5);
  const auto out = anneal(build_graph(base_config(2, inst.profile), inst.profile), 2, ev, CarbonIntensity(400.0), ap, rng);
  EXPECT_EQ(out.evaluations(), 7);  // 300 s budget at 45 s per evaluation
  EXPECT_DOUBLE_EQ(out.sim_time_spent_s, 315.0);
}

TEST(Anneal, DeterministicPerSeed) {
  auto inst = small_instance(2);
  Evaluator ev(inst.profile, 2, inst.baseline.workload, inst.baseline.objective);
  AnnealParams ap;
  ap.eval_cost_s = 5.0;
  const auto start = build_graph(base_config(2, inst.profile), inst.profile);
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(eval_log_csv(anneal(start, 2, ev, CarbonIntensity(300.0), ap, a).log),
            eval_log_csv(anneal(start, 2, ev, CarbonIntensity(300.0), ap, b).log));
}

TEST(Anneal, LogsOnlyLegalCandidates) {
  auto inst = small_instance(2);
  Evaluator ev(inst.profile, 2, inst.baseline.workload, inst.baseline.objective);
  AnnealParams ap;
  ap.eval_cost_s = 1.0;
  std::mt19937_64 rng(13);
  const auto start = build_graph(base_config(2, inst.profile), inst.profile);
  const auto out = anneal(start, 2, ev, CarbonIntensity(350.0), ap, rng);
  for (const auto& e : out.log) {
    EXPECT_TRUE(is_feasible_fleet(e.result.graph.slice_counts(), 2));
    EXPECT_TRUE(e.result.graph.memory_feasible(inst.profile));
  }
}

TEST(AnnealStandardized, StaysStandardized) {
  auto inst = small_instance(2);
  Evaluator ev(inst.profile, 2, inst.baseline.workload, inst.baseline.objective);
  AnnealParams ap;
  ap.eval_cost_s = 1.0;
  std::mt19937_64 rng(4);
  const auto out = anneal_standardized_multistart(standardized_starts(inst.profile), ev, CarbonIntensity(400.0), ap, rng);
  for (const auto& e : out.log) {
    for (int w : e.result.graph.raw_weights()) ASSERT_EQ(w % 2, 0);
  }
}

TEST(AnnealStandardized, NeverBeatsOracle) {
  auto inst = small_instance(2);
  Evaluator ev(inst.profile, 2, inst.baseline.workload, inst.baseline.objective);
  for (double ci : {100.0, 400.0, 700.0}) {
    const auto oracle = oracle_search(ev, CarbonIntensity(ci));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      std::mt19937_64 rng(seed);
      AnnealParams ap;
      ap.eval_cost_s = 10.0;
      const auto out = anneal_standardized_multistart(standardized_starts(inst.profile), ev, CarbonIntensity(ci), ap, rng);
      if (out.best.admissible) {
        EXPECT_GE(oracle.best.f_value, out.best.f_value);
      }
    }
  }
}

TEST(EvalLog, CsvShape) {
  EXPECT_EQ(eval_log_csv_header(), "iter,temp,ged_from_center,f,h,p95_ms,sla_met,accepted,new_best");
  EvalLogEntry e;
  e.iter = 3;
  e.temp = 0.85;
  e.ged_from_center = 2;
  e.result.f_value = 12.5;
  e.result.h_value = -12.5;
  e.result.p95_ms = 40.0;
  e.result.sla_met = true;
  e.accepted = true;
  EXPECT_EQ(eval_log_csv_row(e), "3,0.850000,2,12.5,-12.5,40,1,1,0");
}
