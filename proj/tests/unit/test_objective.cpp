#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace carbon_sched;

namespace {

void expect_rel(double got, double want) {
  if (want == 0.0) {
    EXPECT_EQ(got, 0.0);
  } else {
    EXPECT_LE(std::abs(got - want) / std::abs(want), 1e-12) << got << " vs " << want;
  }
}

}  // namespace

TEST(DeltaAccuracy, Examples) {
  const ObjectiveParams p(0.5, 0.80, 10.0, 100.0);
  expect_rel(delta_accuracy(0.80, p), 0.0);
  expect_rel(delta_accuracy(0.76, p), -5.0);
  expect_rel(delta_accuracy(0.792, p), -1.0);
}

TEST(DeltaCarbon, Examples) {
  const ObjectiveParams p(0.5, 0.80, 10.0, 100.0);
  expect_rel(delta_carbon(6.0, CarbonIntensity(500.0), p), 70.0);
  expect_rel(delta_carbon(6.0, CarbonIntensity(100.0), p), 94.0);
  // break-even: e * ci / 1000 = c_base
  expect_rel(delta_carbon(20.0, CarbonIntensity(500.0), p), 0.0);
}

TEST(ObjectiveF, Examples) {
  expect_rel(objective_f(70.0, -3.0, 1.0), 70.0);
  expect_rel(objective_f(70.0, -3.0, 0.0), -3.0);
  expect_rel(objective_f(70.0, -3.0, 0.5), 33.5);
  EXPECT_THROW(objective_f(1.0, 1.0, 1.5), InvalidArgument);
}

TEST(ObjectiveF, AffineInLambda) {
  for (double dc : {-20.0, 0.0, 55.5}) {
    for (double da : {-7.0, 0.0, 1.25}) {
      const double f0 = objective_f(dc, da, 0.0);
      const double f1 = objective_f(dc, da, 1.0);
      for (double l = 0.0; l <= 1.0; l += 0.125) {
        EXPECT_NEAR(objective_f(dc, da, l), f0 + l * (f1 - f0), 1e-12);
      }
    }
  }
}

TEST(EnergyH, Examples) {
  expect_rel(energy_h(40.0, 90.0, 100.0), -40.0);
  expect_rel(energy_h(40.0, 100.0, 100.0), -40.0);
  expect_rel(energy_h(40.0, 200.0, 100.0), -20.0);
  expect_rel(energy_h(-10.0, 200.0, 100.0), 20.0);
  expect_rel(energy_h(-10.0, 50.0, 100.0), 10.0);
  EXPECT_THROW(energy_h(1.0, 0.0, 100.0), InvalidArgument);
}

TEST(EnergyH, StrictFormKeepsMinScaling) {
  expect_rel(energy_h(-10.0, 200.0, 100.0, true), 5.0);
  expect_rel(energy_h(40.0, 200.0, 100.0, true), -20.0);
}

TEST(EnergyH, NonDecreasingBeyondSla) {
  for (double f : {-10.0, 0.0, 40.0}) {
    double prev = energy_h(f, 100.0, 100.0);
    for (double p95 = 100.5; p95 <= 2000.0; p95 += 0.5) {
      const double h = energy_h(f, p95, 100.0);
      ASSERT_GE(h, prev) << "f=" << f << " p95=" << p95;
      prev = h;
    }
  }
}

TEST(AcceptProb, Examples) {
  EXPECT_EQ(accept_prob(-5.0, -6.0, 1.0), 1.0);
  EXPECT_EQ(accept_prob(-5.0, -5.0, 0.3), 1.0);
  expect_rel(accept_prob(0.0, 0.7, 0.7), std::exp(-1.0));
  expect_rel(accept_prob(2.0, 3.0, 0.1), std::exp(-10.0));
  EXPECT_THROW(accept_prob(0.0, 1.0, 0.0), InvalidArgument);
}
