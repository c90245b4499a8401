#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nsbandit/regret.hpp"

using namespace nsb;

namespace {
const StepSchedule kOffsetSchedule{1.0, 0.25, 0.5, 0.5, 4};
const StepSchedule kSqrtSchedule{0.89, 0.89 * 0.38, 0.5, 0.5, 0};
}  // namespace

TEST(Bounds, ClosedForms) {
  EXPECT_NEAR(theoretical_bound_over_penalized(1), 43.98, 5e-3);
  EXPECT_NEAR(theoretical_bound_over_penalized(100), 439.8, 5e-2);
  EXPECT_NEAR(theoretical_bound_over_penalized(2), 62.2, 5e-3);
  EXPECT_NEAR(regret_gap_bound(1000, 2), 18.62, 5e-3);
  EXPECT_THROW(theoretical_bound_over_penalized(0), PreconditionError);
}

TEST(PseudoRegret, OccupationVanishesForEqualArms) {
  RunOptions o;
  o.reps = 50;
  for (const auto& cfg : {PolicyConfig::over_penalized(kOffsetSchedule, 0.0), PolicyConfig::exp3(),
                          PolicyConfig::klucb()}) {
    const auto c = pseudo_regret_curve(cfg, ArmEnvironment({0.4, 0.4}), 512, o, Estimator::occupation);
    for (const auto& p : c.points) {
      EXPECT_EQ(p.estimate, 0.0);
      EXPECT_EQ(p.stderr_, 0.0);
    }
  }
}

TEST(PseudoRegret, EstimatorsAgreeAndOccupationIsTighter) {
  RunOptions o;
  o.reps = 10000;
  o.seed = 5;
  o.checkpoints = {100, 1000};
  const ArmEnvironment env({0.7, 0.6});
  const auto cfg = PolicyConfig::over_penalized(kSqrtSchedule, 0.0);
  const auto mc = replicate(cfg, env, 1000, o);
  for (std::size_t i = 0; i < mc.checkpoints.size(); ++i) {
    const auto& r = mc.reward[i];
    const auto& q = mc.occupation[i];
    const double se = std::hypot(r.stderr_mean(), q.stderr_mean());
    EXPECT_LE(std::abs(r.mean() - q.mean()), 3 * se) << "n=" << mc.checkpoints[i];
    EXPECT_LT(q.stderr_mean(), r.stderr_mean());
  }
}

TEST(PseudoRegret, OccupationCurveNonDecreasing) {
  RunOptions o;
  o.reps = 200;
  for (const auto& cfg : {PolicyConfig::over_penalized(kOffsetSchedule, 0.25), PolicyConfig::penalized(kSqrtSchedule),
                          PolicyConfig::exp3(), PolicyConfig::klucb()}) {
    const auto c = pseudo_regret_curve(cfg, ArmEnvironment({0.8, 0.35}), 4096, o, Estimator::occupation);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].estimate, c.points[i - 1].estimate);
    }
  }
}

TEST(PseudoRegret, RejectsOccupationBeyondTwoArms) {
  RunOptions o;
  o.reps = 4;
  EXPECT_THROW(pseudo_regret_curve(PolicyConfig::exp3(), ArmEnvironment({0.5, 0.4, 0.3}), 10, o,
                                   Estimator::occupation),
               PreconditionError);
  EXPECT_NO_THROW(pseudo_regret_curve(PolicyConfig::exp3(), ArmEnvironment({0.5, 0.4, 0.3}), 10, o,
                                      Estimator::reward));
}

TEST(PseudoRegret, FastDecayingCrudeStepIsFallible) {
  // gamma_n = 1.5 / (n + 1): a positive fraction of runs locks onto the worse
  // arm, so the pseudo-regret grows linearly.
  const auto cfg = PolicyConfig::crude(StepSchedule{1.5, 0.0, 1.0, 1.0, 1});
  RunOptions o;
  o.reps = 400;
  o.checkpoints = {1000, 10000, 100000};
  const auto c = pseudo_regret_curve(cfg, ArmEnvironment({0.95, 0.9}), 100000, o, Estimator::occupation);
  for (const auto& p : c.points) {
    EXPECT_GT(p.estimate / static_cast<double>(p.n) - 3 * p.stderr_ / static_cast<double>(p.n), 0.01);
  }
}

TEST(TrueRegret, SingleArmIsZero) {
  RunOptions o;
  o.reps = 10;
  const auto c = true_regret_mc(PolicyConfig::exp3(), ArmEnvironment({0.3}), 100, o);
  for (const auto& p : c.points) EXPECT_EQ(p.estimate, 0.0);
}

TEST(TrueRegret, SandwichOnSeveralConfigurations) {
  RunOptions o;
  o.reps = 4000;
  o.seed = 17;
  o.checkpoints = {100, 1000};
  for (const auto& env : {ArmEnvironment({0.7, 0.6}), ArmEnvironment({0.5, 0.5}),
                          ArmEnvironment({0.9, 0.2})}) {
    for (const auto& cfg : {PolicyConfig::over_penalized(kSqrtSchedule, 0.0), PolicyConfig::klucb()}) {
      for (const auto& g : regret_gap_mc(cfg, env, 1000, o)) {
        EXPECT_GE(g.gap.value + 3 * g.gap.stderr_, 0.0);
        EXPECT_LE(g.gap.value - 3 * g.gap.stderr_, g.bound);
        EXPECT_GE(g.true_regret.value + 3 * g.true_regret.stderr_, g.pseudo_regret.value - 3 * g.pseudo_regret.stderr_);
      }
    }
  }
}

TEST(Replicate, WorkerCountDoesNotChangeResults) {
  RunOptions o;
  o.reps = 100;
  o.seed = 3;
  const auto cfg = PolicyConfig::over_penalized(kOffsetSchedule, 0.25);
  const ArmEnvironment env({0.6, 0.55});
  o.workers = 1;
  const auto a = replicate(cfg, env, 2048, o);
  o.workers = 4;
  const auto b = replicate(cfg, env, 2048, o);
  for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
    EXPECT_EQ(a.occupation[i].mean(), b.occupation[i].mean());
    EXPECT_EQ(a.reward[i].variance(), b.reward[i].variance());
  }
}

TEST(Grid, TriangleAndRefinement) {
  GridSpec g;
  EXPECT_EQ(g.points().size(), 210u);
  for (auto [p1, p2] : g.points()) {
    EXPECT_LT(p2, p1);
    EXPECT_GE(p2, 0.0);
    EXPECT_LE(p1, 1.0);
  }
  g.fine_gaps = {0.01, 0.02, 0.05};
  g.fine_p1_min = 0.9;
  // p1 in {0.9, 0.95, 1.0}; gap 0.05 is already on the grid.
  EXPECT_EQ(g.points().size(), 216u);
  EXPECT_THROW((GridSpec{0.0, {}, 0.5}.points()), PreconditionError);
  EXPECT_THROW((GridSpec{0.3, {}, 0.5}.points()), PreconditionError);
}

TEST(Sweep, SupDominatesEveryPoint) {
  SweepOptions o;
  o.reps = 40;
  const auto r = sup_sweep(PolicyConfig::over_penalized(kOffsetSchedule, 0.0), GridSpec{0.25, {}, 0.5}, 512, o);
  ASSERT_EQ(r.screening.size(), 10u);
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    EXPECT_GE(r.sup_value[i], 0.0);
    bool attained = false;
    for (const auto& c : r.screening) {
      EXPECT_GE(r.sup_value[i], c.value[i]);
      attained |= c.value[i] == r.sup_value[i] && c.p1 == r.argmax_p1[i] && c.p2 == r.argmax_p2[i];
    }
    EXPECT_TRUE(attained);
  }
}

TEST(Sweep, RefinementUsesFreshStreamsOnTopPoints) {
  SweepOptions o;
  o.reps = 40;
  o.refine_top_k = 2;
  o.refine_reps = 80;
  const auto r = sup_sweep(PolicyConfig::over_penalized(kOffsetSchedule, 0.0), GridSpec{0.25, {}, 0.5}, 256, o);
  EXPECT_TRUE(r.refined_stage);
  EXPECT_LE(r.refined.size(), 2 * r.checkpoints.size());
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    bool found = false;
    for (const auto& c : r.refined) found |= c.value[i] == r.sup_value[i];
    EXPECT_TRUE(found);
  }
}
