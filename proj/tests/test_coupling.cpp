#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "nsbandit/coupling.hpp"

using namespace nsb;

namespace {

const PdmpParams kRate{1.0, 0.8, 0.5, 1.0};  // pi = 0.3
const PdmpParams kFig3{0.2, 0.8, 0.2, 0.1};

double just_below(double x, double gap) { return x - gap * (1.0 - 1e-12); }

// A path with no jump sits on an atom, but flowing through intermediate event
// times perturbs it in the last bits; snap to a grid so ties stay ties.
std::vector<double> snapped(std::vector<double> v) {
  for (double& x : v) x = std::round(x * 1e9) / 1e9;
  return v;
}

}  // namespace

TEST(Coupled, EqualStartsNeverSeparate) {
  Rng rng(1);
  const auto path = simulate_coupled(kRate, 2.5, 2.5, 50.0, rng);
  ASSERT_FALSE(path.events.empty());
  for (const auto& e : path.events) {
    EXPECT_TRUE(e.simultaneous);
    EXPECT_EQ(e.x_after, e.y_after);
  }
  const auto st = path.state_at(50.0);
  EXPECT_TRUE(st.merged);
  EXPECT_EQ(st.x, st.y);
}

TEST(Coupled, GapContractsBetweenEventsAndJumpsByG) {
  Rng rng(2);
  for (int k = 0; k < 2000; ++k) {
    const double x = 0.1 + 5 * rng.uniform(), y = 0.1 + 5 * rng.uniform();
    const auto path = simulate_coupled(kRate, x, y, 20.0, rng);
    const int sign = (x > y) - (x < y);
    double gap = x - y, t = 0.0;
    for (const auto& e : path.events) {
      const double before = e.x_before - e.y_before;
      EXPECT_NEAR(before, gap * std::exp(-kRate.b * (e.t - t)), 1e-9 * (1 + std::abs(gap)));
      const double after = e.x_after - e.y_after;
      EXPECT_NEAR(std::abs(after), std::abs(before) + (e.simultaneous ? 0.0 : kRate.g), 1e-9);
      EXPECT_EQ((after > 0) - (after < 0), sign);
      gap = after;
      t = e.t;
    }
  }
}

TEST(Coupled, MeanGapMatchesClosedForm) {
  for (const auto& p : {kRate, kFig3}) {
    const double ts[] = {1.0, 2.0, 4.0};
    W1Options opt;
    opt.reps = 100000;
    opt.seed = 11;
    const auto d = w1_decay_estimate(p, 4.0, 2.0, ts, opt);
    for (const auto& pt : d.points) {
      EXPECT_NEAR(pt.exact_gap, 2.0 * std::exp(-p.pi() * pt.t), 1e-15);
      EXPECT_LE(std::abs(pt.mean_gap - pt.exact_gap), 3 * pt.stderr_) << "t=" << pt.t;
    }
  }
}

TEST(Coupled, MarginalsMatchStandaloneProcess) {
  const double t = 2.0;
  const std::size_t n = 20000;
  std::vector<double> cx(n), cy(n), sx(n), sy(n);
  Rng a(5), b(6);
  const double times[1] = {t};
  for (std::size_t i = 0; i < n; ++i) {
    coupled_sample_at_times(kRate, 3.0, 1.0, times, a, std::span<double>(&cx[i], 1),
                            std::span<double>(&cy[i], 1));
    sample_at_times(kRate, 3.0, times, b, std::span<double>(&sx[i], 1));
    sample_at_times(kRate, 1.0, times, b, std::span<double>(&sy[i], 1));
  }
  EXPECT_GT(ks_two_sample(snapped(cx), snapped(sx)).p_value, 1e-3);
  EXPECT_GT(ks_two_sample(snapped(cy), snapped(sy)).p_value, 1e-3);
}

TEST(W1Decay, RecoversSpectralGap) {
  std::vector<double> ts;
  for (double t = 0.5; t <= 4.0; t += 0.5) ts.push_back(t);
  W1Options opt;
  opt.reps = 40000;
  opt.seed = 3;
  const auto d = w1_decay_estimate(kRate, 4.0, 2.0, ts, opt);
  EXPECT_FALSE(d.degenerate);
  EXPECT_LE(d.ci_low, 0.3);
  EXPECT_GE(d.ci_high, 0.3);
  EXPECT_NEAR(d.rate, 0.3, 0.05 * 0.3);
}

TEST(W1Decay, DegenerateAndLinearity) {
  const double ts[] = {0.5, 1.0, 2.0};
  W1Options opt;
  opt.reps = 100;
  const auto d = w1_decay_estimate(kRate, 2.0, 2.0, ts, opt);
  EXPECT_TRUE(d.degenerate);
  EXPECT_TRUE(std::isnan(d.rate));
  for (const auto& pt : d.points) EXPECT_EQ(pt.mean_gap, 0.0);
  for (double t : ts) {
    EXPECT_DOUBLE_EQ(coupled_gap_exact(kRate, 5.0, 1.0, t), 2 * coupled_gap_exact(kRate, 3.0, 1.0, t));
  }
  const double two[] = {0.5, 1.0};
  EXPECT_THROW(w1_decay_estimate(kRate, 3.0, 2.0, two, opt), PreconditionError);
  EXPECT_THROW(w1_decay_estimate(PdmpParams{1, 0.5, 1, 1}, 3.0, 2.0, ts, opt), PreconditionError);
}

TEST(Psi, Examples) {
  for (double t : {0.0, 0.3, 5.0}) EXPECT_DOUBLE_EQ(psi(t, 0.0, 0.8, 1.0), t);
  EXPECT_NEAR(psi(0.0, std::numbers::e - 1.0, 1.0, 1.0), 1.0, 1e-15);
  Rng r(8);
  for (int i = 0; i < 10000; ++i) {
    const double gap = r.uniform(), b = 0.1 + r.uniform(), g = 0.1 + r.uniform();
    const double t = 10 * r.uniform();
    const double v = psi(t, gap, b, g);
    EXPECT_LE(psi(0.0, gap, b, g), gap / (b * g) + 1e-15);
    EXPECT_GE(v, t);
    EXPECT_NEAR(psi_inverse(v, gap, b, g), t, 1e-9 * (1 + t));
    // psi(t) - t is non-increasing: psi' = 1 / (1 + (gap/g) e^{-bt}) <= 1.
    const double h = 1e-3;
    EXPECT_LE(psi(t + h, gap, b, g) - (t + h), psi(t, gap, b, g) - t + 1e-12);
    EXPECT_GT(psi(t + h, gap, b, g), v);
  }
}

TEST(StickBound, Examples) {
  const double expect = (1 - 0.09375 - std::exp(-6.25) - 0.03125) * 0.875;
  EXPECT_NEAR(stick_lower_bound(kRate, 3.0, 0.05, 10.0), expect, 1e-15);
  EXPECT_NEAR(expect, 0.7639, 5e-5);
  EXPECT_DOUBLE_EQ(stick_lower_bound(kRate, 3.0, 0.0, 4.0), 1 - std::exp(-(1 / 0.8) * 0.5 * 4.0));
  EXPECT_NEAR(stick_lower_bound(kRate, 3.0, 0.0, 1e3), 1.0, 1e-15);
  EXPECT_EQ(clamp_probability(stick_lower_bound(kRate, 50.0, 0.5, 1.0)), 0.0);
}

TEST(Stick, QuadratureMassAgreesWithFineTrapezoid) {
  const StickCoupler cp(kRate, 3.0, 2.95, 10.0);
  const double p = cp.coupling_probability();
  const int n = 400000;
  const double lo = cp.psi0(), hi = 10.0, h = (hi - lo) / n;
  double trap = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    trap += w * std::min(cp.f_y(t), cp.g_xs(t));
  }
  EXPECT_NEAR(p, trap * h, 2e-6);
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);
}

TEST(Stick, CoupledFrequencyAndMarginals) {
  const double x = 3.0, y = 2.9, s = 5.0;
  const StickCoupler cp(kRate, x, y, s);
  const double p = cp.coupling_probability();
  Rng rng(9), ref(10);
  const std::size_t n = 40000;
  std::size_t coupled = 0;
  std::vector<double> tx(n), ty(n), rx(n), ry(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = cp.draw(rng);
    coupled += d.coupled;
    tx[i] = d.t1x;
    ty[i] = d.t1y;
    rx[i] = next_jump_time(kRate, x, ref.exponential());
    ry[i] = next_jump_time(kRate, y, ref.exponential());
    if (d.coupled) {
      EXPECT_NEAR(psi(d.t1x, x - y, kRate.b, kRate.g), d.t1y, 1e-9);
    }
  }
  const auto freq = wilson_interval(coupled, n);
  EXPECT_LE(std::abs(freq.value - p), 4 * freq.stderr_);
  EXPECT_GT(ks_two_sample(tx, rx).p_value, 1e-3);
  EXPECT_GT(ks_two_sample(ty, ry).p_value, 1e-3);
}

TEST(Stick, SuccessDominatesBound) {
  for (const StickParams sp : {StickParams{2.0, 0.01, 2.0}, StickParams{3.0, 0.05, 10.0},
                               StickParams{5.0, 0.1, 5.0}}) {
    Rng rng(12);
    const std::size_t n = 10000;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = stick_attempt(kRate, sp.x0, just_below(sp.x0, sp.eps), sp, rng);
      if (o.merged()) {
        ++ok;
        EXPECT_LE(o.merge_time, sp.s);
        EXPECT_GT(o.t2x, o.merge_time);
        EXPECT_GE(o.merge_time, o.t1x);
      }
    }
    const auto f = wilson_interval(ok, n);
    EXPECT_GE(f.value, stick_lower_bound(kRate, sp.x0, sp.eps, sp.s) - 3 * f.stderr_);
  }
}

TEST(Stick, VanishingGapApproachesBoundLimit) {
  const StickParams sp{3.0, 1e-6, 4.0};
  Rng rng(13);
  const std::size_t n = 20000;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < n; ++i) ok += stick_attempt(kRate, 3.0, 3.0 - 5e-7, sp, rng).merged();
  const auto f = wilson_interval(ok, n);
  EXPECT_GE(f.value, 1 - std::exp(-(kRate.a / kRate.b) * kRate.c * sp.s) - 3 * f.stderr_);
}

TEST(Stick, RejectsPairsOutsideTheSet) {
  Rng rng(1);
  const StickParams sp{3.0, 0.05, 5.0};
  EXPECT_THROW(stick_attempt(kRate, 3.5, 3.48, sp, rng), PreconditionError);  // above x0
  EXPECT_THROW(stick_attempt(kRate, 2.0, 1.9, sp, rng), PreconditionError);   // gap > eps
  EXPECT_THROW(stick_attempt(kRate, 1.2, 1.19, sp, rng), PreconditionError);  // below a/b
  EXPECT_THROW(stick_attempt(kRate, 2.0, 2.0, sp, rng), PreconditionError);   // no gap
  EXPECT_THROW((StickParams{1.0, 0.05, 5.0}.validate(kRate)), PreconditionError);
}

TEST(Tv, TheoryRate) {
  EXPECT_NEAR(tv_theory_rate(kRate), 0.3 / 2.48, 1e-15);
}

TEST(Tv, NoTimeToStickMeansNoMerge) {
  const auto pt = tv_merge_experiment(kRate, point_mass(1.0), stationary_law(kRate, 40.0), 10.0,
                                      10.0, 20.0, 0.05, 2000, 4, 1);
  EXPECT_EQ(pt.merged, 0u);
}

TEST(Tv, MergeFractionGrowsWithT) {
  const auto mu0 = point_mass(1.0), ref = stationary_law(kRate, 40.0);
  double prev_lo = 0.0;
  for (double t : {8.0, 14.0, 24.0}) {
    const auto pt = tv_merge_experiment(kRate, mu0, ref, 6.0, t, 20.0, 0.02, 4000, 5, 1);
    EXPECT_GE(pt.fraction.hi, prev_lo) << "t=" << t;
    EXPECT_LE(pt.merged, pt.in_set);
    prev_lo = pt.fraction.lo;
  }
}
