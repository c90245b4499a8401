#include <gtest/gtest.h>

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "nsbandit/pdmp.hpp"
#include "nsbandit/stats.hpp"

using namespace nsb;
using boost::multiprecision::cpp_rational;

namespace {

const PdmpParams kFig3{0.2, 0.8, 0.2, 0.1};

// First jump time by thinning against the constant bound c max(x, a/b).
double thinning_first_jump(const PdmpParams& p, double x, Rng& rng) {
  const double lmax = p.c * std::max(x, p.a / p.b);
  double t = 0.0;
  for (;;) {
    t += rng.exponential() / lmax;
    if (rng.uniform() * lmax < p.c * flow(p, x, t)) return t;
  }
}

}  // namespace

TEST(Flow, Examples) {
  EXPECT_EQ(flow(kFig3, 1.3, 0.0), 1.3);
  for (double t : {0.0, 0.5, 7.0, 100.0}) EXPECT_DOUBLE_EQ(flow(kFig3, 0.25, t), 0.25);
  EXPECT_NEAR(flow(kFig3, 1.0, std::log(2.0) / 0.8), 0.625, 1e-15);
}

TEST(Flow, OdeResidual) {
  Rng r(4);
  for (int i = 0; i < 1000; ++i) {
    const double x = 3 * r.uniform_open(), t = 10 * r.uniform();
    const double h = 1e-5;
    const double d = (flow(kFig3, x, t + h) - flow(kFig3, x, t - h)) / (2 * h);
    EXPECT_LT(std::abs(d - (kFig3.a - kFig3.b * flow(kFig3, x, t))), 1e-10);
  }
}

TEST(JumpTime, ConstantRateAndRootProperty) {
  EXPECT_NEAR(next_jump_time(kFig3, 0.25, 1.0), 20.0, 1e-10);
  Rng r(9);
  for (int i = 0; i < 100000; ++i) {
    const PdmpParams p{0.05 + r.uniform(), 0.05 + r.uniform(), 0.01 + r.uniform(), 0.01 + r.uniform()};
    const double x = 1e-3 + 10 * r.uniform();
    EXPECT_EQ(integrated_intensity(p, x, 0.0), 0.0);
    const double e = r.exponential();
    const double t = next_jump_time(p, x, e);
    ASSERT_GT(t, 0.0);
    ASSERT_NEAR(integrated_intensity(p, x, t), e, 1e-11 * std::max(1.0, e));
  }
  EXPECT_THROW(next_jump_time(kFig3, 0.0, 1.0), PreconditionError);
}

TEST(JumpTime, MatchesThinningOracle) {
  for (double x : {1.0, 0.05, 0.25}) {
    Rng r1(10), r2(11);
    std::vector<double> exact(20000), thin(20000);
    for (auto& v : exact) v = next_jump_time(kFig3, x, r1.exponential());
    for (auto& v : thin) v = thinning_first_jump(kFig3, x, r2);
    EXPECT_GT(ks_two_sample(exact, thin).p_value, 1e-3) << "x=" << x;
  }
  // The specific root from the examples: 0.2[0.25T + 0.75(1-e^{-0.8T})/0.8] = 0.1.
  const double t = next_jump_time(kFig3, 1.0, 0.1);
  EXPECT_NEAR(0.2 * (0.25 * t + 0.75 * (1 - std::exp(-0.8 * t)) / 0.8), 0.1, 1e-12);
}

TEST(Simulate, PathStructure) {
  Rng r(12);
  const auto path = simulate(kFig3, 1.0, 2000.0, r);
  ASSERT_FALSE(path.events.empty());
  double prev = 0.0;
  bool above = path.x0 > kFig3.fixed_point();
  for (const auto& e : path.events) {
    EXPECT_GT(e.t, prev);
    prev = e.t;
    EXPECT_EQ(e.x_after, e.x_before + kFig3.g);
    EXPECT_GT(e.x_before, 0.0);
    if (above) {
      EXPECT_GE(e.x_before, kFig3.fixed_point());
    }
    above = above || e.x_after > kFig3.fixed_point();
  }
  for (double t = 0; t <= 2000.0; t += 0.37) {
    const double x = path.state_at(t);
    EXPECT_GT(x, 0.0);
    EXPECT_GE(x, kFig3.fixed_point());
  }
}

TEST(Simulate, VanishingIntensityMeansNoJumps) {
  Rng r(13);
  const auto path = simulate(PdmpParams{0.2, 0.8, 1e-12, 0.1}, 1.0, 50.0, r);
  EXPECT_TRUE(path.events.empty());
  EXPECT_NEAR(path.state_at(50.0), flow(kFig3, 1.0, 50.0), 1e-15);
}

TEST(Simulate, LongRunTimeAverageIsStationaryMean) {
  // Batch means over one long path of length 10^6.
  Rng r(14);
  RunningStats batches;
  double x = 1.0;
  const double len = 1e4;
  PdmpParams p = kFig3;
  Rng warm(15);
  for (int b = 0; b < 100; ++b) {
    Rng rb = make_stream(16, {static_cast<std::uint64_t>(b)});
    batches.add(time_average(p, x, 0.0, len, rb).mean);
    std::vector<double> ts{len}, out(1);
    Rng rc = make_stream(17, {static_cast<std::uint64_t>(b)});
    sample_at_times(p, x, ts, rc, out);
    x = out[0];
  }
  EXPECT_NEAR(batches.mean(), p.a / p.pi(), 3 * batches.stderr_mean() + 1e-4);
  (void)r;
  (void)warm;
}

TEST(Mean, ClosedFormExamples) {
  EXPECT_NEAR(mean_closed_form(kFig3, 1.0, 1.0), 0.59728, 5e-6);
  const double s = kFig3.a / kFig3.pi();
  for (double t : {0.0, 1.0, 50.0}) EXPECT_DOUBLE_EQ(mean_closed_form(kFig3, s, t), s);
  EXPECT_NEAR(mean_closed_form(kFig3, 1.0, 1e3), s, 1e-15);
  EXPECT_THROW(mean_closed_form(PdmpParams{0.2, 0.8, 2.0, 0.5}, 1.0, 1.0), PreconditionError);
}

TEST(Mean, MonteCarloMatchesClosedForm) {
  const std::vector<double> ts{0.5, 1.0, 2.0, 5.0};
  std::vector<RunningStats> st(ts.size());
  std::vector<double> out(ts.size());
  for (std::uint64_t i = 0; i < 100000; ++i) {
    Rng r = make_stream(21, {i});
    sample_at_times(kFig3, 1.0, ts, r, out);
    for (std::size_t k = 0; k < ts.size(); ++k) st[k].add(out[k]);
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    EXPECT_NEAR(st[k].mean(), mean_closed_form(kFig3, 1.0, ts[k]), 3 * st[k].stderr_mean());
  }
}

TEST(SampleAtTimes, AgreesInLawWithStoredPath) {
  std::vector<double> a, b;
  const std::vector<double> ts{0.7, 3.0};
  std::vector<double> out(2);
  for (std::uint64_t i = 0; i < 20000; ++i) {
    Rng r1 = make_stream(30, {i});
    sample_at_times(PdmpParams{1, 0.8, 0.5, 1}, 2.0, ts, r1, out);
    a.push_back(out[1]);
    Rng r2 = make_stream(31, {i});
    b.push_back(simulate(PdmpParams{1, 0.8, 0.5, 1}, 2.0, 3.0, r2).state_at(3.0));
  }
  EXPECT_GT(ks_two_sample(a, b).p_value, 1e-3);
}

TEST(Moments, OdeFirstMomentMatchesClosedForm) {
  const std::vector<double> init{1.0};
  std::vector<double> ts;
  for (double t = 0.25; t <= 10.0; t += 0.25) ts.push_back(t);
  const auto mc = moment_ode(kFig3, 1, init, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_NEAR(mc.values[i][0], mean_closed_form(kFig3, 1.0, ts[i]), 1e-8);
  }
  EXPECT_THROW(moment_ode(kFig3, 0, init, ts), PreconditionError);
}

TEST(Moments, StationarySecondMoment) {
  const auto st = stationary_moments(kFig3, 2);
  EXPECT_NEAR(st[1], 0.066075, 5e-7);
  EXPECT_NEAR(st[1], (2 * 0.2 + 0.2 * 0.01) * (0.2 / 0.78) / (2 * 0.78), 1e-15);
  const std::vector<double> init{1.0, 1.0, 1.0};
  const std::vector<double> ts{60.0};
  const auto mc = moment_ode(kFig3, 3, init, ts);
  const auto st3 = stationary_moments(kFig3, 3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(mc.values[0][k], st3[k], 1e-10);
}

// Independent re-derivation: apply the generator to x^k with exact rational
// arithmetic, expand (x+g)^k, and solve E[L x^k] = 0 for the stationary moments.
TEST(Moments, StationaryMomentsMatchExactRationalDerivation) {
  const std::vector<std::array<int, 8>> cases{
      {1, 5, 4, 5, 1, 5, 1, 10}, {1, 1, 4, 5, 1, 2, 1, 1}, {3, 7, 9, 10, 1, 3, 1, 2}};
  for (const auto& cs : cases) {
    const cpp_rational a(cs[0], cs[1]), b(cs[2], cs[3]), c(cs[4], cs[5]), g(cs[6], cs[7]);
    const int order = 5;
    // L x^k = k a x^{k-1} - k b x^k + c x [(x+g)^k - x^k]
    std::vector<cpp_rational> mom(order + 1);
    mom[0] = 1;
    for (int k = 1; k <= order; ++k) {
      std::vector<cpp_rational> poly(k + 2, cpp_rational(0));
      poly[k - 1] += a * k;
      poly[k] -= b * k;
      // c x (x+g)^k - c x^{k+1}
      cpp_rational binom = 1;
      for (int j = 0; j <= k; ++j) {
        cpp_rational gp = 1;
        for (int e = 0; e < k - j; ++e) gp *= g;
        poly[j + 1] += c * binom * gp;
        binom = binom * (k - j) / (j + 1);
      }
      poly[k + 1] -= c;
      // sum_i poly[i] m_i = 0 with m_{k+1} coefficient zero; solve for m_k.
      EXPECT_EQ(poly[k + 1], 0);
      cpp_rational rest = 0;
      for (int i = 0; i < k; ++i) rest += poly[i] * mom[i];
      mom[k] = -rest / poly[k];
    }
    const PdmpParams p{static_cast<double>(a), static_cast<double>(b), static_cast<double>(c),
                       static_cast<double>(g)};
    const auto st = stationary_moments(p, order);
    for (int k = 1; k <= order; ++k) {
      EXPECT_NEAR(st[k - 1], static_cast<double>(mom[k]), 1e-12 * static_cast<double>(mom[k]));
    }
  }
}

TEST(Moments, MonteCarloSecondMomentAtFive) {
  const std::vector<double> ts{5.0};
  RunningStats s2;
  std::vector<double> out(1);
  for (std::uint64_t i = 0; i < 100000; ++i) {
    Rng r = make_stream(41, {i});
    sample_at_times(kFig3, 1.0, ts, r, out);
    s2.add(out[0] * out[0]);
  }
  const std::vector<double> init{1.0, 1.0};
  const auto ode = moment_ode(kFig3, 2, init, ts);
  EXPECT_NEAR(s2.mean(), ode.values[0][1], 3 * s2.stderr_mean());
}

TEST(Moments, BoundedByStationaryScale) {
  const double x0 = 1.5;
  const auto st = stationary_moments(kFig3, 3);
  const std::vector<double> ts{0.5, 2.0, 8.0, 20.0};
  std::vector<std::vector<RunningStats>> m(3, std::vector<RunningStats>(ts.size()));
  std::vector<double> out(ts.size());
  for (std::uint64_t i = 0; i < 20000; ++i) {
    Rng r = make_stream(42, {i});
    sample_at_times(kFig3, x0, ts, r, out);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      for (int p = 1; p <= 3; ++p) m[p - 1][k].add(std::pow(out[k], p));
    }
  }
  for (int p = 1; p <= 3; ++p) {
    const double bound = 2.0 * std::max(1.0, st[p - 1]) * (1.0 + std::pow(x0, p));
    for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_LT(m[p - 1][k].mean(), bound);
  }
}

TEST(FromBandit, Mapping) {
  const std::vector<double> p{0.8, 0.5};
  const auto q = from_bandit(p, 0.3, 0.3, 0.0, 1);
  EXPECT_DOUBLE_EQ(q.a, 1.0);
  EXPECT_DOUBLE_EQ(q.b, 0.8);
  EXPECT_DOUBLE_EQ(q.c, 0.5);
  EXPECT_DOUBLE_EQ(q.g, 1.0);
  EXPECT_NEAR(q.pi(), 0.3, 1e-15);
  const auto pen = from_bandit(p, 0.6, 0.2, 1.0, 1);
  EXPECT_NEAR(pen.a, 0.2, 1e-15);
  EXPECT_THROW(from_bandit(std::vector<double>{0.5, 0.5}, 0.5, 0.5, 0.0, 1), PreconditionError);
  Rng r(50);
  for (int i = 0; i < 10000; ++i) {
    const std::size_t d = 2 + static_cast<std::size_t>(r.uniform() * 4);
    std::vector<double> pr(d);
    pr[0] = 0.5 + 0.5 * r.uniform();
    for (std::size_t j = 1; j < d; ++j) pr[j] = 0.01 + (pr[0] - 0.02) * r.uniform();
    const std::size_t arm = 1 + static_cast<std::size_t>(r.uniform() * static_cast<double>(d - 1));
    const auto pp = from_bandit(pr, 0.05 + 0.95 * r.uniform(), 0.05 + 0.9 * r.uniform(), r.uniform(), arm);
    ASSERT_NEAR(pp.pi(), pr[0] - pr[arm], 1e-14);
  }
}

TEST(SimulateMulti, CoordinatesAreStandaloneAndUncorrelated) {
  const std::vector<PdmpParams> ps{PdmpParams{0.1, 0.8, 0.5, 1.0}, PdmpParams{0.1, 0.8, 0.3, 1.0}};
  const std::vector<double> y0{0.5, 0.7};
  const auto paths = simulate_multi(ps, y0, 20.0, 77);
  for (std::size_t i = 0; i < 2; ++i) {
    Rng r = make_stream(77, {i});
    const auto solo = simulate(ps[i], y0[i], 20.0, r);
    ASSERT_EQ(solo.events.size(), paths[i].events.size());
    for (std::size_t k = 0; k < solo.events.size(); ++k) EXPECT_EQ(solo.events[k].t, paths[i].events[k].t);
  }
  std::vector<double> u, v;
  for (std::uint64_t rep = 0; rep < 20000; ++rep) {
    const auto pr = simulate_multi(ps, y0, 5.0, derive_seed(78, {rep}));
    u.push_back(pr[0].state_at(5.0));
    v.push_back(pr[1].state_at(5.0));
  }
  // Under independence the sample correlation has standard error ~ 1/sqrt(n).
  EXPECT_LT(std::abs(correlation(u, v)), 3.0 / std::sqrt(20000.0));
}
