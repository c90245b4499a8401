#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "nsbandit/parallel.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/stats.hpp"

using namespace nsb;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 10000; ++r) seen.insert(derive_seed(7, {3, r}));
  EXPECT_EQ(seen.size(), 10000u);
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
}

TEST(Rng, UniformMomentsAndRange) {
  Rng r(1);
  RunningStats s;
  for (int i = 0; i < 200000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s.add(u);
  }
  EXPECT_NEAR(s.mean(), 0.5, 4 * std::sqrt(1.0 / 12.0 / 200000));
  EXPECT_NEAR(s.variance(), 1.0 / 12.0, 2e-3);
}

TEST(Rng, ExponentialMean) {
  Rng r(2);
  RunningStats s;
  for (int i = 0; i < 200000; ++i) s.add(r.exponential());
  EXPECT_NEAR(s.mean(), 1.0, 4 * s.stderr_mean());
}

TEST(Stats, WelfordMatchesTwoPass) {
  std::vector<double> xs{1.5, 2.0, -3.0, 4.25, 0.0, 7.5};
  RunningStats a, b, all;
  for (std::size_t i = 0; i < xs.size(); ++i) (i < 2 ? a : b).add(xs[i]), all.add(xs[i]);
  a.merge(b);
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / 6.0;
  double v = 0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= 5.0;
  EXPECT_NEAR(a.mean(), m, 1e-12);
  EXPECT_NEAR(a.variance(), v, 1e-12);
  EXPECT_NEAR(all.variance(), v, 1e-12);
}

TEST(Stats, WilsonContainsPoint) {
  const auto p = wilson_interval(30, 100);
  EXPECT_DOUBLE_EQ(p.value, 0.3);
  EXPECT_LT(p.lo, 0.3);
  EXPECT_GT(p.hi, 0.3);
  const auto z = wilson_interval(0, 50);
  EXPECT_EQ(z.lo, 0.0);
  EXPECT_GT(z.hi, 0.0);
}

TEST(Stats, WeightedFitRecoversExactLine) {
  std::vector<double> x{0, 1, 2, 3}, y, w{1, 2, 3, 4};
  for (double t : x) y.push_back(1.5 - 0.3 * t);
  const auto f = weighted_linear_fit(x, y, w);
  EXPECT_NEAR(f.slope, -0.3, 1e-12);
  EXPECT_NEAR(f.intercept, 1.5, 1e-12);
}

TEST(Stats, Wasserstein1Shift) {
  std::vector<double> a{0, 1, 2, 3}, b{0.5, 1.5, 2.5, 3.5};
  EXPECT_NEAR(wasserstein1_sorted(a, b), 0.5, 1e-15);
  EXPECT_EQ(wasserstein1_sorted(a, a), 0.0);
}

TEST(Stats, KsSameLawHighPValueShiftedLow) {
  Rng r(3);
  std::vector<double> a(4000), b(4000), c(4000);
  for (auto& v : a) v = r.uniform();
  for (auto& v : b) v = r.uniform();
  for (auto& v : c) v = r.uniform() + 0.1;
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.001);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
}

TEST(Parallel, ResultsIndependentOfWorkerCount) {
  auto job = [](std::size_t i) {
    Rng r = make_stream(99, {i});
    double s = 0;
    for (int k = 0; k < 1000; ++k) s += r.uniform();
    return s;
  };
  const auto one = map_replications<double>(64, 1, job);
  const auto four = map_replications<double>(64, 4, job);
  EXPECT_EQ(one, four);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(16, 3,
                            [](std::size_t i) {
                              if (i == 5) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}
