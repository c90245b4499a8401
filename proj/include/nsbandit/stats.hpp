#pragma once

// Small statistics toolkit for Monte-Carlo estimates: running moments,
// standard errors, weighted log-linear regression, the one-dimensional
// Wasserstein distance between empirical laws and the two-sample
// Kolmogorov-Smirnov test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "nsbandit/error.hpp"

namespace nsb {

/// Welford accumulator. Merging is exact up to rounding; callers that need
/// bit-reproducible results reduce in a fixed order.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const RunningStats& o) noexcept {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const noexcept { return std::sqrt(variance()); }
  double stderr_mean() const noexcept {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

inline Estimate estimate_mean(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.add(x);
  return {s.mean(), s.stderr_mean(), s.count()};
}

/// Wilson score interval for a binomial proportion.
struct Proportion {
  double value = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  double stderr_ = 0.0;
};

inline Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96) {
  require(trials > 0, "wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half),
          std::sqrt(p * (1.0 - p) / n)};
}

/// Weighted least squares fit of y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

/// Weights are inverse variances of the y values. The reported standard
/// errors are the model-based ones (known variances), not residual-scaled.
inline LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> w) {
  require(x.size() == y.size() && x.size() == w.size(), "weighted_linear_fit: size mismatch");
  require(x.size() >= 2, "weighted_linear_fit: need at least two points");
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
    sxx += w[i] * x[i] * x[i];
    sxy += w[i] * x[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  require(det > 0.0, "weighted_linear_fit: degenerate design");
  LinearFit f;
  f.slope = (sw * sxy - sx * sy) / det;
  f.intercept = (sxx * sy - sx * sxy) / det;
  f.slope_se = std::sqrt(sw / det);
  f.intercept_se = std::sqrt(sxx / det);
  return f;
}

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> w(x.size(), 1.0);
  LinearFit f = weighted_linear_fit(x, y, w);
  // Residual-scaled standard errors for the unweighted case.
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / static_cast<double>(x.size() - 2);
    f.slope_se *= std::sqrt(s2);
    f.intercept_se *= std::sqrt(s2);
  }
  return f;
}

/// Exact W1 between two empirical laws with equal sample counts: the mean
/// absolute difference of the sorted samples.
inline double wasserstein1_sorted(std::vector<double> a, std::vector<double> b) {
  require(a.size() == b.size() && !a.empty(), "wasserstein1: need equal, non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  // Stephens' small-sample correction.
  return {d, kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)};
}

/// Pearson correlation of paired samples.
inline double correlation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && a.size() > 1, "correlation: size mismatch");
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace nsb
