#pragma once

// Numerical checks of the quantities that drive the regret analysis and the
// limit theorems: h_r, kappa_sigma, the drift of Y_n = (1 - X_n)/gamma_n,
// the burn-in index n0, moment bounds on Z_n^(r) = (1 - X_n)^r / gamma_n, the
// geometric-sum lemma, the almost-sure ratio limits of the multi-armed
// scheme and the weak limit towards the stationary PDMP.
//
// Two normalizations of the sub-optimal mass coexist: by gamma_n (regret
// analysis) and by rho_n (limit theorems). They differ by the constant
// rho1/gamma1 when alpha = beta; every sample carries its normalizer.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsbandit/bandit.hpp"
#include "nsbandit/error.hpp"
#include "nsbandit/parallel.hpp"
#include "nsbandit/pdmp.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/schedule.hpp"
#include "nsbandit/stats.hpp"

namespace nsb {

/// ((1+gamma)^r - 1 - r gamma) / (r gamma^2), evaluated as
/// (1/r) sum_{k=2}^r C(r,k) gamma^{k-2} to avoid cancellation.
inline double h_r(double gamma, int r) {
  require(gamma > 0.0, "h_r: gamma must be positive");
  require(r >= 1, "h_r: r must be >= 1");
  double sum = 0.0, pw = 1.0;
  double binom = 0.5 * r * (r - 1);  // C(r, 2)
  for (int k = 2; k <= r; ++k) {
    sum += binom * pw;
    pw *= gamma;
    binom = binom * (r - k) / (k + 1);
  }
  return sum / r;
}

inline double kappa_sigma(double x, double sigma, double p1, double p2) {
  require(x >= 0.0 && x <= 1.0, "kappa_sigma: x must lie in [0,1]");
  return (1.0 - sigma * p2) * (1.0 - x) * (1.0 - x) - (1.0 - sigma * p1) * x * x;
}

struct Drift {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double total() const noexcept { return phi1 + phi2; }
};

/// Drift of Y_n split into the crude part y [eps_n + pi (gamma_n y - 1)] and
/// the penalty part -(rho_{n+1}/gamma_n) kappa_sigma(1 - gamma_n y); pi = p1 - p2.
inline Drift drift_profile(std::uint64_t n, double y, const StepSchedule& s, double sigma,
                           double p1, double p2) {
  const ScheduleValues v = schedule_at(s, n);
  require(y >= 0.0 && y <= 1.0 / v.gamma, "drift_profile: y must lie in [0, 1/gamma_n]");
  const double pi = p1 - p2;
  const double x = std::clamp(1.0 - v.gamma * y, 0.0, 1.0);
  return {y * (v.eps + pi * (v.gamma * y - 1.0)),
          -(s.rho(n + 1) / v.gamma) * kappa_sigma(x, sigma, p1, p2)};
}

/// floor(1 / (4 eps^2 gamma1^2 pi^2)) + 1.
inline std::uint64_t n0(double eps, double pi, double gamma1) {
  require(eps > 0.0 && pi > 0.0 && gamma1 > 0.0, "n0: eps, pi and gamma1 must be positive");
  const double v = 1.0 / (4.0 * eps * eps * gamma1 * gamma1 * pi * pi);
  require(v < 9.0e15, "n0: value out of range");
  return static_cast<std::uint64_t>(std::floor(v)) + 1;
}

// ---------------------------------------------------------------------------
// Replicated snapshots of Pi_n

/// Pi_n at each checkpoint for every replication, stored flat as
/// [rep][checkpoint][arm].
struct Snapshots {
  std::size_t arms = 0;
  std::vector<std::uint64_t> checkpoints;
  std::size_t reps = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t k, std::size_t j) const {
    return data[(r * checkpoints.size() + k) * arms + j];
  }
};

inline Snapshots ns_snapshots(const PolicyConfig& cfg, const ArmEnvironment& env,
                              std::vector<std::uint64_t> checkpoints, std::size_t reps,
                              std::uint64_t seed, unsigned workers = 0, std::uint64_t tag = 0) {
  cfg.validate();
  env.validate();
  require(cfg.is_ns(), "ns_snapshots: needs an NS policy");
  require(env.arms() >= 2, "ns_snapshots: need d >= 2");
  require(!checkpoints.empty() && reps > 0, "ns_snapshots: need checkpoints and replications");
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  require(checkpoints.front() >= 1, "ns_snapshots: checkpoints must be >= 1");
  const std::uint64_t horizon = checkpoints.back();
  const ScheduleTable table(cfg.schedule, horizon);
  const std::size_t d = env.arms(), k_count = checkpoints.size();
  Snapshots out{d, checkpoints, reps, std::vector<double>(reps * k_count * d)};
  parallel_for(reps, workers, [&](std::size_t r) {
    Rng rng = make_stream(seed, {tag, r});
    with_policy(cfg, table, d, [&](auto& pol) {
      std::size_t next = 0;
      drive(
          pol, env, horizon, rng, [](auto&, std::size_t) {},
          [&](std::uint64_t n, std::size_t, int, auto& p) {
            if (next < k_count && n == checkpoints[next]) {
              for (std::size_t j = 0; j < d; ++j) out.data[(r * k_count + next) * d + j] = p.prob(j);
              ++next;
            }
          });
    });
  });
  return out;
}

// ---------------------------------------------------------------------------
// Moments of Z_n^(r)

enum class Normalizer { gamma, rho };

inline std::string to_string(Normalizer z) { return z == Normalizer::gamma ? "gamma_n" : "rho_n"; }

/// (1 - X_n)/norm_n samples of a two-armed run at one n.
struct NormalizedSample {
  std::uint64_t n = 0;
  Normalizer normalizer = Normalizer::rho;
  std::vector<double> values;
};

struct ZMoments {
  std::vector<std::uint64_t> ns;
  int r_max = 0;
  // mean[r-1][k] and se[r-1][k] for Z_{ns[k]}^(r)
  std::vector<std::vector<double>> mean, se;
};

/// E Z_n^(r) for r = 1..r_max at every n in ns. Z^(r+1) <= Z^(r) is checked
/// on every sample.
inline ZMoments z_moment_estimate(int r_max, std::vector<std::uint64_t> ns, const PolicyConfig& cfg,
                                  const ArmEnvironment& env, std::size_t reps, std::uint64_t seed,
                                  unsigned workers = 0) {
  require(r_max >= 1, "z_moment_estimate: r_max must be >= 1");
  require(env.arms() == 2, "z_moment_estimate: two-armed runs only");
  const Snapshots snap = ns_snapshots(cfg, env, std::move(ns), reps, seed, workers);
  ZMoments out;
  out.ns = snap.checkpoints;
  out.r_max = r_max;
  out.mean.assign(r_max, std::vector<double>(out.ns.size()));
  out.se = out.mean;
  for (std::size_t k = 0; k < out.ns.size(); ++k) {
    const double g = cfg.schedule.gamma(out.ns[k]);
    std::vector<RunningStats> st(r_max);
    for (std::size_t r = 0; r < reps; ++r) {
      const double u = 1.0 - snap.at(r, k, 0);
      double z = u / g, prev = 0.0;
      for (int q = 0; q < r_max; ++q) {
        ensure(q == 0 || z <= prev + 1e-12, "z_moment_estimate: Z^(r+1) > Z^(r)");
        st[q].add(z);
        prev = z;
        z *= u;
      }
    }
    for (int q = 0; q < r_max; ++q) {
      out.mean[q][k] = st[q].mean();
      out.se[q][k] = st[q].stderr_mean();
    }
  }
  return out;
}

struct ExponentCheck {
  int r = 1;
  std::uint64_t n0 = 0;
  double lhs = 0.0;  // max_{n >= n0} E Z_n^(r)
  double lhs_se = 0.0;
  double rhs = 0.0;
  double rhs_se = 0.0;
  double margin = 0.0;  // rhs + 3 se - lhs
  bool pass = false;
};

/// sup_{n>=n0} E Z_n^(r) <= E Z_{n0}^(r) + r/(pi (r - eps)) [rho_tilde + h_r(gamma_{n0})
///   + pi sup_{n>=n0} E Z_n^(r+1)], with the sups taken over the sampled n.
inline ExponentCheck exponent_increase_check(const ZMoments& z, int r, double eps, double pi,
                                const StepSchedule& s, std::uint64_t n_start) {
  require(r >= 1 && r + 1 <= z.r_max, "exponent_increase_check: need moments up to r + 1");
  require(eps > 0.0 && eps < r, "exponent_increase_check: eps must lie in (0, r)");
  const auto it = std::find(z.ns.begin(), z.ns.end(), n_start);
  require(it != z.ns.end(), "exponent_increase_check: n0 must be one of the sampled n");
  const std::size_t k0 = static_cast<std::size_t>(it - z.ns.begin());
  ExponentCheck c;
  c.r = r;
  c.n0 = n_start;
  std::size_t arg_l = k0, arg_u = k0;
  for (std::size_t k = k0; k < z.ns.size(); ++k) {
    if (z.mean[r - 1][k] > z.mean[r - 1][arg_l]) arg_l = k;
    if (z.mean[r][k] > z.mean[r][arg_u]) arg_u = k;
  }
  c.lhs = z.mean[r - 1][arg_l];
  c.lhs_se = z.se[r - 1][arg_l];
  const double f = r / (pi * (r - eps));
  c.rhs = z.mean[r - 1][k0] + f * (s.rho_tilde() + h_r(s.gamma(n_start), r) + pi * z.mean[r][arg_u]);
  c.rhs_se = std::hypot(z.se[r - 1][k0], f * pi * z.se[r][arg_u]);
  c.margin = c.rhs + 3.0 * std::hypot(c.lhs_se, c.rhs_se) - c.lhs;
  c.pass = c.margin >= 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Geometric-sum lemma

/// sum_{j=n_tilde}^{n-1} gamma_j prod_{l=j}^{n-1} (1 - alpha gamma_l) with
/// gamma_j = gamma1 / sqrt(j), via S_{m+1} = (1 - alpha gamma_m)(S_m + gamma_m)
/// in extended precision.
inline long double geometric_sum(double alpha, double gamma1, std::uint64_t n_tilde, std::uint64_t n) {
  require(n_tilde >= 1 && n >= n_tilde, "geometric_sum: need 1 <= n_tilde <= n");
  long double s = 0.0L;
  const long double a = alpha, g1 = gamma1;
  for (std::uint64_t m = n_tilde; m < n; ++m) {
    const long double gm = g1 / std::sqrt(static_cast<long double>(m));
    s = (1.0L - a * gm) * (s + gm);
  }
  return s;
}

struct SumLemmaCheck {
  long double lhs = 0.0L;
  double bound = 0.0;
  bool pass = false;
};

inline SumLemmaCheck sum_lemma_check(double alpha, double gamma1, std::uint64_t n_tilde,
                                     std::uint64_t n) {
  require(alpha > 0.0, "sum_lemma_check: alpha must be positive");
  require(gamma1 > 0.0 && gamma1 < 1.0, "sum_lemma_check: gamma1 must lie in (0,1)");
  require(n_tilde >= 1, "sum_lemma_check: n_tilde must be >= 1");
  require(alpha * gamma1 / std::sqrt(static_cast<double>(n_tilde)) < 1.0,
          "sum_lemma_check: needs alpha gamma_{n_tilde} < 1");
  require(static_cast<double>(n_tilde) >= 1.0 / ((alpha * gamma1) * (alpha * gamma1)),
          "sum_lemma_check: needs n_tilde >= 1/(alpha gamma1)^2");
  SumLemmaCheck c;
  c.lhs = geometric_sum(alpha, gamma1, n_tilde, n);
  c.bound = 1.0 / alpha;
  c.pass = c.lhs <= static_cast<long double>(c.bound);
  return c;
}

// ---------------------------------------------------------------------------
// Almost-sure limits of the multi-armed scheme

struct AsLimitArm {
  std::size_t arm = 0;
  double median_ratio = 0.0;  // median over replications of X_n^i / rho_n
  double target = 0.0;        // (1 - sigma p1) / ((d - 1)(p1 - p_i))
  double rel_error = 0.0;
};

struct AsLimitCheck {
  std::uint64_t n = 0;
  std::vector<AsLimitArm> arms;
  double best_arm_mass_fraction = 0.0;  // share of replications with Pi_n(best) > 0.99
};

inline double as_limit_target(std::span<const double> probs, double sigma, std::size_t i) {
  const double d = static_cast<double>(probs.size());
  return (1.0 - sigma * probs[0]) / ((d - 1.0) * (probs[0] - probs[i]));
}

inline AsLimitCheck as_limit_check(std::vector<double> probs, double sigma, const StepSchedule& s,
                                   std::uint64_t horizon, std::size_t reps, std::uint64_t seed,
                                   unsigned workers = 0) {
  require(probs.size() >= 2, "as_limit_check: need d >= 2");
  for (std::size_t i = 1; i < probs.size(); ++i) {
    require(probs[i] < probs[0], "as_limit_check: arm 0 must be strictly best");
    require(probs[i] <= probs[i - 1] || i == 1, "as_limit_check: probabilities must be non-increasing");
  }
  require(sigma > 0.0 && sigma <= 1.0, "as_limit_check: sigma must lie in (0,1]");
  require(s.beta > 0.0 && s.beta < s.alpha && s.alpha + s.beta < 1.0,
          "as_limit_check: needs 0 < beta < alpha and alpha + beta < 1");
  require(s.gamma1 > 0.0 && s.gamma1 < 1.0 && s.rho1 > 0.0 && s.rho1 < 1.0,
          "as_limit_check: gamma1 and rho1 must lie in (0,1)");
  const ArmEnvironment env(probs);
  const auto cfg = PolicyConfig::over_penalized(s, sigma);
  const Snapshots snap = ns_snapshots(cfg, env, {horizon}, reps, seed, workers);
  AsLimitCheck out;
  out.n = horizon;
  const double rho = s.rho(horizon);
  std::size_t good = 0;
  for (std::size_t r = 0; r < reps; ++r) good += snap.at(r, 0, 0) > 0.99;
  out.best_arm_mass_fraction = static_cast<double>(good) / static_cast<double>(reps);
  for (std::size_t i = 1; i < probs.size(); ++i) {
    std::vector<double> v(reps);
    for (std::size_t r = 0; r < reps; ++r) v[r] = snap.at(r, 0, i) / rho;
    std::sort(v.begin(), v.end());
    const double med = reps % 2 ? v[reps / 2] : 0.5 * (v[reps / 2 - 1] + v[reps / 2]);
    const double target = as_limit_target(probs, sigma, i);
    out.arms.push_back({i, med, target, std::abs(med - target) / target});
  }
  return out;
}

/// Share of replications with Pi_n(best) > threshold, for the a.s.
/// convergence regime beta <= alpha, alpha + beta <= 1.
inline Proportion infallibility_check(std::vector<double> probs, double sigma, const StepSchedule& s,
                                      std::uint64_t horizon, std::size_t reps, std::uint64_t seed,
                                      double threshold = 0.99, unsigned workers = 0) {
  require(s.beta > 0.0 && s.beta <= s.alpha && s.alpha + s.beta <= 1.0,
          "infallibility_check: needs 0 < beta <= alpha and alpha + beta <= 1");
  const ArmEnvironment env(probs);
  const Snapshots snap =
      ns_snapshots(PolicyConfig::over_penalized(s, sigma), env, {horizon}, reps, seed, workers);
  std::size_t good = 0;
  for (std::size_t r = 0; r < reps; ++r) good += snap.at(r, 0, 0) > threshold;
  return wilson_interval(good, reps);
}

// ---------------------------------------------------------------------------
// Weak limit

struct WeakLimitPoint {
  std::uint64_t n = 0;
  double w1 = 0.0;         // W1 between (1 - X_n)/rho_n and stationary PDMP samples
  Estimate bandit_mean;    // of (1 - X_n)/rho_n
  Estimate pdmp_mean;      // of the PDMP samples
  double stationary_mean = 0.0;  // a / pi
};

struct WeakLimitOptions {
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double burn_in = 0.0;  // 0 picks 40 / pi
};

/// (1 - X_n)/rho_n samples at each n, and as many stationary samples of the
/// limit PDMP (independent paths started at a/pi, read at burn_in).
inline std::vector<WeakLimitPoint> weak_limit_check(double p1, double p2, double gamma1, double rho1,
                                                    double sigma, std::vector<std::uint64_t> ns,
                                                    const WeakLimitOptions& opt) {
  const std::vector<double> probs{p1, p2};
  const PdmpParams lim = from_bandit(probs, gamma1, rho1, sigma, 1);
  lim.require_ergodic("weak_limit_check");
  const StepSchedule s{gamma1, rho1, 0.5, 0.5, 0};
  s.validate();
  const ArmEnvironment env(probs);
  const Snapshots snap =
      ns_snapshots(PolicyConfig::over_penalized(s, sigma), env, std::move(ns), opt.reps, opt.seed,
                   opt.workers);
  const double burn = opt.burn_in > 0.0 ? opt.burn_in : 40.0 / lim.pi();
  std::vector<double> pd(opt.reps);
  parallel_for(opt.reps, opt.workers, [&](std::size_t r) {
    Rng rng = make_stream(opt.seed, {1, r});
    const double times[1] = {burn};
    sample_at_times(lim, lim.a / lim.pi(), times, rng, std::span<double>(&pd[r], 1));
  });
  const Estimate pm = estimate_mean(pd);
  std::vector<WeakLimitPoint> out;
  for (std::size_t k = 0; k < snap.checkpoints.size(); ++k) {
    const std::uint64_t n = snap.checkpoints[k];
    NormalizedSample smp{n, Normalizer::rho, std::vector<double>(opt.reps)};
    for (std::size_t r = 0; r < opt.reps; ++r) smp.values[r] = snap.at(r, k, 1) / s.rho(n);
    WeakLimitPoint pt;
    pt.n = n;
    pt.bandit_mean = estimate_mean(smp.values);
    pt.pdmp_mean = pm;
    pt.stationary_mean = lim.a / lim.pi();
    pt.w1 = wasserstein1_sorted(smp.values, pd);
    out.push_back(pt);
  }
  return out;
}

}  // namespace nsb
