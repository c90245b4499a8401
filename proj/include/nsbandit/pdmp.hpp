#pragma once

// The limit process of the normalized bandit: a piecewise deterministic
// Markov process on (0, inf) with generator
//   L f(x) = (a - b x) f'(x) + c x (f(x + g) - f(x)).
// Between jumps the state follows the flow phi(x, t) = a/b + (x - a/b) e^{-bt};
// jumps of size +g arrive at rate c x. Paths are simulated exactly by
// inverting the integrated intensity along the flow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nsbandit/error.hpp"
#include "nsbandit/rng.hpp"

namespace nsb {

struct PdmpParams {
  double a = 0.2, b = 0.8, c = 0.2, g = 0.1;

  /// Spectral gap b - c g; the process is ergodic iff it is positive.
  double pi() const noexcept { return b - c * g; }
  double fixed_point() const noexcept { return a / b; }
  bool ergodic() const noexcept { return pi() > 0.0; }

  void validate() const {
    require(a > 0.0 && b > 0.0 && c > 0.0 && g > 0.0, "pdmp: a, b, c, g must be positive");
  }
  void require_ergodic(const char* what) const {
    validate();
    require(ergodic(), std::string(what) + ": requires b - c g > 0");
  }
};

inline double flow(const PdmpParams& p, double x, double t) noexcept {
  const double m = p.a / p.b;
  return m + (x - m) * std::exp(-p.b * t);
}

/// Lambda(t) = int_0^t c phi(x, s) ds.
inline double integrated_intensity(const PdmpParams& p, double x, double t) noexcept {
  const double m = p.a / p.b;
  return p.c * (m * t + (x - m) * (-std::expm1(-p.b * t)) / p.b);
}

/// int_0^t phi(x, s) ds and int_0^t phi(x, s)^2 ds, for exact time averages.
inline double flow_integral(const PdmpParams& p, double x, double t) noexcept {
  return integrated_intensity(p, x, t) / p.c;
}
inline double flow_square_integral(const PdmpParams& p, double x, double t) noexcept {
  const double m = p.a / p.b, d = x - m;
  return m * m * t + 2.0 * m * d * (-std::expm1(-p.b * t)) / p.b +
         d * d * (-std::expm1(-2.0 * p.b * t)) / (2.0 * p.b);
}

/// Solves Lambda(T) = e. Lambda' = c phi lies between c min(x, a/b) and
/// c max(x, a/b), which brackets the root; Newton from the lower end with a
/// bisection fallback.
inline double next_jump_time(const PdmpParams& p, double x, double e) {
  require(x > 0.0, "next_jump_time: state must be positive");
  require(e > 0.0, "next_jump_time: exponential draw must be positive");
  const double m = p.a / p.b;
  double lo = e / (p.c * std::max(x, m));
  double hi = e / (p.c * std::min(x, m));
  double t = lo;
  const double tol = 1e-12;
  for (int it = 0; it < 200; ++it) {
    const double f = integrated_intensity(p, x, t) - e;
    if (std::abs(f) <= tol * std::max(1.0, e)) return t;
    if (f < 0.0) lo = t; else hi = t;
    if (hi - lo <= tol * std::max(1.0, t)) return 0.5 * (lo + hi);
    double next = t - f / (p.c * flow(p, x, t));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  throw InvariantError("next_jump_time: root finder did not converge");
}

struct PdmpEvent {
  double t;
  double x_before;
  double x_after;
};

/// Event list of an exact path on [0, horizon].
struct PdmpPath {
  PdmpParams params;
  double x0 = 1.0;
  double horizon = 0.0;
  std::vector<PdmpEvent> events;

  double state_at(double t) const {
    require(t >= 0.0 && t <= horizon, "PdmpPath::state_at: time outside the path");
    const auto it = std::upper_bound(events.begin(), events.end(), t,
                                     [](double v, const PdmpEvent& e) { return v < e.t; });
    if (it == events.begin()) return flow(params, x0, t);
    const auto& last = *(it - 1);
    return flow(params, last.x_after, t - last.t);
  }
};

inline PdmpPath simulate(const PdmpParams& p, double x0, double horizon, Rng& rng) {
  p.validate();
  require(x0 > 0.0, "simulate: x0 must be positive");
  require(horizon >= 0.0, "simulate: horizon must be non-negative");
  PdmpPath path{p, x0, horizon, {}};
  double t = 0.0, x = x0;
  for (;;) {
    const double tau = next_jump_time(p, x, rng.exponential());
    if (t + tau > horizon) break;
    t += tau;
    const double before = flow(p, x, tau);
    x = before + p.g;
    path.events.push_back({t, before, x});
  }
  return path;
}

/// States at the given non-decreasing times, without storing the path. The
/// jump clock is redrawn at each sampling time, which is exact because the
/// residual integrated intensity is again unit exponential (memorylessness).
inline void sample_at_times(const PdmpParams& p, double x0, std::span<const double> times, Rng& rng,
                            std::span<double> out) {
  require(times.size() == out.size(), "sample_at_times: size mismatch");
  double t = 0.0, x = x0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= t, "sample_at_times: times must be non-decreasing");
    for (;;) {
      const double tau = next_jump_time(p, x, rng.exponential());
      if (t + tau > times[i]) {
        x = flow(p, x, times[i] - t);
        t = times[i];
        break;
      }
      x = flow(p, x, tau) + p.g;
      t += tau;
    }
    out[i] = x;
  }
}

/// Long-run time averages of X and X^2 over [burn_in, burn_in + length],
/// integrated exactly along flow segments.
struct TimeAverage {
  double mean = 0.0;
  double second = 0.0;
};

inline TimeAverage time_average(const PdmpParams& p, double x0, double burn_in, double length,
                                Rng& rng) {
  require(length > 0.0, "time_average: length must be positive");
  double t = 0.0, x = x0;
  const double t_end = burn_in + length;
  double s1 = 0.0, s2 = 0.0;
  while (t < t_end) {
    const double tau = next_jump_time(p, x, rng.exponential());
    const double seg_end = std::min(t + tau, t_end);
    if (seg_end > burn_in) {
      const double start = std::max(t, burn_in);
      const double xs = flow(p, x, start - t);
      s1 += flow_integral(p, xs, seg_end - start);
      s2 += flow_square_integral(p, xs, seg_end - start);
    }
    if (t + tau >= t_end) break;
    x = flow(p, x, tau) + p.g;
    t += tau;
  }
  return {s1 / length, s2 / length};
}

inline double mean_closed_form(const PdmpParams& p, double m0, double t) {
  p.require_ergodic("mean_closed_form");
  const double s = p.a / p.pi();
  return s + (m0 - s) * std::exp(-p.pi() * t);
}

/// Stationary moments alpha_1..alpha_order from the equilibrium of the moment
/// system: k pi alpha_k = k a alpha_{k-1} + c sum_{j<=k-2} C(k,j) g^{k-j} alpha_{j+1}.
inline std::vector<double> stationary_moments(const PdmpParams& p, int order) {
  p.require_ergodic("stationary_moments");
  require(order >= 1, "stationary_moments: order must be >= 1");
  std::vector<double> al(order + 1, 0.0);
  al[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    double rhs = k * p.a * al[k - 1];
    double binom = 1.0;  // C(k, j)
    for (int j = 0; j <= k - 2; ++j) {
      rhs += p.c * binom * std::pow(p.g, k - j) * al[j + 1];
      binom = binom * (k - j) / (j + 1);
    }
    al[k] = rhs / (k * p.pi());
  }
  return {al.begin() + 1, al.end()};
}

/// Moment curves alpha_k(t), k = 1..order, at each time of t_grid (increasing,
/// non-negative), by classical RK4 with steps of at most 1e-3.
struct MomentCurves {
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[i][k-1] = alpha_k(times[i])
};

inline MomentCurves moment_ode(const PdmpParams& p, int order, std::span<const double> initial,
                               std::span<const double> t_grid, double max_step = 1e-3) {
  p.require_ergodic("moment_ode");
  require(order >= 1, "moment_ode: order must be >= 1");
  require(initial.size() >= static_cast<std::size_t>(order), "moment_ode: need alpha_1..alpha_p at 0");
  const auto k_max = static_cast<std::size_t>(order);
  // Coefficients of the linear system alpha' = A alpha + f (f from alpha_0 = 1).
  std::vector<std::vector<double>> coef(k_max + 1, std::vector<double>(k_max + 1, 0.0));
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double kd = static_cast<double>(k);
    coef[k][k] = -kd * p.pi();
    coef[k][k - 1] += kd * p.a;
    double binom = 1.0;
    for (std::size_t j = 0; j + 2 <= k; ++j) {
      coef[k][j + 1] += p.c * binom * std::pow(p.g, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  auto deriv = [&](const std::vector<double>& al, std::vector<double>& out) {
    out[0] = 0.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j <= k; ++j) s += coef[k][j] * al[j];
      out[k] = s;
    }
  };
  std::vector<double> al(k_max + 1), k1(k_max + 1), k2(k_max + 1), k3(k_max + 1), k4(k_max + 1),
      tmp(k_max + 1);
  al[0] = 1.0;
  for (std::size_t k = 1; k <= k_max; ++k) al[k] = initial[k - 1];
  MomentCurves mc;
  double t = 0.0;
  for (double target : t_grid) {
    require(target >= t, "moment_ode: time grid must be increasing and non-negative");
    const auto steps = static_cast<std::uint64_t>(std::ceil((target - t) / max_step - 1e-9));
    const double h = steps > 0 ? (target - t) / static_cast<double>(steps) : 0.0;
    for (std::uint64_t s = 0; s < steps; ++s) {
      deriv(al, k1);
      for (std::size_t k = 0; k <= k_max; ++k) tmp[k] = al[k] + 0.5 * h * k1[k];
      deriv(tmp, k2);
      for (std::size_t k = 0; k <= k_max; ++k) tmp[k] = al[k] + 0.5 * h * k2[k];
      deriv(tmp, k3);
      for (std::size_t k = 0; k <= k_max; ++k) tmp[k] = al[k] + h * k3[k];
      deriv(tmp, k4);
      for (std::size_t k = 1; k <= k_max; ++k) {
        al[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      }
    }
    t = target;
    mc.times.push_back(t);
    mc.values.emplace_back(al.begin() + 1, al.end());
  }
  return mc;
}

/// Limit-process constants for coordinate i of the d-armed bandit normalized
/// by rho_n: a = (1 - sigma p_1)/(d - 1), b = p_1, g = gamma1/rho1, c = p_i/g.
/// Arm 0 is the best arm.
inline PdmpParams from_bandit(std::span<const double> probs, double gamma1, double rho1,
                              double sigma, std::size_t i) {
  const std::size_t d = probs.size();
  require(d >= 2, "from_bandit: need d >= 2");
  require(i >= 1 && i < d, "from_bandit: arm index must be a sub-optimal arm");
  require(probs[0] > probs[i], "from_bandit: requires p_1 > p_i");
  require(probs[i] > 0.0, "from_bandit: p_i = 0 leaves no jumps (c = 0)");
  require(gamma1 > 0.0 && gamma1 <= 1.0, "from_bandit: gamma1 must lie in (0,1]");
  require(rho1 > 0.0 && rho1 < 1.0, "from_bandit: rho1 must lie in (0,1)");
  require(sigma >= 0.0 && sigma <= 1.0, "from_bandit: sigma must lie in [0,1]");
  PdmpParams p;
  p.a = (1.0 - sigma * probs[0]) / static_cast<double>(d - 1);
  p.b = probs[0];
  p.g = gamma1 / rho1;
  p.c = probs[i] / p.g;
  return p;
}

/// d-1 independent coordinates; coordinate i uses stream (seed, i), so it
/// coincides with a standalone simulate() on that stream.
inline std::vector<PdmpPath> simulate_multi(std::span<const PdmpParams> params,
                                            std::span<const double> y0, double horizon,
                                            std::uint64_t seed) {
  require(params.size() == y0.size() && !params.empty(), "simulate_multi: size mismatch");
  for (const auto& p : params) p.require_ergodic("simulate_multi");
  std::vector<PdmpPath> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Rng rng = make_stream(seed, {i});
    out.push_back(simulate(params[i], y0[i], horizon, rng));
  }
  return out;
}

}  // namespace nsb
