#pragma once

// Couplings of two copies of the limit process.
//
// The Wasserstein coupling runs both copies along the same flow. Events come
// at rate c max(x, y); with probability min/max both coordinates jump,
// otherwise only the larger one does. The gap therefore contracts at rate b
// between events and grows by g at single jumps, so E|X_t - Y_t| decays at
// rate pi = b - c g exactly.
//
// The stick coupling tries to make the lower path jump exactly onto the
// upper one. If X jumps first at T1x, Y must jump at psi(T1x) to land on
// X's position, where psi(t) = (1/b) ln(e^{bt} + (x - y)/g). A maximal
// coupling of Y's first jump time with psi(T1x) (restricted to [0, s])
// realizes this with the largest possible probability.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nsbandit/error.hpp"
#include "nsbandit/parallel.hpp"
#include "nsbandit/pdmp.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/stats.hpp"

namespace nsb {

// ---------------------------------------------------------------------------
// Wasserstein coupling

struct CoupledEvent {
  double t;
  double x_before, y_before;
  double x_after, y_after;
  bool simultaneous;
};

struct CoupledState {
  double x = 0.0;
  double y = 0.0;
  bool merged = false;
  double merge_time = std::numeric_limits<double>::infinity();
};

struct CoupledPath {
  PdmpParams params;
  double x0 = 0.0, y0 = 0.0;
  double horizon = 0.0;
  std::vector<CoupledEvent> events;

  CoupledState state_at(double t) const {
    require(t >= 0.0 && t <= horizon, "CoupledPath::state_at: time outside the path");
    const auto it = std::upper_bound(events.begin(), events.end(), t,
                                     [](double v, const CoupledEvent& e) { return v < e.t; });
    double x = x0, y = y0, t0 = 0.0;
    if (it != events.begin()) {
      x = (it - 1)->x_after;
      y = (it - 1)->y_after;
      t0 = (it - 1)->t;
    }
    CoupledState st{flow(params, x, t - t0), flow(params, y, t - t0)};
    if (x0 == y0) {
      st.merged = true;
      st.merge_time = 0.0;
    }
    return st;
  }
};

namespace detail {

/// One event of the coupled process from (x, y) given the exponential clock
/// e and the uniform u deciding between a joint and a single jump. Returns
/// the time to the event and updates (x, y) in place.
inline double coupled_event(const PdmpParams& p, double& x, double& y, double e, double u,
                            bool& simultaneous) {
  const double hi = std::max(x, y);
  const double tau = next_jump_time(p, hi, e);
  const double fx = flow(p, x, tau), fy = flow(p, y, tau);
  const double fhi = std::max(fx, fy), flo = std::min(fx, fy);
  simultaneous = u * fhi < flo;
  if (simultaneous) {
    x = fx + p.g;
    y = fy + p.g;
  } else if (fx >= fy) {
    x = fx + p.g;
    y = fy;
  } else {
    x = fx;
    y = fy + p.g;
  }
  return tau;
}

inline int order_sign(double x, double y) noexcept { return (x > y) - (x < y); }

}  // namespace detail

/// Exact event-driven simulation on [0, horizon]. Order preservation and the
/// gap dynamics are asserted at every event.
inline CoupledPath simulate_coupled(const PdmpParams& p, double x, double y, double horizon,
                                    Rng& rng) {
  p.validate();
  require(x > 0.0 && y > 0.0, "simulate_coupled: states must be positive");
  require(horizon >= 0.0, "simulate_coupled: horizon must be non-negative");
  CoupledPath path{p, x, y, horizon, {}};
  const int sign = detail::order_sign(x, y);
  double t = 0.0;
  for (;;) {
    const double e = rng.exponential(), u = rng.uniform();
    double nx = x, ny = y;
    bool both = false;
    const double tau = detail::coupled_event(p, nx, ny, e, u, both);
    if (t + tau > horizon) break;
    t += tau;
    const double bx = flow(p, x, tau), by = flow(p, y, tau);
    const double gap_before = std::abs(bx - by);
    const double gap_after = std::abs(nx - ny);
    ensure(detail::order_sign(nx, ny) == sign, "simulate_coupled: order of coordinates changed");
    ensure(std::abs(gap_after - (both ? gap_before : gap_before + p.g)) <=
               1e-9 * (1.0 + gap_after),
           "simulate_coupled: gap jump is not 0 or g");
    path.events.push_back({t, bx, by, nx, ny, both});
    x = nx;
    y = ny;
  }
  return path;
}

/// Coupled states at non-decreasing times without storing the path; the
/// clock is redrawn at each sampling time as in sample_at_times.
inline void coupled_sample_at_times(const PdmpParams& p, double x0, double y0,
                                    std::span<const double> times, Rng& rng,
                                    std::span<double> xs, std::span<double> ys) {
  require(times.size() == xs.size() && times.size() == ys.size(),
          "coupled_sample_at_times: size mismatch");
  require(x0 > 0.0 && y0 > 0.0, "coupled_sample_at_times: states must be positive");
  const int sign = detail::order_sign(x0, y0);
  double t = 0.0, x = x0, y = y0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= t, "coupled_sample_at_times: times must be non-decreasing");
    for (;;) {
      double nx = x, ny = y;
      bool both = false;
      const double e = rng.exponential(), u = rng.uniform();
      const double tau = detail::coupled_event(p, nx, ny, e, u, both);
      if (t + tau > times[i]) {
        x = flow(p, x, times[i] - t);
        y = flow(p, y, times[i] - t);
        t = times[i];
        break;
      }
      ensure(detail::order_sign(nx, ny) == sign, "coupled_sample_at_times: order changed");
      x = nx;
      y = ny;
      t += tau;
    }
    xs[i] = x;
    ys[i] = y;
  }
}

/// Mean coupled gap at time t in closed form.
inline double coupled_gap_exact(const PdmpParams& p, double x, double y, double t) {
  return std::abs(x - y) * std::exp(-p.pi() * t);
}

struct GapPoint {
  double t = 0.0;
  double mean_gap = 0.0;
  double stderr_ = 0.0;
  double exact_gap = 0.0;
};

struct W1Decay {
  std::vector<GapPoint> points;
  bool degenerate = false;  // x == y: every gap is zero and no rate exists
  double rate = std::numeric_limits<double>::quiet_NaN();
  double rate_se = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
};

struct W1Options {
  std::size_t reps = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double ci_z = 3.0;
};

/// Mean coupled gap at every t (independent replications per t) and the
/// decay rate from a weighted regression of log(mean gap) on t, with weights
/// mean^2 / se^2 (delta method).
inline W1Decay w1_decay_estimate(const PdmpParams& p, double x, double y,
                                 std::span<const double> t_grid, const W1Options& opt) {
  p.require_ergodic("w1_decay_estimate");
  require(t_grid.size() >= 3, "w1_decay_estimate: need at least three times");
  require(opt.reps >= 2, "w1_decay_estimate: need at least two replications");
  require(x > 0.0 && y > 0.0, "w1_decay_estimate: states must be positive");
  W1Decay out;
  out.degenerate = (x == y);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    require(t_grid[k] >= 0.0, "w1_decay_estimate: times must be non-negative");
    const double t = t_grid[k];
    std::vector<double> gaps(opt.reps);
    parallel_for(opt.reps, opt.workers, [&](std::size_t r) {
      Rng rng = make_stream(opt.seed, {k, r});
      double xs = 0, ys = 0;
      const double times[1] = {t};
      coupled_sample_at_times(p, x, y, times, rng, std::span<double>(&xs, 1),
                              std::span<double>(&ys, 1));
      gaps[r] = std::abs(xs - ys);
    });
    const Estimate e = estimate_mean(gaps);
    out.points.push_back({t, e.value, e.stderr_, coupled_gap_exact(p, x, y, t)});
  }
  if (out.degenerate) return out;
  std::vector<double> ts, ly, w;
  for (const auto& pt : out.points) {
    if (pt.mean_gap <= 0.0 || pt.stderr_ <= 0.0) continue;
    ts.push_back(pt.t);
    ly.push_back(std::log(pt.mean_gap));
    w.push_back(pt.mean_gap * pt.mean_gap / (pt.stderr_ * pt.stderr_));
  }
  require(ts.size() >= 3, "w1_decay_estimate: fewer than three usable points");
  const LinearFit f = weighted_linear_fit(ts, ly, w);
  out.rate = -f.slope;
  out.rate_se = f.slope_se;
  out.ci_low = out.rate - opt.ci_z * f.slope_se;
  out.ci_high = out.rate + opt.ci_z * f.slope_se;
  return out;
}

// ---------------------------------------------------------------------------
// Stick coupling

inline double psi(double t, double gap, double b, double g) {
  require(gap >= 0.0, "psi: gap must be non-negative");
  return t + std::log1p(gap / g * std::exp(-b * t)) / b;
}

/// Inverse of psi on (psi(0), inf).
inline double psi_inverse(double t, double gap, double b, double g) {
  require(gap >= 0.0, "psi_inverse: gap must be non-negative");
  const double u = gap / g * std::exp(-b * t);
  require(u < 1.0, "psi_inverse: argument below psi(0)");
  return t + std::log1p(-u) / b;
}

inline double psi_inverse_derivative(double t, double gap, double b, double g) {
  return 1.0 / (1.0 - gap / g * std::exp(-b * t));
}

struct StickParams {
  double x0 = 3.0;
  double eps = 0.05;
  double s = 10.0;

  void validate(const PdmpParams& p) const {
    require(x0 > p.a / p.b, "stick: x0 must exceed a/b");
    require(eps > 0.0, "stick: eps must be positive");
    require(s >= std::log1p(eps) / p.b, "stick: s must be at least ln(1+eps)/b");
  }
};

/// Closed-form lower bound on the stick success probability over A_{x0,eps}.
/// Returned unclamped; may be negative for loose parameters.
inline double stick_lower_bound(const PdmpParams& p, double x0, double eps, double s) {
  const double k = p.c / p.b;
  const double first = 1.0 - k * x0 * eps - std::exp(-(p.a / p.b) * p.c * s) - k * eps;
  const double second = std::max(0.0, 1.0 - k * eps * (x0 + p.g));
  return first * second;
}

inline double clamp_probability(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

/// Density of the first jump time from z.
inline double first_jump_density(const PdmpParams& p, double z, double t) {
  return p.c * flow(p, z, t) * std::exp(-integrated_intensity(p, z, t));
}

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, bool& ok) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  if (depth <= 0) {
    ok = false;
    return left + right;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, ok) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, ok);
}

/// Adaptive Simpson on [a, b]; throws InvariantError if the tolerance is not
/// met within the recursion limit.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  // Start from a few panels so narrow features are not missed.
  constexpr int panels = 16;
  const double h = (b - a) / panels;
  double total = 0.0;
  bool ok = true;
  for (int i = 0; i < panels; ++i) {
    const double lo = a + i * h, hi = (i + 1 == panels) ? b : lo + h;
    const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(f, lo, hi, fa, fm, fb, whole, tol / panels, 40, ok);
  }
  ensure(ok, "adaptive_simpson: tolerance not reached");
  return total;
}

}  // namespace detail

/// The two first-jump laws to be coupled, for a pair x > y.
class StickCoupler {
 public:
  StickCoupler(const PdmpParams& p, double x, double y, double s)
      : p_(p), x_(x), y_(y), gap_(x - y), s_(s) {
    p.validate();
    require(y > 0.0 && x > y, "StickCoupler: need x > y > 0");
    require(s > 0.0, "StickCoupler: deadline must be positive");
    psi0_ = psi(0.0, gap_, p.b, p.g);
  }

  double gap() const noexcept { return gap_; }
  double psi0() const noexcept { return psi0_; }

  double f_y(double t) const { return first_jump_density(p_, y_, t); }

  /// Density of psi(T1x) on [psi(0), s]; the remaining mass sits on the
  /// event psi(T1x) > s.
  double g_xs(double t) const {
    if (t < psi0_ || t > s_) return 0.0;
    if (t == psi0_) return first_jump_density(p_, x_, 0.0) * (1.0 + gap_ / p_.g);
    const double u = psi_inverse(t, gap_, p_.b, p_.g);
    return first_jump_density(p_, x_, u) * psi_inverse_derivative(t, gap_, p_.b, p_.g);
  }

  /// Mass of the maximal coupling, int min(f_y, g_xs), by adaptive quadrature.
  double coupling_probability(double tol = 1e-6) const {
    if (s_ <= psi0_) return 0.0;
    auto m = [this](double t) { return std::min(f_y(t), g_xs(t)); };
    return detail::adaptive_simpson(m, psi0_, s_, tol);
  }

  struct Draw {
    bool coupled;
    double t1x, t1y;
  };

  /// Exact maximal coupling by rejection: T1y is drawn from f_y and kept as
  /// the common value with probability min(1, g/f_y); otherwise psi(T1x) is
  /// redrawn from its own law until it falls in the residual (g - f_y)^+ or on
  /// the atom psi(T1x) > s. Both marginals are exact and
  /// P(coupled) = int min(f_y, g_xs).
  Draw draw(Rng& rng) const {
    const double ty = next_jump_time(p_, y_, rng.exponential());
    const double fy = f_y(ty);
    const double u = rng.uniform();
    if (ty >= psi0_ && ty <= s_ && u * fy <= g_xs(ty)) {
      return {true, psi_inverse(ty, gap_, p_.b, p_.g), ty};
    }
    for (int it = 0; it < 1000000; ++it) {
      const double tx = next_jump_time(p_, x_, rng.exponential());
      const double v = psi(tx, gap_, p_.b, p_.g);
      if (v > s_) return {false, tx, ty};
      const double gv = g_xs(v);
      if (rng.uniform() * gv > f_y(v)) return {false, tx, ty};
    }
    throw InvariantError("StickCoupler: residual sampler did not terminate");
  }

 private:
  PdmpParams p_;
  double x_, y_, gap_, s_;
  double psi0_ = 0.0;
};

enum class StickResult { merged, uncoupled, second_jump };

inline std::string to_string(StickResult r) {
  switch (r) {
    case StickResult::merged: return "merged";
    case StickResult::uncoupled: return "uncoupled";
    case StickResult::second_jump: return "second_jump";
  }
  return "?";
}

struct StickOutcome {
  StickResult result = StickResult::uncoupled;
  double merge_time = std::numeric_limits<double>::infinity();
  double merge_state = 0.0;
  double t1x = 0.0, t1y = 0.0, t2x = 0.0;
  bool merged() const noexcept { return result == StickResult::merged; }
};

inline bool in_stick_set(const PdmpParams& p, double x, double y, const StickParams& sp) noexcept {
  return x > p.a / p.b && x <= sp.x0 && x - y > 0.0 && x - y <= sp.eps;
}

/// One attempt at sticking the path from y onto the path from x by time s.
/// Success requires the coupled branch (so T1y = psi(T1x) <= s) and no second
/// jump of X before T1y. On success both paths sit at merge_state at
/// merge_time and are driven by the same randomness afterwards.
inline StickOutcome stick_attempt(const PdmpParams& p, double x, double y, const StickParams& sp,
                                  Rng& rng) {
  sp.validate(p);
  require(y > 0.0, "stick_attempt: y must be positive");
  require(in_stick_set(p, x, y, sp), "stick_attempt: (x, y) outside A_{x0,eps}");
  const StickCoupler cp(p, x, y, sp.s);
  const auto d = cp.draw(rng);
  StickOutcome out;
  out.t1x = d.t1x;
  out.t1y = d.t1y;
  const double x_after = flow(p, x, d.t1x) + p.g;
  out.t2x = d.t1x + next_jump_time(p, x_after, rng.exponential());
  if (!d.coupled) {
    out.result = StickResult::uncoupled;
    return out;
  }
  if (out.t2x <= d.t1y) {
    out.result = StickResult::second_jump;
    return out;
  }
  const double xs = flow(p, x_after, d.t1y - d.t1x);
  const double ys = flow(p, y, d.t1y) + p.g;
  ensure(std::abs(xs - ys) <= 1e-9 * (1.0 + xs), "stick_attempt: paths do not meet at psi(T1x)");
  out.result = StickResult::merged;
  out.merge_time = d.t1y;
  out.merge_state = xs;
  return out;
}

// ---------------------------------------------------------------------------
// Two-phase merging experiment

using InitialLaw = std::function<double(Rng&)>;

inline InitialLaw point_mass(double x) {
  require(x > 0.0, "point_mass: state must be positive");
  return [x](Rng&) { return x; };
}

/// Approximate stationary draws: the state at time burn_in started from the
/// stationary mean a/pi. The W1 error to the limit decays like e^{-pi burn_in}.
inline InitialLaw stationary_law(const PdmpParams& p, double burn_in) {
  p.require_ergodic("stationary_law");
  require(burn_in > 0.0, "stationary_law: burn-in must be positive");
  return [p, burn_in](Rng& rng) {
    double out = 0.0;
    const double times[1] = {burn_in};
    sample_at_times(p, p.a / p.pi(), times, rng, std::span<double>(&out, 1));
    return out;
  };
}

struct TvPoint {
  double t = 0.0, t1 = 0.0;
  double x0 = 0.0, eps = 0.0;
  std::size_t reps = 0;
  std::size_t in_set = 0;
  std::size_t merged = 0;
  Proportion fraction;
};

inline TvPoint tv_merge_experiment(const PdmpParams& p, const InitialLaw& mu0,
                                   const InitialLaw& mu_ref, double t1, double t, double x0,
                                   double eps, std::size_t reps, std::uint64_t seed,
                                   unsigned workers = 0, std::uint64_t tag = 0) {
  p.validate();
  require(t1 > 0.0 && t1 <= t, "tv_merge_experiment: need 0 < t1 <= t");
  require(reps > 0, "tv_merge_experiment: need replications");
  const StickParams sp{x0, eps, t - t1};
  const bool can_stick = t > t1;
  if (can_stick) sp.validate(p);
  std::vector<unsigned char> state(reps, 0);  // bit 0: in set, bit 1: merged
  parallel_for(reps, workers, [&](std::size_t r) {
    Rng rng = make_stream(seed, {tag, r});
    const double x = mu_ref(rng), y = mu0(rng);
    double xs = 0, ys = 0;
    const double times[1] = {t1};
    coupled_sample_at_times(p, x, y, times, rng, std::span<double>(&xs, 1),
                            std::span<double>(&ys, 1));
    if (xs == ys) {
      state[r] = 3;
      return;
    }
    const double hi = std::max(xs, ys), lo = std::min(xs, ys);
    if (!in_stick_set(p, hi, lo, sp)) return;
    state[r] = 1;
    if (!can_stick) return;
    if (stick_attempt(p, hi, lo, sp, rng).merged()) state[r] = 3;
  });
  TvPoint out{t, t1, x0, eps, reps, 0, 0, {}};
  for (unsigned char s : state) {
    out.in_set += (s & 1u);
    out.merged += (s >> 1) & 1u;
  }
  out.fraction = wilson_interval(out.merged, reps);
  return out;
}

/// alpha = 1 / (2 + b pi / (a c)); the merge deficit decays at least like
/// exp(-(alpha pi - eps) t).
inline double tv_theory_rate(const PdmpParams& p) {
  const double alpha = 1.0 / (2.0 + p.b * p.pi() / (p.a * p.c));
  return alpha * p.pi();
}

/// How t1, x0 and eps scale with t: t1 = delta t, x0 = x0_scale e^{x0_rate t},
/// eps = eps_scale e^{-eps_rate t1}, then eps is lowered if needed so that
/// x0 eps <= b / (2c).
struct TvSchedule {
  double delta = 0.5;
  double x0_scale = 10.0;
  double x0_rate = 0.05;
  double eps_scale = 1.0;
  double eps_rate = 0.3;

  double t1(double t) const noexcept { return delta * t; }
  double x0(double t) const noexcept { return x0_scale * std::exp(x0_rate * t); }
  double eps(const PdmpParams& p, double t) const noexcept {
    return std::min(eps_scale * std::exp(-eps_rate * t1(t)), p.b / (2.0 * p.c * x0(t)));
  }
  void validate() const {
    require(delta > 0.0 && delta < 1.0, "tv schedule: delta must lie in (0,1)");
    require(x0_scale > 0.0 && eps_scale > 0.0, "tv schedule: scales must be positive");
    require(x0_rate >= 0.0 && eps_rate >= 0.0, "tv schedule: rates must be non-negative");
  }
};

struct TvDecay {
  std::vector<TvPoint> points;
  double theory_rate = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
};

/// Merge fractions over a grid of t and the slope of log(1 - fraction) vs t,
/// fitted with binomial delta-method weights.
inline TvDecay tv_decay(const PdmpParams& p, const InitialLaw& mu0, const InitialLaw& mu_ref,
                        std::span<const double> t_grid, const TvSchedule& sch, std::size_t reps,
                        std::uint64_t seed, unsigned workers = 0) {
  p.require_ergodic("tv_decay");
  sch.validate();
  TvDecay out;
  out.theory_rate = tv_theory_rate(p);
  std::vector<double> ts, ly, w;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    const auto pt = tv_merge_experiment(p, mu0, mu_ref, sch.t1(t), t, sch.x0(t), sch.eps(p, t),
                                        reps, seed, workers, k);
    out.points.push_back(pt);
    const double f = pt.fraction.value;
    if (pt.merged == 0 || pt.merged == reps) continue;
    ts.push_back(t);
    ly.push_back(std::log1p(-f));
    w.push_back((1.0 - f) * static_cast<double>(reps) / f);
  }
  if (ts.size() >= 2) {
    const LinearFit fit = weighted_linear_fit(ts, ly, w);
    out.slope = fit.slope;
    out.slope_se = fit.slope_se;
  }
  return out;
}

}  // namespace nsb
