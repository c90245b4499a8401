#pragma once

// Column layouts of every CSV the command-line driver writes. The plotting
// scripts read exactly these headers, so changes here are interface changes.

#include <string>
#include <vector>

#include "nsbandit/coupling.hpp"
#include "nsbandit/csv.hpp"
#include "nsbandit/pdmp.hpp"
#include "nsbandit/regret.hpp"

namespace nsb {

inline Metadata policy_metadata(const PolicyConfig& cfg) {
  Metadata m{{"policy", to_string(cfg.kind)}};
  if (cfg.is_ns()) {
    m.emplace_back("sigma", format_number(cfg.effective_sigma()));
    m.emplace_back("gamma1", format_number(cfg.schedule.gamma1));
    m.emplace_back("rho1", format_number(cfg.schedule.rho1));
    m.emplace_back("alpha", format_number(cfg.schedule.alpha));
    m.emplace_back("beta", format_number(cfg.schedule.beta));
    m.emplace_back("offset", std::to_string(cfg.schedule.offset));
  }
  return m;
}

inline Table curve_table(const PolicyConfig& cfg, const ArmEnvironment& env,
                         const RegretCurve& c, std::uint64_t seed) {
  Table t({"policy", "sigma", "gamma1", "rho1", "offset", "p1", "p2", "n", "estimator", "estimate",
           "stderr", "reps", "seed"});
  const double p2 = env.arms() > 1 ? env.probs[1] : 0.0;
  for (const auto& pt : c.points) {
    t.row(to_string(cfg.kind), cfg.effective_sigma(), cfg.schedule.gamma1, cfg.schedule.rho1,
          cfg.schedule.offset, env.probs[0], p2, pt.n, to_string(c.estimator), pt.estimate,
          pt.stderr_, pt.reps, seed);
  }
  return t;
}

/// The first four columns are the declared sweep schema; the rest are extras.
inline Table sweep_table(const SweepResult& r) {
  Table t({"n", "sup_value", "argmax_p1", "argmax_p2", "stderr", "screening_sup"});
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    t.row(r.checkpoints[i], r.sup_value[i], r.argmax_p1[i], r.argmax_p2[i], r.sup_se[i],
          r.screening_sup[i]);
  }
  return t;
}

/// Every screened grid point at every checkpoint, for surface plots.
inline Table sweep_surface_table(const SweepResult& r) {
  Table t({"p1", "p2", "n", "value", "stderr"});
  for (const auto& c : r.screening) {
    for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
      t.row(c.p1, c.p2, r.checkpoints[i], c.value[i], c.se[i]);
    }
  }
  return t;
}

inline Table gap_table(const std::vector<RegretGapPoint>& g) {
  Table t({"n", "true_regret", "true_stderr", "pseudo_regret", "pseudo_stderr", "gap", "gap_stderr",
           "bound"});
  for (const auto& p : g) {
    t.row(p.n, p.true_regret.value, p.true_regret.stderr_, p.pseudo_regret.value,
          p.pseudo_regret.stderr_, p.gap.value, p.gap.stderr_, p.bound);
  }
  return t;
}

/// Render grid (t, x) of an exact path.
inline Table path_table(const PdmpPath& path, double dt) {
  require(dt > 0.0, "path_table: render step must be positive");
  Table t({"t", "x"});
  const auto steps = static_cast<std::uint64_t>(std::floor(path.horizon / dt + 1e-9));
  for (std::uint64_t i = 0; i <= steps; ++i) {
    const double s = std::min(path.horizon, static_cast<double>(i) * dt);
    t.row(s, path.state_at(s));
  }
  return t;
}

inline Table event_table(const PdmpPath& path) {
  Table t({"t_jump", "x_before", "x_after"});
  for (const auto& e : path.events) t.row(e.t, e.x_before, e.x_after);
  return t;
}

inline Table w1_table(const W1Decay& d) {
  Table t({"t", "mean_gap", "stderr", "exact_gap"});
  for (const auto& p : d.points) t.row(p.t, p.mean_gap, p.stderr_, p.exact_gap);
  return t;
}

inline Table tv_table(const TvDecay& d) {
  Table t({"t", "merge_fraction", "ci_low", "ci_high", "theory_rate", "t1", "x0", "eps", "in_set"});
  for (const auto& p : d.points) {
    t.row(p.t, p.fraction.value, p.fraction.lo, p.fraction.hi, d.theory_rate, p.t1, p.x0, p.eps,
          p.in_set);
  }
  return t;
}

/// Shared layout of the theory checks.
inline Table check_table() { return Table({"quantity", "computed", "bound_or_target", "margin", "pass"}); }

}  // namespace nsb
