#pragma once

// Regret estimation: pseudo-regret by two estimators, true regret with the
// full reward matrix, grid sweeps of the worst-case normalized pseudo-regret
// and the closed-form bounds they are compared against.
//
// Estimators, per replication and checkpoint n:
//   reward      n p_best - S_n
//   occupation  sum_{k=1..n} sum_j P(I_k = j | past) (p_best - p_j)
//   true        max_j sum_k A_k^j - S_n
// The occupation estimator has the same expectation as the reward one (the
// conditional expectation of each round's shortfall) with far less noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "nsbandit/bandit.hpp"
#include "nsbandit/parallel.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/stats.hpp"

namespace nsb {

enum class Estimator { reward, occupation, true_regret };

inline std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::reward: return "reward";
    case Estimator::occupation: return "occupation";
    case Estimator::true_regret: return "true";
  }
  return "?";
}

inline Estimator parse_estimator(const std::string& s) {
  if (s == "reward") return Estimator::reward;
  if (s == "occupation") return Estimator::occupation;
  if (s == "true" || s == "true_regret") return Estimator::true_regret;
  throw ConfigError("unknown estimator '" + s + "'");
}

struct CurvePoint {
  std::uint64_t n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t reps = 0;
};

struct RegretCurve {
  Estimator estimator = Estimator::occupation;
  std::vector<CurvePoint> points;
};

inline double theoretical_bound_over_penalized(std::uint64_t n) {
  require(n >= 1, "bound: n must be >= 1");
  return 31.1 * std::sqrt(2.0 * static_cast<double>(n));
}

/// Upper bound on E R_n - pseudo-regret for d arms: sqrt(n log d / 2).
inline double regret_gap_bound(std::uint64_t n, std::size_t d) {
  return std::sqrt(static_cast<double>(n) * std::log(static_cast<double>(d)) / 2.0);
}

// ---------------------------------------------------------------------------
// Single-replication kernel

struct ReplicationValues {
  std::vector<double> reward;      // n p_best - S_n
  std::vector<double> occupation;  // see header comment
  std::vector<double> best_sum;    // max_j sum_k A_k^j (full matrix only)
};

namespace detail {

template <bool FullMatrix, class Policy>
void run_replication(Policy& pol, const ArmEnvironment& env, const std::vector<double>& gaps,
                     const std::vector<std::uint64_t>& cps, Rng& rng, ReplicationValues& out) {
  const std::size_t d = env.arms();
  const double best = env.best_prob();
  std::vector<std::uint64_t> arm_sums(FullMatrix ? d : 0, 0);
  std::vector<int> draws(FullMatrix ? d : 0, 0);
  std::uint64_t total = 0;
  double occ = 0.0;
  std::size_t next = 0;
  const std::uint64_t horizon = cps.back();
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const std::size_t arm = pol.select(rng);
    occ += pol.expected(gaps, arm);
    int r;
    if constexpr (FullMatrix) {
      for (std::size_t j = 0; j < d; ++j) {
        draws[j] = env.sample(j, rng);
        arm_sums[j] += static_cast<std::uint64_t>(draws[j]);
      }
      r = draws[arm];
    } else {
      r = env.sample(arm, rng);
    }
    pol.update(arm, r, rng);
    total += static_cast<std::uint64_t>(r);
    if (n == cps[next]) {
      out.reward[next] = static_cast<double>(n) * best - static_cast<double>(total);
      out.occupation[next] = occ;
      if constexpr (FullMatrix) {
        out.best_sum[next] = static_cast<double>(*std::max_element(arm_sums.begin(), arm_sums.end()));
      }
      ++next;
    }
  }
}

}  // namespace detail

/// Runs one replication. With full_matrix every arm's reward is drawn each
/// round, which is what the true regret needs; otherwise only the played arm.
inline ReplicationValues run_replication(const PolicyConfig& cfg, const ScheduleTable& table,
                                         const ArmEnvironment& env,
                                         const std::vector<std::uint64_t>& cps, Rng& rng,
                                         bool full_matrix) {
  ReplicationValues v;
  v.reward.assign(cps.size(), 0.0);
  v.occupation.assign(cps.size(), 0.0);
  if (full_matrix) v.best_sum.assign(cps.size(), 0.0);
  const auto gaps = env.gaps();
  with_policy(cfg, table, env.arms(), [&](auto& pol) {
    if (full_matrix) {
      detail::run_replication<true>(pol, env, gaps, cps, rng, v);
    } else {
      detail::run_replication<false>(pol, env, gaps, cps, rng, v);
    }
  });
  return v;
}

// ---------------------------------------------------------------------------
// Replicated estimates at one environment

struct MultiCurve {
  std::vector<std::uint64_t> checkpoints;
  std::vector<RunningStats> reward, occupation, true_regret, gap;
};

struct RunOptions {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::vector<std::uint64_t> checkpoints;  // empty = powers of two
  bool full_matrix = false;
  std::uint64_t stream_tag = 0;  // separates independent runs sharing a seed
};

/// Replications are processed in fixed blocks; block statistics are merged in
/// block order, so the result is identical for any worker count.
inline MultiCurve replicate(const PolicyConfig& cfg, const ArmEnvironment& env,
                            std::uint64_t horizon, const RunOptions& opt,
                            const ScheduleTable* shared_table = nullptr) {
  require(horizon >= 1, "replicate: horizon must be >= 1");
  require(opt.reps >= 2, "replicate: need at least two replications");
  cfg.validate();
  env.validate();
  require(env.arms() >= 2, "replicate: need d >= 2");
  const auto cps = opt.checkpoints.empty() ? geometric_checkpoints(horizon)
                                           : normalize_checkpoints(opt.checkpoints, horizon);
  ScheduleTable own;
  if (!shared_table || shared_table->horizon() < horizon) {
    own = ScheduleTable(cfg.schedule, cfg.is_ns() ? horizon : 0);
    shared_table = &own;
  }
  constexpr std::size_t block = 32;
  const std::size_t blocks = (opt.reps + block - 1) / block;
  const std::size_t k = cps.size();
  std::vector<MultiCurve> parts(blocks);
  parallel_for(blocks, opt.workers, [&](std::size_t b) {
    MultiCurve& mc = parts[b];
    mc.reward.resize(k);
    mc.occupation.resize(k);
    mc.true_regret.resize(k);
    mc.gap.resize(k);
    const std::size_t lo = b * block, hi = std::min(opt.reps, lo + block);
    for (std::size_t r = lo; r < hi; ++r) {
      Rng rng = make_stream(opt.seed, {opt.stream_tag, r});
      const auto v = run_replication(cfg, *shared_table, env, cps, rng, opt.full_matrix);
      for (std::size_t i = 0; i < k; ++i) {
        mc.reward[i].add(v.reward[i]);
        mc.occupation[i].add(v.occupation[i]);
        if (opt.full_matrix) {
          const double n = static_cast<double>(cps[i]);
          const double s_n = n * env.best_prob() - v.reward[i];
          const double true_r = v.best_sum[i] - s_n;
          mc.true_regret[i].add(true_r);
          mc.gap[i].add(true_r - v.occupation[i]);
        }
      }
    }
  });
  MultiCurve out;
  out.checkpoints = cps;
  out.reward.resize(k);
  out.occupation.resize(k);
  out.true_regret.resize(k);
  out.gap.resize(k);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < k; ++i) {
      out.reward[i].merge(p.reward[i]);
      out.occupation[i].merge(p.occupation[i]);
      out.true_regret[i].merge(p.true_regret[i]);
      out.gap[i].merge(p.gap[i]);
    }
  }
  return out;
}

inline RegretCurve to_curve(const std::vector<std::uint64_t>& cps,
                            const std::vector<RunningStats>& stats, Estimator e) {
  RegretCurve c;
  c.estimator = e;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    c.points.push_back({cps[i], stats[i].mean(), stats[i].stderr_mean(), stats[i].count()});
  }
  return c;
}

inline RegretCurve pseudo_regret_curve(const PolicyConfig& cfg, const ArmEnvironment& env,
                                       std::uint64_t horizon, RunOptions opt, Estimator e) {
  require(e != Estimator::true_regret, "pseudo_regret_curve: use true_regret_mc for true regret");
  if (e == Estimator::occupation) {
    require(env.arms() == 2, "pseudo_regret_curve: occupation estimator requires d = 2");
  }
  opt.full_matrix = false;
  const auto mc = replicate(cfg, env, horizon, opt);
  return to_curve(mc.checkpoints, e == Estimator::reward ? mc.reward : mc.occupation, e);
}

inline RegretCurve true_regret_mc(const PolicyConfig& cfg, const ArmEnvironment& env,
                                  std::uint64_t horizon, RunOptions opt) {
  env.validate();
  if (env.arms() == 1) {
    // Only one arm to play and to compare against: R_n = 0 identically.
    RegretCurve c;
    c.estimator = Estimator::true_regret;
    const auto cps = opt.checkpoints.empty() ? geometric_checkpoints(horizon)
                                             : normalize_checkpoints(opt.checkpoints, horizon);
    for (auto n : cps) c.points.push_back({n, 0.0, 0.0, opt.reps});
    return c;
  }
  opt.full_matrix = true;
  const auto mc = replicate(cfg, env, horizon, opt);
  return to_curve(mc.checkpoints, mc.true_regret, Estimator::true_regret);
}

/// Paired comparison of E R_n and the pseudo-regret on the same replications.
struct RegretGapPoint {
  std::uint64_t n = 0;
  Estimate true_regret;
  Estimate pseudo_regret;  // occupation estimator (d = 2) or reward estimator
  Estimate gap;            // per-replication difference
  double bound = 0.0;      // sqrt(n log d / 2)
};

inline std::vector<RegretGapPoint> regret_gap_mc(const PolicyConfig& cfg, const ArmEnvironment& env,
                                                 std::uint64_t horizon, RunOptions opt) {
  opt.full_matrix = true;
  const auto mc = replicate(cfg, env, horizon, opt);
  const bool occ = env.arms() == 2;
  std::vector<RegretGapPoint> out;
  for (std::size_t i = 0; i < mc.checkpoints.size(); ++i) {
    RegretGapPoint g;
    g.n = mc.checkpoints[i];
    const auto& tr = mc.true_regret[i];
    const auto& ps = occ ? mc.occupation[i] : mc.reward[i];
    g.true_regret = {tr.mean(), tr.stderr_mean(), tr.count()};
    g.pseudo_regret = {ps.mean(), ps.stderr_mean(), ps.count()};
    if (occ) {
      g.gap = {mc.gap[i].mean(), mc.gap[i].stderr_mean(), mc.gap[i].count()};
    } else {
      // true - reward estimator = max_j sum A^j - n p_best, already paired.
      g.gap = {tr.mean() - ps.mean(), std::sqrt(tr.variance() / static_cast<double>(tr.count())),
               tr.count()};
    }
    g.bound = regret_gap_bound(g.n, env.arms());
    out.push_back(g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid sweeps

struct GridSpec {
  double delta = 0.05;
  std::vector<double> fine_gaps;  // extra points (p1, p1 - h) near the diagonal
  double fine_p1_min = 0.5;

  /// Triangle {(i/K, j/K): 0 <= j < i <= K}, K = 1/delta, plus refinement.
  std::vector<std::pair<double, double>> points() const {
    require(delta > 0.0 && delta <= 1.0, "grid: delta must lie in (0,1]");
    const double kd = 1.0 / delta;
    const auto k = static_cast<int>(std::lround(kd));
    require(std::abs(kd - k) < 1e-9, "grid: 1/delta must be an integer");
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= k; ++i) {
      for (int j = 0; j < i; ++j) pts.emplace_back(double(i) / k, double(j) / k);
    }
    for (int i = 1; i <= k; ++i) {
      const double p1 = double(i) / k;
      if (p1 < fine_p1_min - 1e-12) continue;
      for (double h : fine_gaps) {
        require(h > 0.0, "grid: refinement gaps must be positive");
        const double hk = h * k;
        if (std::abs(hk - std::round(hk)) < 1e-9) continue;  // already on the grid
        const double p2 = p1 - h;
        if (p2 >= 0.0) pts.emplace_back(p1, p2);
      }
    }
    return pts;
  }
};

struct SweepOptions {
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  Estimator estimator = Estimator::occupation;
  std::vector<std::uint64_t> checkpoints;
  // Second stage: the top-k points of each checkpoint are re-estimated with
  // fresh streams, removing the upward bias of a maximum over noisy values.
  std::size_t refine_top_k = 0;
  std::size_t refine_reps = 0;
};

struct SweepPointCurve {
  double p1 = 0.0, p2 = 0.0;
  std::vector<double> value;  // estimate / sqrt(n)
  std::vector<double> se;
};

struct SweepResult {
  std::vector<std::uint64_t> checkpoints;
  std::vector<SweepPointCurve> screening;
  std::vector<SweepPointCurve> refined;  // subset re-estimated in stage two
  std::vector<double> sup_value, sup_se, argmax_p1, argmax_p2;
  std::vector<double> screening_sup;
  bool refined_stage = false;
};

namespace detail {

inline std::vector<SweepPointCurve> sweep_points(const PolicyConfig& cfg,
                                                 const std::vector<std::pair<double, double>>& pts,
                                                 const std::vector<std::uint64_t>& point_ids,
                                                 std::uint64_t horizon,
                                                 const std::vector<std::uint64_t>& cps,
                                                 std::size_t reps, std::uint64_t seed,
                                                 std::uint64_t stage, Estimator e,
                                                 unsigned workers) {
  const ScheduleTable table(cfg.schedule, cfg.is_ns() ? horizon : 0);
  constexpr std::size_t block = 16;
  const std::size_t blocks_per_point = (reps + block - 1) / block;
  const std::size_t k = cps.size();
  std::vector<std::vector<RunningStats>> parts(pts.size() * blocks_per_point,
                                               std::vector<RunningStats>(k));
  parallel_for(parts.size(), workers, [&](std::size_t task) {
    const std::size_t pi = task / blocks_per_point, b = task % blocks_per_point;
    const ArmEnvironment env({pts[pi].first, pts[pi].second});
    const std::size_t lo = b * block, hi = std::min(reps, lo + block);
    for (std::size_t r = lo; r < hi; ++r) {
      Rng rng = make_stream(seed, {stage, point_ids[pi], r});
      const auto v = run_replication(cfg, table, env, cps, rng, false);
      const auto& src = e == Estimator::reward ? v.reward : v.occupation;
      for (std::size_t i = 0; i < k; ++i) {
        parts[task][i].add(src[i] / std::sqrt(static_cast<double>(cps[i])));
      }
    }
  });
  std::vector<SweepPointCurve> out(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) {
    std::vector<RunningStats> st(k);
    for (std::size_t b = 0; b < blocks_per_point; ++b) {
      for (std::size_t i = 0; i < k; ++i) st[i].merge(parts[p * blocks_per_point + b][i]);
    }
    out[p].p1 = pts[p].first;
    out[p].p2 = pts[p].second;
    for (std::size_t i = 0; i < k; ++i) {
      out[p].value.push_back(st[i].mean());
      out[p].se.push_back(st[i].stderr_mean());
    }
  }
  return out;
}

}  // namespace detail

inline SweepResult sup_sweep(const PolicyConfig& cfg, const GridSpec& grid, std::uint64_t horizon,
                             const SweepOptions& opt) {
  require(opt.estimator != Estimator::true_regret, "sup_sweep: pseudo-regret estimators only");
  require(opt.reps >= 2, "sup_sweep: need at least two replications");
  cfg.validate();
  const auto pts = grid.points();
  require(!pts.empty(), "sup_sweep: empty grid");
  SweepResult res;
  res.checkpoints = opt.checkpoints.empty() ? geometric_checkpoints(horizon)
                                            : normalize_checkpoints(opt.checkpoints, horizon);
  const std::size_t k = res.checkpoints.size();
  std::vector<std::uint64_t> ids(pts.size());
  std::iota(ids.begin(), ids.end(), 0);
  res.screening = detail::sweep_points(cfg, pts, ids, horizon, res.checkpoints, opt.reps, opt.seed,
                                       0, opt.estimator, opt.workers);

  res.screening_sup.assign(k, 0.0);
  res.sup_value.assign(k, 0.0);
  res.sup_se.assign(k, 0.0);
  res.argmax_p1.assign(k, 0.0);
  res.argmax_p2.assign(k, 0.0);
  std::vector<std::vector<std::size_t>> order(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto& o = order[i];
    o.resize(pts.size());
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
      return res.screening[a].value[i] > res.screening[b].value[i];
    });
    const auto& top = res.screening[o[0]];
    res.screening_sup[i] = top.value[i];
    res.sup_value[i] = top.value[i];
    res.sup_se[i] = top.se[i];
    res.argmax_p1[i] = top.p1;
    res.argmax_p2[i] = top.p2;
  }
  if (opt.refine_top_k == 0 || opt.refine_reps < 2) return res;

  res.refined_stage = true;
  const std::size_t top_k = std::min(opt.refine_top_k, pts.size());
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < top_k; ++j) chosen.push_back(order[i][j]);
  }
  std::sort(chosen.begin(), chosen.end());
  chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
  std::vector<std::pair<double, double>> sub;
  std::vector<std::uint64_t> sub_ids;
  for (auto c : chosen) {
    sub.push_back(pts[c]);
    sub_ids.push_back(c);
  }
  res.refined = detail::sweep_points(cfg, sub, sub_ids, horizon, res.checkpoints, opt.refine_reps,
                                     opt.seed, 1, opt.estimator, opt.workers);
  for (std::size_t i = 0; i < k; ++i) {
    double best = -1e300;
    for (std::size_t j = 0; j < top_k; ++j) {
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(chosen.begin(), chosen.end(), order[i][j]) - chosen.begin());
      const auto& c = res.refined[pos];
      if (c.value[i] > best) {
        best = c.value[i];
        res.sup_value[i] = c.value[i];
        res.sup_se[i] = c.se[i];
        res.argmax_p1[i] = c.p1;
        res.argmax_p2[i] = c.p2;
      }
    }
  }
  return res;
}

/// Mean, min and max of the sup curve over checkpoints inside [n_lo, n_hi].
struct LevelSummary {
  double level = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline LevelSummary sup_level(const SweepResult& r, std::uint64_t n_lo, std::uint64_t n_hi) {
  LevelSummary s;
  s.min = 1e300;
  s.max = -1e300;
  double sum = 0.0;
  for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
    if (r.checkpoints[i] < n_lo || r.checkpoints[i] > n_hi) continue;
    sum += r.sup_value[i];
    s.min = std::min(s.min, r.sup_value[i]);
    s.max = std::max(s.max, r.sup_value[i]);
    ++s.count;
  }
  require(s.count > 0, "sup_level: no checkpoint inside the window");
  s.level = sum / static_cast<double>(s.count);
  return s;
}

}  // namespace nsb
