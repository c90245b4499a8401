#pragma once

#include <memory>

#include "cli_common.hpp"

namespace nsb::cli {

inline void register_regret(CLI::App& app) {
  {
    struct Opts {
      Common common;
      PolicyFlags pol;
      std::uint64_t horizon = 10000;
      std::vector<std::uint64_t> checkpoints;
      std::string estimator = "occupation";
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("regret-curve", "mean regret of one policy over n");
    add_common(sub, o->common, 1000);
    o->pol.add(sub);
    o->pol.add_env(sub);
    sub->add_option("--horizon", o->horizon)->check(CLI::PositiveNumber);
    sub->add_option("--checkpoints", o->checkpoints, "rounds to report (default powers of two)");
    sub->add_option("--estimator", o->estimator, "reward | occupation | true");
    sub->callback([o, sub] {
      const auto cfg = o->pol.config();
      const auto env = o->pol.env();
      const auto ro = run_options(o->common, o->checkpoints);
      const Estimator e = parse_estimator(o->estimator);
      const auto curve = e == Estimator::true_regret ? true_regret_mc(cfg, env, o->horizon, ro)
                                                     : pseudo_regret_curve(cfg, env, o->horizon, ro, e);
      emit(o->common.out, run_metadata(sub), curve_table(cfg, env, curve, o->common.seed));
    });
  }
  {
    struct Opts {
      Common common;
      PolicyFlags pol;
      std::uint64_t horizon = 10000;
      double grid = 0.05;
      std::vector<double> fine_gaps;
      std::vector<std::uint64_t> checkpoints;
      std::size_t refine_top_k = 0, refine_reps = 0;
      std::string estimator = "occupation";
      std::string surface;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("regret-sweep", "sup over the (p1, p2) grid of regret / sqrt(n)");
    add_common(sub, o->common, 300);
    o->pol.add(sub);
    sub->add_option("--horizon", o->horizon)->check(CLI::PositiveNumber);
    sub->add_option("--grid", o->grid, "grid step delta");
    sub->add_option("--fine-gaps", o->fine_gaps, "extra points (p1, p1 - h) near the diagonal");
    sub->add_option("--checkpoints", o->checkpoints);
    sub->add_option("--refine-top-k", o->refine_top_k, "re-estimate the k best points per checkpoint");
    sub->add_option("--refine-reps", o->refine_reps);
    sub->add_option("--estimator", o->estimator, "reward | occupation");
    sub->add_option("--surface", o->surface, "also write every grid point to this CSV");
    sub->callback([o, sub] {
      const auto cfg = o->pol.config();
      GridSpec g;
      g.delta = o->grid;
      g.fine_gaps = o->fine_gaps;
      SweepOptions so;
      so.reps = o->common.reps;
      so.seed = o->common.seed;
      so.workers = o->common.workers;
      so.estimator = parse_estimator(o->estimator);
      so.checkpoints = o->checkpoints;
      so.refine_top_k = o->refine_top_k;
      so.refine_reps = o->refine_reps;
      const auto r = sup_sweep(cfg, g, o->horizon, so);
      const auto meta = run_metadata(sub);
      emit(o->common.out, meta, sweep_table(r));
      if (!o->surface.empty()) emit(o->surface, meta, sweep_surface_table(r));
    });
  }
  {
    struct Opts {
      Common common;
      PolicyFlags pol;
      std::uint64_t horizon = 1000;
      std::vector<std::uint64_t> checkpoints;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("regret-gap", "paired E R_n - pseudo-regret with its bound");
    add_common(sub, o->common, 10000);
    o->pol.add(sub);
    o->pol.add_env(sub);
    sub->add_option("--horizon", o->horizon)->check(CLI::PositiveNumber);
    sub->add_option("--checkpoints", o->checkpoints);
    sub->callback([o, sub] {
      const auto ro = run_options(o->common, o->checkpoints);
      const auto g = regret_gap_mc(o->pol.config(), o->pol.env(), o->horizon, ro);
      emit(o->common.out, run_metadata(sub), gap_table(g));
      for (const auto& pt : g) {
        const double slack = 3.0 * pt.gap.stderr_;
        if (pt.gap.value + slack < 0.0 || pt.gap.value - slack > pt.bound) {
          throw InvariantError("regret-gap: sandwich violated at n=" + std::to_string(pt.n));
        }
      }
    });
  }
  {
    struct Opts {
      Common common;
      PolicyFlags pol;
      std::uint64_t horizon = 10000;
      double grid = 0.05;
    };
    auto o = std::make_shared<Opts>();
    o->pol.sched.s = StepSchedule::sqrt_decay(0.89, 0.38);
    auto* sub = app.add_subcommand("bound-check", "sup-regret against 31.1 sqrt(2n)");
    add_common(sub, o->common, 10000);
    o->pol.add(sub);
    sub->add_option("--horizon", o->horizon)->check(CLI::PositiveNumber);
    sub->add_option("--grid", o->grid, "grid step delta");
    sub->callback([o, sub] {
      const auto cfg = o->pol.config();
      GridSpec g;
      g.delta = o->grid;
      SweepOptions so;
      so.reps = o->common.reps;
      so.seed = o->common.seed;
      so.workers = o->common.workers;
      const auto r = sup_sweep(cfg, g, o->horizon, so);
      Table t({"n", "sup_value", "stderr", "bound", "margin", "pass"});
      bool ok = true;
      const double bound = 31.1 * std::sqrt(2.0);
      for (std::size_t i = 0; i < r.checkpoints.size(); ++i) {
        const double m = bound + 3.0 * r.sup_se[i] - r.sup_value[i];
        ok = ok && m >= 0.0;
        t.row(r.checkpoints[i], r.sup_value[i], r.sup_se[i], bound, m, m >= 0.0);
      }
      emit(o->common.out, run_metadata(sub), t);
      if (!ok) throw AcceptanceFailure("bound-check: sup-regret exceeds 31.1 sqrt(2n)");
    });
  }
}

}  // namespace nsb::cli
