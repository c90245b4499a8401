#pragma once

#include <memory>

#include "cli_common.hpp"

namespace nsb::cli {

inline void register_pdmp(CLI::App& app) {
  {
    struct Opts {
      Common common;
      PdmpFlags pd;
      double x0 = 1.0, horizon = 50.0, dt = 0.01;
      std::string events;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("pdmp-traj", "one exact path: render grid and event list");
    add_common(sub, o->common, 1);
    o->pd.add(sub);
    sub->add_option("--x0", o->x0);
    sub->add_option("--horizon", o->horizon);
    sub->add_option("--dt", o->dt, "render step");
    sub->add_option("--events", o->events, "event list CSV (default <out>_events.csv)");
    sub->callback([o, sub] {
      o->pd.p.validate();
      Rng rng = make_stream(o->common.seed, {0});
      const auto path = simulate(o->pd.p, o->x0, o->horizon, rng);
      const auto meta = run_metadata(sub);
      emit(o->common.out, meta, path_table(path, o->dt));
      const std::string ev = o->events.empty() ? sibling(o->common.out, "_events") : o->events;
      if (!ev.empty()) emit(ev, meta, event_table(path));
    });
  }
  {
    struct Opts {
      Common common;
      PdmpFlags pd;
      double x0 = 1.0, t_max = 10.0, dt = 0.5;
      int order = 2;
      std::vector<double> times;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = app.add_subcommand("pdmp-moments", "moment ODE against Monte Carlo");
    add_common(sub, o->common, 100000);
    o->pd.add(sub);
    sub->add_option("--x0", o->x0);
    sub->add_option("--order", o->order, "highest moment p")->check(CLI::Range(1, 12));
    sub->add_option("--times", o->times, "evaluation times (default dt, 2dt, ..., t-max)");
    sub->add_option("--t-max", o->t_max);
    sub->add_option("--dt", o->dt);
    sub->callback([o, sub] {
      const auto& p = o->pd.p;
      p.require_ergodic("pdmp-moments");
      require(o->x0 > 0.0, "pdmp-moments: x0 must be positive");
      const auto ts = time_grid(o->times, o->t_max, o->dt);
      std::vector<double> init(o->order);
      for (int k = 0; k < o->order; ++k) init[k] = std::pow(o->x0, k + 1);
      const auto ode = moment_ode(p, o->order, init, ts);
      const std::size_t reps = o->common.reps, nt = ts.size();
      std::vector<double> xs(reps * nt);
      parallel_for(reps, o->common.workers, [&](std::size_t i) {
        Rng rng = make_stream(o->common.seed, {i});
        sample_at_times(p, o->x0, ts, rng, std::span<double>(xs.data() + i * nt, nt));
      });
      Table t({"t", "p", "ode_value", "mc_value", "mc_stderr"});
      for (std::size_t j = 0; j < nt; ++j) {
        for (int k = 1; k <= o->order; ++k) {
          RunningStats s;
          for (std::size_t i = 0; i < reps; ++i) s.add(std::pow(xs[i * nt + j], k));
          t.row(ts[j], k, ode.values[j][k - 1], s.mean(), s.stderr_mean());
        }
      }
      emit(o->common.out, run_metadata(sub), t);
    });
  }
}

}  // namespace nsb::cli
