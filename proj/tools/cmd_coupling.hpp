#pragma once

#include <memory>

#include "cli_common.hpp"

namespace nsb::cli {

inline void register_coupling(CLI::App& app) {
  {
    struct Opts {
      Common common;
      PdmpFlags pd;
      double x = 4.0, y = 2.0, t_max = 4.0, dt = 0.5;
      std::vector<double> times;
    };
    auto o = std::make_shared<Opts>();
    o->pd.p = PdmpParams{1.0, 0.8, 0.5, 1.0};
    auto* sub = app.add_subcommand("coupling-w1", "coupled gap decay and its fitted rate");
    add_common(sub, o->common, 100000);
    o->pd.add(sub);
    sub->add_option("--x", o->x);
    sub->add_option("--y", o->y);
    sub->add_option("--times", o->times);
    sub->add_option("--t-max", o->t_max);
    sub->add_option("--dt", o->dt);
    sub->callback([o, sub] {
      W1Options wo;
      wo.reps = o->common.reps;
      wo.seed = o->common.seed;
      wo.workers = o->common.workers;
      const auto d = w1_decay_estimate(o->pd.p, o->x, o->y, time_grid(o->times, o->t_max, o->dt), wo);
      auto meta = run_metadata(sub);
      meta.emplace_back("pi", format_number(o->pd.p.pi()));
      meta.emplace_back("fitted_rate", d.degenerate ? "none" : format_number(d.rate));
      meta.emplace_back("rate_ci", d.degenerate ? "none" : format_number(d.ci_low) + " " + format_number(d.ci_high));
      emit(o->common.out, meta, w1_table(d));
    });
  }
  {
    struct Opts {
      Common common;
      PdmpFlags pd;
      TvSchedule sch;
      double start = 1.0, burn_in = 60.0;
      double t_max = 40.0, dt = 4.0;
      std::vector<double> times;
    };
    auto o = std::make_shared<Opts>();
    o->pd.p = PdmpParams{1.0, 0.8, 0.5, 1.0};
    auto* sub = app.add_subcommand("coupling-tv", "two-phase merging experiment");
    add_common(sub, o->common, 4000);
    o->pd.add(sub);
    sub->add_option("--start", o->start, "deterministic start of the tested path");
    sub->add_option("--burn-in", o->burn_in, "burn-in of the reference (stationary) path");
    sub->add_option("--times", o->times);
    sub->add_option("--t-max", o->t_max);
    sub->add_option("--dt", o->dt);
    sub->add_option("--delta", o->sch.delta, "t1 = delta t");
    sub->add_option("--x0-scale", o->sch.x0_scale);
    sub->add_option("--x0-rate", o->sch.x0_rate);
    sub->add_option("--eps-scale", o->sch.eps_scale);
    sub->add_option("--eps-rate", o->sch.eps_rate);
    sub->callback([o, sub] {
      const auto& p = o->pd.p;
      const auto d = tv_decay(p, point_mass(o->start), stationary_law(p, o->burn_in),
                              time_grid(o->times, o->t_max, o->dt), o->sch, o->common.reps,
                              o->common.seed, o->common.workers);
      auto meta = run_metadata(sub);
      meta.emplace_back("slope", format_number(d.slope));
      meta.emplace_back("slope_stderr", format_number(d.slope_se));
      emit(o->common.out, meta, tv_table(d));
    });
  }
}

}  // namespace nsb::cli
