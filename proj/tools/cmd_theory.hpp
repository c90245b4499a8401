#pragma once

#include <memory>

#include "cli_common.hpp"

namespace nsb::cli {

/// Writes a check table; any failed row makes the command exit with 5.
inline void finish_checks(const CLI::App* sub, const std::string& out, const Table& t) {
  emit(out, run_metadata(sub), t);
  for (const auto& r : t.rows()) {
    if (r.back() == "false") throw AcceptanceFailure(sub->get_name() + ": " + r.front() + " failed");
  }
}

inline void register_theory(CLI::App& app) {
  auto* th = app.add_subcommand("theory-check", "numerical checks of the analysis");
  th->require_subcommand(1);

  {
    struct Opts {
      Common common;
      double gamma = 0.5;
      int r = 3;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("hr", "h_r(gamma) against its value at gamma = 1");
    add_common(sub, o->common, 1);
    sub->add_option("--gamma", o->gamma);
    sub->add_option("--r", o->r);
    sub->callback([o, sub] {
      Table t = check_table();
      const double v = h_r(o->gamma, o->r);
      const double top = h_r(1.0, o->r);
      t.row("h_r", v, top, top - v, v <= top);
      finish_checks(sub, o->common.out, t);
    });
  }
  {
    struct Opts {
      Common common;
      double x = 0.5, sigma = 0.0, p1 = 0.7, p2 = 0.6;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("kappa", "kappa_sigma(x) and its bound 1 - sigma p2");
    add_common(sub, o->common, 1);
    sub->add_option("--x", o->x);
    sub->add_option("--sigma", o->sigma);
    sub->add_option("--p1", o->p1);
    sub->add_option("--p2", o->p2);
    sub->callback([o, sub] {
      Table t = check_table();
      const double v = kappa_sigma(o->x, o->sigma, o->p1, o->p2);
      const double bound = 1.0 - o->sigma * o->p2;
      t.row("kappa_sigma", v, bound, bound - std::abs(v), std::abs(v) <= bound);
      finish_checks(sub, o->common.out, t);
    });
  }
  {
    struct Opts {
      Common common;
      ScheduleFlags sched;
      double sigma = 0.5, p1 = 0.7, p2 = 0.6;
      std::vector<std::uint64_t> ns{100, 1000, 10000};
      std::size_t points = 200;
    };
    auto o = std::make_shared<Opts>();
    o->sched.s = StepSchedule{1.0, 1.0, 0.5, 0.5, 0};
    auto* sub = th->add_subcommand("drift", "drift decomposition phi1 + phi2 over y in [0, 1/gamma_n]");
    add_common(sub, o->common, 1);
    o->sched.add(sub);
    sub->add_option("--sigma", o->sigma);
    sub->add_option("--p1", o->p1);
    sub->add_option("--p2", o->p2);
    sub->add_option("--n", o->ns);
    sub->add_option("--points", o->points)->check(CLI::PositiveNumber);
    sub->callback([o, sub] {
      Table t({"n", "y", "phi1", "phi2", "total"});
      for (auto n : o->ns) {
        const double top = 1.0 / o->sched.s.gamma(n);
        for (std::size_t i = 0; i <= o->points; ++i) {
          const double y = top * static_cast<double>(i) / static_cast<double>(o->points);
          const auto d = drift_profile(n, y, o->sched.s, o->sigma, o->p1, o->p2);
          t.row(n, y, d.phi1, d.phi2, d.total());
        }
      }
      emit(o->common.out, run_metadata(sub), t);
    });
  }
  {
    struct Opts {
      Common common;
      double eps = 1.0 / 3.0, pi = 0.1, gamma1 = 0.89;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("n0", "first n with 2 eps gamma1 pi sqrt(n) > 1");
    add_common(sub, o->common, 1);
    sub->add_option("--eps", o->eps);
    sub->add_option("--pi", o->pi);
    sub->add_option("--gamma1", o->gamma1);
    sub->callback([o, sub] {
      Table t = check_table();
      const auto n = n0(o->eps, o->pi, o->gamma1);
      auto lhs = [&](std::uint64_t m) { return 2.0 * o->eps * o->gamma1 * o->pi * std::sqrt(static_cast<double>(m)); };
      t.row("n0=" + std::to_string(n), lhs(n), 1.0, lhs(n) - 1.0, lhs(n) > 1.0);
      if (n > 1) t.row("n0-1", lhs(n - 1), 1.0, 1.0 - lhs(n - 1), lhs(n - 1) <= 1.0);
      finish_checks(sub, o->common.out, t);
    });
  }
  {
    struct Opts {
      Common common;
      double gamma1 = 0.89, rho_tilde = 0.38, eps = 1.0 / 3.0, p1 = 0.7, p2 = 0.6;
      std::uint64_t horizon = 100000;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("zmoment", "moment recursion for Z^(r), r = 1, 2");
    add_common(sub, o->common, 10000);
    sub->add_option("--gamma1", o->gamma1);
    sub->add_option("--rho-tilde", o->rho_tilde);
    sub->add_option("--eps", o->eps);
    sub->add_option("--p1", o->p1);
    sub->add_option("--p2", o->p2);
    sub->add_option("--horizon", o->horizon);
    sub->callback([o, sub] {
      const auto s = StepSchedule::sqrt_decay(o->gamma1, o->rho_tilde);
      const double pi = o->p1 - o->p2;
      const auto start = n0(o->eps, pi, o->gamma1);
      require(start < o->horizon, "zmoment: n0 must be below the horizon");
      std::vector<std::uint64_t> ns{start};
      for (std::uint64_t n = 512; n < o->horizon; n *= 2) {
        if (n > start) ns.push_back(n);
      }
      ns.push_back(o->horizon);
      const auto z = z_moment_estimate(3, ns, PolicyConfig::over_penalized(s, 0.0),
                                       ArmEnvironment({o->p1, o->p2}), o->common.reps, o->common.seed,
                                       o->common.workers);
      Table t = check_table();
      for (int r : {1, 2}) {
        const auto c = exponent_increase_check(z, r, o->eps, pi, s, start);
        t.row("sup_EZ_r" + std::to_string(r), c.lhs, c.rhs, c.margin, c.pass);
      }
      finish_checks(sub, o->common.out, t);
    });
  }
  {
    struct Opts {
      Common common;
      double alpha = 1.0, gamma1 = 0.5;
      std::uint64_t n_tilde = 4, n = 10000;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("sumlemma", "geometric sum against 1/alpha");
    add_common(sub, o->common, 1);
    sub->add_option("--alpha", o->alpha);
    sub->add_option("--gamma1", o->gamma1);
    sub->add_option("--n-tilde", o->n_tilde);
    sub->add_option("--n", o->n);
    sub->callback([o, sub] {
      const auto c = sum_lemma_check(o->alpha, o->gamma1, o->n_tilde, o->n);
      Table t = check_table();
      t.row("geometric_sum", static_cast<double>(c.lhs), c.bound, c.bound - static_cast<double>(c.lhs), c.pass);
      finish_checks(sub, o->common.out, t);
    });
  }
  {
    struct Opts {
      Common common;
      std::vector<double> p{0.8, 0.5, 0.3};
      double sigma = 1.0;
      StepSchedule s{0.5, 0.5, 0.6, 0.3, 0};
      std::uint64_t horizon = 1000000;
      double tol = 0.10;
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("aslimit", "median of X_n^i / rho_n against its a.s. limit");
    add_common(sub, o->common, 200);
    sub->add_option("--p", o->p);
    sub->add_option("--sigma", o->sigma);
    sub->add_option("--gamma1", o->s.gamma1);
    sub->add_option("--rho1", o->s.rho1);
    sub->add_option("--alpha", o->s.alpha);
    sub->add_option("--beta", o->s.beta);
    sub->add_option("--horizon", o->horizon);
    sub->add_option("--tol", o->tol, "relative error tolerance");
    sub->callback([o, sub] {
      const auto c = as_limit_check(o->p, o->sigma, o->s, o->horizon, o->common.reps, o->common.seed,
                                    o->common.workers);
      Table t = check_table();
      for (const auto& a : c.arms) {
        t.row("median_ratio_arm" + std::to_string(a.arm), a.median_ratio, a.target,
              o->tol - a.rel_error, a.rel_error <= o->tol);
      }
      t.row("best_arm_mass_fraction", c.best_arm_mass_fraction, 0.95, c.best_arm_mass_fraction - 0.95,
            c.best_arm_mass_fraction > 0.95);
      finish_checks(sub, o->common.out, t);
    });
  }
  {
    struct Opts {
      Common common;
      double p1 = 0.7, p2 = 0.4, gamma1 = 0.6, rho1 = 0.3, sigma = 0.5, burn_in = 0.0;
      std::vector<std::uint64_t> ns{1000, 10000, 100000};
    };
    auto o = std::make_shared<Opts>();
    auto* sub = th->add_subcommand("weaklimit", "W1 between (1 - X_n)/rho_n and the limit PDMP");
    add_common(sub, o->common, 20000);
    sub->add_option("--p1", o->p1);
    sub->add_option("--p2", o->p2);
    sub->add_option("--gamma1", o->gamma1);
    sub->add_option("--rho1", o->rho1);
    sub->add_option("--sigma", o->sigma);
    sub->add_option("--n", o->ns);
    sub->add_option("--burn-in", o->burn_in, "PDMP burn-in (0 = 40/pi)");
    sub->callback([o, sub] {
      WeakLimitOptions wo;
      wo.reps = o->common.reps;
      wo.seed = o->common.seed;
      wo.workers = o->common.workers;
      wo.burn_in = o->burn_in;
      const auto w = weak_limit_check(o->p1, o->p2, o->gamma1, o->rho1, o->sigma, o->ns, wo);
      Table t = check_table();
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double prev = k > 0 ? w[k - 1].w1 : w[k].w1;
        t.row("w1_n" + std::to_string(w[k].n), w[k].w1, prev, prev - w[k].w1, k == 0 || w[k].w1 < prev);
      }
      // The mean check is only meaningful at the largest n.
      const auto& pt = w.back();
      const double z = std::abs(pt.bandit_mean.value - pt.stationary_mean) / pt.bandit_mean.stderr_;
      t.row("mean_n" + std::to_string(pt.n), pt.bandit_mean.value, pt.stationary_mean, 3.0 - z, z <= 3.0);
      finish_checks(sub, o->common.out, t);
    });
  }
}

}  // namespace nsb::cli
