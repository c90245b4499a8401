#pragma once

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nsbandit/nsbandit.hpp"

namespace nsb::cli {

/// Flags shared by every subcommand.
struct Common {
  std::uint64_t seed = 1;
  std::size_t reps = 1000;
  unsigned workers = 0;
  std::string out;  // "" or "-" is stdout
};

/// A check subcommand ran to completion and its criterion failed (exit 5).
class AcceptanceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void add_common(CLI::App* sub, Common& c, std::size_t default_reps) {
  c.reps = default_reps;
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--reps,--replications", c.reps, "independent replications")->check(CLI::PositiveNumber);
  sub->add_option("--workers", c.workers, "worker threads (0 = hardware concurrency)");
  sub->add_option("--out", c.out, "output file (default stdout)");
}

inline RunOptions run_options(const Common& c, std::vector<std::uint64_t> checkpoints) {
  RunOptions ro;
  ro.reps = c.reps;
  ro.seed = c.seed;
  ro.workers = c.workers;
  ro.checkpoints = std::move(checkpoints);
  return ro;
}

/// Metadata header: version, subcommand and the effective configuration
/// (output paths left out, so a relocated run gives the same bytes).
inline Metadata run_metadata(const CLI::App* sub) {
  Metadata m{{"version", kVersion}, {"command", sub->get_name()}};
  std::istringstream cfg(sub->config_to_str(true, false));
  for (std::string line; std::getline(cfg, line);) {
    if (line.empty() || line[0] == '[' || line[0] == '#') continue;
    if (line.rfind("out=", 0) == 0 || line.rfind("surface=", 0) == 0 || line.rfind("events=", 0) == 0) continue;
    m.emplace_back("config", line);
  }
  return m;
}

inline void emit(const std::string& out, const Metadata& meta, const Table& t) {
  if (out.empty() || out == "-") {
    write_csv(std::cout, meta, t);
  } else {
    write_csv(std::filesystem::path(out), meta, t);
  }
}

/// Path next to `out` with a suffix, used for secondary tables.
inline std::string sibling(const std::string& out, const std::string& suffix) {
  if (out.empty() || out == "-") return "";
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix + ".csv")).string();
}

struct ScheduleFlags {
  StepSchedule s{};
  void add(CLI::App* sub) {
    sub->add_option("--gamma1", s.gamma1, "gamma_n = gamma1 (offset + n)^-alpha");
    sub->add_option("--rho1", s.rho1, "rho_n = rho1 (offset + n)^-beta");
    sub->add_option("--alpha", s.alpha);
    sub->add_option("--beta", s.beta);
    sub->add_option("--offset", s.offset);
  }
};

struct PolicyFlags {
  std::string policy = "over_penalized";
  double sigma = 0.0;
  double rho_ratio = 0.0;  // > 0 overrides rho1 = rho_ratio * gamma1
  ScheduleFlags sched;
  std::vector<double> p{0.7, 0.6};
  std::size_t d = 0;
  double exp3_eta = 0.0;
  bool exp3_rewards = false;

  void add(CLI::App* sub) {
    sub->add_option("--policy", policy, "over_penalized | penalized | crude | exp3 | klucb");
    sub->add_option("--sigma", sigma, "over-penalization weight in [0,1]");
    sub->add_option("--rho-ratio", rho_ratio, "set rho1 = ratio * gamma1");
    sched.add(sub);
    sub->add_option("--eta", exp3_eta, "EXP3 learning rate (0 = anytime rate)");
    sub->add_flag("--exp3-rewards", exp3_rewards, "reward-based EXP3 importance weights");
  }
  void add_env(CLI::App* sub) {
    sub->add_option("--p", p, "arm success probabilities");
    sub->add_option("--d", d, "number of arms (must match --p when given)");
  }

  PolicyConfig config() const {
    PolicyConfig c;
    c.kind = parse_policy(policy);
    c.schedule = sched.s;
    if (rho_ratio > 0.0) c.schedule.rho1 = rho_ratio * c.schedule.gamma1;
    c.sigma = c.kind == PolicyKind::penalized ? 1.0 : sigma;
    c.exp3_eta = exp3_eta;
    c.exp3_losses = !exp3_rewards;
    c.validate();
    return c;
  }
  ArmEnvironment env() const {
    if (d != 0 && d != p.size()) throw ConfigError("--d does not match the length of --p");
    ArmEnvironment e(p);
    e.validate();
    return e;
  }
};

struct PdmpFlags {
  PdmpParams p{};
  void add(CLI::App* sub) {
    sub->add_option("--a", p.a);
    sub->add_option("--b", p.b);
    sub->add_option("--c", p.c);
    sub->add_option("--g", p.g);
  }
};

inline std::vector<double> time_grid(const std::vector<double>& given, double t_max, double dt) {
  if (!given.empty()) return given;
  require(dt > 0.0 && t_max > 0.0, "time grid: t_max and dt must be positive");
  std::vector<double> ts;
  const auto k = static_cast<std::size_t>(std::floor(t_max / dt + 1e-9));
  for (std::size_t i = 1; i <= k; ++i) ts.push_back(static_cast<double>(i) * dt);
  return ts;
}

}  // namespace nsb::cli
