#pragma once

// Step-size schedules gamma_n = gamma1 (offset + n)^(-alpha) and
// rho_n = rho1 (offset + n)^(-beta).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nsbandit/error.hpp"

namespace nsb {

struct StepSchedule {
  double gamma1 = 0.89;
  double rho1 = 0.89 * 0.38;
  double alpha = 0.5;
  double beta = 0.5;
  std::uint64_t offset = 0;

  double gamma(std::uint64_t n) const noexcept {
    return gamma1 * std::pow(static_cast<double>(offset + n), -alpha);
  }
  double rho(std::uint64_t n) const noexcept {
    return rho1 * std::pow(static_cast<double>(offset + n), -beta);
  }
  /// rho1 / gamma1; the constant relating the two normalizations of 1 - X_n.
  double rho_tilde() const noexcept { return rho1 / gamma1; }

  void validate() const {
    require(gamma1 > 0.0, "schedule: gamma1 must be positive");
    require(rho1 >= 0.0 && rho1 < 1.0, "schedule: rho1 must lie in [0,1)");
    require(alpha > 0.0, "schedule: alpha must be positive");
    require(beta > 0.0, "schedule: beta must be positive");
    require(gamma(1) <= 1.0, "schedule: gamma_1 must not exceed 1");
  }

  /// Schedule used for the step-size-1/2 regret results: gamma_n = gamma1/sqrt(n),
  /// rho_n = rho_tilde * gamma_n.
  static StepSchedule sqrt_decay(double gamma1, double rho_tilde, std::uint64_t offset = 0) {
    return StepSchedule{gamma1, gamma1 * rho_tilde, 0.5, 0.5, offset};
  }
};

struct ScheduleValues {
  double gamma;
  double rho;
  double eps;  // 1/gamma_{n+1} - 1/gamma_n
};

inline ScheduleValues schedule_at(const StepSchedule& s, std::uint64_t n) {
  require(n >= 1, "schedule_at: n must be >= 1");
  const double g = s.gamma(n);
  return {g, s.rho(n), 1.0 / s.gamma(n + 1) - 1.0 / g};
}

/// gamma_n and rho_n tabulated for n = 1..horizon+1 (index 0 unused). Shared
/// read-only by all replications of a run.
class ScheduleTable {
 public:
  ScheduleTable() = default;
  ScheduleTable(const StepSchedule& s, std::uint64_t horizon) : sched_(s) {
    gamma_.resize(horizon + 2);
    rho_.resize(horizon + 2);
    gamma_[0] = rho_[0] = 0.0;
    for (std::uint64_t n = 1; n <= horizon + 1; ++n) {
      gamma_[n] = s.gamma(n);
      rho_[n] = s.rho(n);
    }
  }

  double gamma(std::uint64_t n) const noexcept { return gamma_[n]; }
  double rho(std::uint64_t n) const noexcept { return rho_[n]; }
  std::uint64_t horizon() const noexcept { return gamma_.empty() ? 0 : gamma_.size() - 2; }
  const StepSchedule& schedule() const noexcept { return sched_; }

 private:
  StepSchedule sched_{};
  std::vector<double> gamma_;
  std::vector<double> rho_;
};

}  // namespace nsb
