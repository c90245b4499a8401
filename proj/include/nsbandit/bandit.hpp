#pragma once

// Bernoulli arm environments and the sequential policies: Narendra-Shapiro
// (crude, penalized, over-penalized; two or more arms) plus EXP3 and KL-UCB
// baselines.
//
// Each NS step is a pure function of the current state and three explicit
// draws (played arm, reward, over-penalization coin), so trajectories of
// different policies can be coupled through shared randomness. The policy
// objects further down wrap these kernels for the trajectory runner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nsbandit/error.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/schedule.hpp"

namespace nsb {

// ---------------------------------------------------------------------------
// Environment

struct ArmEnvironment {
  std::vector<double> probs;

  ArmEnvironment() = default;
  explicit ArmEnvironment(std::vector<double> p) : probs(std::move(p)) { validate(); }

  std::size_t arms() const noexcept { return probs.size(); }

  void validate() const {
    require(!probs.empty(), "environment: need at least one arm");
    for (double p : probs) require(p >= 0.0 && p <= 1.0, "environment: probabilities must lie in [0,1]");
  }

  int sample(std::size_t arm, Rng& rng) const noexcept { return rng.uniform() < probs[arm] ? 1 : 0; }

  std::size_t best_arm() const noexcept {
    return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  }
  double best_prob() const noexcept { return probs[best_arm()]; }

  /// p_best - p_j for every arm.
  std::vector<double> gaps() const {
    std::vector<double> g(probs.size());
    const double best = best_prob();
    for (std::size_t j = 0; j < probs.size(); ++j) g[j] = best - probs[j];
    return g;
  }
};

// ---------------------------------------------------------------------------
// NS kernels. Arms are 0-based; arm 0 is the arm whose probability X is
// tracked in the two-armed form.

/// Crude NS: the winner's share moves a fraction gamma toward 1.
inline double crude_update(double x, double gamma, std::size_t arm, int reward) noexcept {
  if (reward == 0) return x;
  return arm == 0 ? x + gamma * (1.0 - x) : x - gamma * x;
}

/// Over-penalized two-armed step. With b_sigma = 1 on every win this is the
/// penalized scheme; with rho = 0 it is the crude scheme.
inline double over_penalized_update(double x, double gamma, double rho, std::size_t arm, int reward,
                                    int b_sigma) noexcept {
  const double ind = arm == 0 ? 1.0 : 0.0;
  double nx = x + gamma * (ind - x) * reward;
  if (reward * b_sigma == 0) nx -= gamma * rho * (arm == 0 ? x : -(1.0 - x));
  return nx;
}

/// d-armed over-penalized step, in place. The penalty gamma*rho*pi[arm] is
/// taken from the played arm and shared equally among the d-1 others.
inline void over_penalized_multi_update(std::span<double> pi, double gamma, double rho,
                                        std::size_t arm, int reward, int b_sigma) noexcept {
  const std::size_t d = pi.size();
  const double played = pi[arm];
  if (reward != 0) {
    for (std::size_t j = 0; j < d; ++j) pi[j] += gamma * ((j == arm ? 1.0 : 0.0) - pi[j]);
  }
  if (reward * b_sigma == 0) {
    const double pen = gamma * rho * played;
    const double share = pen / static_cast<double>(d - 1);
    for (std::size_t j = 0; j < d; ++j) pi[j] += j == arm ? -pen : share;
  }
}

struct NsState {
  std::uint64_t n = 0;
  std::vector<double> pi{0.5, 0.5};
  double sigma = 1.0;

  static NsState uniform(std::size_t d, double sigma) {
    require(d >= 2, "NsState: need d >= 2");
    NsState s;
    s.pi.assign(d, 1.0 / static_cast<double>(d));
    s.sigma = sigma;
    return s;
  }

  void validate(double tol = 1e-9) const {
    require(sigma >= 0.0 && sigma <= 1.0, "NsState: sigma must lie in [0,1]");
    require(pi.size() >= 2, "NsState: need d >= 2");
    double sum = 0.0;
    for (double p : pi) {
      require(p >= -tol && p <= 1.0 + tol, "NsState: probability outside [0,1]");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= tol, "NsState: probabilities do not sum to 1");
  }
};

inline void check_arm_reward(const NsState& s, std::size_t arm, int reward, int b_sigma) {
  require(arm < s.pi.size(), "step: arm index out of range");
  require(reward == 0 || reward == 1, "step: reward must be 0 or 1");
  require(b_sigma == 0 || b_sigma == 1, "step: b_sigma must be 0 or 1");
}

inline NsState step_crude(NsState s, const StepSchedule& sched, std::size_t arm, int reward) {
  require(s.pi.size() == 2, "step_crude: two-armed state required");
  check_arm_reward(s, arm, reward, 0);
  const double x = crude_update(s.pi[0], sched.gamma(s.n + 1), arm, reward);
  s.pi = {x, 1.0 - x};
  ++s.n;
  return s;
}

inline NsState step_over_penalized_two(NsState s, const StepSchedule& sched, std::size_t arm,
                                       int reward, int b_sigma) {
  require(s.pi.size() == 2, "step_over_penalized_two: two-armed state required");
  check_arm_reward(s, arm, reward, b_sigma);
  const double x = over_penalized_update(s.pi[0], sched.gamma(s.n + 1), sched.rho(s.n + 1), arm,
                                         reward, b_sigma);
  s.pi = {x, 1.0 - x};
  ++s.n;
  return s;
}

inline NsState step_over_penalized_multi(NsState s, const StepSchedule& sched, std::size_t arm,
                                         int reward, int b_sigma) {
  require(s.pi.size() >= 2, "step_over_penalized_multi: need d >= 2");
  check_arm_reward(s, arm, reward, b_sigma);
  over_penalized_multi_update(s.pi, sched.gamma(s.n + 1), sched.rho(s.n + 1), arm, reward, b_sigma);
  ++s.n;
  return s;
}

// ---------------------------------------------------------------------------
// Baselines

/// EXP3 gain update: w_I <- w_I exp(eta r / p_I) with p = w / sum(w). Weights
/// are rescaled so the largest is 1, which keeps them finite without changing
/// the induced distribution.
inline std::vector<double> step_exp3(std::vector<double> w, double eta, std::size_t arm, int reward) {
  require(eta > 0.0, "step_exp3: eta must be positive");
  require(arm < w.size(), "step_exp3: arm index out of range");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double p = w[arm] / total;
  w[arm] *= std::exp(eta * reward / p);
  const double mx = *std::max_element(w.begin(), w.end());
  for (double& v : w) v /= mx;
  return w;
}

/// Bernoulli KL divergence kl(p, q) with the 0 log 0 = 0 convention.
inline double kl_bernoulli(double p, double q) noexcept {
  constexpr double tiny = 1e-15;
  q = std::clamp(q, tiny, 1.0 - tiny);
  double v = 0.0;
  if (p > 0.0) v += p * std::log(p / q);
  if (p < 1.0) v += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return v;
}

/// max{q in [mean, 1] : count * kl(mean, q) <= log_n}. Unplayed arms get 1.
///
/// f(q) = kl(mean,q) - budget is convex and increasing on [mean, 1). Both
/// starting bounds below lie right of the root (Pinsker, and the bound
/// kl >= (1-p) log((1-p)/(1-q)) + p log p), so Newton decreases monotonically
/// onto it. Bisection takes over if a step leaves the bracket.
inline double klucb_index(double mean, std::uint64_t count, double log_n) {
  if (count == 0) return 1.0;
  if (log_n <= 0.0) return mean;
  const double budget = log_n / static_cast<double>(count);
  if (mean >= 1.0) return 1.0;
  if (mean <= 0.0) return -std::expm1(-budget);
  const double pinsker = mean + std::sqrt(budget / 2.0);
  const double tail = 1.0 - (1.0 - mean) * std::exp(-(budget - mean * std::log(mean)) / (1.0 - mean));
  double hi = std::min({pinsker, tail, std::nextafter(1.0, 0.0)});
  double lo = mean;
  double q = hi;
  // kl(mean, q) = neg_entropy - mean log q - (1-mean) log(1-q)
  const double neg_entropy = mean * std::log(mean) + (1.0 - mean) * std::log1p(-mean);
  const double ftol = 1e-14 * (1.0 + budget);
  for (int it = 0; it < 200; ++it) {
    const double f = neg_entropy - mean * std::log(q) - (1.0 - mean) * std::log1p(-q) - budget;
    if (std::abs(f) <= ftol) break;
    if (f > 0.0) hi = q; else lo = q;
    if (hi - lo <= 1e-15) break;
    const double fp = (q - mean) / (q * (1.0 - q));
    double next = fp > 0.0 ? q - f / fp : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool converged = std::abs(next - q) <= 1e-13;
    q = next;
    if (converged) break;
  }
  ensure(q >= mean && q <= 1.0, "klucb_index: root outside [mean, 1]");
  return q;
}

/// Index of the arm with the largest KL-UCB index. Unplayed arms come first
/// (forced exploration); otherwise ties go to the lowest arm index.
inline std::size_t step_klucb(std::span<const std::uint64_t> counts, std::span<const double> means,
                              std::uint64_t n) {
  require(counts.size() == means.size() && !counts.empty(), "step_klucb: size mismatch");
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] == 0) return j;
  }
  const double log_n = n > 0 ? std::log(static_cast<double>(n)) : 0.0;
  std::size_t best = 0;
  double best_idx = -1.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double idx = klucb_index(means[j], counts[j], log_n);
    if (idx > best_idx) {
      best_idx = idx;
      best = j;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Policy configuration

enum class PolicyKind { crude, penalized, over_penalized, exp3, klucb };

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::crude: return "crude";
    case PolicyKind::penalized: return "penalized";
    case PolicyKind::over_penalized: return "over_penalized";
    case PolicyKind::exp3: return "exp3";
    case PolicyKind::klucb: return "klucb";
  }
  return "?";
}

inline PolicyKind parse_policy(const std::string& s) {
  if (s == "crude") return PolicyKind::crude;
  if (s == "penalized") return PolicyKind::penalized;
  if (s == "over_penalized" || s == "over-penalized" || s == "ns") return PolicyKind::over_penalized;
  if (s == "exp3") return PolicyKind::exp3;
  if (s == "klucb" || s == "kl-ucb") return PolicyKind::klucb;
  throw ConfigError("unknown policy '" + s + "'");
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::over_penalized;
  StepSchedule schedule{};
  double sigma = 0.0;      // over_penalized only; penalized forces 1
  double exp3_eta = 0.0;   // 0 selects the anytime rate sqrt(ln d / (t d))
  bool exp3_losses = true;  // loss-based importance weights (see Exp3Policy)

  bool is_ns() const noexcept {
    return kind == PolicyKind::crude || kind == PolicyKind::penalized ||
           kind == PolicyKind::over_penalized;
  }
  double effective_sigma() const noexcept {
    return kind == PolicyKind::penalized ? 1.0 : sigma;
  }

  void validate() const {
    if (is_ns()) schedule.validate();
    require(sigma >= 0.0 && sigma <= 1.0, "policy: sigma must lie in [0,1]");
    require(exp3_eta >= 0.0, "policy: eta must be non-negative (0 = anytime)");
  }

  static PolicyConfig over_penalized(StepSchedule s, double sigma) {
    return {PolicyKind::over_penalized, s, sigma, 0.0, true};
  }
  static PolicyConfig penalized(StepSchedule s) { return {PolicyKind::penalized, s, 1.0, 0.0, true}; }
  static PolicyConfig crude(StepSchedule s) { return {PolicyKind::crude, s, 0.0, 0.0, true}; }
  static PolicyConfig exp3(bool losses = true) { return {PolicyKind::exp3, {}, 0.0, 0.0, losses}; }
  static PolicyConfig klucb() { return {PolicyKind::klucb, {}, 0.0, 0.0, true}; }
};

// ---------------------------------------------------------------------------
// Policy objects used by the runner. Interface:
//   select(rng) -> arm        draw I_{n+1} from the current distribution
//   expected(gaps) -> double  sum_j P(I_{n+1}=j) gaps[j] for the round being played
//   update(arm, reward, rng)  apply the observed reward
//   prob(j)                   current selection probability of arm j
// For deterministic policies expected() uses the arm chosen by select().

class NsTwoArmed {
 public:
  NsTwoArmed(const PolicyConfig& cfg, const ScheduleTable& table)
      : table_(&table), crude_(cfg.kind == PolicyKind::crude), sigma_(cfg.effective_sigma()) {}

  std::size_t arms() const noexcept { return 2; }
  double prob(std::size_t j) const noexcept { return j == 0 ? x_ : 1.0 - x_; }
  double expected(std::span<const double> gaps, std::size_t) const noexcept {
    return x_ * gaps[0] + (1.0 - x_) * gaps[1];
  }
  std::size_t select(Rng& rng) const noexcept { return rng.uniform() < x_ ? 0 : 1; }

  void update(std::size_t arm, int reward, Rng& rng) {
    const std::uint64_t m = ++n_;
    if (crude_) {
      x_ = crude_update(x_, table_->gamma(m), arm, reward);
    } else {
      int b = 1;
      if (reward == 1 && sigma_ < 1.0) b = sigma_ > 0.0 ? (rng.uniform() < sigma_ ? 1 : 0) : 0;
      x_ = over_penalized_update(x_, table_->gamma(m), table_->rho(m), arm, reward, b);
    }
    if (!(x_ >= -1e-12 && x_ <= 1.0 + 1e-12)) throw InvariantError("NS two-armed state left [0,1]");
  }

  double x() const noexcept { return x_; }
  std::uint64_t steps() const noexcept { return n_; }

 private:
  const ScheduleTable* table_;
  bool crude_;
  double sigma_;
  double x_ = 0.5;
  std::uint64_t n_ = 0;
};

class NsMultiArmed {
 public:
  static constexpr std::uint64_t renormalize_every = 10000;

  NsMultiArmed(const PolicyConfig& cfg, const ScheduleTable& table, std::size_t d)
      : table_(&table), sigma_(cfg.effective_sigma()), pi_(d, 1.0 / static_cast<double>(d)) {
    require(d >= 2, "NS policy: need d >= 2");
    require(cfg.kind != PolicyKind::crude, "NS policy: crude scheme is two-armed only");
  }

  std::size_t arms() const noexcept { return pi_.size(); }
  double prob(std::size_t j) const noexcept { return pi_[j]; }
  const std::vector<double>& pi() const noexcept { return pi_; }
  double expected(std::span<const double> gaps, std::size_t) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < pi_.size(); ++j) s += pi_[j] * gaps[j];
    return s;
  }
  std::size_t select(Rng& rng) const noexcept {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < pi_.size(); ++j) {
      acc += pi_[j];
      if (u < acc) return j;
    }
    return pi_.size() - 1;
  }

  void update(std::size_t arm, int reward, Rng& rng) {
    const std::uint64_t m = ++n_;
    int b = 1;
    if (reward == 1 && sigma_ < 1.0) b = sigma_ > 0.0 ? (rng.uniform() < sigma_ ? 1 : 0) : 0;
    over_penalized_multi_update(pi_, table_->gamma(m), table_->rho(m), arm, reward, b);
    if (m % renormalize_every == 0) renormalize();
  }

  std::uint64_t steps() const noexcept { return n_; }

 private:
  void renormalize() {
    double sum = 0.0;
    for (double p : pi_) {
      if (!(p >= -1e-9 && p <= 1.0 + 1e-9)) throw InvariantError("NS state left the simplex");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvariantError("NS simplex drift beyond 1e-9");
    for (double& p : pi_) p = std::clamp(p, 0.0, 1.0) / sum;
  }

  const ScheduleTable* table_;
  double sigma_;
  std::vector<double> pi_;
  std::uint64_t n_ = 0;
};

/// Anytime EXP3: p_t = softmax(eta_t * S) with eta_t = sqrt(ln d / (t d))
/// unless a fixed rate is configured. In the default loss form S_I -= (1-r)/p_I
/// (importance-weighted losses); in the gain form S_I += r/p_I, which is
/// step_exp3 iterated. The gain form has no exploration floor and its
/// estimates are heavy-tailed, so it is kept for comparison only.
class Exp3Policy {
 public:
  Exp3Policy(const PolicyConfig& cfg, std::size_t d)
      : eta_fixed_(cfg.exp3_eta),
        losses_(cfg.exp3_losses),
        scores_(d, 0.0),
        p_(d, 1.0 / static_cast<double>(d)) {
    require(d >= 2, "EXP3: need d >= 2");
  }

  std::size_t arms() const noexcept { return p_.size(); }
  double prob(std::size_t j) const noexcept { return p_[j]; }
  double expected(std::span<const double> gaps, std::size_t) const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < p_.size(); ++j) s += p_[j] * gaps[j];
    return s;
  }
  std::size_t select(Rng& rng) const noexcept {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < p_.size(); ++j) {
      acc += p_[j];
      if (u < acc) return j;
    }
    return p_.size() - 1;
  }

  void update(std::size_t arm, int reward, Rng&) {
    ++t_;
    if (losses_) {
      if (reward == 0) scores_[arm] -= 1.0 / p_[arm];
    } else if (reward != 0) {
      scores_[arm] += 1.0 / p_[arm];
    }
    refresh();
  }

 private:
  double eta(std::uint64_t t) const noexcept {
    if (eta_fixed_ > 0.0) return eta_fixed_;
    const double d = static_cast<double>(p_.size());
    return std::sqrt(std::log(d) / (static_cast<double>(t) * d));
  }
  // Distribution for round t_+1.
  void refresh() noexcept {
    const double e = eta(t_ + 1);
    const double mx = *std::max_element(scores_.begin(), scores_.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < p_.size(); ++j) {
      p_[j] = std::exp(e * (scores_[j] - mx));
      sum += p_[j];
    }
    for (double& v : p_) v /= sum;
  }

  double eta_fixed_;
  bool losses_;
  std::vector<double> scores_;
  std::vector<double> p_;
  std::uint64_t t_ = 0;
};

class KlUcbPolicy {
 public:
  explicit KlUcbPolicy(std::size_t d) : counts_(d, 0), sums_(d, 0), means_(d, 0.0) {
    require(d >= 2, "KL-UCB: need d >= 2");
  }

  std::size_t arms() const noexcept { return counts_.size(); }
  double prob(std::size_t j) const noexcept { return j == last_ ? 1.0 : 0.0; }
  double expected(std::span<const double> gaps, std::size_t chosen) const noexcept {
    return gaps[chosen];
  }
  /// Same choice as step_klucb(counts, means, t) for round t, but only the
  /// indices that can beat the running maximum are solved for: index_j > I
  /// iff count_j * kl(mean_j, I) < ln t.
  std::size_t select(Rng&) {
    const std::size_t d = counts_.size();
    for (std::size_t j = 0; j < d; ++j) {
      if (counts_[j] == 0) return last_ = j;
    }
    const double log_n = std::log(static_cast<double>(t_ + 1));
    std::size_t best = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (means_[j] > means_[best]) best = j;
    }
    double best_idx = klucb_index(means_[best], counts_[best], log_n);
    for (std::size_t j = 0; j < d; ++j) {
      if (j == best || best_idx >= 1.0) continue;
      if (static_cast<double>(counts_[j]) * kl_bernoulli(means_[j], best_idx) < log_n) {
        const double idx = klucb_index(means_[j], counts_[j], log_n);
        if (idx > best_idx || (idx == best_idx && j < best)) {
          best_idx = idx;
          best = j;
        }
      }
    }
    return last_ = best;
  }
  void update(std::size_t arm, int reward, Rng&) {
    ++t_;
    ++counts_[arm];
    sums_[arm] += static_cast<std::uint64_t>(reward);
    means_[arm] = static_cast<double>(sums_[arm]) / static_cast<double>(counts_[arm]);
  }

 private:
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> sums_;
  std::vector<double> means_;
  std::uint64_t t_ = 0;
  std::size_t last_ = 0;
};

/// Calls fn(policy&) with a freshly constructed policy of the configured kind.
/// The concrete type is a template argument of fn, so per-step dispatch is
/// static.
template <class Fn>
decltype(auto) with_policy(const PolicyConfig& cfg, const ScheduleTable& table, std::size_t d, Fn&& fn) {
  switch (cfg.kind) {
    case PolicyKind::exp3: {
      Exp3Policy p(cfg, d);
      return fn(p);
    }
    case PolicyKind::klucb: {
      KlUcbPolicy p(d);
      return fn(p);
    }
    default:
      break;
  }
  if (d == 2) {
    NsTwoArmed p(cfg, table);
    return fn(p);
  }
  NsMultiArmed p(cfg, table, d);
  return fn(p);
}

// ---------------------------------------------------------------------------
// Trajectory runner

struct TracePoint {
  std::uint64_t n = 0;
  std::vector<double> pi;              // selection distribution for round n+1
  std::uint64_t reward = 0;            // S_n
  std::vector<std::uint64_t> counts;   // pulls per arm up to n
  double occupation = 0.0;             // sum_{k<=n} sum_j P(I_k=j)(p_best - p_j)
};

struct Trace {
  std::vector<TracePoint> checkpoints;
};

inline std::vector<std::uint64_t> normalize_checkpoints(std::vector<std::uint64_t> cps,
                                                        std::uint64_t horizon) {
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  cps.erase(std::remove_if(cps.begin(), cps.end(),
                           [&](std::uint64_t n) { return n == 0 || n > horizon; }),
            cps.end());
  if (cps.empty() || cps.back() != horizon) cps.push_back(horizon);
  return cps;
}

/// Powers of two up to the horizon, plus the horizon itself.
inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t horizon) {
  std::vector<std::uint64_t> cps;
  for (std::uint64_t n = 1; n <= horizon; n *= 2) cps.push_back(n);
  return normalize_checkpoints(cps, horizon);
}

/// Drives one trajectory. obs(n, arm, reward, policy) is called after each
/// round; pre(policy, arm) is called between selection and update.
template <class Policy, class Pre, class Post>
void drive(Policy& pol, const ArmEnvironment& env, std::uint64_t horizon, Rng& rng, Pre&& pre,
           Post&& post) {
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const std::size_t arm = pol.select(rng);
    const int r = env.sample(arm, rng);
    pre(pol, arm);
    pol.update(arm, r, rng);
    post(n, arm, r, pol);
  }
}

inline Trace run_policy(const PolicyConfig& cfg, const ArmEnvironment& env, std::uint64_t horizon,
                        std::uint64_t seed, std::vector<std::uint64_t> checkpoints) {
  require(horizon >= 1, "run_policy: horizon must be >= 1");
  cfg.validate();
  env.validate();
  require(env.arms() >= 2, "run_policy: need d >= 2");
  const auto cps = normalize_checkpoints(std::move(checkpoints), horizon);
  const ScheduleTable table(cfg.schedule, cfg.is_ns() ? horizon : 0);
  const auto gaps = env.gaps();
  Rng rng(seed);
  Trace tr;
  with_policy(cfg, table, env.arms(), [&](auto& pol) {
    std::vector<std::uint64_t> counts(env.arms(), 0);
    std::uint64_t total = 0;
    double occ = 0.0;
    std::size_t next = 0;
    drive(
        pol, env, horizon, rng, [&](auto& p, std::size_t arm) { occ += p.expected(gaps, arm); },
        [&](std::uint64_t n, std::size_t arm, int r, auto& p) {
          ++counts[arm];
          total += static_cast<std::uint64_t>(r);
          if (n == cps[next]) {
            TracePoint tp;
            tp.n = n;
            tp.pi.resize(env.arms());
            for (std::size_t j = 0; j < env.arms(); ++j) tp.pi[j] = p.prob(j);
            tp.reward = total;
            tp.counts = counts;
            tp.occupation = occ;
            tr.checkpoints.push_back(std::move(tp));
            ++next;
          }
        });
  });
  return tr;
}

}  // namespace nsb
