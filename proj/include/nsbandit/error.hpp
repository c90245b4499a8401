#pragma once

#include <stdexcept>
#include <string>

namespace nsb {

// Exit codes used by the command-line driver.
enum class ExitCode : int {
  ok = 0,
  config_error = 2,
  precondition = 3,
  invariant = 4,
  acceptance = 5,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation was violated by its caller.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An internal invariant failed at run time (simplex drift, root-finder
/// non-convergence, quadrature failure). Never expected in a correct build.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

inline void ensure(bool cond, const std::string& what) {
  if (!cond) throw InvariantError(what);
}

}  // namespace nsb
