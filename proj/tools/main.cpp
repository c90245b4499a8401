// nsbandit: command-line driver for the bandit, PDMP, coupling and theory
// experiments. Exit codes: 0 ok, 2 config error, 3 precondition, 4 invariant
// failure, 5 acceptance failure.

#include <iostream>

#include "cli_common.hpp"
#include "cmd_coupling.hpp"
#include "cmd_pdmp.hpp"
#include "cmd_regret.hpp"
#include "cmd_reproduce.hpp"
#include "cmd_theory.hpp"

namespace {

int code(nsb::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo lab for the Narendra-Shapiro bandit algorithm", "nsbandit"};
  app.set_version_flag("--version", nsb::kVersion);
  app.set_config("--config", "", "TOML/INI file; [subcommand] sections hold that subcommand's keys");
  app.allow_config_extras(false);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  nsb::cli::register_regret(app);
  nsb::cli::register_pdmp(app);
  nsb::cli::register_coupling(app);
  nsb::cli::register_theory(app);
  nsb::cli::register_reproduce(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return code(nsb::ExitCode::config_error);
  } catch (const nsb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return code(nsb::ExitCode::config_error);
  } catch (const nsb::PreconditionError& e) {
    std::cerr << "precondition violated: " << e.what() << '\n';
    return code(nsb::ExitCode::precondition);
  } catch (const nsb::InvariantError& e) {
    std::cerr << "invariant failure: " << e.what() << '\n';
    return code(nsb::ExitCode::invariant);
  } catch (const nsb::cli::AcceptanceFailure& e) {
    std::cerr << e.what() << '\n';
    return code(nsb::ExitCode::acceptance);
  }
  return code(nsb::ExitCode::ok);
}
