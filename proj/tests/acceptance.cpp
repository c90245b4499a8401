// Full acceptance suite: one PASS/FAIL line per criterion. Exit status 5 if
// any criterion fails. Optional arguments select criteria by number;
// `--log FILE` also writes the lines to FILE.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "nsbandit/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  std::ofstream log;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--log" && i + 1 < argc) {
      log.open(argv[++i]);
    } else {
      ids.push_back(std::atoi(argv[i]));
    }
  }
  nsb::acceptance::Options opt;
  int failed = 0;
  nsb::acceptance::run(opt, ids, [&](const nsb::acceptance::Result& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "  (%.1f s)", r.seconds);
    const std::string line = nsb::acceptance::summary_line(r) + secs;
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (log) log << line << std::endl;
    failed += !r.pass;
  });
  std::printf("%d criteria failed\n", failed);
  if (log) log << failed << " criteria failed\n";
  return failed ? static_cast<int>(nsb::ExitCode::acceptance) : 0;
}
