#pragma once

#include <fstream>
#include <memory>

#include "cli_common.hpp"
#include "json.hpp"

namespace nsb::cli {

inline nlohmann::json to_json(const acceptance::Result& r) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& a : r.artifacts) files.push_back(a.name);
  return {{"id", r.id},         {"title", r.title},   {"pass", r.pass},
          {"value", r.value},   {"target", r.target}, {"margin", r.margin},
          {"detail", r.detail}, {"seconds", r.seconds}, {"artifacts", files}};
}

inline void register_reproduce(CLI::App& app) {
  struct Opts {
    acceptance::Options acc;
    std::string out = "results";
    std::vector<int> only;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("reproduce-all", "run the acceptance suite and write every CSV and a report");
  sub->add_option("--seed", o->acc.seed, "master seed");
  sub->add_option("--workers", o->acc.workers, "worker threads (0 = hardware concurrency)");
  sub->add_option("--out", o->out, "output directory (created if missing)");
  sub->add_option("--only", o->only, "criterion numbers to run (default all)")->check(CLI::Range(1, 12));
  sub->callback([o] {
    const std::filesystem::path dir(o->out);
    std::filesystem::create_directories(dir);
    nlohmann::json report{{"version", kVersion}, {"seed", o->acc.seed}, {"criteria", nlohmann::json::array()}};
    std::vector<int> failed;
    acceptance::run(o->acc, o->only, [&](const acceptance::Result& r) {
      std::cout << acceptance::summary_line(r) << std::endl;
      for (const auto& a : r.artifacts) write_csv(dir / a.name, a.meta, a.table);
      report["criteria"].push_back(to_json(r));
      if (!r.pass) failed.push_back(r.id);
    });
    report["all_pass"] = failed.empty();
    report["failed"] = failed;
    std::ofstream js(dir / "report.json");
    if (!js) throw ConfigError("cannot write " + (dir / "report.json").string());
    js << report.dump(2) << '\n';
    if (!failed.empty()) {
      throw AcceptanceFailure(std::to_string(failed.size()) + " acceptance criteria failed");
    }
  });
}

}  // namespace nsb::cli
