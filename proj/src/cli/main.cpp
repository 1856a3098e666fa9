#include <iostream>
#include <string>

#include "CLI11.hpp"
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qfel/cli/config.hpp"
#include "qfel/cli/runner.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kConfig = 2;

struct Args {
  std::string config;
  std::string out;
  bool svg = false;
  bool audit = false;
};

void add_common(CLI::App* sub, Args& args, bool runs) {
  sub->add_option("--config", args.config, "job config (JSON)")->required();
  if (!runs) return;
  sub->add_option("--out", args.out, "output directory (overrides the config)");
  sub->add_flag("--svg", args.svg, "also write SVG plots");
  sub->add_flag("--audit", args.audit, "print the audit block and fail when an audit flag is raised");
}

int execute(const std::string& command, const Args& args) {
  using namespace qfel::cli;
  JobConfig job;
  try {
    job = validate_config(args.config);
    if (command != "run" && command != "validate" && command != to_string(job.kind)) {
      throw ConfigError({fmt::format("config kind '{}' does not match subcommand '{}'", to_string(job.kind), command)});
    }
  } catch (const ConfigError& e) {
    fmt::print(std::cerr, "qfel: invalid config {}\n", args.config);
    for (const auto& v : e.violations()) fmt::print(std::cerr, "  - {}\n", v);
    return kConfig;
  }
  if (command == "validate") {
    fmt::print("{}\n", job.resolved.dump(2));
    return kOk;
  }

  RunOptions options;
  options.out_dir = !args.out.empty() ? args.out : job.out.value_or("qfel-out");
  options.svg = args.svg;
  options.audit = args.audit;
  RunReport report;
  try {
    report = run(job, options);
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "qfel: {}\n", e.what());
    return kRuntime;
  }

  for (const auto& f : report.files) fmt::print("{}  {}\n", f.sha256, (options.out_dir / f.name).string());
  for (const auto& c : report.checks) {
    const std::string value = c.contains("value") ? fmt::format(" = {}", c["value"].dump()) : "";
    fmt::print("{} {}{}\n", c["pass"].get<bool>() ? "ok  " : "FAIL", c["name"].get<std::string>(), value);
  }
  if (options.audit) {
    fmt::print("audit {}\n", report.audit.dump());
    if (report.audit_flagged) {
      fmt::print(std::cerr, "qfel: audit flag raised\n");
      return kRuntime;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collective quantum FEL simulator"};
  app.require_subcommand(1);
  Args args;
  const char* commands[] = {"run", "validate", "dispersion", "gain-curve", "evolve", "variance", "averaging-check", "figure"};
  for (const char* name : commands) {
    const std::string n = name;
    auto* sub = app.add_subcommand(name, n == "run"        ? "run the job described by the config"
                                          : n == "validate" ? "validate the config and print it with defaults filled"
                                                            : "run a job of this kind");
    add_common(sub, args, n != "validate");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  return execute(app.get_subcommands().front()->get_name(), args);
}
