// Command-line driver: parses flags into a RunConfig and reports failures as a
// single JSON line on stderr.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "auditlab/pipeline.hpp"

namespace {

int report_error(const std::string& kind, const std::string& message, const std::string& command) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["command"] = command;
  std::cerr << j.dump() << '\n';
  return kind == "config" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and estimation toolkit for investor audit experiments"};
  app.set_version_flag("--version", auditlab::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  auditlab::RunConfig rc;
  std::optional<std::uint64_t> seed;
  std::string out = "out", in, config, catalog;
  std::vector<std::string> sets;
  std::optional<int> n_profiles, min_gap_days;
  unsigned threads = 0;

  app.add_option("--seed", seed, "Master seed (required for stochastic commands)");
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--in", in, "Input directory (defaults to --out)");
  app.add_option("--config", config, "Key-value parameter file merged over the defaults");
  app.add_option("--catalog", catalog, "Profile component catalog");
  app.add_option("--set", sets, "Parameter override key=value (repeatable)");
  app.add_option("--threads", threads, "Worker threads (0: all cores)")->capture_default_str();
  app.add_option("--n-profiles", n_profiles, "Profiles per evaluation session");
  app.add_option("--min-gap-days", min_gap_days, "Minimum days between emails to one investor");

  std::string fit_kind, demo_kind;
  app.add_subcommand("design", "Generate profiles, the investor list and the email schedule");
  app.add_subcommand("simulate", "Simulate evaluations, email events and donations");
  app.add_subcommand("ingest", "Parse raw outputs into analysis panels");
  auto* fit = app.add_subcommand("fit", "Run an estimator on ingested panels");
  fit->add_option("estimator", fit_kind, "ols | hetprobit | two-threshold | loo | curve")->required();
  auto* demo = app.add_subcommand("demo", "Run the Monte Carlo bias demonstrations");
  demo->add_option("kind", demo_kind, "heckman | loo (default: both)");
  app.add_subcommand("report", "Summarize panels and fits in report.txt");
  app.add_subcommand("pipeline", "design, simulate, ingest, fit and report in one run");
  app.add_subcommand("verify", "Check every file against manifest.json");

  std::string command = "auditlab";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("config", e.what(), command);
  }

  command = app.get_subcommands().front()->get_name();
  try {
    rc.command = command;
    rc.subcommand = command == "fit" ? fit_kind : demo_kind;
    rc.seed = seed;
    rc.out = out;
    if (!in.empty()) rc.in = in;
    if (!config.empty()) rc.config_path = config;
    if (!catalog.empty()) rc.catalog_path = catalog;
    rc.threads = threads;
    if (n_profiles) rc.overrides.emplace_back("design.n_profiles", std::to_string(*n_profiles));
    if (min_gap_days) rc.overrides.emplace_back("design.min_gap_days", std::to_string(*min_gap_days));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0)
        return report_error("config", "--set expects key=value, got '" + s + "'", command);
      rc.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    auditlab::run_pipeline(rc);
  } catch (const auditlab::Error& e) {
    return report_error(auditlab::to_string(e.kind()), e.what(), command);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), command);
  }
  return 0;
}
