// Command-line front end. Talks to the library exclusively through the C API;
// the only other dependencies are header-only utilities for argument and
// config parsing.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "nagcert/nagcert.h"

namespace {

// Exit codes: 0 verdicts pass, 1 a verdict failed, 2 the tool itself failed.
constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

int report_error(const char* what, nagcert_status status) {
  std::fprintf(stderr, "nagcert: %s: %s (%s)\n", what, nagcert_last_error(),
               nagcert_status_name(status));
  return kExitError;
}

// Mirrors the runner's output-directory precedence so the summary line can
// point at the report that was just written.
std::string resolve_out_dir(const std::string& config_path,
                            const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  if (const char* env = std::getenv("NAGCERT_OUT"); env && *env) return env;
  std::ifstream is(config_path);
  if (is) {
    try {
      const nlohmann::json cfg = nlohmann::json::parse(is);
      if (cfg.contains("out_dir")) return cfg.at("out_dir").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      // The library reports config problems itself; stay quiet here.
    }
  }
  return "nagcert_out";
}

int run_command(const std::string& config_path, const std::string& out_flag,
                int jobs) {
  int exit_code = 0;
  const nagcert_status status = nagcert_run_experiment(
      config_path.c_str(), out_flag.empty() ? nullptr : out_flag.c_str(), jobs,
      &exit_code);
  if (status != NAGCERT_OK) return report_error("run", status);
  const std::string out_dir = resolve_out_dir(config_path, out_flag);
  std::printf("wrote %s/report.json: verdicts %s\n", out_dir.c_str(),
              exit_code == 0 ? "pass" : "FAIL");
  return exit_code == 0 ? kExitPass : kExitFail;
}

int verify_command(const std::string& csv_path, const std::string& report_path) {
  int pass = 0;
  const nagcert_status status = nagcert_verify_trace(
      csv_path.c_str(), report_path.empty() ? nullptr : report_path.c_str(),
      &pass);
  if (status != NAGCERT_OK) return report_error("verify", status);
  std::printf("%s: %s\n", csv_path.c_str(), pass ? "verified" : "VIOLATIONS");
  return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated-gradient runs with certified convergence bounds"};
  app.require_subcommand(0, 1);

  std::string verify_only;
  app.add_option("--verify-only", verify_only,
                 "Re-check an emitted trace CSV and exit");

  std::string config_path;
  std::string out_flag;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Run a JSON experiment config");
  run->add_option("config", config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_flag,
                  "Output directory (overrides NAGCERT_OUT and the config)");
  run->add_option("--jobs", jobs, "Concurrent runs for parameter sweeps")
      ->check(CLI::PositiveNumber);

  std::string csv_path;
  std::string report_path;
  CLI::App* verify = app.add_subcommand("verify", "Re-check an emitted trace CSV");
  verify->add_option("trace", csv_path, "Trace CSV to re-check")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--report", report_path,
                     "report.json locating the run (default: sibling of the trace)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Keep the 0/1/2 exit contract: help exits 0, every parse failure exits 2.
    return app.exit(e) == 0 ? kExitPass : kExitError;
  }

  if (!verify_only.empty()) return verify_command(verify_only, report_path);
  if (run->parsed()) return run_command(config_path, out_flag, jobs);
  if (verify->parsed()) return verify_command(csv_path, report_path);
  std::fputs(app.help().c_str(), stderr);
  return kExitError;
}
