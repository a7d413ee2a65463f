#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "optimizers.hpp"
#include "ode.hpp"

namespace nagcert {

// Column layouts of emitted traces; the verifier recognizes files by them.
inline constexpr const char* kDiscreteCsvHeader =
    "k,f_err,grad_sq,prox_grad_sq,lyapunov,bound_f,bound_grad";
inline constexpr const char* kContinuousCsvHeader =
    "t,f_err,lyapunov,theorem3_bound";
// Companion table of slow-mode eigenstructure, emitted for momentum runs on
// quadratic problems.
inline constexpr const char* kSpectralCsvHeader =
    "k,trace_coefficient,det_coefficient,discriminant,modulus,modulus_sq,envelope";

// Values print with 17 significant digits so parsing them back is exact;
// unset fields (NaN) print empty.
void write_trace_csv(const std::vector<TraceRecord>& trace,
                     const std::string& path);
void write_continuous_csv(const std::vector<ContinuousSample>& samples,
                          const std::string& path);

struct ParsedTrace {
  bool continuous = false;
  std::vector<TraceRecord> records;         // discrete files
  std::vector<ContinuousSample> samples;    // continuous files
};

ParsedTrace parse_trace_csv(const std::string& path);

// Runs the experiment described by a JSON config file and writes one CSV per
// run plus report.json into the output directory; momentum runs on quadratic
// problems additionally emit a slow-mode spectral table per run. Output
// directory precedence: out_override argument, then the NAGCERT_OUT
// environment variable, then the config's out_dir, then "nagcert_out".
// jobs > 1 runs the r sweep concurrently; outputs are byte-identical either
// way. exit_code is 0 iff every requested verdict passed.
struct ExperimentResult {
  nlohmann::ordered_json report;
  int exit_code = 0;
  std::string out_dir;
  std::vector<std::string> csv_paths;
  std::vector<std::string> spectral_paths;
};

ExperimentResult run_experiment_file(const std::string& config_path,
                                     const std::string& out_override,
                                     int jobs);

// Re-checks an emitted trace from disk: bound domination for every row that
// carries bounds, and, when the sibling (or explicitly given) report.json
// identifies the run, energy contraction over consecutive rows past the
// anchor. Continuous traces are self-contained. Throws insufficient_data when
// the file carries nothing verifiable.
struct VerifyResult {
  bool continuous = false;
  std::int64_t bound_rows = 0;
  std::int64_t bound_violations = 0;
  std::int64_t contraction_pairs = 0;
  std::int64_t contraction_violations = 0;
  bool contraction_checked = false;

  bool pass() const {
    return bound_violations == 0 && contraction_violations == 0;
  }
};

VerifyResult verify_trace_file(const std::string& csv_path,
                               const std::string& report_path = "");

}  // namespace nagcert
