#include "experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>
#include <utility>

#include "analysis.hpp"
#include "lyapunov.hpp"
#include "problems.hpp"
#include "spectral.hpp"

namespace nagcert {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_field(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::io_error, "cannot open for writing: " + path);
  for (const std::string& line : lines) os << line << '\n';
  os.flush();
  if (!os) fail(ErrorCode::io_error, "write failed: " + path);
}

}  // namespace

void write_trace_csv(const std::vector<TraceRecord>& trace,
                     const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(trace.size() + 1);
  lines.emplace_back(kDiscreteCsvHeader);
  for (const TraceRecord& rec : trace) {
    std::string line = std::to_string(rec.k);
    for (double v : {rec.f_err, rec.grad_sq, rec.prox_grad_sq, rec.lyapunov,
                     rec.bound_f, rec.bound_grad}) {
      line += ',';
      line += format_field(v);
    }
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

void write_continuous_csv(const std::vector<ContinuousSample>& samples,
                          const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(samples.size() + 1);
  lines.emplace_back(kContinuousCsvHeader);
  for (const ContinuousSample& sm : samples) {
    std::string line = format_field(sm.t);
    for (double v : {sm.f_err, sm.lyapunov, sm.bound}) {
      line += ',';
      line += format_field(v);
    }
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

namespace {

// Eigenstructure of the extreme mode mu at each recorded index; that mode
// governs the asymptotic objective decay. k = 0 has no advancing step.
void write_spectral_csv(double mu, double s, double r,
                        const std::vector<TraceRecord>& trace,
                        const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(trace.size() + 1);
  lines.emplace_back(kSpectralCsvHeader);
  for (const TraceRecord& rec : trace) {
    if (rec.k < 1) continue;
    const ModeSpectrum mode = mode_spectrum(mu, s, r, rec.k);
    std::string line = std::to_string(rec.k);
    for (double v : {mode.trace_coefficient, mode.det_coefficient,
                     mode.discriminant, mode.modulus,
                     mode.modulus * mode.modulus,
                     modulus_sq_envelope(r, rec.k)}) {
      line += ',';
      line += format_field(v);
    }
    lines.push_back(std::move(line));
  }
  write_lines(path, lines);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_field(const std::string& field, const std::string& path) {
  if (field.empty()) return kNaN;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size())
    fail(ErrorCode::io_error, "malformed numeric field '" + field + "' in " + path);
  return v;
}

}  // namespace

ParsedTrace parse_trace_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::io_error, "cannot open trace: " + path);
  std::string line;
  if (!std::getline(is, line))
    fail(ErrorCode::io_error, "empty trace file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  ParsedTrace out;
  if (line == kDiscreteCsvHeader) {
    out.continuous = false;
  } else if (line == kContinuousCsvHeader) {
    out.continuous = true;
  } else {
    fail(ErrorCode::io_error, "unrecognized trace header in " + path);
  }

  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    const std::size_t expect = out.continuous ? 4 : 7;
    if (fields.size() != expect)
      fail(ErrorCode::io_error, "wrong field count on line " +
                                    std::to_string(line_no) + " of " + path);
    if (out.continuous) {
      ContinuousSample sm;
      sm.t = parse_field(fields[0], path);
      sm.f_err = parse_field(fields[1], path);
      sm.lyapunov = parse_field(fields[2], path);
      sm.bound = parse_field(fields[3], path);
      out.samples.push_back(sm);
    } else {
      TraceRecord rec;
      char* end = nullptr;
      rec.k = std::strtoll(fields[0].c_str(), &end, 10);
      if (end != fields[0].c_str() + fields[0].size())
        fail(ErrorCode::io_error,
             "malformed index on line " + std::to_string(line_no) + " of " + path);
      rec.f_err = parse_field(fields[1], path);
      rec.grad_sq = parse_field(fields[2], path);
      rec.prox_grad_sq = parse_field(fields[3], path);
      rec.lyapunov = parse_field(fields[4], path);
      rec.bound_f = parse_field(fields[5], path);
      rec.bound_grad = parse_field(fields[6], path);
      out.records.push_back(rec);
    }
  }
  return out;
}

namespace {

using nlohmann::json;

// ---- config handling ----------------------------------------------------

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::io_error, "cannot open config: " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    fail(ErrorCode::io_error, "config parse error in " + path + ": " + e.what());
  }
}

[[noreturn]] void config_fail(const std::string& what) {
  fail(ErrorCode::invalid_argument, "config: " + what);
}

Vec json_to_vec(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) config_fail(std::string(what) + " must be a nonempty array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_fail(std::string(what) + " must be numeric");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

struct BuiltProblem {
  bool composite = false;
  SmoothProblem smooth;   // used when !composite
  CompositeProblem comp;  // used when composite
  std::string kind;

  Eigen::Index dim() const { return composite ? comp.dim() : smooth.dim; }
  double mu() const { return composite ? comp.smooth.mu : smooth.mu; }
  double lipschitz() const {
    return composite ? comp.smooth.lipschitz : smooth.lipschitz;
  }
};

BuiltProblem build_problem(const json& cfg) {
  if (!cfg.contains("problem")) config_fail("missing problem");
  const json& p = cfg.at("problem");
  const std::string kind = p.value("kind", "");
  BuiltProblem out;
  out.kind = kind;
  if (kind == "quadratic") {
    const Vec diag = json_to_vec(p.at("hessian_diagonal"), "hessian_diagonal");
    Vec shift = Vec::Zero(diag.size());
    if (p.contains("shift")) shift = json_to_vec(p.at("shift"), "shift");
    out.smooth = make_quadratic(diag, shift);
  } else if (kind == "lasso_deblur") {
    const Vec kernel = json_to_vec(p.at("kernel"), "kernel");
    const Vec signal = json_to_vec(p.at("true_signal"), "true_signal");
    out.composite = true;
    out.comp = make_lasso_deblur(
        std::vector<double>(kernel.data(), kernel.data() + kernel.size()),
        signal, p.value("noise_seed", std::uint64_t{0}),
        p.value("l1_weight", 0.0), p.value("ridge", 0.0));
    resolve_minimizer(out.comp);
  } else if (kind == "log_sum_exp_ridge") {
    const json& ja = p.at("a");
    if (!ja.is_array() || ja.empty()) config_fail("a must be a nonempty matrix");
    const Eigen::Index rows = static_cast<Eigen::Index>(ja.size());
    const Vec first = json_to_vec(ja[0], "a row");
    Mat a(rows, first.size());
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Vec row = json_to_vec(ja[static_cast<std::size_t>(i)], "a row");
      if (row.size() != first.size()) config_fail("ragged matrix a");
      a.row(i) = row;
    }
    out.smooth = make_log_sum_exp_ridge(a, json_to_vec(p.at("b"), "b"),
                                        p.value("ridge", 0.0));
    resolve_minimizer(out.smooth);
  } else {
    config_fail("unknown problem kind '" + kind + "'");
  }
  return out;
}

double resolve_step(const json& cfg, double lipschitz) {
  if (!cfg.contains("s")) config_fail("missing s");
  const json& js = cfg.at("s");
  double value = kNaN;
  if (js.is_number())
    value = js.get<double>();
  else if (js.is_object() && js.contains("relative"))
    value = js.at("relative").get<double>() / lipschitz;
  else
    config_fail("s must be a number or {\"relative\": q}");
  // Every (s, problem) pair must satisfy s L < 1 at load time.
  return StepSize(value, lipschitz).s();
}

Vec resolve_x0(const json& cfg, Eigen::Index dim) {
  if (!cfg.contains("x0")) return Vec::Zero(dim);
  const json& jx = cfg.at("x0");
  if (jx.is_array()) {
    Vec v = json_to_vec(jx, "x0");
    if (v.size() != dim) config_fail("x0 dimension mismatch");
    return v;
  }
  if (jx.is_object() && jx.contains("constant"))
    return Vec::Constant(dim, jx.at("constant").get<double>());
  if (jx.is_object() && jx.contains("delta")) {
    Vec v = Vec::Zero(dim);
    v[0] = jx.at("delta").get<double>();
    return v;
  }
  config_fail("x0 must be an array, {\"constant\": c}, or {\"delta\": m}");
}

Method resolve_method(const std::string& name) {
  if (name == "gradient_descent") return Method::gradient_descent;
  if (name == "nesterov") return Method::nesterov;
  if (name == "nesterov_phase") return Method::nesterov_phase;
  if (name == "fista") return Method::fista;
  config_fail("unknown method '" + name + "'");
}

struct CheckRequests {
  bool certify = false;
  double bound_tol = 1e-8;
  double continuous_bound_tol = 1e-3;
  bool contraction = false;
  std::int64_t contraction_window = 2000;
  double contraction_tol = 1e-8;
  double continuous_contraction_tol = 1e-6;
  bool rate_fit = false;
  std::int64_t burn_in = 0;
  double floor = -1.0;
  bool has_target = false;
  double target = 0.0;
  double fit_rel_tol = 0.05;
  bool r_independence = false;
  double r_independence_tol = 0.05;
};

CheckRequests parse_checks(const json& cfg) {
  CheckRequests out;
  if (!cfg.contains("checks")) return out;
  const json& c = cfg.at("checks");
  out.certify = c.value("certify", false);
  out.bound_tol = c.value("bound_tol", 1e-8);
  out.continuous_bound_tol = c.value("continuous_bound_tol", 1e-3);
  out.contraction = c.value("contraction", false);
  out.contraction_window = c.value("contraction_window", std::int64_t{2000});
  out.contraction_tol = c.value("contraction_tol", 1e-8);
  out.continuous_contraction_tol = c.value("continuous_contraction_tol", 1e-6);
  if (c.contains("rate_fit")) {
    const json& f = c.at("rate_fit");
    out.rate_fit = true;
    out.burn_in = f.value("burn_in", std::int64_t{0});
    out.floor = f.value("floor", -1.0);
    if (f.contains("target") && f.at("target").is_number()) {
      out.has_target = true;
      out.target = f.at("target").get<double>();
    }
    out.fit_rel_tol = f.value("rel_tol", 0.05);
  }
  if (c.contains("r_independence")) {
    out.r_independence = true;
    if (c.at("r_independence").is_object())
      out.r_independence_tol = c.at("r_independence").value("rel_tol", 0.05);
  }
  return out;
}

// ---- per-run work -------------------------------------------------------

std::string format_r(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

struct RunOutput {
  double r = 2.0;
  std::string csv_name;
  std::string spectral_name;  // empty when the run has no mode table
  AsymptoticRate asym;
  std::vector<TraceRecord> trace;
  bool certified = false;
  TheoremCertificate cert;
  BoundCheck bounds;
  std::string bound_verdict = "skipped";
  bool contraction_done = false;
  ContractionCheck contraction;
  std::string contraction_verdict = "skipped";
  bool fit_done = false;
  RateFit fit;
  double fit_deviation = kNaN;
  std::string fit_verdict = "skipped";
};

std::vector<std::pair<std::int64_t, double>> objective_series(
    const std::vector<TraceRecord>& trace) {
  std::vector<std::pair<std::int64_t, double>> out;
  out.reserve(trace.size());
  for (const TraceRecord& rec : trace)
    if (std::isfinite(rec.f_err)) out.emplace_back(rec.k, rec.f_err);
  return out;
}

RunOutput discrete_run(const BuiltProblem& problem, Method method,
                       const std::string& method_name, double s, double r,
                       bool multi_r, const Vec& x0, std::int64_t max_iter,
                       std::int64_t record_every, std::int64_t start_index,
                       const CheckRequests& checks) {
  RunOutput out;
  out.r = r;
  const std::string suffix = method_name + (multi_r ? "_r" + format_r(r) : "") + ".csv";
  out.csv_name = "trace_" + suffix;
  if (!problem.composite && problem.kind == "quadratic" &&
      (method == Method::nesterov || method == Method::nesterov_phase)) {
    out.spectral_name = "spectral_" + suffix;
    out.asym = asymptotic_rate(problem.mu(), s);
  }

  RunOptions options;
  options.method = method;
  options.s = s;
  options.r = r;
  options.x0 = x0;
  options.max_iter = max_iter;
  options.record_every = record_every;
  options.start_index = start_index;
  options.with_lyapunov = checks.certify || checks.contraction;
  out.trace = problem.composite ? run(problem.comp, options)
                                : run(problem.smooth, options);

  if (checks.certify || checks.contraction) {
    out.cert = certify(problem.lipschitz(), problem.mu(), s, r, out.trace);
    out.certified = true;
    apply_bounds(out.cert, out.trace);
    if (checks.certify) {
      out.bounds = check_bounds(out.cert, out.trace, checks.bound_tol);
      out.bound_verdict = out.bounds.pass() ? "pass" : "fail";
    }
    if (checks.contraction) {
      out.contraction = check_contraction(out.cert, out.trace,
                                          checks.contraction_window,
                                          checks.contraction_tol);
      out.contraction_verdict = out.contraction.pass() ? "pass" : "fail";
    }
  }
  if (checks.rate_fit) {
    out.fit = fit_linear_rate(objective_series(out.trace), checks.burn_in,
                              checks.floor);
    out.fit_done = true;
    if (checks.has_target) {
      out.fit_deviation = std::abs(out.fit.slope - checks.target) /
                          std::abs(checks.target);
      out.fit_verdict = out.fit_deviation <= checks.fit_rel_tol ? "pass" : "fail";
    }
  }
  return out;
}

ordered_json fit_json(const RateFit& fit, double deviation,
                      const std::string& verdict) {
  ordered_json j;
  j["slope"] = fit.slope;
  j["intercept"] = fit.intercept;
  j["r_squared"] = fit.r_squared;
  j["burn_in"] = fit.burn_in;
  j["n_points"] = fit.n_points;
  if (std::isfinite(deviation)) j["target_deviation"] = deviation;
  j["verdict"] = verdict;
  return j;
}

ordered_json run_json(const RunOutput& out, const std::string& method_name,
                      double s, const std::string& theorem_key) {
  ordered_json j;
  j["method"] = method_name;
  j["s"] = s;
  j["r"] = out.r;
  j["csv"] = out.csv_name;
  if (!out.spectral_name.empty()) {
    j["spectral_csv"] = out.spectral_name;
    ordered_json a;
    a["real_part_limit"] = out.asym.real_part_limit;
    a["modulus_limit"] = out.asym.modulus_limit;
    a["f_error_rate"] = out.asym.f_error_rate;
    j["asymptotic"] = std::move(a);
  }
  if (out.certified) {
    j["K"] = out.cert.K;
    j["rate_base"] = out.cert.rate;
    j["anchor_k"] = out.cert.anchor_k;
    j["anchor_energy"] = out.cert.anchor_energy;
  }
  if (out.bound_verdict != "skipped") {
    ordered_json b;
    b["checked"] = out.bounds.checked;
    b["objective_violations"] = out.bounds.objective_violations;
    b["gradient_violations"] = out.bounds.gradient_violations;
    b["max_objective_ratio"] = out.bounds.max_objective_ratio;
    b["max_gradient_ratio"] = out.bounds.max_gradient_ratio;
    b["verdict"] = out.bound_verdict;
    j[theorem_key] = std::move(b);
  }
  if (out.contraction_verdict != "skipped") {
    ordered_json c;
    c["checked"] = out.contraction.checked;
    c["violations"] = out.contraction.violations;
    c["max_scaled_violation"] = out.contraction.max_scaled_violation;
    c["verdict"] = out.contraction_verdict;
    j["contraction"] = std::move(c);
  }
  if (out.fit_done) j["rate_fit"] = fit_json(out.fit, out.fit_deviation, out.fit_verdict);
  return j;
}

void merge_verdict(ordered_json& verdicts, const std::string& key,
                   const std::string& verdict) {
  if (verdict == "skipped") return;
  const std::string prev = verdicts.value(key, "skipped");
  if (prev == "fail" || verdict == "fail")
    verdicts[key] = "fail";
  else
    verdicts[key] = "pass";
}

std::string resolve_out_dir(const json& cfg, const std::string& out_override) {
  if (!out_override.empty()) return out_override;
  if (const char* env = std::getenv("NAGCERT_OUT"); env && *env) return env;
  if (cfg.contains("out_dir")) return cfg.at("out_dir").get<std::string>();
  return "nagcert_out";
}

}  // namespace

ExperimentResult run_experiment_file(const std::string& config_path,
                                     const std::string& out_override,
                                     int jobs) {
  const json cfg = load_config(config_path);
  const std::string method_name = cfg.value("method", "");
  const CheckRequests checks = parse_checks(cfg);

  ExperimentResult result;
  result.out_dir = resolve_out_dir(cfg, out_override);
  std::error_code ec;
  fs::create_directories(result.out_dir, ec);
  if (ec)
    fail(ErrorCode::io_error,
         "cannot create output directory " + result.out_dir + ": " + ec.message());

  ordered_json report;
  ordered_json verdicts = ordered_json::object();

  if (method_name == "ode") {
    BuiltProblem problem = build_problem(cfg);
    if (problem.composite)
      config_fail("the continuous model runs on smooth problems only");
    if (!problem.smooth.resolved()) resolve_minimizer(problem.smooth);
    const double s = resolve_step(cfg, problem.lipschitz());
    const json ode_cfg = cfg.value("ode", json::object());
    ContinuousTrace trace = integrate(
        problem.smooth, s, resolve_x0(cfg, problem.dim()),
        ode_cfg.value("t0", -1.0), ode_cfg.value("t_end", 0.0),
        ode_cfg.value("dt", 0.0), ode_cfg.value("sample_every", std::int64_t{1}));

    ordered_json rj;
    rj["method"] = "ode";
    rj["s"] = s;
    rj["csv"] = "trace_ode.csv";
    if (checks.certify) {
      const ContinuousBoundCheck bc =
          check_continuous_bound(trace, problem.mu(), checks.continuous_bound_tol);
      ordered_json b;
      b["decay_time"] = bc.decay_time;
      b["anchor_t"] = bc.anchor_t;
      b["anchor_energy"] = bc.anchor_energy;
      b["checked"] = bc.checked;
      b["violations"] = bc.violations;
      b["max_ratio"] = bc.max_ratio;
      b["verdict"] = bc.pass() ? "pass" : "fail";
      rj["theorem3"] = b;
      merge_verdict(verdicts, "theorem3", b["verdict"].get<std::string>());
    }
    if (checks.contraction) {
      const ContinuousContractionCheck cc = check_continuous_contraction(
          trace, problem.mu(), checks.continuous_contraction_tol);
      ordered_json c;
      c["checked"] = cc.checked;
      c["violations"] = cc.violations;
      c["max_scaled_increase"] = cc.max_scaled_increase;
      c["verdict"] = cc.pass() ? "pass" : "fail";
      rj["contraction"] = c;
      merge_verdict(verdicts, "contraction", c["verdict"].get<std::string>());
    }
    const std::string csv_path = (fs::path(result.out_dir) / "trace_ode.csv").string();
    write_continuous_csv(trace.samples, csv_path);
    result.csv_paths.push_back(csv_path);

    report["problem"] = {{"kind", problem.kind},
                         {"dim", problem.dim()},
                         {"mu", problem.mu()},
                         {"lipschitz", problem.lipschitz()}};
    report["runs"] = ordered_json::array({rj});
  } else {
    const Method method = resolve_method(method_name);
    BuiltProblem problem = build_problem(cfg);
    if (problem.composite && method != Method::fista)
      config_fail("composite problems are driven by fista");
    if (!problem.composite && method == Method::fista)
      config_fail("fista needs a composite problem");
    if (!problem.composite && !problem.smooth.resolved())
      resolve_minimizer(problem.smooth);
    const double s = resolve_step(cfg, problem.lipschitz());
    const Vec x0 = resolve_x0(cfg, problem.dim());
    const std::int64_t max_iter = cfg.value("max_iter", std::int64_t{0});
    const std::int64_t record_every = cfg.value("record_every", std::int64_t{0});
    const std::int64_t start_index = cfg.value("start_index", std::int64_t{0});

    std::vector<double> r_list;
    if (!cfg.contains("r")) {
      r_list.push_back(2.0);
    } else if (cfg.at("r").is_array()) {
      for (const auto& jr : cfg.at("r")) r_list.push_back(jr.get<double>());
      if (r_list.empty()) config_fail("r sweep must be nonempty");
    } else {
      r_list.push_back(cfg.at("r").get<double>());
    }
    const bool multi_r = r_list.size() > 1;

    std::vector<RunOutput> outputs(r_list.size());
    const auto work = [&](std::size_t i) {
      outputs[i] = discrete_run(problem, method, method_name, s, r_list[i],
                                multi_r, x0, max_iter, record_every,
                                start_index, checks);
    };
    if (jobs > 1 && r_list.size() > 1) {
      std::vector<std::future<void>> futures;
      futures.reserve(r_list.size());
      for (std::size_t i = 0; i < r_list.size(); ++i)
        futures.push_back(std::async(std::launch::async, work, i));
      for (auto& f : futures) f.get();
    } else {
      for (std::size_t i = 0; i < r_list.size(); ++i) work(i);
    }

    const std::string theorem_key = problem.composite ? "theorem2" : "theorem1";
    ordered_json runs = ordered_json::array();
    std::vector<RateFit> fits;
    for (const RunOutput& out : outputs) {
      const std::string csv_path = (fs::path(result.out_dir) / out.csv_name).string();
      write_trace_csv(out.trace, csv_path);
      result.csv_paths.push_back(csv_path);
      if (!out.spectral_name.empty()) {
        const std::string spectral_path =
            (fs::path(result.out_dir) / out.spectral_name).string();
        write_spectral_csv(problem.mu(), s, out.r, out.trace, spectral_path);
        result.spectral_paths.push_back(spectral_path);
      }
      runs.push_back(run_json(out, method_name, s, theorem_key));
      merge_verdict(verdicts, theorem_key, out.bound_verdict);
      merge_verdict(verdicts, "contraction", out.contraction_verdict);
      merge_verdict(verdicts, "rate_fit", out.fit_verdict);
      if (out.fit_done) fits.push_back(out.fit);
      if (out.certified && !report.contains("K")) {
        report["K"] = out.cert.K;
        report["rate_base"] = out.cert.rate;
      }
    }
    if (checks.r_independence) {
      if (fits.size() < 2)
        config_fail("r_independence needs rate_fit over an r sweep");
      const double deviation = compare_rates(fits);
      report["r_independence_deviation"] = deviation;
      merge_verdict(verdicts, "r_independence",
                    deviation <= checks.r_independence_tol ? "pass" : "fail");
    }
    report["problem"] = {{"kind", problem.kind},
                         {"dim", problem.dim()},
                         {"mu", problem.mu()},
                         {"lipschitz", problem.lipschitz()}};
    report["runs"] = std::move(runs);
  }

  report["verdicts"] = verdicts;
  result.exit_code = 0;
  for (const auto& [key, value] : verdicts.items()) {
    (void)key;
    if (value.get<std::string>() == "fail") result.exit_code = 1;
  }
  result.report = std::move(report);

  std::ofstream os(fs::path(result.out_dir) / "report.json", std::ios::binary);
  if (!os) fail(ErrorCode::io_error, "cannot write report.json in " + result.out_dir);
  os << result.report.dump(2) << '\n';
  os.flush();
  if (!os) fail(ErrorCode::io_error, "write failed: report.json");
  return result;
}

VerifyResult verify_trace_file(const std::string& csv_path,
                               const std::string& report_path) {
  const ParsedTrace trace = parse_trace_csv(csv_path);
  VerifyResult out;
  out.continuous = trace.continuous;

  if (trace.continuous) {
    bool in_bounds = false;
    double prev_energy = kNaN;
    for (const ContinuousSample& sm : trace.samples) {
      if (std::isfinite(sm.bound)) {
        ++out.bound_rows;
        if (sm.f_err > sm.bound * (1.0 + 1e-3)) ++out.bound_violations;
        if (in_bounds && prev_energy > 0.0 && sm.lyapunov > 0.0) {
          ++out.contraction_pairs;
          if (sm.lyapunov > prev_energy * (1.0 + 1e-6)) ++out.contraction_violations;
        }
        in_bounds = true;
      }
      prev_energy = sm.lyapunov;
    }
    out.contraction_checked = out.contraction_pairs > 0;
    if (out.bound_rows == 0)
      fail(ErrorCode::insufficient_data,
           "verify: " + csv_path + " carries no certified bounds to re-check");
    return out;
  }

  for (const TraceRecord& rec : trace.records) {
    if (!std::isfinite(rec.bound_f)) continue;
    ++out.bound_rows;
    if (std::isfinite(rec.f_err) && rec.f_err > rec.bound_f * (1.0 + 1e-8))
      ++out.bound_violations;
    const double grad_value =
        std::isfinite(rec.prox_grad_sq) ? rec.prox_grad_sq : rec.grad_sq;
    if (std::isfinite(rec.bound_grad) && std::isfinite(grad_value) &&
        grad_value > rec.bound_grad * (1.0 + 1e-8))
      ++out.bound_violations;
  }

  // Contraction re-check needs the certified rate and anchor; they live in
  // the run's report.json (sibling of the trace unless given explicitly).
  fs::path rp = report_path.empty()
                    ? fs::path(csv_path).parent_path() / "report.json"
                    : fs::path(report_path);
  if (fs::exists(rp)) {
    const json report = load_config(rp.string());
    const std::string base = fs::path(csv_path).filename().string();
    if (report.contains("runs")) {
      for (const auto& run : report.at("runs")) {
        if (run.value("csv", "") != base || !run.contains("rate_base")) continue;
        const double rate = run.at("rate_base").get<double>();
        const std::int64_t anchor = run.value("anchor_k", std::int64_t{0});
        for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
          const TraceRecord& a = trace.records[i];
          const TraceRecord& b = trace.records[i + 1];
          if (a.k < anchor || b.k != a.k + 1) continue;
          if (!(a.lyapunov > 0.0) || !(b.lyapunov > 0.0)) continue;
          ++out.contraction_pairs;
          if (b.lyapunov * rate > a.lyapunov * (1.0 + 1e-8))
            ++out.contraction_violations;
        }
        out.contraction_checked = out.contraction_pairs > 0;
        break;
      }
    }
  }

  if (out.bound_rows == 0 && !out.contraction_checked)
    fail(ErrorCode::insufficient_data,
         "verify: " + csv_path + " carries no certified bounds to re-check");
  return out;
}

}  // namespace nagcert
