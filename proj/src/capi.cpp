#include "nagcert/nagcert.h"

#include <cstring>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "analysis.hpp"
#include "error.hpp"
#include "experiment.hpp"
#include "lyapunov.hpp"
#include "optimizers.hpp"
#include "problems.hpp"

// Handle definitions live here so the C surface stays opaque.
struct nagcert_problem {
  bool composite = false;
  nagcert::SmoothProblem smooth;
  nagcert::CompositeProblem comp;

  Eigen::Index dim() const;
};

struct nagcert_trace {
  std::vector<nagcert::TraceRecord> records;
  bool certified = false;
  nagcert::TheoremCertificate cert;
};

Eigen::Index nagcert_problem::dim() const {
  return composite ? comp.dim() : smooth.dim;
}

namespace {

thread_local std::string g_last_error;

template <class F>
nagcert_status guarded(F&& body) noexcept {
  try {
    body();
    g_last_error.clear();
    return NAGCERT_OK;
  } catch (const nagcert::Error& e) {
    g_last_error = e.what();
    return static_cast<nagcert_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NAGCERT_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown failure";
    return NAGCERT_INTERNAL_ERROR;
  }
}

void require(bool ok, const char* what) {
  if (!ok) nagcert::fail(nagcert::ErrorCode::invalid_argument, what);
}

nagcert::Vec to_vec(const double* data, size_t n) {
  nagcert::Vec v(static_cast<Eigen::Index>(n));
  std::memcpy(v.data(), data, n * sizeof(double));
  return v;
}

}  // namespace

extern "C" {

const char* nagcert_status_name(nagcert_status status) {
  if (status == NAGCERT_OK) return "ok";
  return nagcert::error_code_name(static_cast<nagcert::ErrorCode>(status));
}

const char* nagcert_last_error(void) { return g_last_error.c_str(); }

nagcert_status nagcert_make_quadratic(const double* diagonal,
                                      const double* shift, size_t dim,
                                      nagcert_problem** out) {
  return guarded([&] {
    require(diagonal && out && dim > 0, "nagcert_make_quadratic: null input");
    const nagcert::Vec d = to_vec(diagonal, dim);
    const nagcert::Vec sh = shift ? to_vec(shift, dim)
                                  : nagcert::Vec::Zero(d.size());
    auto problem = new nagcert_problem;
    problem->composite = false;
    problem->smooth = nagcert::make_quadratic(d, sh);
    *out = problem;
  });
}

nagcert_status nagcert_make_lasso_deblur(const double* kernel,
                                         size_t kernel_len,
                                         const double* true_signal, size_t dim,
                                         uint64_t noise_seed, double l1_weight,
                                         double ridge, nagcert_problem** out) {
  return guarded([&] {
    require(kernel && true_signal && out && kernel_len > 0 && dim > 0,
            "nagcert_make_lasso_deblur: null input");
    auto problem = new nagcert_problem;
    problem->composite = true;
    try {
      problem->comp = nagcert::make_lasso_deblur(
          std::vector<double>(kernel, kernel + kernel_len),
          to_vec(true_signal, dim), noise_seed, l1_weight, ridge);
      nagcert::resolve_minimizer(problem->comp);
    } catch (...) {
      delete problem;
      throw;
    }
    *out = problem;
  });
}

void nagcert_problem_free(nagcert_problem* problem) { delete problem; }

size_t nagcert_problem_dim(const nagcert_problem* problem) {
  return problem ? static_cast<size_t>(problem->dim()) : 0;
}

double nagcert_problem_mu(const nagcert_problem* problem) {
  if (!problem) return 0.0;
  return problem->composite ? problem->comp.smooth.mu : problem->smooth.mu;
}

double nagcert_problem_lipschitz(const nagcert_problem* problem) {
  if (!problem) return 0.0;
  return problem->composite ? problem->comp.smooth.lipschitz
                            : problem->smooth.lipschitz;
}

nagcert_status nagcert_problem_minimizer(const nagcert_problem* problem,
                                         double* out) {
  return guarded([&] {
    require(problem && out, "nagcert_problem_minimizer: null input");
    const auto& minimizer = problem->composite ? problem->comp.minimizer
                                               : problem->smooth.minimizer;
    if (!minimizer)
      nagcert::fail(nagcert::ErrorCode::insufficient_data,
                    "problem has no resolved minimizer");
    std::memcpy(out, minimizer->data(),
                static_cast<size_t>(minimizer->size()) * sizeof(double));
  });
}

nagcert_status nagcert_problem_value(const nagcert_problem* problem,
                                     const double* x, double* out) {
  return guarded([&] {
    require(problem && x && out, "nagcert_problem_value: null input");
    const nagcert::Vec xv = to_vec(x, static_cast<size_t>(problem->dim()));
    *out = problem->composite ? problem->comp.objective(xv)
                              : problem->smooth.value(xv);
  });
}

nagcert_status nagcert_problem_objective_error(const nagcert_problem* problem,
                                               const double* x, double* out) {
  return guarded([&] {
    require(problem && x && out, "nagcert_problem_objective_error: null input");
    const auto& fn = problem->composite ? problem->comp.objective_error
                                        : problem->smooth.objective_error;
    if (!fn)
      nagcert::fail(nagcert::ErrorCode::insufficient_data,
                    "problem has no resolved minimizer");
    *out = fn(to_vec(x, static_cast<size_t>(problem->dim())));
  });
}

void nagcert_run_options_init(nagcert_run_options* options) {
  if (!options) return;
  options->method = NAGCERT_METHOD_NESTEROV;
  options->s = 0.0;
  options->r = 2.0;
  options->max_iter = 0;
  options->record_every = 0;
  options->start_index = 0;
  options->with_lyapunov = 0;
  options->certify = 0;
}

nagcert_status nagcert_run(const nagcert_problem* problem,
                           const nagcert_run_options* options, const double* x0,
                           nagcert_trace** out) {
  return guarded([&] {
    require(problem && options && out, "nagcert_run: null input");
    require(options->method >= NAGCERT_METHOD_GRADIENT_DESCENT &&
                options->method <= NAGCERT_METHOD_FISTA,
            "nagcert_run: unknown method");
    nagcert::RunOptions run_options;
    run_options.method = static_cast<nagcert::Method>(options->method);
    run_options.s = options->s;
    run_options.r = options->r;
    run_options.x0 = x0 ? to_vec(x0, static_cast<size_t>(problem->dim()))
                        : nagcert::Vec::Zero(problem->dim());
    run_options.max_iter = options->max_iter;
    run_options.record_every = options->record_every;
    run_options.start_index = options->start_index;
    run_options.with_lyapunov = options->with_lyapunov || options->certify;

    auto trace = new nagcert_trace;
    try {
      trace->records = problem->composite
                           ? nagcert::run(problem->comp, run_options)
                           : nagcert::run(problem->smooth, run_options);
      if (options->certify) {
        const double lipschitz = nagcert_problem_lipschitz(problem);
        const double mu = nagcert_problem_mu(problem);
        trace->cert = nagcert::certify(lipschitz, mu, options->s, options->r,
                                       trace->records);
        nagcert::apply_bounds(trace->cert, trace->records);
        trace->certified = true;
      }
    } catch (...) {
      delete trace;
      throw;
    }
    *out = trace;
  });
}

void nagcert_trace_free(nagcert_trace* trace) { delete trace; }

size_t nagcert_trace_length(const nagcert_trace* trace) {
  return trace ? trace->records.size() : 0;
}

nagcert_status nagcert_trace_row_at(const nagcert_trace* trace, size_t index,
                                    nagcert_trace_row* out) {
  return guarded([&] {
    require(trace && out, "nagcert_trace_row_at: null input");
    require(index < trace->records.size(), "nagcert_trace_row_at: index out of range");
    const nagcert::TraceRecord& rec = trace->records[index];
    out->k = rec.k;
    out->f_err = rec.f_err;
    out->grad_sq = rec.grad_sq;
    out->prox_grad_sq = rec.prox_grad_sq;
    out->lyapunov = rec.lyapunov;
    out->bound_f = rec.bound_f;
    out->bound_grad = rec.bound_grad;
  });
}

nagcert_status nagcert_trace_write_csv(const nagcert_trace* trace,
                                       const char* path) {
  return guarded([&] {
    require(trace && path, "nagcert_trace_write_csv: null input");
    nagcert::write_trace_csv(trace->records, path);
  });
}

nagcert_status nagcert_trace_certificate(const nagcert_trace* trace,
                                         nagcert_certificate* out) {
  return guarded([&] {
    require(trace && out, "nagcert_trace_certificate: null input");
    if (!trace->certified)
      nagcert::fail(nagcert::ErrorCode::insufficient_data,
                    "trace was recorded without certification");
    out->K = trace->cert.K;
    out->anchor_k = trace->cert.anchor_k;
    out->anchor_energy = trace->cert.anchor_energy;
    out->rate_base = trace->cert.rate;
  });
}

nagcert_status nagcert_find_K(double lipschitz, double mu, double s, double r,
                              int64_t* out) {
  return guarded([&] {
    require(out != nullptr, "nagcert_find_K: null output");
    *out = nagcert::find_K(lipschitz, mu, s, r).K;
  });
}

nagcert_status nagcert_rate_base(double lipschitz, double mu, double s,
                                 double* out) {
  return guarded([&] {
    require(out != nullptr, "nagcert_rate_base: null output");
    *out = nagcert::rate_base(lipschitz, mu, s);
  });
}

nagcert_status nagcert_fit_linear_rate(const int64_t* k, const double* value,
                                       size_t n, int64_t burn_in, double floor,
                                       double* slope_out,
                                       double* r_squared_out) {
  return guarded([&] {
    require(k && value && slope_out, "nagcert_fit_linear_rate: null input");
    std::vector<std::pair<std::int64_t, double>> series;
    series.reserve(n);
    for (size_t i = 0; i < n; ++i) series.emplace_back(k[i], value[i]);
    const nagcert::RateFit fit = nagcert::fit_linear_rate(series, burn_in, floor);
    *slope_out = fit.slope;
    if (r_squared_out) *r_squared_out = fit.r_squared;
  });
}

nagcert_status nagcert_run_experiment(const char* config_path,
                                      const char* out_dir, int jobs,
                                      int* exit_code_out) {
  return guarded([&] {
    require(config_path != nullptr, "nagcert_run_experiment: null config path");
    const nagcert::ExperimentResult result = nagcert::run_experiment_file(
        config_path, out_dir ? out_dir : "", jobs);
    if (exit_code_out) *exit_code_out = result.exit_code;
  });
}

nagcert_status nagcert_verify_trace(const char* csv_path,
                                    const char* report_path, int* pass_out) {
  return guarded([&] {
    require(csv_path != nullptr, "nagcert_verify_trace: null path");
    const nagcert::VerifyResult result = nagcert::verify_trace_file(
        csv_path, report_path ? report_path : "");
    if (pass_out) *pass_out = result.pass() ? 1 : 0;
  });
}

}  // extern "C"
