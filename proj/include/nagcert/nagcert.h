/* Convergence-certified first-order optimization.
 *
 * C interface to the nagcert core: problem factories, accelerated-method
 * drivers, energy certificates, decay-bound evaluation, and the experiment
 * runner. All functions return a nagcert_status; any status other than
 * NAGCERT_OK leaves a thread-local message readable via nagcert_last_error.
 * Handles are opaque and owned by the caller through the matching _free. */

#ifndef NAGCERT_H
#define NAGCERT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NAGCERT_API __declspec(dllexport)
#else
#define NAGCERT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nagcert_status {
  NAGCERT_OK = 0,
  NAGCERT_INVALID_ARGUMENT = 1,
  NAGCERT_INVALID_PROBLEM = 2,
  NAGCERT_MOMENTUM_SINGULARITY = 3,
  NAGCERT_NO_CONVERGENCE = 4,
  NAGCERT_INSUFFICIENT_DATA = 5,
  NAGCERT_SEARCH_OVERFLOW = 6,
  NAGCERT_DIVERGENCE = 7,
  NAGCERT_INTEGRATOR_BLOWUP = 8,
  NAGCERT_DOMAIN_ERROR = 9,
  NAGCERT_IO_ERROR = 10,
  NAGCERT_INTERNAL_ERROR = 11
} nagcert_status;

typedef enum nagcert_method {
  NAGCERT_METHOD_GRADIENT_DESCENT = 0,
  NAGCERT_METHOD_NESTEROV = 1,
  NAGCERT_METHOD_NESTEROV_PHASE = 2,
  NAGCERT_METHOD_FISTA = 3
} nagcert_method;

typedef struct nagcert_problem nagcert_problem;
typedef struct nagcert_trace nagcert_trace;

/* Stable name for a status value ("invalid_argument", ...). */
NAGCERT_API const char* nagcert_status_name(nagcert_status status);

/* Message from the last failing call on this thread; empty after success. */
NAGCERT_API const char* nagcert_last_error(void);

/* f(x) = sum_i diagonal_i (x_i - shift_i)^2. shift may be NULL for zero.
 * The minimizer is analytic, so the problem arrives ready to run. */
NAGCERT_API nagcert_status nagcert_make_quadratic(const double* diagonal,
                                                  const double* shift,
                                                  size_t dim,
                                                  nagcert_problem** out);

/* Phi(x) = 1/2 ||A x - b||^2 + ridge/2 ||x||^2 + l1_weight ||x||_1 with A a
 * circular convolution by the kernel and b the blurred true signal plus
 * deterministic noise from noise_seed. The minimizer is solved numerically at
 * creation; expect the call to take time proportional to the conditioning. */
NAGCERT_API nagcert_status nagcert_make_lasso_deblur(
    const double* kernel, size_t kernel_len, const double* true_signal,
    size_t dim, uint64_t noise_seed, double l1_weight, double ridge,
    nagcert_problem** out);

NAGCERT_API void nagcert_problem_free(nagcert_problem* problem);

NAGCERT_API size_t nagcert_problem_dim(const nagcert_problem* problem);
NAGCERT_API double nagcert_problem_mu(const nagcert_problem* problem);
NAGCERT_API double nagcert_problem_lipschitz(const nagcert_problem* problem);

/* Copies the resolved minimizer into out (length dim). */
NAGCERT_API nagcert_status nagcert_problem_minimizer(
    const nagcert_problem* problem, double* out);

/* Full objective at x, including any l1 part. */
NAGCERT_API nagcert_status nagcert_problem_value(const nagcert_problem* problem,
                                                 const double* x, double* out);

/* Cancellation-aware objective error f(x) - f(minimizer). */
NAGCERT_API nagcert_status nagcert_problem_objective_error(
    const nagcert_problem* problem, const double* x, double* out);

typedef struct nagcert_run_options {
  int method;            /* nagcert_method */
  double s;              /* step size, 0 < s * lipschitz < 1 */
  double r;              /* momentum parameter; default analysis uses 2 */
  int64_t max_iter;
  int64_t record_every;  /* 0: 1 when max_iter <= 1e5, else 10 */
  int64_t start_index;
  int with_lyapunov;     /* fill the energy column */
  int certify;           /* also attach a certificate and fill bound columns */
} nagcert_run_options;

/* Fills options with the defaults above (nesterov, r = 2, everything else
 * zero); set s and max_iter before running. */
NAGCERT_API void nagcert_run_options_init(nagcert_run_options* options);

/* Runs the method from x0 (NULL: zeros) and returns the recorded trace. */
NAGCERT_API nagcert_status nagcert_run(const nagcert_problem* problem,
                                       const nagcert_run_options* options,
                                       const double* x0, nagcert_trace** out);

NAGCERT_API void nagcert_trace_free(nagcert_trace* trace);

NAGCERT_API size_t nagcert_trace_length(const nagcert_trace* trace);

typedef struct nagcert_trace_row {
  int64_t k;
  double f_err;
  double grad_sq;       /* ||grad f(y_k)||^2 */
  double prox_grad_sq;  /* ||G(y_k)||^2; NaN for smooth runs */
  double lyapunov;      /* NaN unless with_lyapunov */
  double bound_f;       /* NaN unless certify and k >= anchor */
  double bound_grad;
} nagcert_trace_row;

NAGCERT_API nagcert_status nagcert_trace_row_at(const nagcert_trace* trace,
                                                size_t index,
                                                nagcert_trace_row* out);

/* Writes the trace in the standard CSV layout
 * (k,f_err,grad_sq,prox_grad_sq,lyapunov,bound_f,bound_grad). */
NAGCERT_API nagcert_status nagcert_trace_write_csv(const nagcert_trace* trace,
                                                   const char* path);

typedef struct nagcert_certificate {
  int64_t K;             /* first provably contracting index */
  int64_t anchor_k;      /* first recorded index >= K */
  double anchor_energy;  /* energy at the anchor */
  double rate_base;      /* per-step contraction factor */
} nagcert_certificate;

/* Certificate attached by a run with certify set; NAGCERT_INSUFFICIENT_DATA
 * when the run was not certified. */
NAGCERT_API nagcert_status nagcert_trace_certificate(const nagcert_trace* trace,
                                                     nagcert_certificate* out);

/* Smallest index from which the energy provably contracts each step. */
NAGCERT_API nagcert_status nagcert_find_K(double lipschitz, double mu, double s,
                                          double r, int64_t* out);

/* Per-step contraction factor 1 + (1 - lipschitz s) mu s / 4. */
NAGCERT_API nagcert_status nagcert_rate_base(double lipschitz, double mu,
                                             double s, double* out);

/* Least-squares slope of ln(value) against k over points with k >= burn_in
 * and value > floor (floor < 0 selects the automatic floor). r_squared_out
 * may be NULL. */
NAGCERT_API nagcert_status nagcert_fit_linear_rate(
    const int64_t* k, const double* value, size_t n, int64_t burn_in,
    double floor, double* slope_out, double* r_squared_out);

/* Runs a JSON experiment config; writes CSVs and report.json into the output
 * directory (out_dir may be NULL to use NAGCERT_OUT or the config's choice).
 * exit_code_out receives 0 iff every requested verdict passed. */
NAGCERT_API nagcert_status nagcert_run_experiment(const char* config_path,
                                                  const char* out_dir, int jobs,
                                                  int* exit_code_out);

/* Re-checks an emitted trace CSV (report_path may be NULL to look for a
 * sibling report.json). pass_out receives 1 iff no violation was found. */
NAGCERT_API nagcert_status nagcert_verify_trace(const char* csv_path,
                                                const char* report_path,
                                                int* pass_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* NAGCERT_H */
