#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "problems.hpp"

namespace nagcert {

enum class Method { gradient_descent, nesterov, nesterov_phase, fista };

// Weight applied to x_k - x_{k-1} when forming y_k; zero at k = 1 for any r.
inline double momentum_coefficient(std::int64_t k, double r) {
  return (static_cast<double>(k) - 1.0) / (static_cast<double>(k) + r);
}

struct OptimizerState {
  std::int64_t k = 0;            // index of (x, y)
  std::int64_t start_index = 0;  // index the run began at
  double s = 0.0;
  double r = 2.0;
  Vec x;       // x_k
  Vec x_prev;  // x_{k-1}, valid once k > start_index
  Vec y;       // y_k
  Vec v;       // sqrt(s)-scaled velocity, maintained by the phase-space step

  bool has_velocity() const { return k > start_index; }
  // v_k = (x_k - x_{k-1}) / sqrt(s); returns the stored velocity when the
  // phase-space recursion maintains one.
  Vec velocity() const;
};

OptimizerState initial_state(const Vec& x0, double s, double r,
                             std::int64_t start_index = 0);

// One accelerated step from (x_k, y_k):
//   x_{k+1} = y_k - s grad f(y_k)
//   y_{k+1} = x_{k+1} + ((k+1-1)/(k+1+r)) (x_{k+1} - x_k)
void nesterov_step(const SmoothProblem& problem, OptimizerState& state);

// Same trajectory through the velocity recursion
//   v_{k+1} = v_k - ((r+1)/(k+r)) v_k - sqrt(s) grad f(y_k)
//   x_{k+1} = x_k + sqrt(s) v_{k+1}
//   y_{k+1} = x_{k+1} + ((k+1-1)/(k+1+r)) sqrt(s) v_{k+1}
// No velocity exists at the start index, so the first step is the standard
// one and seeds v from the first difference.
void nesterov_phase_step(const SmoothProblem& problem, OptimizerState& state);

// Plain descent x_{k+1} = x_k - s grad f(x_k); y tracks x.
void gradient_descent_step(const SmoothProblem& problem, OptimizerState& state);

// Accelerated proximal step x_{k+1} = prox_g(y_k - s grad f(y_k), s) with the
// same momentum update as nesterov_step.
void fista_step(const CompositeProblem& problem, OptimizerState& state);

// Scaled residual of the velocity-recursion identity
//   (k+r) v_{k+1} - (k-1) v_k = -(k+r) sqrt(s) grad f(y_k)
// between consecutive states, where k is before.k. Denominator scale is
// 1 + |k-1| ||v_k|| + |k+r| sqrt(s) ||grad f(y_k)||.
double phase_identity_residual(const OptimizerState& before,
                               const OptimizerState& after,
                               const Vec& grad_y_before);

struct TraceRecord {
  std::int64_t k = 0;
  double f_err = std::numeric_limits<double>::quiet_NaN();
  double grad_sq = std::numeric_limits<double>::quiet_NaN();       // ||grad f(y_k)||^2
  double prox_grad_sq = std::numeric_limits<double>::quiet_NaN();  // ||G(y_k)||^2
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  double bound_f = std::numeric_limits<double>::quiet_NaN();
  double bound_grad = std::numeric_limits<double>::quiet_NaN();
};

struct RunOptions {
  Method method = Method::nesterov;
  double s = 0.0;
  double r = 2.0;
  Vec x0;
  std::int64_t max_iter = 0;
  // 0 selects the default: 1 when max_iter <= 1e5, else 10. Records land at
  // start_index + j * record_every plus the final index.
  std::int64_t record_every = 0;
  std::int64_t start_index = 0;
  // Fill the Lyapunov column (defined from the first step onward).
  bool with_lyapunov = false;
};

std::int64_t effective_record_every(const RunOptions& options);

// Runs the method and returns the recorded trace. The problem must be
// resolved (objective_error present). Throws momentum_singularity when some
// executed index k in (start_index, start_index + max_iter] has k + r = 0.
std::vector<TraceRecord> run(const SmoothProblem& problem, const RunOptions& options);

// Composite overload; the method must be fista.
std::vector<TraceRecord> run(const CompositeProblem& problem, const RunOptions& options);

}  // namespace nagcert
