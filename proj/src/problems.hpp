#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "error.hpp"

namespace nagcert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Strongly convex smooth objective with certified curvature bounds:
// mu * I <= Hessian <= lipschitz * I everywhere.
struct SmoothProblem {
  Eigen::Index dim = 0;
  double mu = 0.0;         // strong-convexity modulus used by certificates
  double lipschitz = 0.0;  // gradient Lipschitz constant used by step bounds
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  // Optional analytic Hessian-vector product; consumers fall back to central
  // differences when absent.
  std::function<Vec(const Vec&, const Vec&)> hessian_vec;
  std::optional<Vec> minimizer;
  // Cancellation-aware f(x) - f(x*); null until the minimizer is resolved.
  std::function<double(const Vec&)> objective_error;

  bool resolved() const { return minimizer.has_value() && bool(objective_error); }
};

// Composite objective Phi = f + g with smooth f and proximable g.
struct CompositeProblem {
  SmoothProblem smooth;
  std::function<double(const Vec&)> g_value;
  // prox(z, s) = argmin_u g(u) + ||u - z||^2 / (2 s)
  std::function<Vec(const Vec&, double)> prox;
  std::optional<Vec> minimizer;                       // minimizer of Phi
  std::function<double(const Vec&)> objective_error;  // Phi(x) - Phi*
  double l1_weight = 0.0;  // g = l1_weight * ||.||_1 for the built-in factories

  Eigen::Index dim() const { return smooth.dim; }
  double objective(const Vec& x) const { return smooth.value(x) + g_value(x); }
  bool resolved() const { return minimizer.has_value() && bool(objective_error); }
};

// Step length paired with the Lipschitz constant it was validated against.
// alpha = s * lipschitz is the normalized step used by scale-free bounds.
class StepSize {
 public:
  StepSize(double s, double lipschitz);
  double s() const noexcept { return s_; }
  double lipschitz() const noexcept { return lipschitz_; }
  double alpha() const noexcept { return s_ * lipschitz_; }

 private:
  double s_;
  double lipschitz_;
};

// f(x) = sum_i diagonal_i * (x_i - shift_i)^2 (no 1/2 factor), so
// mu = 2 min(diagonal), lipschitz = 2 max(diagonal), minimizer = shift.
// Arrives resolved: f* = 0 exactly, objective_error = value.
SmoothProblem make_quadratic(const Vec& hessian_diagonal, const Vec& shift);

// Phi(x) = 1/2 ||A x - b||^2 + ridge/2 ||x||^2 + l1_weight ||x||_1 where A is
// circular convolution with the given kernel (taps centered at offset
// (len-1)/2) and b = A * true_signal + deterministic noise drawn from
// noise_seed. mu = ridge; lipschitz = 1.01 * (power-iteration estimate of
// sigma_max(A)^2 + ridge). Unresolved: call resolve_minimizer before tracing.
CompositeProblem make_lasso_deblur(const std::vector<double>& kernel,
                                   const Vec& true_signal,
                                   std::uint64_t noise_seed, double l1_weight,
                                   double ridge);

// f(x) = log(sum_i exp(a_i . x + b_i)) + ridge/2 ||x||^2, with an analytic
// Hessian-vector product. mu = ridge; lipschitz = ridge + max_i ||a_i||^2.
// Unresolved: call resolve_minimizer before tracing.
SmoothProblem make_log_sum_exp_ridge(const Mat& a, const Vec& b, double ridge);

// Componentwise sign(z) * max(|z| - t, 0); the prox of t ||.||_1.
Vec soft_threshold(const Vec& z, double t);

// prox of s * g at z.
Vec prox_g(const CompositeProblem& problem, const Vec& z, double s);

// Proximal step P(x) = prox_g(x - s grad f(x), s).
Vec proximal_step(const CompositeProblem& problem, const Vec& x, double s);

// Proximal subgradient G(x) = (x - P(x)) / s; reduces to grad f when g = 0.
Vec proximal_subgradient(const CompositeProblem& problem, const Vec& x, double s);

// Deterministic Gaussian-approximating noise: each entry is a sum of 12
// uniforms minus 6, scaled by sigma. Uniforms come from the 64-bit linear
// congruential generator state <- state * 6364136223846793005 +
// 1442695040888963407 (mod 2^64), mapped to [0, 1) by dividing by 2^64.
Vec lcg_noise(std::uint64_t seed, Eigen::Index n, double sigma);

// Noise scale baked into make_lasso_deblur observations.
inline constexpr double kDeblurNoiseSigma = 1e-2;

// Iteration cap for the numeric minimizer solves below.
inline constexpr std::int64_t kMinimizerIterationCap = 10'000'000;

// Minimizer to tolerance tol on the (proximal-)gradient norm, starting from
// zero. tol < 0 selects 1e-12 * (1 + ||start||). Analytic minimizers are
// returned directly; numeric solves that hit the iteration cap throw
// NoConvergenceError carrying the best iterate.
Vec minimizer_oracle(const SmoothProblem& problem, double tol = -1.0,
                     std::int64_t max_iter = kMinimizerIterationCap);
Vec minimizer_oracle(const CompositeProblem& problem, double tol = -1.0,
                     std::int64_t max_iter = kMinimizerIterationCap);

// Fills minimizer and objective_error if unset. Problems are immutable and
// safe to share once resolved.
void resolve_minimizer(SmoothProblem& problem, double tol = -1.0);
void resolve_minimizer(CompositeProblem& problem, double tol = -1.0);

}  // namespace nagcert
