#include "lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nagcert {

namespace {

EnergyBreakdown energy_impl(const Vec& x, const Vec& v, const Vec& xstar,
                            double f_err, std::int64_t k_index, double s,
                            double r, double mu) {
  const double k = static_cast<double>(k_index);
  const double ms = mu * s;
  if (!(ms < 1.0))
    fail(ErrorCode::domain_error,
         "discrete_lyapunov: requires mu * s < 1, got " + std::to_string(ms));
  EnergyBreakdown e;
  const double gamma = (k + r) * (2.0 * k + r) / (1.0 - ms);
  e.potential = s * gamma * f_err;
  e.kinetic = 0.5 * s * (k - 1.0) * (k - 1.0) * v.squaredNorm();
  const Vec coupled = std::sqrt(s) * (k - 1.0) * v + r * (x - xstar);
  e.mixed = 0.5 * coupled.squaredNorm();
  e.value = e.potential + e.kinetic + e.mixed;
  return e;
}

}  // namespace

EnergyBreakdown discrete_lyapunov(const SmoothProblem& problem,
                                  const OptimizerState& state, double mu) {
  if (!problem.resolved())
    fail(ErrorCode::invalid_problem,
         "discrete_lyapunov: problem minimizer unresolved");
  return energy_impl(state.x, state.velocity(), *problem.minimizer,
                     problem.objective_error(state.x), state.k, state.s,
                     state.r, mu < 0.0 ? problem.mu : mu);
}

EnergyBreakdown discrete_lyapunov(const CompositeProblem& problem,
                                  const OptimizerState& state, double mu) {
  if (!problem.resolved())
    fail(ErrorCode::invalid_problem,
         "discrete_lyapunov: problem minimizer unresolved");
  return energy_impl(state.x, state.velocity(), *problem.minimizer,
                     problem.objective_error(state.x), state.k, state.s,
                     state.r, mu < 0.0 ? problem.smooth.mu : mu);
}

namespace {

void validate_certificate_params(double lipschitz, double mu, double s) {
  if (!(mu > 0.0) || !(lipschitz >= mu))
    fail(ErrorCode::invalid_argument,
         "certificate: requires 0 < mu <= lipschitz");
  StepSize validated(s, lipschitz);
  (void)validated;
}

}  // namespace

double rate_base(double lipschitz, double mu, double s) {
  validate_certificate_params(lipschitz, mu, s);
  return 1.0 + (1.0 - lipschitz * s) * mu * s / 4.0;
}

KCertificate find_K(double lipschitz, double mu, double s, double r,
                    std::int64_t k_cap) {
  validate_certificate_params(lipschitz, mu, s);
  if (!std::isfinite(r))
    fail(ErrorCode::invalid_argument, "find_K: r must be finite");
  const double ms = mu * s;
  const double ls = lipschitz * s;
  const auto margin = [ms, ls, r](double k) {
    return (1.0 - ls) * (ms / 4.0) * (k + r) * (2.0 * k + r) -
           (4.0 * k + 3.0 * r + 2.0) + r * (1.0 - ms) * (k + r) -
           (ms * (1.0 - ls) / 4.0) * (4.0 * k + 3.0 * r + 2.0);
  };
  // The margin is quadratic in k with leading coefficient ms (1 - ls) / 2 > 0,
  // so a persistent nonnegative run exists; the cap guards degenerate inputs.
  std::int64_t run_start = -1;
  std::int64_t streak = 0;
  for (std::int64_t k = 0; k <= k_cap; ++k) {
    if (margin(static_cast<double>(k)) >= 0.0) {
      if (streak == 0) run_start = k;
      if (++streak == 101) return {run_start, ms * (1.0 - ls) / 2.0};
    } else {
      streak = 0;
    }
  }
  fail(ErrorCode::search_overflow,
       "find_K: no persistent nonnegative margin found below k = " +
           std::to_string(k_cap));
}

TheoremCertificate certify(double lipschitz, double mu, double s, double r,
                           const std::vector<TraceRecord>& trace) {
  const KCertificate kc = find_K(lipschitz, mu, s, r);
  TheoremCertificate cert;
  cert.s = s;
  cert.r = r;
  cert.lipschitz = lipschitz;
  cert.mu = mu;
  cert.K = kc.K;
  cert.rate = rate_base(lipschitz, mu, s);
  for (const TraceRecord& rec : trace) {
    if (rec.k >= kc.K && std::isfinite(rec.lyapunov)) {
      // The energy is a nonnegative gap plus squares; a measured value at or
      // below zero means the trajectory sits at the resolution floor of the
      // minimizer, and bounds anchored there would be noise.
      if (rec.lyapunov <= 0.0)
        fail(ErrorCode::insufficient_data,
             "certify: energy at k = " + std::to_string(rec.k) +
                 " is not measurably positive; the trajectory converged past "
                 "numerical resolution before K");
      cert.anchor_k = rec.k;
      cert.anchor_energy = rec.lyapunov;
      return cert;
    }
  }
  fail(ErrorCode::insufficient_data,
       "certify: no recorded energy at or past K = " + std::to_string(kc.K) +
           "; record with the Lyapunov column past K");
}

namespace {

double decay_denominator(const TheoremCertificate& cert, std::int64_t k) {
  if (k < cert.anchor_k)
    fail(ErrorCode::domain_error,
         "certified bound queried at k = " + std::to_string(k) +
             " before anchor " + std::to_string(cert.anchor_k));
  const double kk = static_cast<double>(k);
  const double j = static_cast<double>(k - cert.anchor_k);
  return (kk + cert.r) * (2.0 * kk + cert.r) * std::pow(cert.rate, j);
}

}  // namespace

double bound_objective(const TheoremCertificate& cert, std::int64_t k) {
  return cert.anchor_energy / (cert.s * decay_denominator(cert, k));
}

double bound_gradient(const TheoremCertificate& cert, std::int64_t k) {
  return 4.0 * cert.anchor_energy /
         (cert.s * cert.s * (1.0 - cert.lipschitz * cert.s) *
          decay_denominator(cert, k));
}

namespace {

double normalized_denominator(const TheoremCertificate& cert, std::int64_t k) {
  if (k < cert.anchor_k)
    fail(ErrorCode::domain_error,
         "certified bound queried at k = " + std::to_string(k) +
             " before anchor " + std::to_string(cert.anchor_k));
  const double alpha = cert.s * cert.lipschitz;
  const double rate =
      1.0 + (alpha * (1.0 - alpha) / 4.0) * (cert.mu / cert.lipschitz);
  const double kk = static_cast<double>(k);
  const double j = static_cast<double>(k - cert.anchor_k);
  return (kk + cert.r) * (2.0 * kk + cert.r) * std::pow(rate, j);
}

}  // namespace

double bound_objective_normalized(const TheoremCertificate& cert, std::int64_t k) {
  const double alpha = cert.s * cert.lipschitz;
  return cert.lipschitz * cert.anchor_energy /
         (alpha * normalized_denominator(cert, k));
}

double bound_gradient_normalized(const TheoremCertificate& cert, std::int64_t k) {
  const double alpha = cert.s * cert.lipschitz;
  return 4.0 * cert.lipschitz * cert.lipschitz * cert.anchor_energy /
         (alpha * alpha * (1.0 - alpha) * normalized_denominator(cert, k));
}

void apply_bounds(const TheoremCertificate& cert, std::vector<TraceRecord>& trace) {
  for (TraceRecord& rec : trace) {
    if (rec.k < cert.anchor_k) continue;
    rec.bound_f = bound_objective(cert, rec.k);
    rec.bound_grad = bound_gradient(cert, rec.k);
  }
}

BoundCheck check_bounds(const TheoremCertificate& cert,
                        const std::vector<TraceRecord>& trace, double tol) {
  BoundCheck out;
  for (const TraceRecord& rec : trace) {
    if (rec.k < cert.anchor_k) continue;
    const double bf = bound_objective(cert, rec.k);
    const double bg = bound_gradient(cert, rec.k);
    const double grad_value =
        std::isfinite(rec.prox_grad_sq) ? rec.prox_grad_sq : rec.grad_sq;
    if (!std::isfinite(rec.f_err) || !std::isfinite(grad_value)) continue;
    ++out.checked;
    if (rec.f_err > bf * (1.0 + tol)) ++out.objective_violations;
    if (grad_value > bg * (1.0 + tol)) ++out.gradient_violations;
    if (bf > 0.0)
      out.max_objective_ratio = std::max(out.max_objective_ratio, rec.f_err / bf);
    if (bg > 0.0)
      out.max_gradient_ratio = std::max(out.max_gradient_ratio, grad_value / bg);
  }
  if (out.checked == 0)
    fail(ErrorCode::insufficient_data,
         "check_bounds: no complete records at or past the anchor");
  return out;
}

ContractionCheck check_contraction(const TheoremCertificate& cert,
                                   const std::vector<TraceRecord>& trace,
                                   std::int64_t window, double tol) {
  ContractionCheck out;
  out.max_scaled_violation = -std::numeric_limits<double>::infinity();
  const std::int64_t k_last = cert.anchor_k + window;
  std::size_t i = 0;
  while (i < trace.size() && trace[i].k < cert.anchor_k) ++i;
  for (; i + 1 < trace.size() && trace[i].k < k_last; ++i) {
    const TraceRecord& a = trace[i];
    const TraceRecord& b = trace[i + 1];
    if (b.k != a.k + 1)
      fail(ErrorCode::invalid_argument,
           "check_contraction: record gap between k = " + std::to_string(a.k) +
               " and k = " + std::to_string(b.k) +
               "; contraction needs record_every = 1 over the window");
    if (!std::isfinite(a.lyapunov) || !std::isfinite(b.lyapunov))
      fail(ErrorCode::invalid_argument,
           "check_contraction: missing energy at k = " + std::to_string(a.k));
    // Energies at or below zero sit past the resolution floor and can neither
    // confirm nor refute contraction; they are left out of the count.
    if (!(a.lyapunov > 0.0) || !(b.lyapunov > 0.0)) continue;
    ++out.checked;
    if (b.lyapunov * cert.rate > a.lyapunov * (1.0 + tol)) ++out.violations;
    out.max_scaled_violation =
        std::max(out.max_scaled_violation,
                 (b.lyapunov * cert.rate - a.lyapunov) / a.lyapunov);
  }
  if (out.checked == 0)
    fail(ErrorCode::insufficient_data,
         "check_contraction: no consecutive records in the window");
  return out;
}

namespace {

InequalityCheck make_check(double lhs, double rhs) {
  InequalityCheck c;
  c.margin = rhs - lhs;
  c.scale = 1.0 + std::abs(lhs) + std::abs(rhs);
  return c;
}

void validate_pair(Eigen::Index dim, const Vec& x, const Vec& y, double s) {
  if (!(s > 0.0))
    fail(ErrorCode::invalid_argument, "inequality check: s must be positive");
  if (x.size() != dim || y.size() != dim)
    fail(ErrorCode::invalid_argument, "inequality check: dimension mismatch");
}

}  // namespace

InequalityCheck check_descent_inequality(const SmoothProblem& problem,
                                         const Vec& x, const Vec& y, double s) {
  validate_pair(problem.dim, x, y, s);
  const Vec g = problem.gradient(y);
  const double lhs = problem.value(y - s * g) - problem.value(x);
  const double rhs = g.dot(y - x) - 0.5 * problem.mu * (y - x).squaredNorm() -
                     (s - 0.5 * problem.lipschitz * s * s) * g.squaredNorm();
  return make_check(lhs, rhs);
}

InequalityCheck check_gradient_domination(const SmoothProblem& problem,
                                          const Vec& y, double s) {
  validate_pair(problem.dim, y, y, s);
  if (!problem.resolved())
    fail(ErrorCode::invalid_problem,
         "check_gradient_domination: problem minimizer unresolved");
  const Vec g = problem.gradient(y);
  const double lhs = 2.0 * problem.mu * problem.objective_error(y - s * g);
  const double rhs = g.squaredNorm();
  return make_check(lhs, rhs);
}

InequalityCheck check_composite_gradient_domination(
    const CompositeProblem& problem, const Vec& y, double s) {
  validate_pair(problem.dim(), y, y, s);
  if (!problem.resolved())
    fail(ErrorCode::invalid_problem,
         "check_composite_gradient_domination: problem minimizer unresolved");
  const Vec p = proximal_step(problem, y, s);
  const Vec g = (y - p) / s;
  const double lhs = 2.0 * problem.smooth.mu * problem.objective_error(p);
  const double rhs = g.squaredNorm();
  return make_check(lhs, rhs);
}

InequalityCheck check_composite_descent_inequality(
    const CompositeProblem& problem, const Vec& x, const Vec& y, double s) {
  validate_pair(problem.dim(), x, y, s);
  const Vec p = proximal_step(problem, y, s);
  const Vec g = (y - p) / s;
  const double lhs = problem.objective(p) - problem.objective(x);
  const double rhs = g.dot(y - x) - 0.5 * s * g.squaredNorm() -
                     0.5 * problem.smooth.mu * (y - x).squaredNorm();
  return make_check(lhs, rhs);
}

}  // namespace nagcert
