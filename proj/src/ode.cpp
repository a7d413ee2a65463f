#include "ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nagcert {

namespace {

Vec hessian_vec_or_fallback(const SmoothProblem& problem, const Vec& x, const Vec& v) {
  if (problem.hessian_vec) return problem.hessian_vec(x, v);
  const double h = 1e-6 * (1.0 + x.norm()) / (1.0 + v.norm());
  return (problem.gradient(x + h * v) - problem.gradient(x - h * v)) / (2.0 * h);
}

}  // namespace

Vec ode_rhs(const SmoothProblem& problem, const ContinuousState& state, double s) {
  if (!(state.t > 0.0))
    fail(ErrorCode::domain_error,
         "ode_rhs: the model is defined for t > 0, got t = " + std::to_string(state.t));
  if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "ode_rhs: s must be positive");
  if (state.position.size() != problem.dim || state.velocity.size() != problem.dim)
    fail(ErrorCode::invalid_argument, "ode_rhs: dimension mismatch");
  const double sq = std::sqrt(s);
  return -(3.0 / state.t) * state.velocity -
         sq * hessian_vec_or_fallback(problem, state.position, state.velocity) -
         (1.0 + 3.0 * sq / (2.0 * state.t)) * problem.gradient(state.position);
}

double continuous_lyapunov(const SmoothProblem& problem,
                           const ContinuousState& state, double s) {
  if (!problem.resolved())
    fail(ErrorCode::invalid_problem,
         "continuous_lyapunov: problem minimizer unresolved");
  if (!(state.t > 0.0))
    fail(ErrorCode::domain_error, "continuous_lyapunov: requires t > 0");
  const double sq = std::sqrt(s);
  const double t = state.t;
  const Vec coupled = t * state.velocity + 2.0 * (state.position - *problem.minimizer) +
                      t * sq * problem.gradient(state.position);
  return 2.0 * t * (t + sq) * problem.objective_error(state.position) +
         0.5 * t * t * state.velocity.squaredNorm() + 0.5 * coupled.squaredNorm();
}

namespace {

struct Grid {
  std::int64_t steps = 0;
  double dt = 0.0;
};

Grid snap_grid(double t0, double t_end, double dt) {
  const double span = t_end - t0;
  const double raw = span / dt;
  auto steps = static_cast<std::int64_t>(std::llround(raw));
  if (steps < 1 || std::abs(static_cast<double>(steps) - raw) > 1e-9 * raw)
    steps = static_cast<std::int64_t>(std::ceil(raw));
  return {steps, span / static_cast<double>(steps)};
}

void validate_integration(const SmoothProblem& problem, double s, const Vec& x0,
                          double t0, double t_end, double dt) {
  if (!problem.resolved())
    fail(ErrorCode::invalid_problem, "integrate: problem minimizer unresolved");
  if (!(s > 0.0) || !std::isfinite(s))
    fail(ErrorCode::invalid_argument, "integrate: s must be finite and positive");
  if (x0.size() != problem.dim)
    fail(ErrorCode::invalid_argument, "integrate: x0 dimension mismatch");
  if (!(t0 > 0.0))
    fail(ErrorCode::invalid_argument, "integrate: t0 must be positive");
  if (!(t_end > t0))
    fail(ErrorCode::invalid_argument, "integrate: t_end must exceed t0");
  const double dt_cap = std::min(
      t0 / 10.0, 0.5 / std::sqrt(problem.lipschitz) * std::min(1.0, std::sqrt(s)));
  if (!(dt > 0.0) || dt > dt_cap)
    fail(ErrorCode::invalid_argument,
         "integrate: dt must lie in (0, " + std::to_string(dt_cap) +
             "] for stability at this t0 and curvature");
}

// One classical fourth-order step of (X, V)' = (V, rhs).
void rk4_step(const SmoothProblem& problem, double s, double t, Vec& x, Vec& v,
              double dt) {
  const auto accel = [&](double tt, const Vec& xx, const Vec& vv) {
    return ode_rhs(problem, {tt, xx, vv}, s);
  };
  const Vec k1x = v;
  const Vec k1v = accel(t, x, v);
  const Vec k2x = v + 0.5 * dt * k1v;
  const Vec k2v = accel(t + 0.5 * dt, x + 0.5 * dt * k1x, v + 0.5 * dt * k1v);
  const Vec k3x = v + 0.5 * dt * k2v;
  const Vec k3v = accel(t + 0.5 * dt, x + 0.5 * dt * k2x, v + 0.5 * dt * k2v);
  const Vec k4x = v + dt * k3v;
  const Vec k4v = accel(t + dt, x + dt * k3x, v + dt * k3v);
  x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

}  // namespace

ContinuousTrace integrate(const SmoothProblem& problem, double s, const Vec& x0,
                          double t0, double t_end, double dt,
                          std::int64_t sample_every) {
  if (t0 < 0.0) t0 = std::sqrt(s);
  validate_integration(problem, s, x0, t0, t_end, dt);
  if (sample_every < 1)
    fail(ErrorCode::invalid_argument, "integrate: sample_every must be >= 1");
  const Grid grid = snap_grid(t0, t_end, dt);

  ContinuousTrace trace;
  trace.s = s;
  trace.t0 = t0;
  trace.t_end = t_end;
  trace.dt = grid.dt;
  trace.samples.reserve(static_cast<std::size_t>(grid.steps / sample_every) + 2);

  Vec x = x0;
  Vec v = Vec::Zero(problem.dim);
  double t = t0;
  const double f_err0 = problem.objective_error(x0);
  const double blowup_cap = 1e10 * std::max(1.0, f_err0);

  const auto sample_at = [&](std::int64_t i) {
    ContinuousSample sm;
    sm.t = t;
    sm.f_err = problem.objective_error(x);
    sm.lyapunov = continuous_lyapunov(problem, {t, x, v}, s);
    if (!std::isfinite(sm.f_err) || !std::isfinite(sm.lyapunov) ||
        sm.f_err > blowup_cap)
      fail(ErrorCode::integrator_blowup,
           "integrate: trajectory blew up near t = " + std::to_string(t) +
               " (step " + std::to_string(i) + "); reduce dt or fix the "
               "certified curvature bounds");
    trace.samples.push_back(sm);
  };

  sample_at(0);
  for (std::int64_t i = 1; i <= grid.steps; ++i) {
    rk4_step(problem, s, t, x, v, grid.dt);
    t = t0 + static_cast<double>(i) * grid.dt;
    if (i % sample_every == 0 || i == grid.steps) sample_at(i);
  }
  trace.x_end = std::move(x);
  trace.v_end = std::move(v);
  return trace;
}

double continuous_decay_time(double mu, double s) {
  if (!(mu > 0.0) || !(s > 0.0))
    fail(ErrorCode::invalid_argument,
         "continuous_decay_time: mu and s must be positive");
  return 4.0 / (mu * std::sqrt(s));
}

ContinuousBoundCheck check_continuous_bound(ContinuousTrace& trace, double mu,
                                            double tol) {
  ContinuousBoundCheck out;
  out.decay_time = continuous_decay_time(mu, trace.s);
  const double sq = std::sqrt(trace.s);
  std::size_t a = 0;
  while (a < trace.samples.size() && trace.samples[a].t < out.decay_time) ++a;
  if (a == trace.samples.size())
    fail(ErrorCode::insufficient_data,
         "check_continuous_bound: trace ends at t = " +
             std::to_string(trace.samples.back().t) + " before the decay time " +
             std::to_string(out.decay_time));
  out.anchor_t = trace.samples[a].t;
  out.anchor_energy = trace.samples[a].lyapunov;
  for (std::size_t i = a; i < trace.samples.size(); ++i) {
    ContinuousSample& sm = trace.samples[i];
    const double bound = out.anchor_energy / (2.0 * sm.t * (sm.t + sq)) *
                         std::exp(-(mu * sq / 4.0) * (sm.t - out.anchor_t));
    sm.bound = bound;
    ++out.checked;
    if (sm.f_err > bound * (1.0 + tol)) ++out.violations;
    if (bound > 0.0) out.max_ratio = std::max(out.max_ratio, sm.f_err / bound);
  }
  return out;
}

ContinuousContractionCheck check_continuous_contraction(
    const ContinuousTrace& trace, double mu, double rel_tol) {
  ContinuousContractionCheck out;
  out.max_scaled_increase = -std::numeric_limits<double>::infinity();
  const double decay_time = continuous_decay_time(mu, trace.s);
  std::size_t a = 0;
  while (a < trace.samples.size() && trace.samples[a].t < decay_time) ++a;
  for (std::size_t i = a; i + 1 < trace.samples.size(); ++i) {
    const double e0 = trace.samples[i].lyapunov;
    const double e1 = trace.samples[i + 1].lyapunov;
    // Energies at or below zero sit past the resolution floor; skipped.
    if (!(e0 > 0.0) || !(e1 > 0.0)) continue;
    ++out.checked;
    if (e1 > e0 * (1.0 + rel_tol)) ++out.violations;
    out.max_scaled_increase = std::max(out.max_scaled_increase, (e1 - e0) / e0);
  }
  if (out.checked == 0)
    fail(ErrorCode::insufficient_data,
         "check_continuous_contraction: no consecutive samples past the decay time");
  return out;
}

double richardson_order_ratio(const SmoothProblem& problem, double s,
                              const Vec& x0, double t0, double t_end, double dt) {
  const ContinuousTrace full = integrate(problem, s, x0, t0, t_end, dt);
  const ContinuousTrace half = integrate(problem, s, x0, t0, t_end, dt / 2.0);
  const ContinuousTrace quarter = integrate(problem, s, x0, t0, t_end, dt / 4.0);
  const double coarse = (full.x_end - half.x_end).norm();
  const double fine = (half.x_end - quarter.x_end).norm();
  if (!(fine > 0.0))
    fail(ErrorCode::insufficient_data,
         "richardson_order_ratio: refinement differences at rounding level; "
         "use a coarser dt or a longer horizon");
  return coarse / fine;
}

}  // namespace nagcert
