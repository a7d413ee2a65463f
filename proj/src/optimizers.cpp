#include "optimizers.hpp"

#include <cmath>
#include <utility>

#include "lyapunov.hpp"

namespace nagcert {

Vec OptimizerState::velocity() const {
  if (!has_velocity())
    fail(ErrorCode::domain_error, "velocity undefined at the start index");
  if (v.size() == x.size()) return v;
  return (x - x_prev) / std::sqrt(s);
}

OptimizerState initial_state(const Vec& x0, double s, double r,
                             std::int64_t start_index) {
  OptimizerState st;
  st.k = start_index;
  st.start_index = start_index;
  st.s = s;
  st.r = r;
  st.x = x0;
  st.y = x0;
  return st;
}

namespace {

void check_denominator(std::int64_t k, double r) {
  if (static_cast<double>(k) + r == 0.0)
    fail(ErrorCode::momentum_singularity,
         "momentum denominator k + r vanishes at k = " + std::to_string(k));
}

void advance_nesterov(OptimizerState& st, const Vec& g) {
  const std::int64_t k1 = st.k + 1;
  check_denominator(k1, st.r);
  Vec x_next = st.y - st.s * g;
  st.y = x_next + momentum_coefficient(k1, st.r) * (x_next - st.x);
  st.x_prev = std::move(st.x);
  st.x = std::move(x_next);
  st.v.resize(0);
  st.k = k1;
}

void advance_phase(OptimizerState& st, const Vec& g) {
  const double sq = std::sqrt(st.s);
  const std::int64_t k1 = st.k + 1;
  check_denominator(k1, st.r);
  if (!st.has_velocity()) {
    // Bootstrap: one standard step seeds the velocity.
    Vec x_next = st.y - st.s * g;
    Vec v_next = (x_next - st.x) / sq;
    st.y = x_next + momentum_coefficient(k1, st.r) * sq * v_next;
    st.x_prev = std::move(st.x);
    st.x = std::move(x_next);
    st.v = std::move(v_next);
    st.k = k1;
    return;
  }
  check_denominator(st.k, st.r);
  const double k = static_cast<double>(st.k);
  Vec v_next = st.v - ((st.r + 1.0) / (k + st.r)) * st.v - sq * g;
  Vec x_next = st.x + sq * v_next;
  st.y = x_next + momentum_coefficient(k1, st.r) * sq * v_next;
  st.x_prev = std::move(st.x);
  st.x = std::move(x_next);
  st.v = std::move(v_next);
  st.k = k1;
}

void advance_gradient_descent(OptimizerState& st, const Vec& g) {
  Vec x_next = st.x - st.s * g;
  st.x_prev = std::move(st.x);
  st.x = x_next;
  st.y = std::move(x_next);
  st.v.resize(0);
  ++st.k;
}

void advance_fista(OptimizerState& st, Vec prox_point) {
  const std::int64_t k1 = st.k + 1;
  check_denominator(k1, st.r);
  st.y = prox_point + momentum_coefficient(k1, st.r) * (prox_point - st.x);
  st.x_prev = std::move(st.x);
  st.x = std::move(prox_point);
  st.v.resize(0);
  st.k = k1;
}

}  // namespace

void nesterov_step(const SmoothProblem& problem, OptimizerState& st) {
  advance_nesterov(st, problem.gradient(st.y));
}

void nesterov_phase_step(const SmoothProblem& problem, OptimizerState& st) {
  advance_phase(st, problem.gradient(st.y));
}

void gradient_descent_step(const SmoothProblem& problem, OptimizerState& st) {
  advance_gradient_descent(st, problem.gradient(st.x));
}

void fista_step(const CompositeProblem& problem, OptimizerState& st) {
  const Vec g = problem.smooth.gradient(st.y);
  advance_fista(st, problem.prox(st.y - st.s * g, st.s));
}

double phase_identity_residual(const OptimizerState& before,
                               const OptimizerState& after,
                               const Vec& grad_y_before) {
  const double k = static_cast<double>(before.k);
  const double r = before.r;
  const double sq = std::sqrt(before.s);
  const Vec vk = before.velocity();
  const Vec vk1 = after.velocity();
  const Vec residual = (k + r) * vk1 - (k - 1.0) * vk + (k + r) * sq * grad_y_before;
  const double scale =
      1.0 + std::abs(k - 1.0) * vk.norm() + std::abs(k + r) * sq * grad_y_before.norm();
  return residual.norm() / scale;
}

std::int64_t effective_record_every(const RunOptions& options) {
  if (options.record_every > 0) return options.record_every;
  return options.max_iter <= 100000 ? 1 : 10;
}

namespace {

void validate_run(Eigen::Index dim, bool resolved, double lipschitz,
                  const RunOptions& o) {
  if (!resolved)
    fail(ErrorCode::invalid_problem,
         "run: problem minimizer unresolved; call resolve_minimizer first");
  StepSize validated(o.s, lipschitz);
  (void)validated;
  if (o.max_iter < 1)
    fail(ErrorCode::invalid_argument, "run: max_iter must be >= 1");
  if (o.record_every < 0)
    fail(ErrorCode::invalid_argument, "run: record_every must be >= 0");
  if (o.x0.size() != dim)
    fail(ErrorCode::invalid_argument,
         "run: x0 dimension " + std::to_string(o.x0.size()) +
             " does not match problem dimension " + std::to_string(dim));
  if (!std::isfinite(o.r))
    fail(ErrorCode::invalid_argument, "run: r must be finite");
  // Reject any schedule whose executed indices hit k + r = 0; restarting at
  // start_index > -r or choosing a non-integer r avoids the singularity.
  const double neg_r = -o.r;
  if (neg_r == std::floor(neg_r)) {
    const auto hit = static_cast<std::int64_t>(neg_r);
    if (hit >= o.start_index + 1 && hit <= o.start_index + o.max_iter)
      fail(ErrorCode::momentum_singularity,
           "run: momentum denominator k + r vanishes at executed index k = " +
               std::to_string(hit) +
               "; shift start_index past it or use a non-integer r");
  }
}

bool should_record(std::int64_t k, std::int64_t k0, std::int64_t k_end,
                   std::int64_t every) {
  return (k - k0) % every == 0 || k == k_end;
}

}  // namespace

std::vector<TraceRecord> run(const SmoothProblem& problem, const RunOptions& o) {
  if (o.method == Method::fista)
    fail(ErrorCode::invalid_argument, "run: fista requires a composite problem");
  validate_run(problem.dim, problem.resolved(), problem.lipschitz, o);
  const std::int64_t every = effective_record_every(o);
  const std::int64_t k0 = o.start_index;
  const std::int64_t k_end = k0 + o.max_iter;

  std::vector<TraceRecord> out;
  out.reserve(static_cast<std::size_t>(o.max_iter / every) + 2);
  OptimizerState st = initial_state(o.x0, o.s, o.r, k0);
  for (;;) {
    const Vec g =
        problem.gradient(o.method == Method::gradient_descent ? st.x : st.y);
    if (should_record(st.k, k0, k_end, every)) {
      TraceRecord rec;
      rec.k = st.k;
      rec.f_err = problem.objective_error(st.x);
      rec.grad_sq = g.squaredNorm();
      if (o.with_lyapunov && st.has_velocity())
        rec.lyapunov = discrete_lyapunov(problem, st).value;
      out.push_back(rec);
    }
    if (st.k == k_end) break;
    switch (o.method) {
      case Method::gradient_descent: advance_gradient_descent(st, g); break;
      case Method::nesterov: advance_nesterov(st, g); break;
      case Method::nesterov_phase: advance_phase(st, g); break;
      case Method::fista: break;  // rejected above
    }
  }
  return out;
}

std::vector<TraceRecord> run(const CompositeProblem& problem, const RunOptions& o) {
  if (o.method != Method::fista)
    fail(ErrorCode::invalid_argument,
         "run: composite problems are driven by fista; run smooth methods on "
         "the smooth part");
  validate_run(problem.dim(), problem.resolved(), problem.smooth.lipschitz, o);
  const std::int64_t every = effective_record_every(o);
  const std::int64_t k0 = o.start_index;
  const std::int64_t k_end = k0 + o.max_iter;

  std::vector<TraceRecord> out;
  out.reserve(static_cast<std::size_t>(o.max_iter / every) + 2);
  OptimizerState st = initial_state(o.x0, o.s, o.r, k0);
  for (;;) {
    const Vec g = problem.smooth.gradient(st.y);
    Vec p = problem.prox(st.y - st.s * g, st.s);
    if (should_record(st.k, k0, k_end, every)) {
      TraceRecord rec;
      rec.k = st.k;
      rec.f_err = problem.objective_error(st.x);
      rec.grad_sq = g.squaredNorm();
      rec.prox_grad_sq = ((st.y - p) / st.s).squaredNorm();
      if (o.with_lyapunov && st.has_velocity())
        rec.lyapunov = discrete_lyapunov(problem, st).value;
      out.push_back(rec);
    }
    if (st.k == k_end) break;
    advance_fista(st, std::move(p));
  }
  return out;
}

}  // namespace nagcert
