#include "doctest.h"

#include <cmath>

#include "optimizers.hpp"
#include "problems.hpp"

using namespace nagcert;

namespace {

SmoothProblem scalar_half_sq() {
  // f(x) = 0.5 x^2, mu = lipschitz = 1.
  return make_quadratic(Vec::Constant(1, 0.5), Vec::Zero(1));
}

SmoothProblem plane_quadratic() {
  Vec diag(2), shift(2);
  diag << 0.3, 0.05;
  shift << 1.0, -2.0;
  return make_quadratic(diag, shift);
}

CompositeProblem wrap_composite(SmoothProblem smooth, double l1_weight) {
  CompositeProblem p;
  p.smooth = std::move(smooth);
  p.l1_weight = l1_weight;
  p.g_value = [l1_weight](const Vec& x) { return l1_weight * x.cwiseAbs().sum(); };
  p.prox = [l1_weight](const Vec& z, double s) {
    return soft_threshold(z, l1_weight * s);
  };
  resolve_minimizer(p);
  return p;
}

}  // namespace

TEST_CASE("momentum coefficient") {
  CHECK(momentum_coefficient(1, 2.0) == 0.0);
  CHECK(momentum_coefficient(3, 2.0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(momentum_coefficient(2, -1.5) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("accelerated step reproduces the hand-computed trajectory") {
  // f = 0.5 x^2, s = 0.1, x0 = 1, r = 2:
  //   x1 = y0 - s y0 = 0.9, y1 = x1 (zero momentum at k = 1)
  //   x2 = y1 - s y1 = 0.81, y2 = x2 + (1/4)(x2 - x1) = 0.7875
  const SmoothProblem p = scalar_half_sq();
  OptimizerState st = initial_state(Vec::Constant(1, 1.0), 0.1, 2.0);
  CHECK(st.k == 0);
  CHECK(st.y[0] == 1.0);

  nesterov_step(p, st);
  CHECK(st.k == 1);
  CHECK(st.x[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(st.y[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(st.x_prev[0] == 1.0);
  CHECK(st.velocity()[0] ==
        doctest::Approx(-0.1 / std::sqrt(0.1)).epsilon(1e-15));

  nesterov_step(p, st);
  CHECK(st.k == 2);
  CHECK(st.x[0] == doctest::Approx(0.81).epsilon(1e-15));
  CHECK(st.y[0] == doctest::Approx(0.7875).epsilon(1e-15));
}

TEST_CASE("gradient descent step") {
  const SmoothProblem p = plane_quadratic();
  OptimizerState st = initial_state(Vec::Zero(2), 0.5, 2.0);
  const Vec g0 = p.gradient(Vec::Zero(2));
  gradient_descent_step(p, st);
  CHECK((st.x - (Vec::Zero(2) - 0.5 * g0)).norm() == 0.0);
  CHECK((st.y - st.x).norm() == 0.0);
}

TEST_CASE("velocity accessor requires a completed step") {
  OptimizerState st = initial_state(Vec::Zero(2), 0.5, 2.0);
  CHECK(!st.has_velocity());
  CHECK_THROWS_AS(st.velocity(), Error);
}

TEST_CASE("phase-space recursion walks the standard trajectory") {
  const SmoothProblem p = plane_quadratic();
  OptimizerState std_state = initial_state(Vec::Zero(2), 1.0, 2.0);
  OptimizerState phase_state = initial_state(Vec::Zero(2), 1.0, 2.0);

  // The bootstrap step is the standard step verbatim.
  nesterov_step(p, std_state);
  nesterov_phase_step(p, phase_state);
  CHECK((std_state.x - phase_state.x).norm() == 0.0);
  CHECK((std_state.y - phase_state.y).norm() == 0.0);

  for (int i = 0; i < 300; ++i) {
    nesterov_step(p, std_state);
    nesterov_phase_step(p, phase_state);
    const double scale = 1.0 + std_state.x.norm() + std_state.y.norm();
    CHECK((std_state.x - phase_state.x).norm() / scale <= 1e-13);
    CHECK((std_state.y - phase_state.y).norm() / scale <= 1e-13);
  }
}

TEST_CASE("velocity-recursion identity holds along the phase trajectory") {
  const SmoothProblem p = plane_quadratic();
  OptimizerState st = initial_state(Vec::Zero(2), 1.0, 2.0);
  nesterov_phase_step(p, st);
  for (int i = 0; i < 200; ++i) {
    const OptimizerState before = st;
    const Vec grad_y = p.gradient(before.y);
    nesterov_phase_step(p, st);
    CHECK(phase_identity_residual(before, st, grad_y) <= 1e-10);
  }
}

TEST_CASE("proximal acceleration with zero weight matches the smooth method") {
  const SmoothProblem smooth = plane_quadratic();
  const CompositeProblem composite = wrap_composite(plane_quadratic(), 0.0);

  OptimizerState a = initial_state(Vec::Constant(2, 3.0), 1.0, 2.0);
  OptimizerState b = initial_state(Vec::Constant(2, 3.0), 1.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    nesterov_step(smooth, a);
    fista_step(composite, b);
    CHECK(a.x[0] == b.x[0]);
    CHECK(a.x[1] == b.x[1]);
    CHECK(a.y[0] == b.y[0]);
    CHECK(a.y[1] == b.y[1]);
  }
}

TEST_CASE("proximal acceleration thresholds the smooth step") {
  const CompositeProblem p = wrap_composite(scalar_half_sq(), 1.0);
  // s = 0.5 from x0 = y0 = 2: z = 2 - 0.5*2 = 1, prox -> 0.5.
  OptimizerState st = initial_state(Vec::Constant(1, 2.0), 0.5, 2.0);
  fista_step(p, st);
  CHECK(st.x[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("record layout: stride plus the final index") {
  const SmoothProblem p = plane_quadratic();
  RunOptions opt;
  opt.s = 1.0;
  opt.x0 = Vec::Zero(2);
  opt.max_iter = 10;
  opt.record_every = 3;
  auto tr = run(p, opt);
  REQUIRE(tr.size() == 5);
  CHECK(tr[0].k == 0);
  CHECK(tr[1].k == 3);
  CHECK(tr[2].k == 6);
  CHECK(tr[3].k == 9);
  CHECK(tr[4].k == 10);

  opt.max_iter = 9;  // stride lands on the final index exactly once
  tr = run(p, opt);
  REQUIRE(tr.size() == 4);
  CHECK(tr[3].k == 9);
}

TEST_CASE("default record stride switches at 1e5 iterations") {
  RunOptions opt;
  opt.max_iter = 100000;
  CHECK(effective_record_every(opt) == 1);
  opt.max_iter = 100001;
  CHECK(effective_record_every(opt) == 10);
  opt.record_every = 7;
  CHECK(effective_record_every(opt) == 7);
}

TEST_CASE("trace rows carry objective error and gradient norms") {
  const SmoothProblem p = plane_quadratic();
  RunOptions opt;
  opt.s = 1.0;
  opt.x0 = Vec::Zero(2);
  opt.max_iter = 5;
  opt.record_every = 1;
  const auto tr = run(p, opt);
  REQUIRE(tr.size() == 6);
  CHECK(tr[0].f_err == p.objective_error(Vec::Zero(2)));
  CHECK(tr[0].grad_sq ==
        doctest::Approx(p.gradient(Vec::Zero(2)).squaredNorm()).epsilon(1e-15));
  // Lyapunov column stays empty unless requested.
  CHECK(std::isnan(tr[1].lyapunov));
  CHECK(std::isnan(tr[1].prox_grad_sq));

  RunOptions with_energy = opt;
  with_energy.with_lyapunov = true;
  const auto tr2 = run(p, with_energy);
  CHECK(std::isnan(tr2[0].lyapunov));  // no velocity at the start index
  CHECK(std::isfinite(tr2[1].lyapunov));
}

TEST_CASE("composite trace records proximal gradient norms") {
  const CompositeProblem p = wrap_composite(plane_quadratic(), 0.1);
  RunOptions opt;
  opt.method = Method::fista;
  opt.s = 1.0;
  opt.x0 = Vec::Zero(2);
  opt.max_iter = 5;
  opt.record_every = 1;
  const auto tr = run(p, opt);
  CHECK(std::isfinite(tr[0].prox_grad_sq));
  const Vec g0 = proximal_subgradient(p, Vec::Zero(2), 1.0);
  CHECK(tr[0].prox_grad_sq == doctest::Approx(g0.squaredNorm()).epsilon(1e-13));
}

TEST_CASE("start index shifts the recorded indices and the momentum schedule") {
  const SmoothProblem p = plane_quadratic();
  RunOptions opt;
  opt.s = 1.0;
  opt.x0 = Vec::Zero(2);
  opt.max_iter = 4;
  opt.record_every = 1;
  opt.start_index = 5;
  const auto tr = run(p, opt);
  REQUIRE(tr.size() == 5);
  CHECK(tr[0].k == 5);
  CHECK(tr[4].k == 9);
  CHECK(tr[0].f_err == p.objective_error(Vec::Zero(2)));
}

TEST_CASE("momentum singularity at integral negative r is rejected up front") {
  const SmoothProblem p = plane_quadratic();
  RunOptions opt;
  opt.s = 1.0;
  opt.x0 = Vec::Zero(2);
  opt.max_iter = 10;
  opt.r = -5.0;  // k + r = 0 at k = 5, inside (0, 10]
  try {
    run(p, opt);
    FAIL("expected momentum_singularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::momentum_singularity);
  }

  opt.r = -20.0;  // singular index outside the run
  CHECK_NOTHROW(run(p, opt));
  opt.r = -1.5;  // non-integral r is never singular
  CHECK_NOTHROW(run(p, opt));
  opt.r = -5.0;
  opt.start_index = 5;  // k = 5 is now the start, never formed with momentum
  CHECK_NOTHROW(run(p, opt));
}

TEST_CASE("run validation") {
  SmoothProblem unresolved = plane_quadratic();
  unresolved.minimizer.reset();
  unresolved.objective_error = nullptr;
  RunOptions opt;
  opt.s = 1.0;
  opt.x0 = Vec::Zero(2);
  opt.max_iter = 3;
  try {
    run(unresolved, opt);
    FAIL("expected invalid_problem");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_problem);
  }

  const SmoothProblem p = plane_quadratic();
  RunOptions bad = opt;
  bad.max_iter = 0;
  CHECK_THROWS_AS(run(p, bad), Error);
  bad = opt;
  bad.x0 = Vec::Zero(3);
  CHECK_THROWS_AS(run(p, bad), Error);
  bad = opt;
  bad.s = 2.5;  // s * lipschitz >= 1
  CHECK_THROWS_AS(run(p, bad), Error);
  bad = opt;
  bad.record_every = -1;
  CHECK_THROWS_AS(run(p, bad), Error);
  bad = opt;
  bad.method = Method::fista;  // composite-only method on a smooth problem
  CHECK_THROWS_AS(run(p, bad), Error);

  const CompositeProblem c = wrap_composite(plane_quadratic(), 0.1);
  RunOptions on_composite = opt;
  on_composite.method = Method::nesterov;  // smooth-only driver
  CHECK_THROWS_AS(run(c, on_composite), Error);
}
