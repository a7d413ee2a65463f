#include "doctest.h"

#include <cmath>

#include "ode.hpp"
#include "problems.hpp"

using namespace nagcert;

namespace {

SmoothProblem scalar_half_sq() {
  return make_quadratic(Vec::Constant(1, 0.5), Vec::Zero(1));
}

ContinuousState state_at(double t, double x, double v) {
  ContinuousState st;
  st.t = t;
  st.position = Vec::Constant(1, x);
  st.velocity = Vec::Constant(1, v);
  return st;
}

}  // namespace

TEST_CASE("acceleration at a hand-checked point") {
  // f = 0.5 x^2, s = 0.04, X = 1, V = 0, t = 1:
  //   A = -(3/1)*0 - 0.2*H*0 - (1 + 3*0.2/2) * 1 = -1.3
  const SmoothProblem p = scalar_half_sq();
  const Vec a = ode_rhs(p, state_at(1.0, 1.0, 0.0), 0.04);
  CHECK(a[0] == doctest::Approx(-1.3).epsilon(1e-14));

  // With velocity the damping and curvature terms join:
  //   A = -3*0.5 - 0.2*1*0.5 - 1.3*1 = -2.9
  const Vec a2 = ode_rhs(p, state_at(1.0, 1.0, 0.5), 0.04);
  CHECK(a2[0] == doctest::Approx(-2.9).epsilon(1e-14));

  CHECK_THROWS_AS(ode_rhs(p, state_at(0.0, 1.0, 0.0), 0.04), Error);
  CHECK_THROWS_AS(ode_rhs(p, state_at(1.0, 1.0, 0.0), 0.0), Error);
}

TEST_CASE("curvature term falls back to finite differences") {
  SmoothProblem p = scalar_half_sq();
  p.hessian_vec = nullptr;
  const Vec a = ode_rhs(p, state_at(1.0, 1.0, 0.5), 0.04);
  CHECK(a[0] == doctest::Approx(-2.9).epsilon(1e-6));
}

TEST_CASE("continuous energy at a hand-checked point") {
  // Same point, t = 1: E = 2*1*(1.2)*0.5 + 0 + 0.5*(0 + 2 + 0.2)^2 = 3.62
  const SmoothProblem p = scalar_half_sq();
  CHECK(continuous_lyapunov(p, state_at(1.0, 1.0, 0.0), 0.04) ==
        doctest::Approx(3.62).epsilon(1e-14));
  CHECK_THROWS_AS(continuous_lyapunov(p, state_at(0.0, 1.0, 0.0), 0.04), Error);
  SmoothProblem unresolved = scalar_half_sq();
  unresolved.minimizer.reset();
  CHECK_THROWS_AS(continuous_lyapunov(unresolved, state_at(1.0, 1.0, 0.0), 0.04),
                  Error);
}

TEST_CASE("integration grid snaps to the horizon") {
  const SmoothProblem p = scalar_half_sq();
  const ContinuousTrace tr =
      integrate(p, 0.04, Vec::Constant(1, 1.0), 0.5, 1.3, 0.03);
  // 0.8 / 0.03 = 26.67 rounds up to 27 steps.
  CHECK(tr.dt == doctest::Approx(0.8 / 27.0).epsilon(1e-15));
  CHECK(tr.samples.size() == 28);  // every step plus the initial point
  CHECK(tr.samples.back().t == doctest::Approx(1.3).epsilon(1e-12));

  // An exact divisor is kept as given.
  const ContinuousTrace exact =
      integrate(p, 0.04, Vec::Constant(1, 1.0), 0.5, 1.3, 0.02);
  CHECK(exact.dt == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(exact.samples.size() == 41);
}

TEST_CASE("integration validates its window and step") {
  const SmoothProblem p = scalar_half_sq();
  const Vec x0 = Vec::Constant(1, 1.0);
  // dt must satisfy dt <= min(t0/10, 0.5/sqrt(L) * min(1, sqrt(s))).
  CHECK_THROWS_AS(integrate(p, 0.04, x0, 0.2, 1.0, 0.05), Error);
  CHECK_THROWS_AS(integrate(p, 0.04, x0, 0.2, 0.1, 0.01), Error);  // t_end <= t0
  CHECK_THROWS_AS(integrate(p, 0.04, x0, 0.0, 1.0, 0.01), Error);  // t0 == 0
  CHECK_THROWS_AS(integrate(p, 0.04, x0, 0.2, 1.0, 0.0), Error);
  CHECK_THROWS_AS(integrate(p, 0.04, x0, 0.2, 1.0, 0.02, 0), Error);
  SmoothProblem unresolved = scalar_half_sq();
  unresolved.minimizer.reset();
  CHECK_THROWS_AS(integrate(unresolved, 0.04, x0, 0.2, 1.0, 0.01), Error);
}

TEST_CASE("negative start time selects sqrt(s)") {
  const SmoothProblem p = scalar_half_sq();
  const ContinuousTrace tr =
      integrate(p, 0.04, Vec::Constant(1, 1.0), -1.0, 1.0, 0.02);
  CHECK(tr.t0 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(tr.samples.front().t == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("sampling stride keeps the final time") {
  const SmoothProblem p = scalar_half_sq();
  const ContinuousTrace tr =
      integrate(p, 0.04, Vec::Constant(1, 1.0), 0.2, 1.0, 0.02, 7);
  // 40 steps: samples at 0, 7, ..., 35 plus the final step.
  CHECK(tr.samples.size() == 7);
  CHECK(tr.samples.back().t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("energy decays along the flow and the certified bound holds") {
  const SmoothProblem p = scalar_half_sq();
  ContinuousTrace tr =
      integrate(p, 0.04, Vec::Constant(1, 1.0), 0.2, 200.0, 0.02, 10);
  CHECK(continuous_decay_time(p.mu, 0.04) == doctest::Approx(20.0).epsilon(1e-15));

  const ContinuousBoundCheck bc = check_continuous_bound(tr, p.mu);
  CHECK(bc.pass());
  CHECK(bc.violations == 0);
  CHECK(bc.decay_time == doctest::Approx(20.0).epsilon(1e-15));
  // The anchor is the first recorded sample at or past the decay time.
  CHECK(bc.anchor_t >= 20.0 - 1e-9);
  CHECK(bc.anchor_t < 20.0 + 0.3);
  CHECK(bc.anchor_energy > 0.0);
  CHECK(bc.max_ratio > 0.0);
  CHECK(bc.max_ratio < 1.0);
  // The bound column is filled from the anchor on.
  std::int64_t bound_rows = 0;
  for (const ContinuousSample& sm : tr.samples) {
    if (sm.t < bc.anchor_t) CHECK(std::isnan(sm.bound));
    else {
      CHECK(std::isfinite(sm.bound));
      ++bound_rows;
    }
  }
  CHECK(bound_rows == bc.checked);

  const ContinuousContractionCheck cc = check_continuous_contraction(tr, p.mu);
  CHECK(cc.pass());
  CHECK(cc.checked > 0);
  CHECK(cc.max_scaled_increase < 1e-6);
}

TEST_CASE("bound checking needs the trace to reach the decay time") {
  const SmoothProblem p = scalar_half_sq();
  ContinuousTrace tr = integrate(p, 0.04, Vec::Constant(1, 1.0), 0.2, 10.0, 0.02);
  bool threw = false;
  try {
    check_continuous_bound(tr, p.mu);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::insufficient_data);
  }
  CHECK(threw);
  bool threw_contraction = false;
  try {
    check_continuous_contraction(tr, p.mu);
  } catch (const Error& e) {
    threw_contraction = true;
    CHECK(e.code() == ErrorCode::insufficient_data);
  }
  CHECK(threw_contraction);
}

TEST_CASE("refinement ratio sits at fourth order") {
  const SmoothProblem p = scalar_half_sq();
  const double ratio =
      richardson_order_ratio(p, 0.04, Vec::Constant(1, 1.0), 0.2, 20.0, 0.02);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("misdeclared curvature triggers the blowup guard") {
  // Claim a tiny curvature bound so the validated step is far too large for
  // the true stiffness; the integration must detect the explosion.
  SmoothProblem lying = make_quadratic(Vec::Constant(1, 50.0), Vec::Zero(1));
  lying.lipschitz = 0.01;
  lying.mu = 0.005;
  bool threw = false;
  try {
    integrate(lying, 0.04, Vec::Constant(1, 1.0), 10.0, 2000.0, 1.0);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == ErrorCode::integrator_blowup);
  }
  CHECK(threw);
}
