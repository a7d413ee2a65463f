#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "problems.hpp"

namespace nagcert {

struct ContinuousState {
  double t = 0.0;
  Vec position;  // X(t)
  Vec velocity;  // V(t) = dX/dt
};

// Acceleration of the step-size-aware continuous model
//   A = -(3/t) V - sqrt(s) Hess f(X) V - (1 + 3 sqrt(s)/(2t)) grad f(X).
// Uses the problem's analytic Hessian-vector product when present, otherwise
// a central difference with h = 1e-6 (1 + ||X||) / (1 + ||V||). Requires t > 0.
Vec ode_rhs(const SmoothProblem& problem, const ContinuousState& state, double s);

// Continuous energy
//   E(t) = 2 t (t + sqrt(s)) (f(X) - f*) + t^2/2 ||V||^2
//        + 1/2 ||t V + 2 (X - x*) + t sqrt(s) grad f(X)||^2
double continuous_lyapunov(const SmoothProblem& problem,
                           const ContinuousState& state, double s);

struct ContinuousSample {
  double t = 0.0;
  double f_err = std::numeric_limits<double>::quiet_NaN();
  double lyapunov = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();  // certified decay bound
};

struct ContinuousTrace {
  std::vector<ContinuousSample> samples;
  double s = 0.0;
  double t0 = 0.0;
  double t_end = 0.0;
  double dt = 0.0;  // after snapping to an integer step count
  Vec x_end;
  Vec v_end;
};

// Classical fixed-step fourth-order integration of the model from X(t0) = x0,
// V(t0) = 0. t0 < 0 selects sqrt(s). Preconditions: the problem is resolved,
// t_end > t0 > 0, and dt <= min(t0 / 10, 0.5 / sqrt(lipschitz) * min(1,
// sqrt(s))). The step count is snapped so the grid lands on t_end exactly;
// samples land every sample_every steps plus the final time. Objective error
// growing past 1e10 x its initial value raises integrator_blowup.
ContinuousTrace integrate(const SmoothProblem& problem, double s, const Vec& x0,
                          double t0, double t_end, double dt,
                          std::int64_t sample_every = 1);

// Time from which the continuous energy provably decays exponentially.
double continuous_decay_time(double mu, double s);  // 4 / (mu sqrt(s))

// Checks f_err <= bound * (1 + tol) for every sample past the anchor, where
// the anchor is the first sample with t >= continuous_decay_time(mu, s) and
//   bound(t) = E(anchor) / (2 t (t + sqrt(s))) * exp(-(mu sqrt(s)/4)(t - anchor_t)).
// Fills the bound column from the anchor on. Throws insufficient_data when
// the trace ends before the decay time.
struct ContinuousBoundCheck {
  double decay_time = 0.0;
  double anchor_t = 0.0;
  double anchor_energy = 0.0;
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  double max_ratio = 0.0;

  bool pass() const { return checked > 0 && violations == 0; }
};

ContinuousBoundCheck check_continuous_bound(ContinuousTrace& trace, double mu,
                                            double tol = 1e-3);

// Checks E(t_{i+1}) <= E(t_i) * (1 + rel_tol) over consecutive samples past
// the decay time. Samples whose energies are not measurably positive are
// skipped.
struct ContinuousContractionCheck {
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  double max_scaled_increase = 0.0;  // max (E_next - E) / E; negative = slack

  bool pass() const { return checked > 0 && violations == 0; }
};

ContinuousContractionCheck check_continuous_contraction(
    const ContinuousTrace& trace, double mu, double rel_tol = 1e-6);

// ||X_dt(t_end) - X_{dt/2}(t_end)|| / ||X_{dt/2}(t_end) - X_{dt/4}(t_end)||;
// near 16 for a fourth-order scheme.
double richardson_order_ratio(const SmoothProblem& problem, double s,
                              const Vec& x0, double t0, double t_end, double dt);

}  // namespace nagcert
