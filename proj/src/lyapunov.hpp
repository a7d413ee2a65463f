#pragma once

#include <cstdint>
#include <vector>

#include "optimizers.hpp"
#include "problems.hpp"

namespace nagcert {

// Discrete energy at state (x_k, v_k) with v_k = (x_k - x_{k-1}) / sqrt(s):
//   E(k) = s (k+r)(2k+r)/(1 - mu s) (f(x_k) - f*)
//        + s (k-1)^2 / 2 ||v_k||^2
//        + 1/2 ||sqrt(s)(k-1) v_k + r (x_k - x*)||^2
struct EnergyBreakdown {
  double value = 0.0;      // sum of the three terms
  double potential = 0.0;  // objective-error term
  double kinetic = 0.0;    // velocity term
  double mixed = 0.0;      // coupled velocity/position term
};

// mu < 0 selects the problem's certified modulus. Requires a resolved problem,
// mu s < 1, and a state past the start index (velocity defined).
EnergyBreakdown discrete_lyapunov(const SmoothProblem& problem,
                                  const OptimizerState& state, double mu = -1.0);
EnergyBreakdown discrete_lyapunov(const CompositeProblem& problem,
                                  const OptimizerState& state, double mu = -1.0);

// Per-step energy contraction factor 1 + (1 - lipschitz s) mu s / 4.
double rate_base(double lipschitz, double mu, double s);

// Smallest index K from which the energy provably contracts, found by
// scanning the quadratic-in-k margin
//   (1 - Ls)(mu s / 4)(k+r)(2k+r) - (4k + 3r + 2) + r (1 - mu s)(k+r)
//     - (mu s (1 - Ls) / 4)(4k + 3r + 2)
// for the first nonnegative integer where it stays >= 0 for 100 consecutive
// integers. leading_coefficient = mu s (1 - Ls) / 2 is the margin's k^2
// coefficient; it is positive whenever 0 < mu s <= Ls < 1, which guarantees
// the scan terminates.
struct KCertificate {
  std::int64_t K = 0;
  double leading_coefficient = 0.0;
};

KCertificate find_K(double lipschitz, double mu, double s, double r,
                    std::int64_t k_cap = 1000000000);

// Everything needed to evaluate the certified decay bounds along a trace:
// from the anchor index on, E(k) <= anchor_energy / rate^(k - anchor_k), so
//   f(x_k) - f*        <= anchor_energy / (s (k+r)(2k+r) rate^(k - anchor_k))
//   ||grad at y||^2    <= 4 anchor_energy / (s^2 (1 - Ls)(k+r)(2k+r) rate^(k - anchor_k))
// The anchor is the first recorded index >= K.
struct TheoremCertificate {
  double s = 0.0;
  double r = 0.0;
  double lipschitz = 0.0;
  double mu = 0.0;
  std::int64_t K = 0;
  std::int64_t anchor_k = 0;
  double anchor_energy = 0.0;
  double rate = 1.0;  // rate_base(lipschitz, mu, s)
};

// Builds the certificate from a trace recorded with the Lyapunov column.
// Throws insufficient_data when no recorded index >= K carries an energy.
TheoremCertificate certify(double lipschitz, double mu, double s, double r,
                           const std::vector<TraceRecord>& trace);

// Bound evaluation; k < anchor_k is outside the certified range (domain_error).
double bound_objective(const TheoremCertificate& cert, std::int64_t k);
double bound_gradient(const TheoremCertificate& cert, std::int64_t k);

// Same bounds computed through the normalized step alpha = s * lipschitz:
//   rate = 1 + (alpha (1 - alpha) / 4)(mu / lipschitz)
//   f bound = lipschitz E / (alpha (k+r)(2k+r) rate^j)
//   grad bound = 4 lipschitz^2 E / (alpha^2 (1 - alpha)(k+r)(2k+r) rate^j)
// Algebraically identical to the forms above; agreement to rounding is a
// consistency check on the scale-free parameterization.
double bound_objective_normalized(const TheoremCertificate& cert, std::int64_t k);
double bound_gradient_normalized(const TheoremCertificate& cert, std::int64_t k);

// Fills bound_f / bound_grad for every record with k >= anchor_k.
void apply_bounds(const TheoremCertificate& cert, std::vector<TraceRecord>& trace);

// Checks value <= bound * (1 + tol) over records with k >= anchor_k; the
// gradient column compared is prox_grad_sq when present, grad_sq otherwise.
struct BoundCheck {
  std::int64_t checked = 0;
  std::int64_t objective_violations = 0;
  std::int64_t gradient_violations = 0;
  double max_objective_ratio = 0.0;
  double max_gradient_ratio = 0.0;

  bool pass() const {
    return checked > 0 && objective_violations == 0 && gradient_violations == 0;
  }
};

BoundCheck check_bounds(const TheoremCertificate& cert,
                        const std::vector<TraceRecord>& trace, double tol = 1e-8);

// Checks E(k+1) * rate <= E(k) * (1 + tol) over consecutive records in
// [anchor_k, anchor_k + window]. Requires consecutively recorded indices in
// that range (record gap -> invalid_argument). Pairs whose energies are not
// measurably positive sit past the resolution floor and are skipped.
struct ContractionCheck {
  std::int64_t checked = 0;
  std::int64_t violations = 0;
  // max over steps of (E(k+1) * rate - E(k)) / E(k); negative means slack.
  double max_scaled_violation = 0.0;

  bool pass() const { return checked > 0 && violations == 0; }
};

ContractionCheck check_contraction(const TheoremCertificate& cert,
                                   const std::vector<TraceRecord>& trace,
                                   std::int64_t window, double tol = 1e-8);

// Satisfaction margin of a convexity/smoothness inequality, normalized so
// margin >= 0 means the inequality holds. scaled() folds in the magnitude of
// both sides; rounding-level failures sit above -1e-9 scaled.
struct InequalityCheck {
  double margin = 0.0;
  double scale = 1.0;
  double scaled() const { return margin / scale; }
};

// f(y - s grad f(y)) - f(x) <=
//   <grad f(y), y - x> - mu/2 ||y - x||^2 - (s - L s^2 / 2) ||grad f(y)||^2
InequalityCheck check_descent_inequality(const SmoothProblem& problem,
                                         const Vec& x, const Vec& y, double s);

// ||grad f(y)||^2 >= 2 mu (f(y - s grad f(y)) - f*)
InequalityCheck check_gradient_domination(const SmoothProblem& problem,
                                          const Vec& y, double s);

// ||G(y)||^2 >= 2 mu (Phi(y - s G(y)) - Phi*)
InequalityCheck check_composite_gradient_domination(
    const CompositeProblem& problem, const Vec& y, double s);

// Phi(y - s G(y)) - Phi(x) <=
//   <G(y), y - x> - s/2 ||G(y)||^2 - mu/2 ||y - x||^2
InequalityCheck check_composite_descent_inequality(
    const CompositeProblem& problem, const Vec& x, const Vec& y, double s);

}  // namespace nagcert
