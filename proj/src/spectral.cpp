#include "spectral.hpp"

#include <cmath>
#include <string>

namespace nagcert {

ModeSpectrum mode_spectrum(double mu, double s, double r, std::int64_t k_index) {
  if (!(mu > 0.0) || !(s > 0.0))
    fail(ErrorCode::invalid_argument, "mode_spectrum: mu and s must be positive");
  if (k_index < 1)
    fail(ErrorCode::invalid_argument, "mode_spectrum: k must be >= 1");
  const double k = static_cast<double>(k_index);
  if (k + r == 0.0)
    fail(ErrorCode::momentum_singularity,
         "mode_spectrum: k + r vanishes at k = " + std::to_string(k_index));

  ModeSpectrum out;
  out.k = k_index;
  out.mu_s = mu * s;
  out.r = r;
  const double decay = 1.0 - mu * s;
  const double b = ((2.0 * k + r - 1.0) / (k + r)) * decay;
  const double c = ((k - 1.0) / (k + r)) * decay;
  out.m[0][0] = 0.0;
  out.m[0][1] = decay;
  out.m[1][0] = -(k - 1.0) / (k + r);
  out.m[1][1] = b;
  out.trace_coefficient = b;
  out.det_coefficient = c;
  out.discriminant = b * b - 4.0 * c;

  if (out.discriminant < 0.0) {
    const double im = 0.5 * std::sqrt(-out.discriminant);
    out.lambda1 = {0.5 * b, im};
    out.lambda2 = {0.5 * b, -im};
    // Conjugate pair: |lambda|^2 equals the root product c exactly.
    out.modulus = std::sqrt(c);
  } else {
    // Larger-magnitude root first; the other from the product to avoid the
    // cancellation of b - sqrt(disc) when the roots are far apart.
    const double root = std::sqrt(out.discriminant);
    const double big = 0.5 * (b >= 0.0 ? b + root : b - root);
    const double small = big == 0.0 ? 0.0 : c / big;
    out.lambda1 = {big, 0.0};
    out.lambda2 = {small, 0.0};
    out.modulus = std::max(std::abs(big), std::abs(small));
  }
  return out;
}

AsymptoticRate asymptotic_rate(double mu, double s) {
  if (!(mu > 0.0) || !(s > 0.0))
    fail(ErrorCode::invalid_argument, "asymptotic_rate: mu and s must be positive");
  const double decay = 1.0 - mu * s;
  if (!(decay >= 0.0))
    fail(ErrorCode::domain_error,
         "asymptotic_rate: mu * s > 1 has no contracting limit");
  AsymptoticRate out;
  out.real_part_limit = decay;
  out.modulus_limit = std::sqrt(decay);
  out.f_error_rate = decay;
  return out;
}

double modulus_sq_envelope(double r, std::int64_t k) {
  if (k < 1)
    fail(ErrorCode::invalid_argument, "modulus_sq_envelope: k must be >= 1");
  return 5.0 * std::abs(r + 1.0) / static_cast<double>(k);
}

std::vector<std::pair<double, double>> matrix_power_oracle(
    double mu, double s, double r, std::pair<double, double> x0y0,
    std::int64_t k_max) {
  if (!(mu > 0.0) || !(s > 0.0))
    fail(ErrorCode::invalid_argument,
         "matrix_power_oracle: mu and s must be positive");
  if (k_max < 0)
    fail(ErrorCode::invalid_argument, "matrix_power_oracle: k_max must be >= 0");
  const double decay = 1.0 - mu * s;
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  out.push_back(x0y0);
  double x = x0y0.first;
  double y = x0y0.second;
  for (std::int64_t ki = 1; ki <= k_max; ++ki) {
    const double k = static_cast<double>(ki);
    if (k + r == 0.0)
      fail(ErrorCode::momentum_singularity,
           "matrix_power_oracle: k + r vanishes at k = " + std::to_string(ki));
    const double x_next = decay * y;
    const double y_next =
        -((k - 1.0) / (k + r)) * x + ((2.0 * k + r - 1.0) / (k + r)) * decay * y;
    x = x_next;
    y = y_next;
    if (std::abs(x) > 1e300 || std::abs(y) > 1e300 || !std::isfinite(x) ||
        !std::isfinite(y))
      fail(ErrorCode::divergence,
           "matrix_power_oracle: mode diverged at k = " + std::to_string(ki));
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace nagcert
