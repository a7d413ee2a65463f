#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "error.hpp"

namespace nagcert {

// One eigenmode of the accelerated iteration on a quadratic has curvature
// ratio mu s and evolves by the transfer matrix advancing (x_{k-1}, y_{k-1})
// to (x_k, y_k):
//   x_k = (1 - mu s) y_{k-1}
//   y_k = -((k-1)/(k+r)) x_{k-1} + ((2k+r-1)/(k+r))(1 - mu s) y_{k-1}
// Its eigenvalues solve lambda^2 - b lambda + c = 0 with
//   b = ((2k+r-1)/(k+r))(1 - mu s),  c = ((k-1)/(k+r))(1 - mu s).
struct ModeSpectrum {
  std::int64_t k = 0;
  double mu_s = 0.0;
  double r = 0.0;
  double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double trace_coefficient = 0.0;  // b (also the matrix trace)
  double det_coefficient = 0.0;    // c (also the matrix determinant)
  double discriminant = 0.0;       // b^2 - 4 c
  std::complex<double> lambda1;    // larger-magnitude eigenvalue
  std::complex<double> lambda2;
  double modulus = 0.0;            // max |lambda_i|
};

// Eigenstructure of the step advancing to index k (k >= 1). At k = 1 one
// eigenvalue is exactly zero. Complex pairs have modulus^2 = c exactly
// (product of conjugate roots); real pairs are computed by the
// cancellation-free quadratic formula.
ModeSpectrum mode_spectrum(double mu, double s, double r, std::int64_t k);

// k -> infinity limits of the mode eigenvalues: the pair becomes a complex
// conjugate pair with common real part b/2 -> 1 - mu s and modulus
// sqrt(c) -> sqrt(1 - mu s), so the objective error along the mode contracts
// per step by modulus^2 -> 1 - mu s.
struct AsymptoticRate {
  double real_part_limit = 0.0;  // 1 - mu s
  double modulus_limit = 0.0;    // sqrt(1 - mu s)
  double f_error_rate = 0.0;     // 1 - mu s
};

AsymptoticRate asymptotic_rate(double mu, double s);

// Envelope for |modulus(k)^2 - (1 - mu s)| while the eigenvalue pair is
// complex: 5 |r + 1| / k.
double modulus_sq_envelope(double r, std::int64_t k);

// Exact scalar recursion for one eigenmode: applies the transfer matrices for
// k = 1..k_max to (x_0, y_0) and returns all k_max + 1 pairs. Throws a
// divergence error if either component exceeds 1e300 in magnitude.
std::vector<std::pair<double, double>> matrix_power_oracle(
    double mu, double s, double r, std::pair<double, double> x0y0,
    std::int64_t k_max);

}  // namespace nagcert
