#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "error.hpp"

namespace nagcert {

// Least-squares fit of ln(value) against k over the admitted points.
struct RateFit {
  double slope = 0.0;      // per-iteration log decay
  double intercept = 0.0;  // fitted ln(value) at k = 0
  double r_squared = 0.0;
  std::int64_t burn_in = 0;
  std::int64_t n_points = 0;  // points admitted into the fit
};

// Admits points with k >= burn_in and value > floor (values at or below the
// floor are excluded, never clamped). floor < 0 selects the default
// 100 * machine-epsilon * (first value in the series). Fewer than 10 admitted
// points is an insufficient_data error.
RateFit fit_linear_rate(const std::vector<std::pair<std::int64_t, double>>& series,
                        std::int64_t burn_in, double floor = -1.0);

// Largest pairwise slope deviation |slope_i - slope_j| / max_l |slope_l|.
// Requires at least two fits; identical zero slopes give zero.
double compare_rates(const std::vector<RateFit>& fits);

}  // namespace nagcert
