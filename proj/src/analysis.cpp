#include "analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nagcert {

RateFit fit_linear_rate(const std::vector<std::pair<std::int64_t, double>>& series,
                        std::int64_t burn_in, double floor) {
  if (series.empty())
    fail(ErrorCode::insufficient_data, "fit_linear_rate: empty series");
  if (floor < 0.0)
    floor = 100.0 * std::numeric_limits<double>::epsilon() * series.front().second;

  std::vector<std::pair<double, double>> pts;  // (k, ln value)
  pts.reserve(series.size());
  for (const auto& [k, value] : series) {
    if (k < burn_in) continue;
    if (!(value > floor) || !std::isfinite(value)) continue;
    pts.emplace_back(static_cast<double>(k), std::log(value));
  }
  if (pts.size() < 10)
    fail(ErrorCode::insufficient_data,
         "fit_linear_rate: only " + std::to_string(pts.size()) +
             " admissible points past burn-in and floor; need at least 10");

  // Two-pass centered least squares keeps the normal equations conditioned
  // for k ranges up to ~1e6.
  double k_mean = 0.0, v_mean = 0.0;
  for (const auto& [k, v] : pts) {
    k_mean += k;
    v_mean += v;
  }
  k_mean /= static_cast<double>(pts.size());
  v_mean /= static_cast<double>(pts.size());

  double skk = 0.0, skv = 0.0, svv = 0.0;
  for (const auto& [k, v] : pts) {
    const double dk = k - k_mean;
    const double dv = v - v_mean;
    skk += dk * dk;
    skv += dk * dv;
    svv += dv * dv;
  }
  if (!(skk > 0.0))
    fail(ErrorCode::insufficient_data,
         "fit_linear_rate: degenerate abscissa (all k equal)");

  RateFit fit;
  fit.slope = skv / skk;
  fit.intercept = v_mean - fit.slope * k_mean;
  const double ss_res = svv - fit.slope * skv;
  fit.r_squared = svv > 0.0 ? std::max(0.0, 1.0 - ss_res / svv) : 1.0;
  fit.burn_in = burn_in;
  fit.n_points = static_cast<std::int64_t>(pts.size());
  return fit;
}

double compare_rates(const std::vector<RateFit>& fits) {
  if (fits.size() < 2)
    fail(ErrorCode::invalid_argument,
         "compare_rates: need at least two fits, got " + std::to_string(fits.size()));
  double max_abs = 0.0;
  for (const RateFit& f : fits) max_abs = std::max(max_abs, std::abs(f.slope));
  double max_diff = 0.0;
  for (std::size_t i = 0; i < fits.size(); ++i)
    for (std::size_t j = i + 1; j < fits.size(); ++j)
      max_diff = std::max(max_diff, std::abs(fits[i].slope - fits[j].slope));
  if (max_abs == 0.0) return 0.0;
  return max_diff / max_abs;
}

}  // namespace nagcert
