#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nagcert {

// Stable error taxonomy shared by the C++ core and the C API.
enum class ErrorCode {
  invalid_argument = 1,
  invalid_problem = 2,
  momentum_singularity = 3,
  no_convergence = 4,
  insufficient_data = 5,
  search_overflow = 6,
  divergence = 7,
  integrator_blowup = 8,
  domain_error = 9,
  io_error = 10,
  internal_error = 11,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_problem: return "invalid_problem";
    case ErrorCode::momentum_singularity: return "momentum_singularity";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::search_overflow: return "search_overflow";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::integrator_blowup: return "integrator_blowup";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::internal_error: return "internal_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Iterative solve hit its cap; carries the best iterate seen so callers can
// inspect how far the solve got.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(std::string message, std::vector<double> best_iterate,
                     double residual)
      : Error(ErrorCode::no_convergence, std::move(message)),
        best_iterate_(std::move(best_iterate)),
        residual_(residual) {}

  const std::vector<double>& best_iterate() const noexcept { return best_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> best_iterate_;
  double residual_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace nagcert
