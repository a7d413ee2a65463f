#include "problems.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <utility>

namespace nagcert {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

StepSize::StepSize(double s, double lipschitz) : s_(s), lipschitz_(lipschitz) {
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    fail(ErrorCode::invalid_argument,
         "step size: lipschitz must be finite and positive, got " + fmt_double(lipschitz));
  if (!(s > 0.0) || !std::isfinite(s))
    fail(ErrorCode::invalid_argument,
         "step size: s must be finite and positive, got " + fmt_double(s));
  if (!(s * lipschitz < 1.0))
    fail(ErrorCode::invalid_argument,
         "step size: s * lipschitz must be < 1, got " + fmt_double(s * lipschitz));
}

SmoothProblem make_quadratic(const Vec& hessian_diagonal, const Vec& shift) {
  const Eigen::Index n = hessian_diagonal.size();
  if (n == 0)
    fail(ErrorCode::invalid_problem, "quadratic: empty hessian diagonal");
  if (shift.size() != n)
    fail(ErrorCode::invalid_problem,
         "quadratic: shift dimension " + std::to_string(shift.size()) +
             " does not match diagonal dimension " + std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(hessian_diagonal[i] > 0.0) || !std::isfinite(hessian_diagonal[i]))
      fail(ErrorCode::invalid_problem,
           "quadratic: diagonal entries must be finite and positive, entry " +
               std::to_string(i) + " is " + fmt_double(hessian_diagonal[i]));

  auto diag = std::make_shared<Vec>(hessian_diagonal);
  auto center = std::make_shared<Vec>(shift);

  SmoothProblem p;
  p.dim = n;
  p.mu = 2.0 * hessian_diagonal.minCoeff();
  p.lipschitz = 2.0 * hessian_diagonal.maxCoeff();
  p.value = [diag, center](const Vec& x) -> double {
    return diag->dot((x - *center).cwiseAbs2());
  };
  p.gradient = [diag, center](const Vec& x) -> Vec {
    return 2.0 * diag->cwiseProduct(x - *center);
  };
  p.hessian_vec = [diag](const Vec&, const Vec& v) -> Vec {
    return 2.0 * diag->cwiseProduct(v);
  };
  p.minimizer = shift;
  // f* = 0 exactly, so the plain value is already cancellation-free.
  p.objective_error = p.value;
  return p;
}

Vec lcg_noise(std::uint64_t seed, Eigen::Index n, double sigma) {
  if (n < 0) fail(ErrorCode::invalid_argument, "lcg_noise: negative length");
  constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  constexpr std::uint64_t kIncrement = 1442695040888963407ULL;
  std::uint64_t state = seed;
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 12; ++j) {
      state = state * kMultiplier + kIncrement;  // mod 2^64 by wraparound
      acc += static_cast<double>(state) * 0x1p-64;
    }
    out[i] = (acc - 6.0) * sigma;
  }
  return out;
}

Vec soft_threshold(const Vec& z, double t) {
  if (t < 0.0) fail(ErrorCode::invalid_argument, "soft_threshold: negative threshold");
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m = std::abs(z[i]) - t;
    out[i] = m > 0.0 ? (z[i] < 0.0 ? -m : m) : 0.0;
  }
  return out;
}

namespace {

// Circular convolution with taps centered at offset c = (len - 1) / 2:
// (A x)_i = sum_j kernel_j x_{(i + j - c) mod n}.
struct Circulant {
  std::vector<double> kernel;
  Eigen::Index n = 0;

  Eigen::Index wrap(Eigen::Index i) const {
    i %= n;
    return i < 0 ? i + n : i;
  }

  Vec apply(const Vec& x) const {
    const Eigen::Index c = (static_cast<Eigen::Index>(kernel.size()) - 1) / 2;
    Vec out = Vec::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < kernel.size(); ++j)
        acc += kernel[j] * x[wrap(i + static_cast<Eigen::Index>(j) - c)];
      out[i] = acc;
    }
    return out;
  }

  Vec apply_adjoint(const Vec& y) const {
    const Eigen::Index c = (static_cast<Eigen::Index>(kernel.size()) - 1) / 2;
    Vec out = Vec::Zero(n);
    for (Eigen::Index m = 0; m < n; ++m) {
      double acc = 0.0;
      for (std::size_t j = 0; j < kernel.size(); ++j)
        acc += kernel[j] * y[wrap(m - static_cast<Eigen::Index>(j) + c)];
      out[m] = acc;
    }
    return out;
  }
};

// Largest eigenvalue of A^T A by power iteration from the normalized all-ones
// vector: at most 200 steps, stopping when the Rayleigh quotient moves by
// less than 1e-8 relative.
double top_eigenvalue_estimate(const Circulant& a) {
  Vec w = Vec::Ones(a.n) / std::sqrt(static_cast<double>(a.n));
  double est = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vec z = a.apply_adjoint(a.apply(w));
    const double next = w.dot(z);
    if (std::abs(next - est) <= 1e-8 * std::abs(next)) return next;
    est = next;
    const double norm = z.norm();
    if (!(norm > 0.0))
      fail(ErrorCode::internal_error, "power iteration collapsed to zero");
    w = z / norm;
  }
  return est;
}

}  // namespace

CompositeProblem make_lasso_deblur(const std::vector<double>& kernel,
                                   const Vec& true_signal,
                                   std::uint64_t noise_seed, double l1_weight,
                                   double ridge) {
  if (kernel.empty()) fail(ErrorCode::invalid_problem, "deblur: empty kernel");
  const Eigen::Index n = true_signal.size();
  if (n == 0) fail(ErrorCode::invalid_problem, "deblur: empty signal");
  if (!(ridge > 0.0) || !std::isfinite(ridge))
    fail(ErrorCode::invalid_problem,
         "deblur: ridge must be positive for a certified strong-convexity "
         "modulus, got " + fmt_double(ridge));
  if (l1_weight < 0.0 || !std::isfinite(l1_weight))
    fail(ErrorCode::invalid_argument,
         "deblur: l1 weight must be nonnegative, got " + fmt_double(l1_weight));

  auto a = std::make_shared<Circulant>(Circulant{kernel, n});
  auto b = std::make_shared<Vec>(a->apply(true_signal) +
                                 lcg_noise(noise_seed, n, kDeblurNoiseSigma));

  CompositeProblem p;
  p.smooth.dim = n;
  p.smooth.mu = ridge;
  p.smooth.lipschitz = 1.01 * (top_eigenvalue_estimate(*a) + ridge);
  p.smooth.value = [a, b, ridge](const Vec& x) -> double {
    return 0.5 * (a->apply(x) - *b).squaredNorm() + 0.5 * ridge * x.squaredNorm();
  };
  p.smooth.gradient = [a, b, ridge](const Vec& x) -> Vec {
    return a->apply_adjoint(a->apply(x) - *b) + ridge * x;
  };
  p.smooth.hessian_vec = [a, ridge](const Vec&, const Vec& v) -> Vec {
    return a->apply_adjoint(a->apply(v)) + ridge * v;
  };
  p.g_value = [l1_weight](const Vec& x) -> double {
    return l1_weight * x.lpNorm<1>();
  };
  p.prox = [l1_weight](const Vec& z, double s) -> Vec {
    return soft_threshold(z, l1_weight * s);
  };
  p.l1_weight = l1_weight;
  return p;
}

SmoothProblem make_log_sum_exp_ridge(const Mat& a, const Vec& b, double ridge) {
  if (a.rows() == 0 || a.cols() == 0)
    fail(ErrorCode::invalid_problem, "log_sum_exp: empty coefficient matrix");
  if (b.size() != a.rows())
    fail(ErrorCode::invalid_problem,
         "log_sum_exp: offset dimension does not match row count");
  if (!(ridge > 0.0) || !std::isfinite(ridge))
    fail(ErrorCode::invalid_problem,
         "log_sum_exp: ridge must be positive, got " + fmt_double(ridge));

  auto am = std::make_shared<Mat>(a);
  auto bv = std::make_shared<Vec>(b);

  // Shifted softmax weights; subtracting the max keeps every exp in range.
  auto weights = [am, bv](const Vec& x) -> Vec {
    Vec t = (*am) * x + *bv;
    const double m = t.maxCoeff();
    Vec w = (t.array() - m).exp();
    return w / w.sum();
  };

  SmoothProblem p;
  p.dim = a.cols();
  p.mu = ridge;
  p.lipschitz = ridge + a.rowwise().squaredNorm().maxCoeff();
  p.value = [am, bv, ridge](const Vec& x) -> double {
    Vec t = (*am) * x + *bv;
    const double m = t.maxCoeff();
    return m + std::log((t.array() - m).exp().sum()) + 0.5 * ridge * x.squaredNorm();
  };
  p.gradient = [am, ridge, weights](const Vec& x) -> Vec {
    return am->transpose() * weights(x) + ridge * x;
  };
  p.hessian_vec = [am, ridge, weights](const Vec& x, const Vec& v) -> Vec {
    const Vec w = weights(x);
    const Vec av = (*am) * v;
    return am->transpose() * w.cwiseProduct(av) -
           w.dot(av) * (am->transpose() * w) + ridge * v;
  };
  return p;
}

Vec prox_g(const CompositeProblem& problem, const Vec& z, double s) {
  if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "prox_g: s must be positive");
  if (z.size() != problem.dim())
    fail(ErrorCode::invalid_argument, "prox_g: dimension mismatch");
  return problem.prox(z, s);
}

Vec proximal_step(const CompositeProblem& problem, const Vec& x, double s) {
  if (!(s > 0.0)) fail(ErrorCode::invalid_argument, "proximal_step: s must be positive");
  if (x.size() != problem.dim())
    fail(ErrorCode::invalid_argument, "proximal_step: dimension mismatch");
  return problem.prox(x - s * problem.smooth.gradient(x), s);
}

Vec proximal_subgradient(const CompositeProblem& problem, const Vec& x, double s) {
  return (x - proximal_step(problem, x, s)) / s;
}

namespace {

double default_tol(const Vec& start) { return 1e-12 * (1.0 + start.norm()); }

[[noreturn]] void throw_no_convergence(const char* what, std::int64_t cap,
                                       const Vec& best, double best_residual) {
  std::vector<double> payload(best.data(), best.data() + best.size());
  throw NoConvergenceError(
      std::string(what) + ": no convergence within " + std::to_string(cap) +
          " iterations; best residual " + fmt_double(best_residual),
      std::move(payload), best_residual);
}

}  // namespace

Vec minimizer_oracle(const SmoothProblem& problem, double tol, std::int64_t max_iter) {
  if (problem.minimizer) return *problem.minimizer;
  if (!problem.value || !problem.gradient)
    fail(ErrorCode::invalid_problem, "minimizer_oracle: problem has no oracles");
  Vec x = Vec::Zero(problem.dim);
  if (tol < 0.0) tol = default_tol(x);
  const double s = 0.9 / problem.lipschitz;
  Vec best = x;
  double best_residual = std::numeric_limits<double>::infinity();
  for (std::int64_t it = 0; it < max_iter; ++it) {
    Vec g = problem.gradient(x);
    const double res = g.norm();
    if (res < best_residual) {
      best_residual = res;
      best = x;
    }
    if (res <= tol) return x;
    x -= s * g;
  }
  throw_no_convergence("minimizer_oracle", max_iter, best, best_residual);
}

Vec minimizer_oracle(const CompositeProblem& problem, double tol, std::int64_t max_iter) {
  if (problem.minimizer) return *problem.minimizer;
  if (!problem.smooth.gradient || !problem.prox)
    fail(ErrorCode::invalid_problem, "minimizer_oracle: problem has no oracles");
  Vec x = Vec::Zero(problem.dim());
  if (tol < 0.0) tol = default_tol(x);
  const double s = 0.9 / problem.smooth.lipschitz;
  Vec best = x;
  double best_residual = std::numeric_limits<double>::infinity();
  for (std::int64_t it = 0; it < max_iter; ++it) {
    Vec p = problem.prox(x - s * problem.smooth.gradient(x), s);
    const double res = (x - p).norm() / s;
    if (res < best_residual) {
      best_residual = res;
      best = p;
    }
    if (res <= tol) return p;
    x = std::move(p);
  }
  throw_no_convergence("minimizer_oracle", max_iter, best, best_residual);
}

void resolve_minimizer(SmoothProblem& problem, double tol) {
  if (problem.resolved()) return;
  if (!problem.minimizer) problem.minimizer = minimizer_oracle(problem, tol);
  if (!problem.objective_error) {
    // Generic fallback: direct difference against the cached optimum.
    auto value = problem.value;
    const double fstar = value(*problem.minimizer);
    problem.objective_error = [value, fstar](const Vec& x) -> double {
      return value(x) - fstar;
    };
  }
}

void resolve_minimizer(CompositeProblem& problem, double tol) {
  if (problem.resolved()) return;
  if (!problem.minimizer) problem.minimizer = minimizer_oracle(problem, tol);
  if (!problem.objective_error) {
    // The smooth part of every built-in composite is quadratic, so its change
    // from the optimum is evaluated by exact second-order expansion around
    // x*; the l1 change is summed termwise. Both avoid the catastrophic
    // cancellation of subtracting two near-equal objective values.
    auto grad = problem.smooth.gradient;
    auto hvp = problem.smooth.hessian_vec;
    auto xstar = std::make_shared<Vec>(*problem.minimizer);
    auto g0 = std::make_shared<Vec>(grad(*xstar));
    const double l1_weight = problem.l1_weight;
    if (hvp) {
      problem.objective_error = [xstar, g0, hvp, l1_weight](const Vec& x) -> double {
        const Vec d = x - *xstar;
        double err = g0->dot(d) + 0.5 * d.dot(hvp(*xstar, d));
        if (l1_weight != 0.0) {
          double l1 = 0.0;
          for (Eigen::Index i = 0; i < x.size(); ++i)
            l1 += std::abs(x[i]) - std::abs((*xstar)[i]);
          err += l1_weight * l1;
        }
        return err;
      };
    } else {
      const double fstar = problem.objective(*problem.minimizer);
      auto smooth_value = problem.smooth.value;
      auto g_value = problem.g_value;
      problem.objective_error = [smooth_value, g_value, fstar](const Vec& x) -> double {
        return smooth_value(x) + g_value(x) - fstar;
      };
    }
  }
}

}  // namespace nagcert
