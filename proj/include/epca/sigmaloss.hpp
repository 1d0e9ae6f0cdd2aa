#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epca/errors.hpp"

namespace epca::sigmaloss {

/// Robustness knob of the sigma-loss. Small sigma behaves like the l2,1 norm,
/// large sigma like the squared Frobenius norm. Must be positive and finite.
class SigmaLossParams {
 public:
  explicit SigmaLossParams(double sigma) : sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ValidationError("sigma must be positive and finite, got " + std::to_string(sigma));
    }
  }
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
};

/// (1 + sigma) r^2 / (r + sigma) for a residual norm r >= 0.
double sigma_loss_of_norm(double r, const SigmaLossParams& p);

/// Point-wise sigma-loss of a vector.
double sigma_norm_vector(const Eigen::VectorXd& a, const SigmaLossParams& p);

/// Sum of the point-wise loss over the columns of `a`.
double sigma_norm_matrix(const Eigen::MatrixXd& a, const SigmaLossParams& p);

/// IRLS surrogate weight (1 + sigma)(r + 2 sigma) / (2 (r + sigma)^2). Finite and
/// positive for every r >= 0; the gradient of the vector loss is 2 d(r) a.
/// For sigma < 1e-12 the norm is clamped to at least 1e-14 first.
double irls_coefficient(double residual_norm, const SigmaLossParams& p);

inline constexpr double kDescentSlack = 1e-9;

template <class Params>
struct IrlsResult {
  Params params;
  std::vector<double> objective_trace;  // entry 0 is the starting point
  int iterations = 0;
  bool converged = false;
};

/// Iteratively reweighted solver for
///
///   min_theta  sum_i s_i || g_i(theta) ||_sigma.
///
/// `residuals(theta)` returns the residual vectors g_i as columns.
/// `weighted_solver(c)` must return the exact minimiser of
/// sum_i c_i ||g_i(theta)||^2 for the supplied per-sample coefficients
/// c_i = s_i d_i. Each iteration recomputes d_i from the current residual
/// norms. Stops when the relative objective decrease drops below `tol` or
/// after `max_iter` iterations.
///
/// Throws InvariantError if the objective ever rises by more than
/// kDescentSlack relative to its previous value.
template <class Params>
IrlsResult<Params> irls_solve(
    const std::function<Eigen::MatrixXd(const Params&)>& residuals,
    const std::function<Params(const Eigen::VectorXd&)>& weighted_solver,
    const Eigen::VectorXd& multipliers, const SigmaLossParams& p, Params start,
    double tol = 1e-9, int max_iter = 100) {
  if ((multipliers.array() < 0.0).any() || !multipliers.allFinite()) {
    throw ValidationError("irls_solve: multipliers must be finite and nonnegative");
  }
  auto evaluate = [&](const Eigen::MatrixXd& r) {
    if (r.cols() != multipliers.size()) {
      throw DimensionError("irls_solve: residual count does not match multipliers");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.cols(); ++i) {
      total += multipliers(i) * sigma_loss_of_norm(r.col(i).norm(), p);
    }
    return total;
  };

  IrlsResult<Params> out{std::move(start), {}, 0, false};
  Eigen::MatrixXd r = residuals(out.params);
  double current = evaluate(r);
  out.objective_trace.push_back(current);

  while (out.iterations < max_iter) {
    Eigen::VectorXd coeffs(r.cols());
    for (Eigen::Index i = 0; i < r.cols(); ++i) {
      coeffs(i) = multipliers(i) * irls_coefficient(r.col(i).norm(), p);
    }
    Params next = weighted_solver(coeffs);
    Eigen::MatrixXd next_r = residuals(next);
    const double next_value = evaluate(next_r);
    ++out.iterations;
    if (next_value > current + kDescentSlack * std::abs(current)) {
      throw InvariantError("irls_solve: objective increased from " + std::to_string(current) +
                           " to " + std::to_string(next_value));
    }
    out.params = std::move(next);
    out.objective_trace.push_back(next_value);
    r = std::move(next_r);
    const double decrease = current - next_value;
    const bool done = next_value == 0.0 || decrease <= tol * std::abs(current);
    current = next_value;
    if (done) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace epca::sigmaloss
