#include "epca/sigmaloss.hpp"

#include <algorithm>

namespace epca::sigmaloss {

double sigma_loss_of_norm(double r, const SigmaLossParams& p) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ValidationError("sigma-loss: residual norm must be finite and nonnegative");
  }
  if (r == 0.0) return 0.0;
  const double s = p.sigma();
  return (1.0 + s) * r * r / (r + s);
}

double sigma_norm_vector(const Eigen::VectorXd& a, const SigmaLossParams& p) {
  if (!a.allFinite()) throw ValidationError("sigma_norm_vector: non-finite entry");
  return sigma_loss_of_norm(a.norm(), p);
}

double sigma_norm_matrix(const Eigen::MatrixXd& a, const SigmaLossParams& p) {
  if (!a.allFinite()) throw ValidationError("sigma_norm_matrix: non-finite entry");
  double total = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) total += sigma_loss_of_norm(a.col(j).norm(), p);
  return total;
}

double irls_coefficient(double residual_norm, const SigmaLossParams& p) {
  if (!(residual_norm >= 0.0) || !std::isfinite(residual_norm)) {
    throw ValidationError("irls_coefficient: residual norm must be finite and nonnegative");
  }
  const double s = p.sigma();
  // (r + sigma)^2 underflows at r = 0 for tiny sigma.
  const double r = s < 1e-12 ? std::max(residual_norm, 1e-14) : residual_norm;
  const double shifted = r + s;
  return (1.0 + s) * (r + 2.0 * s) / (2.0 * shifted * shifted);
}

}  // namespace epca::sigmaloss
