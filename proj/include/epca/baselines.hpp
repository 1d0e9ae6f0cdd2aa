#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "epca/core.hpp"
#include "epca/enhanced_pca.hpp"

namespace epca::baselines {

enum class Method { classical_pca, pca_om };

std::string_view method_name(Method m) noexcept;

struct BaselineModel {
  Eigen::MatrixXd basis;
  Eigen::VectorXd translation;
  Method method = Method::classical_pca;
  /// PCA-OM objective per iteration (empty for classical PCA).
  std::vector<double> objective_trace;
};

/// Column mean plus the top-c eigenvectors of the centred scatter matrix.
BaselineModel fit_classical_pca(const core::DataMatrix& x, Eigen::Index rank);

// l2,1 loss is approximated by sigma = 1e-8.
inline constexpr double kL21Sigma = 1e-8;

/// PCA with optimal mean: the EPCA iteration with sample weights frozen at
/// uniform, so only the IRLS coefficients, the weighted mean and the basis
/// move. `sigma` defaults to the l2,1 limit.
BaselineModel fit_pca_om(const core::DataMatrix& x, Eigen::Index rank, double tol = 1e-8,
                         int max_iter = 100, double sigma = kL21Sigma);

/// Affine model with coordinates of `x`, usable with enhanced::transform.
enhanced::SubspaceModel as_subspace(const BaselineModel& model, const Eigen::MatrixXd& x);

}  // namespace epca::baselines
