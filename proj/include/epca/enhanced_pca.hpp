#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "epca/core.hpp"
#include "epca/corobust.hpp"
#include "epca/sigmaloss.hpp"

namespace epca::enhanced {

/// Affine rank-c model x ~ W v + m with orthonormal W (d x c) and the
/// training coordinates V (c x n).
struct SubspaceModel {
  Eigen::MatrixXd basis;
  Eigen::VectorXd translation;
  Eigen::MatrixXd coordinates;

  Eigen::Index rank() const noexcept { return basis.cols(); }
  Eigen::Index features() const noexcept { return basis.rows(); }
};

struct FitControls {
  double tol = 1e-8;
  int max_iter = 100;
  /// When set, the sample weights are held at these values instead of being
  /// learned. Entries must lie in [0, 1).
  std::optional<Eigen::VectorXd> frozen_alpha;
};

/// Result of `fit`.
///
/// `irls_coeffs` and `eta` are evaluated at the returned point, i.e. they are
/// the d_i and eta_i = d_i / (1 - alpha_i) the next iteration would use.
/// Trace entry 0 is the objective of the PCA warm start.
struct EpcaFitState {
  SubspaceModel model;
  corobust::WeightVector alpha;
  Eigen::VectorXd irls_coeffs;
  Eigen::VectorXd eta;
  std::vector<double> objective_trace;
  std::vector<std::size_t> active_count_trace;
  int iterations = 0;
  bool converged = false;
};

/// Alternating minimisation of
///
///   sum_i 1 / (1 - alpha_i) || x_i - m - W v_i ||_sigma
///
/// over (d, V, m, W, alpha), in that order each outer iteration. Starts from
/// uniform alpha, the sample mean and the classical PCA basis. Each basis
/// column is signed so that the largest-magnitude entry of its coordinate
/// row is positive, which makes V independent of any rotation of the input.
///
/// Throws DimensionError unless 1 <= rank < d, and InvariantError if the
/// objective rises beyond the descent slack.
EpcaFitState fit(const core::DataMatrix& x, Eigen::Index rank,
                 const sigmaloss::SigmaLossParams& p, const FitControls& controls = {});

/// W^T (Y - m 1^T).
Eigen::MatrixXd transform(const SubspaceModel& model, const Eigen::MatrixXd& y);

/// W V + m 1^T.
Eigen::MatrixXd reconstruct(const SubspaceModel& model, const Eigen::MatrixXd& v);

/// Objective value of `state` on `x`, from the model's stored coordinates.
double objective(const core::DataMatrix& x, const EpcaFitState& state,
                 const sigmaloss::SigmaLossParams& p);

/// Flip basis columns (and the matching coordinate rows) so each coordinate
/// row's largest-magnitude entry is positive.
void orient_by_coordinates(Eigen::MatrixXd& basis, Eigen::MatrixXd& coordinates);

}  // namespace epca::enhanced
