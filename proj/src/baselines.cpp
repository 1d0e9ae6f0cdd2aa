#include "epca/baselines.hpp"

#include <string>

namespace epca::baselines {

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::classical_pca: return "classical_pca";
    case Method::pca_om: return "pca_om";
  }
  return "unknown";
}

BaselineModel fit_classical_pca(const core::DataMatrix& data, Eigen::Index rank) {
  const Eigen::MatrixXd& x = data.values();
  if (rank < 1 || rank >= x.rows()) {
    throw DimensionError("fit_classical_pca: need 1 <= c < d, got c=" + std::to_string(rank));
  }
  BaselineModel out;
  out.method = Method::classical_pca;
  out.translation = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - out.translation;
  out.basis = core::top_eigenpairs(centered * centered.transpose(), rank).vectors;
  return out;
}

BaselineModel fit_pca_om(const core::DataMatrix& data, Eigen::Index rank, double tol,
                         int max_iter, double sigma) {
  const Eigen::Index n = data.samples();
  enhanced::FitControls controls;
  controls.tol = tol;
  controls.max_iter = max_iter;
  controls.frozen_alpha = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  enhanced::EpcaFitState state =
      enhanced::fit(data, rank, sigmaloss::SigmaLossParams(sigma), controls);

  BaselineModel out;
  out.method = Method::pca_om;
  out.basis = std::move(state.model.basis);
  out.translation = std::move(state.model.translation);
  out.objective_trace = std::move(state.objective_trace);
  return out;
}

enhanced::SubspaceModel as_subspace(const BaselineModel& model, const Eigen::MatrixXd& x) {
  enhanced::SubspaceModel out{model.basis, model.translation, {}};
  out.coordinates = enhanced::transform(out, x);
  return out;
}

}  // namespace epca::baselines
