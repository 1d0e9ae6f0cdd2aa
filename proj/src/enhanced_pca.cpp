#include "epca/enhanced_pca.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epca::enhanced {

namespace {

using sigmaloss::SigmaLossParams;

void check_rank(Eigen::Index rank, Eigen::Index d) {
  if (rank < 1 || rank >= d) {
    throw DimensionError("rank must satisfy 1 <= c < d, got c=" + std::to_string(rank) +
                         ", d=" + std::to_string(d));
  }
}

std::vector<double> residual_losses(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& basis,
                                    const Eigen::MatrixXd& coords, const SigmaLossParams& p) {
  const Eigen::MatrixXd residual = centered - basis * coords;
  std::vector<double> out(static_cast<std::size_t>(residual.cols()));
  for (Eigen::Index i = 0; i < residual.cols(); ++i) {
    out[i] = sigmaloss::sigma_loss_of_norm(residual.col(i).norm(), p);
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

corobust::WeightVector frozen_weights(const Eigen::VectorXd& alpha, Eigen::Index n) {
  if (alpha.size() != n) {
    throw DimensionError("frozen_alpha has " + std::to_string(alpha.size()) +
                         " entries for " + std::to_string(n) + " samples");
  }
  corobust::WeightVector wv;
  wv.weights.assign(alpha.data(), alpha.data() + alpha.size());
  for (double w : wv.weights) {
    if (!(w >= 0.0 && w < 1.0)) throw ValidationError("frozen_alpha entries must lie in [0, 1)");
    if (w > 0.0) ++wv.active_count;
  }
  return wv;
}

double weighted_total(const std::vector<double>& losses, const Eigen::VectorXd& hat) {
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) total += hat(static_cast<Eigen::Index>(i)) * losses[i];
  return total;
}

}  // namespace

void orient_by_coordinates(Eigen::MatrixXd& basis, Eigen::MatrixXd& coordinates) {
  for (Eigen::Index j = 0; j < coordinates.rows(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < coordinates.cols(); ++i) {
      if (std::abs(coordinates(j, i)) > std::abs(coordinates(j, best))) best = i;
    }
    if (coordinates.cols() > 0 && coordinates(j, best) < 0.0) {
      coordinates.row(j) *= -1.0;
      basis.col(j) *= -1.0;
    }
  }
}

EpcaFitState fit(const core::DataMatrix& data, Eigen::Index rank, const SigmaLossParams& p,
                 const FitControls& controls) {
  const Eigen::MatrixXd& x = data.values();
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  check_rank(rank, d);
  if (controls.max_iter < 0) throw ValidationError("max_iter must be nonnegative");

  EpcaFitState state;
  state.alpha = controls.frozen_alpha ? frozen_weights(*controls.frozen_alpha, n)
                                      : corobust::WeightVector{
                                            std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                            static_cast<std::size_t>(n), 0.0};
  Eigen::VectorXd hat = to_vector(corobust::direct_weights(state.alpha));

  // Warm start: classical PCA.
  Eigen::VectorXd m = x.rowwise().mean();
  Eigen::MatrixXd centered = x.colwise() - m;
  Eigen::MatrixXd w = core::top_eigenpairs(centered * centered.transpose(), rank).vectors;
  Eigen::MatrixXd v = w.transpose() * centered;
  orient_by_coordinates(w, v);

  std::vector<double> losses = residual_losses(centered, w, v, p);
  double current = weighted_total(losses, hat);
  state.objective_trace.push_back(current);
  state.active_count_trace.push_back(state.alpha.active_count);

  // Absolute allowance for round-off when the fit is (near) exact.
  const double scale = centered.colwise().norm().maxCoeff();
  const double noise_floor =
      static_cast<double>(n) * hat.maxCoeff() * sigmaloss::sigma_loss_of_norm(1e-11 * scale, p);

  Eigen::VectorXd coeffs(n);
  Eigen::VectorXd eta(n);
  for (int iter = 0; iter < controls.max_iter; ++iter) {
    // (1) IRLS coefficients from the current residuals.
    const Eigen::MatrixXd residual = centered - w * v;
    for (Eigen::Index i = 0; i < n; ++i) {
      coeffs(i) = sigmaloss::irls_coefficient(residual.col(i).norm(), p);
    }
    // (2) coordinates for the current (m, W).
    v = w.transpose() * centered;
    // (3) weighted mean, particular solution of the mean family.
    eta = coeffs.cwiseProduct(hat);
    m = core::column_centroid(x, eta);
    centered = x.colwise() - m;
    // (4) leading eigenvectors of the weighted scatter.
    const Eigen::MatrixXd q = centered * eta.asDiagonal() * centered.transpose();
    w = core::top_eigenpairs(0.5 * (q + q.transpose()), rank).vectors;
    v = w.transpose() * centered;
    orient_by_coordinates(w, v);
    // (5) sample weights from the projection residual losses.
    losses = residual_losses(centered, w, v, p);
    if (!controls.frozen_alpha) {
      state.alpha = corobust::solve_weights(losses);
      hat = to_vector(corobust::direct_weights(state.alpha));
    }

    const double next = weighted_total(losses, hat);
    ++state.iterations;
    if (next > current + sigmaloss::kDescentSlack * std::abs(current) + noise_floor) {
      throw InvariantError("EPCA objective increased from " + std::to_string(current) + " to " +
                           std::to_string(next) + " at iteration " +
                           std::to_string(state.iterations));
    }
    state.objective_trace.push_back(next);
    state.active_count_trace.push_back(state.alpha.active_count);
    const bool done = next == 0.0 || std::abs(current - next) <= controls.tol * std::abs(current);
    current = next;
    if (done) {
      state.converged = true;
      break;
    }
  }

  const Eigen::MatrixXd residual = centered - w * v;
  for (Eigen::Index i = 0; i < n; ++i) {
    coeffs(i) = sigmaloss::irls_coefficient(residual.col(i).norm(), p);
  }
  state.irls_coeffs = coeffs;
  state.eta = coeffs.cwiseProduct(hat);
  state.model = SubspaceModel{std::move(w), std::move(m), std::move(v)};
  return state;
}

Eigen::MatrixXd transform(const SubspaceModel& model, const Eigen::MatrixXd& y) {
  if (y.rows() != model.features()) {
    throw DimensionError("transform: data has " + std::to_string(y.rows()) +
                         " rows, model expects " + std::to_string(model.features()));
  }
  return model.basis.transpose() * (y.colwise() - model.translation);
}

Eigen::MatrixXd reconstruct(const SubspaceModel& model, const Eigen::MatrixXd& v) {
  if (v.rows() != model.rank()) {
    throw DimensionError("reconstruct: coordinates have " + std::to_string(v.rows()) +
                         " rows, model rank is " + std::to_string(model.rank()));
  }
  return (model.basis * v).colwise() + model.translation;
}

double objective(const core::DataMatrix& data, const EpcaFitState& state,
                 const SigmaLossParams& p) {
  const SubspaceModel& model = state.model;
  const Eigen::MatrixXd& x = data.values();
  if (x.rows() != model.features() || x.cols() != model.coordinates.cols() ||
      static_cast<Eigen::Index>(state.alpha.weights.size()) != x.cols() ||
      model.translation.size() != x.rows()) {
    throw DimensionError("objective: state does not match data shape");
  }
  const Eigen::MatrixXd residual =
      (x.colwise() - model.translation) - model.basis * model.coordinates;
  const std::vector<double> hat = corobust::direct_weights(state.alpha);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    total += hat[i] * sigmaloss::sigma_loss_of_norm(residual.col(i).norm(), p);
  }
  return total;
}

}  // namespace epca::enhanced
