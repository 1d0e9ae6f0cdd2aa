#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epca/baselines.hpp"
#include "epca/core.hpp"
#include "epca/corobust.hpp"
#include "epca/enhanced_pca.hpp"
#include "epca/evaluation.hpp"
#include "epca/harness.hpp"
#include "epca/sigmaloss.hpp"

namespace py = pybind11;
using namespace epca;

namespace {

// Samples are columns (d x n), as in the C++ API.
core::DataMatrix as_data(const Eigen::MatrixXd& x) { return core::DataMatrix(x); }

}  // namespace

PYBIND11_MODULE(_epca, m) {
  m.doc() = "Enhanced PCA with collaborative-robust sample weights";
  m.attr("__version__") = std::string(harness::kVersion);

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<DegenerateWeightsError>(m, "DegenerateWeightsError", base.ptr());
  py::register_exception<InvariantError>(m, "InvariantError", base.ptr());
  py::register_exception<IngestionError>(m, "IngestionError", base.ptr());

  // core
  m.def(
      "top_eigenpairs",
      [](const Eigen::MatrixXd& s, Eigen::Index c) {
        core::EigenPairs p = core::top_eigenpairs(s, c);
        return py::make_tuple(p.values, p.vectors);
      },
      py::arg("S"), py::arg("c"), "Leading eigenpairs with a fixed sign/order convention.");
  m.def(
      "column_centroid",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& w) { return core::column_centroid(x, w); },
      py::arg("X"), py::arg("weights"));

  // corobust
  py::class_<corobust::WeightVector>(m, "WeightVector")
      .def_readonly("weights", &corobust::WeightVector::weights)
      .def_readonly("active_count", &corobust::WeightVector::active_count)
      .def_readonly("lambda_", &corobust::WeightVector::lambda);
  m.def(
      "solve_weights",
      [](const std::vector<double>& losses, std::optional<double> zero_floor) {
        return corobust::solve_weights(losses, zero_floor);
      },
      py::arg("losses"), py::arg("zero_floor") = py::none());
  m.def("direct_weights", &corobust::direct_weights, py::arg("wv"));
  m.def(
      "weight_objective",
      [](const std::vector<double>& losses, const corobust::WeightVector& wv) {
        return corobust::objective_value(losses, wv);
      },
      py::arg("losses"), py::arg("wv"));

  // sigmaloss
  m.def(
      "sigma_norm_vector",
      [](const Eigen::VectorXd& a, double sigma) {
        return sigmaloss::sigma_norm_vector(a, sigmaloss::SigmaLossParams(sigma));
      },
      py::arg("a"), py::arg("sigma"));
  m.def(
      "sigma_norm_matrix",
      [](const Eigen::MatrixXd& a, double sigma) {
        return sigmaloss::sigma_norm_matrix(a, sigmaloss::SigmaLossParams(sigma));
      },
      py::arg("A"), py::arg("sigma"));
  m.def(
      "irls_coefficient",
      [](double r, double sigma) {
        return sigmaloss::irls_coefficient(r, sigmaloss::SigmaLossParams(sigma));
      },
      py::arg("residual_norm"), py::arg("sigma"));

  // enhanced PCA
  py::class_<enhanced::SubspaceModel>(m, "SubspaceModel")
      .def(py::init([](Eigen::MatrixXd basis, Eigen::VectorXd translation) {
             return enhanced::SubspaceModel{std::move(basis), std::move(translation), {}};
           }),
           py::arg("basis"), py::arg("translation"))
      .def_readonly("basis", &enhanced::SubspaceModel::basis)
      .def_readonly("translation", &enhanced::SubspaceModel::translation)
      .def_readonly("coordinates", &enhanced::SubspaceModel::coordinates)
      .def_property_readonly("rank", &enhanced::SubspaceModel::rank);

  py::class_<enhanced::EpcaFitState>(m, "EpcaFitState")
      .def_readonly("model", &enhanced::EpcaFitState::model)
      .def_readonly("alpha", &enhanced::EpcaFitState::alpha)
      .def_readonly("irls_coeffs", &enhanced::EpcaFitState::irls_coeffs)
      .def_readonly("eta", &enhanced::EpcaFitState::eta)
      .def_readonly("objective_trace", &enhanced::EpcaFitState::objective_trace)
      .def_readonly("active_count_trace", &enhanced::EpcaFitState::active_count_trace)
      .def_readonly("iterations", &enhanced::EpcaFitState::iterations)
      .def_readonly("converged", &enhanced::EpcaFitState::converged);

  m.def(
      "fit",
      [](const Eigen::MatrixXd& x, Eigen::Index rank, double sigma, double tol, int max_iter) {
        enhanced::FitControls controls;
        controls.tol = tol;
        controls.max_iter = max_iter;
        py::gil_scoped_release release;
        return enhanced::fit(as_data(x), rank, sigmaloss::SigmaLossParams(sigma), controls);
      },
      py::arg("X"), py::arg("rank"), py::arg("sigma") = 1.0, py::arg("tol") = 1e-8,
      py::arg("max_iter") = 100, "Fit EPCA on a d x n matrix (columns are samples).");
  m.def("transform", &enhanced::transform, py::arg("model"), py::arg("Y"));
  m.def("reconstruct", &enhanced::reconstruct, py::arg("model"), py::arg("V"));
  m.def(
      "objective",
      [](const Eigen::MatrixXd& x, const enhanced::EpcaFitState& state, double sigma) {
        return enhanced::objective(as_data(x), state, sigmaloss::SigmaLossParams(sigma));
      },
      py::arg("X"), py::arg("state"), py::arg("sigma"));

  // baselines
  m.def(
      "fit_classical_pca",
      [](const Eigen::MatrixXd& x, Eigen::Index rank) {
        return baselines::as_subspace(baselines::fit_classical_pca(as_data(x), rank), x);
      },
      py::arg("X"), py::arg("rank"));
  m.def(
      "fit_pca_om",
      [](const Eigen::MatrixXd& x, Eigen::Index rank, double tol, int max_iter) {
        return baselines::as_subspace(baselines::fit_pca_om(as_data(x), rank, tol, max_iter), x);
      },
      py::arg("X"), py::arg("rank"), py::arg("tol") = 1e-8, py::arg("max_iter") = 100);

  // evaluation
  m.def(
      "corrupt",
      [](const Eigen::MatrixXd& x, double sample_fraction, double feature_fraction,
         std::uint64_t seed, bool shared_features) {
        evaluation::CorruptionSpec spec{sample_fraction, feature_fraction, seed, shared_features};
        evaluation::CorruptionResult r = evaluation::corrupt(as_data(x), spec);
        return py::make_tuple(r.matrix.values(), r.samples, r.features);
      },
      py::arg("X"), py::arg("sample_fraction") = 0.2, py::arg("feature_fraction") = 0.2,
      py::arg("seed") = 0, py::arg("shared_features") = false);
  m.def("reconstruction_error", &evaluation::reconstruction_error, py::arg("clean"),
        py::arg("occluded"), py::arg("basis"), py::arg("translation"));
  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& points, int k, int restarts, std::uint64_t seed) {
        evaluation::KMeansResult r = evaluation::kmeans(points, k, restarts, core::RngHandle(seed));
        std::vector<std::vector<int>> labels;
        std::vector<double> inertia;
        for (auto& run : r.runs) {
          labels.push_back(run.labels);
          inertia.push_back(run.inertia);
        }
        return py::make_tuple(labels, inertia);
      },
      py::arg("points"), py::arg("k"), py::arg("restarts") = 10, py::arg("seed") = 0,
      "Returns (labels per restart, inertia per restart).");
  m.def(
      "clustering_accuracy",
      [](const std::vector<int>& predicted, const std::vector<long long>& truth) {
        return evaluation::clustering_accuracy(predicted, evaluation::LabelVector::from_ids(truth));
      },
      py::arg("predicted"), py::arg("truth"));
}
