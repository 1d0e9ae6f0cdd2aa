#include "epca/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

namespace epca::core {

bool all_finite(const Eigen::MatrixXd& m) noexcept {
  return m.array().isFinite().all();
}

DataMatrix::DataMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 2) {
    throw DimensionError("DataMatrix needs d >= 1 and n >= 2, got " +
                         std::to_string(values_.rows()) + "x" +
                         std::to_string(values_.cols()));
  }
  if (!all_finite(values_)) {
    throw ValidationError("DataMatrix entries must be finite");
  }
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double RngHandle::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RngHandle::uniform_index(std::uint64_t n) {
  if (n == 0) throw ValidationError("uniform_index: empty range");
  // Reject the top partial bucket.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return draw % n;
}

double RngHandle::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngHandle RngHandle::derive(std::uint64_t stream) const {
  return RngHandle(splitmix64(seed_ ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

void orient_by_largest_entry(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v.size() > 0 && v(best) < 0) v = -v;
}

namespace {

bool lexicographically_greater(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) > b(i);
  }
  return false;
}

}  // namespace

EigenPairs top_eigenpairs(const Eigen::MatrixXd& symmetric, Eigen::Index c) {
  const Eigen::Index d = symmetric.rows();
  if (d != symmetric.cols()) {
    throw ValidationError("top_eigenpairs: matrix is not square");
  }
  if (c < 1 || c > d) {
    throw DimensionError("top_eigenpairs: need 1 <= c <= d, got c=" +
                         std::to_string(c) + ", d=" + std::to_string(d));
  }
  if (!all_finite(symmetric)) {
    throw ValidationError("top_eigenpairs: non-finite entry");
  }
  const double norm = symmetric.norm();
  if ((symmetric - symmetric.transpose()).norm() > 1e-10 * norm) {
    throw ValidationError("top_eigenpairs: matrix is not symmetric");
  }

  const Eigen::MatrixXd sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw InvariantError("top_eigenpairs: eigensolver did not converge");
  }

  // Eigen returns ascending order; walk it backwards.
  std::vector<double> values(static_cast<std::size_t>(d));
  std::vector<Eigen::VectorXd> vectors(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::Index src = d - 1 - j;
    values[j] = solver.eigenvalues()(src);
    vectors[j] = solver.eigenvectors().col(src);
    orient_by_largest_entry(vectors[j]);
  }

  // Order vectors inside each group of equal eigenvalues.
  const double tie = 1e-12 * (1.0 + norm);
  std::size_t start = 0;
  while (start < values.size()) {
    std::size_t stop = start + 1;
    while (stop < values.size() && values[start] - values[stop] <= tie) ++stop;
    if (stop - start > 1) {
      std::vector<Eigen::VectorXd> group(vectors.begin() + start, vectors.begin() + stop);
      std::stable_sort(group.begin(), group.end(), lexicographically_greater);
      std::copy(group.begin(), group.end(), vectors.begin() + start);
    }
    start = stop;
  }

  EigenPairs out{Eigen::VectorXd(c), Eigen::MatrixXd(d, c)};
  for (Eigen::Index j = 0; j < c; ++j) {
    out.values(j) = values[j];
    out.vectors.col(j) = vectors[j];
  }
  return out;
}

Eigen::VectorXd column_centroid(const Eigen::MatrixXd& x,
                                std::span<const double> weights) {
  if (static_cast<Eigen::Index>(weights.size()) != x.cols()) {
    throw DimensionError("column_centroid: " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(x.cols()) + " samples");
  }
  double total = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(x.rows());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double w = weights[static_cast<std::size_t>(i)];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ValidationError("column_centroid: weights must be finite and nonnegative");
    }
    total += w;
    acc += w * x.col(i);
  }
  if (total <= 0.0) {
    throw DegenerateWeightsError("column_centroid: weights sum to zero");
  }
  return acc / total;
}

Eigen::VectorXd column_centroid(const Eigen::MatrixXd& x, const Eigen::VectorXd& weights) {
  return column_centroid(x, std::span<const double>(weights.data(),
                                                    static_cast<std::size_t>(weights.size())));
}

double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_principal_angle: shape mismatch");
  }
  // sin of the largest angle is the spectral norm of b's component outside a.
  const Eigen::MatrixXd outside = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(outside);
  const double largest = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return std::asin(std::clamp(largest, 0.0, 1.0));
}

}  // namespace epca::core
