#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "epca/errors.hpp"

namespace epca::core {

/// Dense d x n matrix whose columns are samples. Entries are finite, d >= 1
/// and n >= 2; the constructor enforces this so downstream code can rely on it.
class DataMatrix {
 public:
  explicit DataMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::Index features() const noexcept { return values_.rows(); }
  Eigen::Index samples() const noexcept { return values_.cols(); }
  auto sample(Eigen::Index i) const { return values_.col(i); }

 private:
  Eigen::MatrixXd values_;
};

/// Seeded random stream. Conversions from raw 64-bit draws are done here
/// rather than through <random> distributions, whose output is
/// implementation-defined, so that a seed yields the same sequence on every
/// platform.
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n), unbiased.
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();

  /// Independent child stream keyed by `stream`. Does not advance this handle.
  RngHandle derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct EigenPairs {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // d x c, orthonormal columns
};

/// Leading c eigenpairs of a symmetric matrix.
///
/// Gauge is fixed so results are reproducible: every eigenvector is flipped so
/// that its largest-magnitude entry is positive (lowest index wins a tie), and
/// vectors sharing an eigenvalue are ordered lexicographically descending.
EigenPairs top_eigenpairs(const Eigen::MatrixXd& symmetric, Eigen::Index c);

/// Flip `v` so that its largest-magnitude entry is positive.
void orient_by_largest_entry(Eigen::Ref<Eigen::VectorXd> v);

/// sum_i w_i x_i / sum_i w_i over the columns of `x`.
Eigen::VectorXd column_centroid(const Eigen::MatrixXd& x,
                                std::span<const double> weights);
Eigen::VectorXd column_centroid(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& weights);

/// Largest principal angle (radians) between the column spaces of two
/// matrices with orthonormal columns and equal column count.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

bool all_finite(const Eigen::MatrixXd& m) noexcept;

}  // namespace epca::core
