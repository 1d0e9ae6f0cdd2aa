#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "epca/core.hpp"

namespace epca::evaluation {

/// Occlusion protocol: floor(sample_fraction * n) samples are picked and in
/// each of them floor(feature_fraction * d) features are reset to a draw
/// from the uniform law on that feature's observed [min, max].
struct CorruptionSpec {
  double sample_fraction = 0.2;
  double feature_fraction = 0.2;
  std::uint64_t seed = 0;
  /// Use one feature subset for every corrupted sample instead of drawing
  /// a fresh subset per sample.
  bool shared_features = false;

  void validate() const;
  std::size_t corrupted_samples(Eigen::Index n) const;
  std::size_t corrupted_features(Eigen::Index d) const;
};

struct CorruptionResult {
  core::DataMatrix matrix;
  std::vector<Eigen::Index> samples;                 // ascending
  std::vector<std::vector<Eigen::Index>> features;   // per entry of `samples`, ascending
};

CorruptionResult corrupt(const core::DataMatrix& x, const CorruptionSpec& spec);

/// || X - m 1^T - W W^T (X_occ - m 1^T) ||_F^2 with (W, m) learned on X_occ.
double reconstruction_error(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& occluded,
                            const Eigen::MatrixXd& basis, const Eigen::VectorXd& translation);

struct LabelVector {
  std::vector<int> labels;
  int class_count = 0;

  /// Remaps arbitrary integer ids onto [0, class_count) in order of first
  /// appearance of the sorted distinct ids.
  static LabelVector from_ids(const std::vector<long long>& ids);
  void validate() const;
};

struct KMeansRun {
  std::vector<int> labels;
  double inertia = 0.0;                 // within-cluster sum of squares
  std::vector<double> inertia_trace;    // after every Lloyd assignment step
  int iterations = 0;
};

struct KMeansResult {
  std::vector<KMeansRun> runs;
  const KMeansRun& best() const;
};

/// Lloyd's algorithm with k-means++ seeding on the columns of `points`.
/// Every restart draws from its own stream derived from `rng`.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts,
                    const core::RngHandle& rng, int max_iter = 300);

/// Best agreement fraction over one-to-one maps from predicted clusters to
/// true classes, found by optimal assignment on the confusion matrix.
double clustering_accuracy(const std::vector<int>& predicted, const LabelVector& truth);

/// Minimum-cost perfect assignment on a square cost matrix. Returns, for each
/// row, the assigned column.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace epca::evaluation
