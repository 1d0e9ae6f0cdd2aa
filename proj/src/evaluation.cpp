#include "epca/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace epca::evaluation {

namespace {

std::size_t fraction_count(double fraction, Eigen::Index total) {
  // The small offset keeps products like 0.29 * 100 from flooring to 28.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(total) + 1e-9));
}

// First `count` entries of a seeded Fisher-Yates shuffle of [0, total), sorted.
std::vector<Eigen::Index> choose_subset(Eigen::Index total, std::size_t count, core::RngHandle& rng) {
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(total));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

void CorruptionSpec::validate() const {
  auto ok = [](double f) { return f >= 0.0 && f <= 1.0; };
  if (!ok(sample_fraction) || !ok(feature_fraction)) {
    throw ValidationError("corruption fractions must lie in [0, 1]");
  }
}

std::size_t CorruptionSpec::corrupted_samples(Eigen::Index n) const {
  return fraction_count(sample_fraction, n);
}

std::size_t CorruptionSpec::corrupted_features(Eigen::Index d) const {
  return fraction_count(feature_fraction, d);
}

CorruptionResult corrupt(const core::DataMatrix& data, const CorruptionSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd& x = data.values();
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  const Eigen::VectorXd lo = x.rowwise().minCoeff();
  const Eigen::VectorXd hi = x.rowwise().maxCoeff();

  core::RngHandle rng(spec.seed);
  std::vector<Eigen::Index> samples = choose_subset(n, spec.corrupted_samples(n), rng);
  const std::size_t per_sample = spec.corrupted_features(d);

  Eigen::MatrixXd out = x;
  std::vector<std::vector<Eigen::Index>> features;
  features.reserve(samples.size());
  std::vector<Eigen::Index> shared;
  if (spec.shared_features) shared = choose_subset(d, per_sample, rng);
  for (Eigen::Index s : samples) {
    std::vector<Eigen::Index> picked =
        spec.shared_features ? shared : choose_subset(d, per_sample, rng);
    for (Eigen::Index f : picked) out(f, s) = rng.uniform(lo(f), hi(f));
    features.push_back(std::move(picked));
  }
  return CorruptionResult{core::DataMatrix(std::move(out)), std::move(samples), std::move(features)};
}

double reconstruction_error(const Eigen::MatrixXd& clean, const Eigen::MatrixXd& occluded,
                            const Eigen::MatrixXd& basis, const Eigen::VectorXd& translation) {
  if (clean.rows() != occluded.rows() || clean.cols() != occluded.cols()) {
    throw DimensionError("reconstruction_error: clean and occluded shapes differ");
  }
  if (basis.rows() != clean.rows() || translation.size() != clean.rows()) {
    throw DimensionError("reconstruction_error: model dimension does not match data");
  }
  if (basis.cols() < 1) throw DimensionError("reconstruction_error: basis needs c >= 1 columns");
  const Eigen::MatrixXd centered_occ = occluded.colwise() - translation;
  const Eigen::MatrixXd projected = basis * (basis.transpose() * centered_occ);
  return ((clean.colwise() - translation) - projected).squaredNorm();
}

LabelVector LabelVector::from_ids(const std::vector<long long>& ids) {
  std::map<long long, int> index;
  for (long long id : ids) index.emplace(id, 0);
  int next = 0;
  for (auto& [id, slot] : index) slot = next++;
  LabelVector out;
  out.class_count = next;
  out.labels.reserve(ids.size());
  for (long long id : ids) out.labels.push_back(index.at(id));
  return out;
}

void LabelVector::validate() const {
  for (int l : labels) {
    if (l < 0 || l >= class_count) {
      throw ValidationError("label " + std::to_string(l) + " outside [0, " +
                            std::to_string(class_count) + ")");
    }
  }
}

const KMeansRun& KMeansResult::best() const {
  if (runs.empty()) throw ValidationError("KMeansResult: no runs");
  return *std::min_element(runs.begin(), runs.end(), [](const KMeansRun& a, const KMeansRun& b) {
    return a.inertia < b.inertia;
  });
}

namespace {

double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centers, std::vector<int>& labels) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.cols(); ++c) {
      const double dist = (points.col(i) - centers.col(c)).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = static_cast<int>(c);
      }
    }
    labels[i] = best;
    inertia += best_d;
  }
  return inertia;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& points, int k, core::RngHandle& rng) {
  const Eigen::Index n = points.cols();
  Eigen::MatrixXd centers(points.rows(), k);
  centers.col(0) = points.col(static_cast<Eigen::Index>(rng.uniform_index(n)));
  Eigen::VectorXd nearest = (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(n));
    }
    centers.col(c) = points.col(pick);
    nearest = nearest.cwiseMin(
        (points.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }
  return centers;
}

KMeansRun lloyd(const Eigen::MatrixXd& points, int k, core::RngHandle rng, int max_iter) {
  Eigen::MatrixXd centers = seed_plus_plus(points, k, rng);
  KMeansRun run;
  run.labels.assign(static_cast<std::size_t>(points.cols()), 0);
  run.inertia_trace.push_back(assign(points, centers, run.labels));
  std::vector<int> next(run.labels.size());
  while (run.iterations < max_iter) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), k);
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
      sums.col(run.labels[i]) += points.col(i);
      ++counts[run.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centers.col(c) = sums.col(c) / counts[c];  // empty: keep centroid
    }
    run.inertia_trace.push_back(assign(points, centers, next));
    ++run.iterations;
    const bool stable = next == run.labels;
    run.labels.swap(next);
    if (stable) break;
  }
  run.inertia = run.inertia_trace.back();
  return run;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, const core::RngHandle& rng,
                    int max_iter) {
  if (k < 1) throw ValidationError("kmeans: k must be positive");
  if (k > points.cols()) {
    throw DimensionError("kmeans: k=" + std::to_string(k) + " exceeds " +
                         std::to_string(points.cols()) + " points");
  }
  if (restarts < 1) throw ValidationError("kmeans: restarts must be positive");
  if (!core::all_finite(points)) throw ValidationError("kmeans: non-finite coordinate");
  KMeansResult out;
  out.runs.reserve(static_cast<std::size_t>(restarts));
  for (int r = 0; r < restarts; ++r) {
    out.runs.push_back(lloyd(points, k, rng.derive(static_cast<std::uint64_t>(r)), max_iter));
  }
  return out;
}

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionError("solve_assignment: cost matrix must be square");
  // Shortest augmenting path (Kuhn-Munkres) with potentials; 1-based scratch.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

double clustering_accuracy(const std::vector<int>& predicted, const LabelVector& truth) {
  truth.validate();
  if (predicted.size() != truth.labels.size()) {
    throw DimensionError("clustering_accuracy: " + std::to_string(predicted.size()) +
                         " predictions vs " + std::to_string(truth.labels.size()) + " labels");
  }
  if (predicted.empty()) throw DimensionError("clustering_accuracy: no samples");
  int clusters = 0;
  for (int l : predicted) {
    if (l < 0) throw ValidationError("clustering_accuracy: negative cluster id");
    clusters = std::max(clusters, l + 1);
  }
  const int size = std::max(clusters, truth.class_count);
  Eigen::MatrixXd confusion = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t i = 0; i < predicted.size(); ++i) confusion(predicted[i], truth.labels[i]) += 1.0;
  const std::vector<int> match = solve_assignment(-confusion);
  double agree = 0.0;
  for (int r = 0; r < size; ++r) agree += confusion(r, match[r]);
  return agree / static_cast<double>(predicted.size());
}

}  // namespace epca::evaluation
