#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "epca/core.hpp"
#include "epca/enhanced_pca.hpp"
#include "epca/evaluation.hpp"

namespace epca::harness {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr const char* kThreadsEnv = "EPCA_NUM_THREADS";

enum class MethodId { epca, classical_pca, pca_om };

std::string_view to_string(MethodId m) noexcept;
MethodId parse_method(std::string_view name);

// --- ingestion -------------------------------------------------------------

struct IngestResult {
  core::DataMatrix data;
  std::optional<evaluation::LabelVector> labels;
  bool header_skipped = false;
};

/// Reads a comma-separated matrix whose rows are samples and returns it in the
/// d x n column-sample layout. A first row containing any non-numeric cell is
/// treated as a header and skipped. Blank lines are ignored.
///
/// Throws IngestionError naming the row/column of ragged or non-numeric input.
IngestResult ingest_csv(const std::string& path,
                        const std::optional<std::string>& labels_path = std::nullopt);

/// Single-column integer label file, optional header.
std::vector<long long> read_label_csv(const std::string& path);

/// Writes `x` (d x n) as CSV with one row per sample, at full round-trip precision.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& x);

// --- model files -----------------------------------------------------------

nlohmann::ordered_json model_to_json(const enhanced::SubspaceModel& model, std::string_view method);
/// Inverse of model_to_json (coordinates are optional in the file).
enhanced::SubspaceModel model_from_json(const nlohmann::json& j);

// --- experiments -----------------------------------------------------------

struct ExperimentConfig {
  std::string input_path;
  std::optional<std::string> labels_path;
  std::vector<MethodId> methods{MethodId::epca, MethodId::classical_pca, MethodId::pca_om};
  std::vector<Eigen::Index> ranks{10};
  std::vector<double> sigma_grid{1.0};
  evaluation::CorruptionSpec corruption{};
  int kmeans_restarts = 100;
  std::vector<std::uint64_t> seeds{0};
  double tol = 1e-8;
  int max_iter = 100;
  /// 0 = read kThreadsEnv, falling back to hardware concurrency.
  int threads = 0;

  /// Checks everything that does not depend on the data.
  void validate() const;
  /// Range check against the ingested matrix (every c < d).
  void validate_for(const core::DataMatrix& data) const;
};

/// Applies the keys present in `j` on top of `cfg`.
void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// log2-spaced sigma grid 2^lo, ..., 2^hi.
std::vector<double> log2_grid(int lo, int hi);

struct CellResult {
  MethodId method = MethodId::epca;
  Eigen::Index rank = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double reconstruction_error = 0.0;
  std::optional<double> mean_accuracy;
  std::vector<std::size_t> active_count_trace;
  int iterations = 0;
  double wall_clock_seconds = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  Eigen::Index features = 0;
  Eigen::Index samples = 0;
  std::uint64_t clean_checksum_before = 0;
  std::uint64_t clean_checksum_after = 0;
  std::vector<CellResult> cells;

  std::size_t failures() const;
};

/// For every seed the data is corrupted once and all methods see the same
/// occluded matrix. Each (method, c, sigma) cell is fitted on the occluded
/// data and scored against the clean data; with labels, k-means (k = class
/// count) runs on the occluded coordinates and the mean accuracy over the
/// restarts is kept. A failing cell is recorded and the run continues.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const core::DataMatrix& clean,
                                const std::optional<evaluation::LabelVector>& labels);
/// Loads `cfg.input_path` / `cfg.labels_path` and runs.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
/// One line per cell; header included.
std::string report_to_csv(const ExperimentReport& report);

struct CurvePoint {
  double sigma = 0.0;
  double error = 0.0;  // mean over seeds; NaN if any seed failed
  bool fine = false;
};

struct GridSearchResult {
  double best_sigma = 0.0;
  double best_error = 0.0;
  bool boundary_warning = false;
  std::vector<CurvePoint> curve;  // coarse points first (ascending), then fine
};

/// Coarse pass over the (sorted) grid with EPCA at the first rank, then a
/// fine pass of 8 log-spaced points strictly between the coarse winner's
/// neighbours. Errors within 1e-9 relative of the minimum (plus 1e-20 ||X||_F^2
/// for round-off) count as ties and the smallest sigma wins. `boundary_warning` flags a coarse winner at
/// either end of the grid.
GridSearchResult grid_search_sigma(const ExperimentConfig& cfg, const core::DataMatrix& clean);
GridSearchResult grid_search_sigma(const ExperimentConfig& cfg);

/// (log2 sigma, error) series for plotting.
std::string curve_to_csv(const GridSearchResult& result);

/// FNV-1a over the raw bytes of the matrix.
std::uint64_t checksum(const Eigen::MatrixXd& x) noexcept;

int resolve_threads(int requested);

}  // namespace epca::harness
