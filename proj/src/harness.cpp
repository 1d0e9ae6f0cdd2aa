#include "epca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "epca/baselines.hpp"

namespace epca::harness {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(MethodId m) noexcept {
  switch (m) {
    case MethodId::epca: return "epca";
    case MethodId::classical_pca: return "classical_pca";
    case MethodId::pca_om: return "pca_om";
  }
  return "unknown";
}

MethodId parse_method(std::string_view name) {
  if (name == "epca") return MethodId::epca;
  if (name == "classical_pca" || name == "pca") return MethodId::classical_pca;
  if (name == "pca_om" || name == "pca-om") return MethodId::pca_om;
  throw ValidationError("unknown method '" + std::string(name) +
                        "' (expected epca, classical_pca or pca_om)");
}

// --- ingestion -------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view cell, T& value) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  return ec == std::errc() && ptr == end;
}

struct CsvRows {
  std::vector<std::vector<std::string_view>> cells;
  std::vector<std::size_t> line_numbers;  // 1-based line of each row
  std::string storage;
};

CsvRows read_rows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open '" + path + "'");
  CsvRows rows;
  std::ostringstream buf;
  buf << in.rdbuf();
  rows.storage = buf.str();
  std::string_view text(rows.storage);
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    rows.cells.push_back(split_commas(line));
    rows.line_numbers.push_back(line_no);
  }
  return rows;
}

bool row_is_numeric(const std::vector<std::string_view>& row) {
  double ignored = 0.0;
  return std::all_of(row.begin(), row.end(), [&](std::string_view c) { return parse_number(c, ignored); });
}

std::string location(const std::string& path, std::size_t line, std::size_t column) {
  return path + ": row " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::vector<long long> read_label_csv(const std::string& path) {
  CsvRows rows = read_rows(path);
  std::size_t first = 0;
  if (!rows.cells.empty()) {
    long long ignored = 0;
    if (!parse_number(rows.cells[0][0], ignored)) first = 1;
  }
  std::vector<long long> out;
  for (std::size_t r = first; r < rows.cells.size(); ++r) {
    const auto& row = rows.cells[r];
    if (row.size() != 1) {
      throw IngestionError(location(path, rows.line_numbers[r], 2) +
                           ": label file must have a single column");
    }
    long long value = 0;
    if (!parse_number(row[0], value)) {
      throw IngestionError(location(path, rows.line_numbers[r], 1) + ": label '" +
                           std::string(row[0]) + "' is not an integer");
    }
    out.push_back(value);
  }
  return out;
}

IngestResult ingest_csv(const std::string& path, const std::optional<std::string>& labels_path) {
  CsvRows rows = read_rows(path);
  if (rows.cells.empty()) throw IngestionError(path + ": no data rows");

  std::size_t first = 0;
  bool header = false;
  if (!row_is_numeric(rows.cells[0])) {
    header = true;
    first = 1;
  }
  const std::size_t n = rows.cells.size() - first;
  if (n == 0) throw IngestionError(path + ": header only, no data rows");
  const std::size_t d = rows.cells[first].size();

  Eigen::MatrixXd x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (std::size_t r = first; r < rows.cells.size(); ++r) {
    const auto& row = rows.cells[r];
    if (row.size() != d) {
      throw IngestionError(location(path, rows.line_numbers[r], std::min(row.size(), d) + 1) +
                           ": expected " + std::to_string(d) + " columns, found " +
                           std::to_string(row.size()));
    }
    for (std::size_t c = 0; c < d; ++c) {
      double value = 0.0;
      if (!parse_number(row[c], value) || !std::isfinite(value)) {
        throw IngestionError(location(path, rows.line_numbers[r], c + 1) + ": '" +
                             std::string(row[c]) + "' is not a finite number");
      }
      x(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r - first)) = value;
    }
  }
  if (n < 2) throw IngestionError(path + ": need at least 2 samples, found " + std::to_string(n));

  IngestResult out{core::DataMatrix(std::move(x)), std::nullopt, header};
  if (labels_path) {
    const std::vector<long long> ids = read_label_csv(*labels_path);
    if (ids.size() != n) {
      throw IngestionError(*labels_path + ": " + std::to_string(ids.size()) +
                           " labels for " + std::to_string(n) + " samples in " + path);
    }
    out.labels = evaluation::LabelVector::from_ids(ids);
  }
  return out;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    for (Eigen::Index j = 0; j < x.rows(); ++j) {
      if (j) out << ',';
      out << x(j, i);
    }
    out << '\n';
  }
}

// --- model files -----------------------------------------------------------

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) {
      throw ValidationError("model file: ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

ordered_json model_to_json(const enhanced::SubspaceModel& model, std::string_view method) {
  ordered_json j;
  j["method"] = method;
  j["features"] = model.features();
  j["rank"] = model.rank();
  j["translation"] = std::vector<double>(model.translation.data(),
                                         model.translation.data() + model.translation.size());
  j["basis"] = matrix_to_json(model.basis);
  return j;
}

enhanced::SubspaceModel model_from_json(const json& j) {
  enhanced::SubspaceModel model;
  model.basis = matrix_from_json(j.at("basis"));
  const auto t = j.at("translation").get<std::vector<double>>();
  model.translation = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
  if (model.translation.size() != model.basis.rows() || model.basis.cols() < 1) {
    throw DimensionError("model file: basis and translation dimensions disagree");
  }
  if (j.contains("coordinates")) model.coordinates = matrix_from_json(j.at("coordinates"));
  return model;
}

// --- configuration ---------------------------------------------------------

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ValidationError("config: no methods");
  if (ranks.empty()) throw ValidationError("config: no ranks");
  if (seeds.empty()) throw ValidationError("config: no seeds");
  if (sigma_grid.empty()) throw ValidationError("config: empty sigma grid");
  for (double s : sigma_grid) sigmaloss::SigmaLossParams check(s);
  for (Eigen::Index c : ranks) {
    if (c < 1) throw ValidationError("config: ranks must be positive");
  }
  corruption.validate();
  if (kmeans_restarts < 1) throw ValidationError("config: kmeans_restarts must be positive");
  if (!(tol >= 0.0)) throw ValidationError("config: tol must be nonnegative");
  if (max_iter < 0) throw ValidationError("config: max_iter must be nonnegative");
}

void ExperimentConfig::validate_for(const core::DataMatrix& data) const {
  validate();
  for (Eigen::Index c : ranks) {
    if (c >= data.features()) {
      throw DimensionError("config: rank " + std::to_string(c) + " is not below d=" +
                           std::to_string(data.features()));
    }
  }
}

void apply_config_json(ExperimentConfig& cfg, const json& j) {
  if (j.contains("input_path")) cfg.input_path = j["input_path"].get<std::string>();
  if (j.contains("labels_path") && !j["labels_path"].is_null()) {
    cfg.labels_path = j["labels_path"].get<std::string>();
  }
  if (j.contains("methods")) {
    cfg.methods.clear();
    for (const auto& m : j["methods"]) cfg.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (j.contains("ranks")) cfg.ranks = j["ranks"].get<std::vector<Eigen::Index>>();
  if (j.contains("sigma_grid")) cfg.sigma_grid = j["sigma_grid"].get<std::vector<double>>();
  if (j.contains("log2_sigma_range")) {
    const auto range = j["log2_sigma_range"].get<std::vector<int>>();
    if (range.size() != 2) throw ValidationError("config: log2_sigma_range needs [lo, hi]");
    cfg.sigma_grid = log2_grid(range[0], range[1]);
  }
  if (j.contains("corruption")) {
    const auto& c = j["corruption"];
    if (c.contains("sample_fraction")) cfg.corruption.sample_fraction = c["sample_fraction"].get<double>();
    if (c.contains("feature_fraction")) cfg.corruption.feature_fraction = c["feature_fraction"].get<double>();
    if (c.contains("shared_features")) cfg.corruption.shared_features = c["shared_features"].get<bool>();
  }
  if (j.contains("kmeans_restarts")) cfg.kmeans_restarts = j["kmeans_restarts"].get<int>();
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["input_path"] = cfg.input_path;
  j["labels_path"] = cfg.labels_path ? ordered_json(*cfg.labels_path) : ordered_json(nullptr);
  ordered_json methods = ordered_json::array();
  for (MethodId m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["ranks"] = cfg.ranks;
  j["sigma_grid"] = cfg.sigma_grid;
  j["corruption"] = {{"sample_fraction", cfg.corruption.sample_fraction},
                     {"feature_fraction", cfg.corruption.feature_fraction},
                     {"shared_features", cfg.corruption.shared_features},
                     {"value_law", "uniform_feature_range"}};
  j["kmeans_restarts"] = cfg.kmeans_restarts;
  j["seeds"] = cfg.seeds;
  j["tol"] = cfg.tol;
  j["max_iter"] = cfg.max_iter;
  return j;
}

std::vector<double> log2_grid(int lo, int hi) {
  if (hi < lo) throw ValidationError("log2_grid: hi < lo");
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::uint64_t checksum(const Eigen::MatrixXd& x) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(x.data());
  const std::size_t count = static_cast<std::size_t>(x.size()) * sizeof(double);
  for (std::size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kThreadsEnv)) {
    int value = 0;
    const std::string_view s(env);
    if (parse_number(s, value) && value > 0) return value;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// --- experiment execution --------------------------------------------------

namespace {

struct CellSpec {
  MethodId method;
  Eigen::Index rank;
  double sigma;
  std::size_t seed_index;
  std::uint64_t cell_index;
};

struct FittedModel {
  enhanced::SubspaceModel model;
  std::vector<std::size_t> active_counts;
  int iterations = 0;
};

FittedModel fit_method(MethodId method, const core::DataMatrix& data, Eigen::Index rank,
                       double sigma, double tol, int max_iter) {
  FittedModel out;
  switch (method) {
    case MethodId::epca: {
      enhanced::FitControls controls;
      controls.tol = tol;
      controls.max_iter = max_iter;
      enhanced::EpcaFitState state =
          enhanced::fit(data, rank, sigmaloss::SigmaLossParams(sigma), controls);
      out.active_counts = std::move(state.active_count_trace);
      out.iterations = state.iterations;
      out.model = std::move(state.model);
      break;
    }
    case MethodId::classical_pca:
      out.model = baselines::as_subspace(baselines::fit_classical_pca(data, rank), data.values());
      break;
    case MethodId::pca_om: {
      baselines::BaselineModel m = baselines::fit_pca_om(data, rank, tol, max_iter);
      out.iterations = static_cast<int>(m.objective_trace.size()) - 1;
      out.model = baselines::as_subspace(m, data.values());
      break;
    }
  }
  return out;
}

CellResult evaluate_cell(const CellSpec& spec, std::uint64_t seed, const ExperimentConfig& cfg,
                         const core::DataMatrix& clean, const core::DataMatrix& occluded,
                         const std::optional<evaluation::LabelVector>& labels, bool cluster) {
  CellResult cell;
  cell.method = spec.method;
  cell.rank = spec.rank;
  cell.sigma = spec.sigma;
  cell.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    FittedModel fitted = fit_method(spec.method, occluded, spec.rank, spec.sigma, cfg.tol, cfg.max_iter);
    cell.reconstruction_error = evaluation::reconstruction_error(
        clean.values(), occluded.values(), fitted.model.basis, fitted.model.translation);
    cell.active_count_trace = std::move(fitted.active_counts);
    cell.iterations = fitted.iterations;
    if (cluster && labels) {
      const Eigen::MatrixXd coords = enhanced::transform(fitted.model, occluded.values());
      const core::RngHandle rng = core::RngHandle(seed).derive(spec.cell_index);
      const evaluation::KMeansResult km =
          evaluation::kmeans(coords, labels->class_count, cfg.kmeans_restarts, rng);
      double acc = 0.0;
      for (const auto& run : km.runs) acc += evaluation::clustering_accuracy(run.labels, *labels);
      cell.mean_accuracy = acc / static_cast<double>(km.runs.size());
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  cell.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

std::vector<core::DataMatrix> corrupt_per_seed(const ExperimentConfig& cfg, const core::DataMatrix& clean) {
  std::vector<core::DataMatrix> out;
  out.reserve(cfg.seeds.size());
  for (std::uint64_t seed : cfg.seeds) {
    evaluation::CorruptionSpec spec = cfg.corruption;
    spec.seed = seed;
    out.push_back(evaluation::corrupt(clean, spec).matrix);
  }
  return out;
}

}  // namespace

std::size_t ExperimentReport::failures() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(),
                                                [](const CellResult& c) { return !c.ok; }));
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const core::DataMatrix& clean,
                                const std::optional<evaluation::LabelVector>& labels) {
  cfg.validate_for(clean);
  if (labels) {
    labels->validate();
    if (static_cast<Eigen::Index>(labels->labels.size()) != clean.samples()) {
      throw DimensionError("labels: " + std::to_string(labels->labels.size()) + " labels for " +
                           std::to_string(clean.samples()) + " samples");
    }
  }

  ExperimentReport report;
  report.config = cfg;
  report.features = clean.features();
  report.samples = clean.samples();
  report.clean_checksum_before = checksum(clean.values());

  const std::vector<core::DataMatrix> occluded = corrupt_per_seed(cfg, clean);

  std::vector<CellSpec> specs;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    for (MethodId m : cfg.methods) {
      for (Eigen::Index c : cfg.ranks) {
        for (double sigma : cfg.sigma_grid) {
          specs.push_back({m, c, sigma, s, static_cast<std::uint64_t>(specs.size())});
        }
      }
    }
  }
  report.cells.resize(specs.size());
  parallel_for(specs.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
    const CellSpec& spec = specs[i];
    report.cells[i] = evaluate_cell(spec, cfg.seeds[spec.seed_index], cfg, clean,
                                    occluded[spec.seed_index], labels, true);
  });

  report.clean_checksum_after = checksum(clean.values());
  if (report.clean_checksum_after != report.clean_checksum_before) {
    throw InvariantError("clean matrix changed during the run");
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  IngestResult in = ingest_csv(cfg.input_path, cfg.labels_path);
  return run_experiment(cfg, in.data, in.labels);
}

namespace {

ordered_json number_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

}  // namespace

ordered_json report_to_json(const ExperimentReport& report) {
  ordered_json j;
  j["library_version"] = kVersion;
  j["config"] = config_to_json(report.config);
  j["data"] = {{"features", report.features},
               {"samples", report.samples},
               {"clean_checksum_before", report.clean_checksum_before},
               {"clean_checksum_after", report.clean_checksum_after}};
  ordered_json cells = ordered_json::array();
  for (const CellResult& c : report.cells) {
    ordered_json cell;
    cell["method"] = to_string(c.method);
    cell["rank"] = c.rank;
    cell["sigma"] = c.sigma;
    cell["seed"] = c.seed;
    cell["status"] = c.ok ? "ok" : "failed";
    if (!c.ok) cell["error"] = c.error;
    cell["reconstruction_error"] = c.ok ? number_or_null(c.reconstruction_error) : ordered_json(nullptr);
    cell["mean_accuracy"] = c.mean_accuracy ? ordered_json(*c.mean_accuracy) : ordered_json(nullptr);
    cell["active_count_trace"] = c.active_count_trace;
    cell["iterations"] = c.iterations;
    cell["wall_clock_seconds"] = c.wall_clock_seconds;
    cells.push_back(std::move(cell));
  }
  j["failures"] = report.failures();
  j["cells"] = std::move(cells);
  return j;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "method,rank,sigma,seed,status,reconstruction_error,mean_accuracy,final_active_count,"
         "iterations,wall_clock_seconds\n";
  for (const CellResult& c : report.cells) {
    out << to_string(c.method) << ',' << c.rank << ',' << c.sigma << ',' << c.seed << ','
        << (c.ok ? "ok" : "failed") << ',';
    if (c.ok) out << c.reconstruction_error;
    out << ',';
    if (c.mean_accuracy) out << *c.mean_accuracy;
    out << ',';
    if (!c.active_count_trace.empty()) out << c.active_count_trace.back();
    out << ',' << c.iterations << ',' << c.wall_clock_seconds << '\n';
  }
  return out.str();
}

// --- sigma search ----------------------------------------------------------

namespace {

double mean_error(const ExperimentConfig& cfg, const core::DataMatrix& clean,
                  const std::vector<core::DataMatrix>& occluded, double sigma, std::uint64_t base_index) {
  double total = 0.0;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    const CellSpec spec{MethodId::epca, cfg.ranks.front(), sigma, s, base_index};
    const CellResult cell = evaluate_cell(spec, cfg.seeds[s], cfg, clean, occluded[s], std::nullopt, false);
    if (!cell.ok) return std::numeric_limits<double>::quiet_NaN();
    total += cell.reconstruction_error;
  }
  return total / static_cast<double>(cfg.seeds.size());
}

}  // namespace

GridSearchResult grid_search_sigma(const ExperimentConfig& cfg, const core::DataMatrix& clean) {
  cfg.validate_for(clean);
  std::vector<double> grid = cfg.sigma_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const std::vector<core::DataMatrix> occluded = corrupt_per_seed(cfg, clean);
  const int threads = resolve_threads(cfg.threads);

  GridSearchResult out;
  out.curve.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    out.curve[i] = CurvePoint{grid[i], mean_error(cfg, clean, occluded, grid[i], i), false};
  });

  auto argmin = [](const std::vector<CurvePoint>& pts) {
    std::size_t best = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::isnan(pts[i].error)) continue;
      if (best == pts.size() || pts[i].error < pts[best].error) best = i;
    }
    return best;
  };
  const std::size_t coarse_best = argmin(out.curve);
  if (coarse_best == out.curve.size()) {
    throw Error("grid_search_sigma: every coarse grid point failed");
  }
  out.boundary_warning = grid.size() > 1 && (coarse_best == 0 || coarse_best + 1 == grid.size());

  const double lo = grid[coarse_best == 0 ? 0 : coarse_best - 1];
  const double hi = grid[std::min(coarse_best + 1, grid.size() - 1)];
  if (hi > lo) {
    constexpr int kFinePoints = 8;
    std::vector<CurvePoint> fine(kFinePoints);
    parallel_for(fine.size(), threads, [&](std::size_t j) {
      const double t = static_cast<double>(j + 1) / (kFinePoints + 1);
      const double sigma = lo * std::pow(hi / lo, t);
      fine[j] = CurvePoint{sigma, mean_error(cfg, clean, occluded, sigma, grid.size() + j), true};
    });
    out.curve.insert(out.curve.end(), fine.begin(), fine.end());
  }

  const double min_error = out.curve[argmin(out.curve)].error;
  // Relative tie band plus a round-off floor for curves that sit at zero.
  const double tie = min_error + 1e-9 * std::abs(min_error) + 1e-20 * clean.values().squaredNorm();
  out.best_sigma = std::numeric_limits<double>::infinity();
  for (const CurvePoint& p : out.curve) {
    if (!std::isnan(p.error) && p.error <= tie && p.sigma < out.best_sigma) {
      out.best_sigma = p.sigma;
      out.best_error = p.error;
    }
  }
  return out;
}

GridSearchResult grid_search_sigma(const ExperimentConfig& cfg) {
  IngestResult in = ingest_csv(cfg.input_path, cfg.labels_path);
  return grid_search_sigma(cfg, in.data);
}

std::string curve_to_csv(const GridSearchResult& result) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "log2_sigma,sigma,error,pass\n";
  for (const CurvePoint& p : result.curve) {
    out << std::log2(p.sigma) << ',' << p.sigma << ',';
    if (!std::isnan(p.error)) out << p.error;
    out << ',' << (p.fine ? "fine" : "coarse") << '\n';
  }
  return out.str();
}

}  // namespace epca::harness
