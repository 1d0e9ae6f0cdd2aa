#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "epca/harness.hpp"
#include "test_support.hpp"

using namespace epca;
using harness::ExperimentConfig;
using harness::MethodId;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = std::filesystem::temp_directory_path() /
            (std::string("epca_") + info->test_suite_name() + "_" + info->name());
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

 private:
  std::filesystem::path path_;
};

/// Removes the timing fields, the only non-deterministic part of a report.
nlohmann::ordered_json strip_timing(nlohmann::ordered_json j) {
  for (auto& cell : j["cells"]) cell.erase("wall_clock_seconds");
  return j;
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.ranks = {2};
  cfg.sigma_grid = {0.5, 4.0};
  cfg.seeds = {1, 2};
  cfg.kmeans_restarts = 5;
  cfg.threads = 3;
  return cfg;
}

struct Labelled {
  core::DataMatrix x;
  evaluation::LabelVector labels;
};

Labelled two_clusters(core::RngHandle& rng, Eigen::Index d, Eigen::Index n) {
  auto data = testkit::low_rank(rng, d, n, 2, 0.3);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    labels[j] = static_cast<int>(j % 2);
    data.x.col(j) += (labels[j] ? 8.0 : -8.0) * data.basis.col(0);
  }
  return {core::DataMatrix(data.x), {labels, 2}};
}

}  // namespace

TEST(IngestCsv, ShapeAndHeader) {
  TempDir dir;
  const auto plain = dir.write("a.csv", "1,2\n3,4\n5,6\n");
  const auto r = harness::ingest_csv(plain);
  EXPECT_EQ(r.data.features(), 2);
  EXPECT_EQ(r.data.samples(), 3);
  EXPECT_EQ(r.data.values()(1, 2), 6.0);
  EXPECT_FALSE(r.header_skipped);

  const auto headed = dir.write("b.csv", "\xEF\xBB\xBFx,y\n1,2\n\n3,4\n");
  const auto h = harness::ingest_csv(headed);
  EXPECT_TRUE(h.header_skipped);
  EXPECT_EQ(h.data.samples(), 2);
}

TEST(IngestCsv, Errors) {
  TempDir dir;
  const auto ragged = dir.write("r.csv", "1,2\n3\n");
  try {
    harness::ingest_csv(ragged);
    FAIL() << "ragged input accepted";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(harness::ingest_csv(dir.write("n.csv", "1,2\n3,abc\n")), IngestionError);
  EXPECT_THROW(harness::ingest_csv((std::filesystem::temp_directory_path() / "no_such_epca.csv").string()),
               IngestionError);
}

TEST(IngestCsv, LabelLengthMismatchNamesBothLengths) {
  TempDir dir;
  const auto data = dir.write("d.csv", "1,2\n3,4\n5,6\n");
  const auto labels = dir.write("l.csv", "label\n0\n1\n");
  try {
    harness::ingest_csv(data, labels);
    FAIL() << "mismatch accepted";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('2'), std::string::npos) << msg;
    EXPECT_NE(msg.find('3'), std::string::npos) << msg;
  }
  const auto good = dir.write("g.csv", "5\n5\n9\n");
  const auto r = harness::ingest_csv(data, good);
  ASSERT_TRUE(r.labels);
  EXPECT_EQ(r.labels->class_count, 2);
}

TEST(MatrixCsv, RoundTrip) {
  TempDir dir;
  core::RngHandle rng(71);
  const Eigen::MatrixXd x = testkit::gaussian(rng, 3, 7);
  const auto path = dir.write("m.csv", "");
  harness::write_matrix_csv(path, x);
  EXPECT_EQ(harness::ingest_csv(path).data.values(), x);
}

TEST(ModelJson, RoundTrip) {
  core::RngHandle rng(72);
  enhanced::SubspaceModel m{testkit::orthonormal_columns(testkit::gaussian(rng, 5, 2)),
                            testkit::gaussian(rng, 5, 1).col(0), {}};
  const auto j = harness::model_to_json(m, "epca");
  const auto back = harness::model_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.basis, m.basis);
  EXPECT_EQ(back.translation, m.translation);
}

TEST(Config, ParsingAndValidation) {
  ExperimentConfig cfg;
  harness::apply_config_json(cfg, nlohmann::json::parse(R"({
    "methods": ["epca", "pca"], "ranks": [3, 5], "log2_sigma_range": [-2, 2],
    "corruption": {"sample_fraction": 0.1}, "seeds": [4], "kmeans_restarts": 7})"));
  EXPECT_EQ(cfg.methods, (std::vector<MethodId>{MethodId::epca, MethodId::classical_pca}));
  EXPECT_EQ(cfg.sigma_grid, (std::vector<double>{0.25, 0.5, 1, 2, 4}));
  EXPECT_EQ(cfg.corruption.sample_fraction, 0.1);
  EXPECT_EQ(cfg.corruption.feature_fraction, 0.2);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_THROW(cfg.validate_for(core::DataMatrix(Eigen::MatrixXd::Zero(5, 10))), DimensionError);
  EXPECT_NO_THROW(cfg.validate_for(core::DataMatrix(Eigen::MatrixXd::Zero(6, 10))));
  cfg.methods.clear();
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_THROW(harness::parse_method("kpca"), ValidationError);
}

TEST(ResolveThreads, ExplicitBeatsEnvironment) {
  EXPECT_EQ(harness::resolve_threads(3), 3);
  ::setenv(harness::kThreadsEnv, "5", 1);
  EXPECT_EQ(harness::resolve_threads(0), 5);
  ::setenv(harness::kThreadsEnv, "junk", 1);
  EXPECT_GE(harness::resolve_threads(0), 1);
  ::unsetenv(harness::kThreadsEnv);
}

TEST(RunExperiment, SingleCell) {
  core::RngHandle rng(73);
  const core::DataMatrix x(testkit::low_rank(rng, 6, 30, 2, 0.2).x);
  ExperimentConfig cfg;
  cfg.methods = {MethodId::classical_pca};
  cfg.ranks = {2};
  const auto rep = harness::run_experiment(cfg, x, std::nullopt);
  ASSERT_EQ(rep.cells.size(), 1u);
  EXPECT_TRUE(rep.cells[0].ok);
  EXPECT_FALSE(rep.cells[0].mean_accuracy);
  EXPECT_EQ(rep.failures(), 0u);
}

TEST(RunExperiment, CompleteGridAndChecksum) {
  core::RngHandle rng(74);
  const auto data = two_clusters(rng, 8, 60);
  const auto cfg = small_config();
  const auto before = harness::checksum(data.x.values());
  const auto rep = harness::run_experiment(cfg, data.x, data.labels);
  EXPECT_EQ(rep.cells.size(), 3u * 1u * 2u * 2u);
  EXPECT_EQ(rep.clean_checksum_before, before);
  EXPECT_EQ(rep.clean_checksum_after, before);
  EXPECT_EQ(harness::checksum(data.x.values()), before);
  for (const auto& c : rep.cells) {
    EXPECT_TRUE(c.ok) << c.error;
    ASSERT_TRUE(c.mean_accuracy);
    EXPECT_GE(*c.mean_accuracy, 0.5);
    EXPECT_LE(*c.mean_accuracy, 1.0);
  }
  const std::string csv = harness::report_to_csv(rep);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  core::RngHandle rng(75);
  const auto data = two_clusters(rng, 8, 50);
  auto cfg = small_config();
  const auto a = strip_timing(harness::report_to_json(harness::run_experiment(cfg, data.x, data.labels)));
  cfg.threads = 1;
  const auto b = strip_timing(harness::report_to_json(harness::run_experiment(cfg, data.x, data.labels)));
  EXPECT_EQ(a["cells"].dump(), b["cells"].dump());
  cfg.threads = 3;
  const auto c = strip_timing(harness::report_to_json(harness::run_experiment(cfg, data.x, data.labels)));
  EXPECT_EQ(a.dump(), c.dump());
}

TEST(RunExperiment, ReportKeyOrder) {
  core::RngHandle rng(76);
  const core::DataMatrix x(testkit::low_rank(rng, 5, 20, 2, 0.2).x);
  ExperimentConfig cfg;
  cfg.ranks = {2};
  const auto j = harness::report_to_json(harness::run_experiment(cfg, x, std::nullopt));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"library_version", "config", "data", "failures", "cells"}));
  EXPECT_EQ(j["cells"][0].begin().key(), "method");
}

TEST(RunExperiment, RejectsNonPositiveSigma) {
  ExperimentConfig cfg;
  cfg.sigma_grid = {1.0, 0.0};
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(RunExperiment, LargeSigmaMatchesPcaOnCleanData) {
  core::RngHandle rng(78);
  const core::DataMatrix x(testkit::low_rank(rng, 10, 60, 2, 0.0).x);
  ExperimentConfig cfg;
  cfg.methods = {MethodId::epca, MethodId::classical_pca};
  cfg.ranks = {3};
  cfg.sigma_grid = {1e8};
  cfg.corruption.sample_fraction = 0.0;
  cfg.corruption.feature_fraction = 0.0;
  const auto rep = harness::run_experiment(cfg, x, std::nullopt);
  ASSERT_EQ(rep.cells.size(), 2u);
  const double e = rep.cells[0].reconstruction_error;
  const double p = rep.cells[1].reconstruction_error;
  EXPECT_LE(std::abs(e - p), 1e-6 * std::max(p, 1e-12 * x.values().squaredNorm()));
}

TEST(GridSearch, BoundaryWarningAndCurve) {
  core::RngHandle rng(79);
  const core::DataMatrix x(testkit::low_rank(rng, 10, 80, 2, 0.2).x);
  ExperimentConfig cfg;
  cfg.ranks = {2};
  cfg.sigma_grid = harness::log2_grid(-4, 4);
  const auto r = harness::grid_search_sigma(cfg, x);
  ASSERT_GE(r.curve.size(), 9u);
  std::size_t best = 0;
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_FALSE(r.curve[i].fine);
    if (r.curve[i].error < r.curve[best].error) best = i;
  }
  EXPECT_EQ(r.boundary_warning, best == 0 || best == 8);
  for (std::size_t i = 9; i < r.curve.size(); ++i) EXPECT_TRUE(r.curve[i].fine);

  cfg.sigma_grid = {1.0, 2.0};
  EXPECT_TRUE(harness::grid_search_sigma(cfg, x).boundary_warning);
}

TEST(GridSearch, FlatCurvePicksSmallestSigma) {
  core::RngHandle rng(80);
  const core::DataMatrix x(testkit::low_rank(rng, 8, 40, 2, 0.0).x);
  ExperimentConfig cfg;
  cfg.ranks = {4};
  cfg.sigma_grid = {8.0, 0.5, 2.0};
  cfg.corruption.sample_fraction = 0.0;
  const auto r = harness::grid_search_sigma(cfg, x);
  EXPECT_EQ(r.best_sigma, 0.5);
}

TEST(GridSearch, OccludedCurveReproducible) {
  core::RngHandle rng(81);
  const core::DataMatrix x(testkit::low_rank(rng, 12, 100, 2, 0.1).x);
  ExperimentConfig cfg;
  cfg.ranks = {2};
  cfg.seeds = {3};
  cfg.sigma_grid = harness::log2_grid(-6, 6);
  const auto a = harness::grid_search_sigma(cfg, x);
  const auto b = harness::grid_search_sigma(cfg, x);
  EXPECT_EQ(a.best_sigma, b.best_sigma);
  EXPECT_EQ(harness::curve_to_csv(a), harness::curve_to_csv(b));
  double lo = a.curve[0].error, hi = lo;
  for (const auto& p : a.curve) {
    lo = std::min(lo, p.error);
    hi = std::max(hi, p.error);
  }
  EXPECT_GT(hi, lo * (1 + 1e-6)) << "curve is flat";
}
