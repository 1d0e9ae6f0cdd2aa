// Command-line front end for the experiment harness.
//
//   epca corrupt    --input X.csv --out occ.csv [--seed S] [--corrupt-samples F] [--corrupt-features F]
//   epca fit        --input occ.csv --method epca --rank c [--sigma s] --out model.json
//   epca eval       --clean X.csv --occluded occ.csv --model model.json [--labels y.csv]
//   epca run        [--config cfg.json] [flags] --out report.json [--csv cells.csv]
//   epca grid-sigma [--config cfg.json] [flags] --out curve.csv [--report result.json]
//
// `run` exits with 2 when any cell failed; failures are embedded in the report.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "epca/baselines.hpp"
#include "epca/enhanced_pca.hpp"
#include "epca/evaluation.hpp"
#include "epca/harness.hpp"

namespace {

using namespace epca;
using nlohmann::json;
using nlohmann::ordered_json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

// Flags shared by `run` and `grid-sigma`; unset flags leave the config alone.
struct ExperimentFlags {
  std::string config_path;
  std::string input;
  std::string labels;
  std::vector<std::string> methods;
  std::vector<Eigen::Index> ranks;
  std::vector<double> sigmas;
  std::vector<int> log2_range;
  std::vector<std::uint64_t> seeds;
  std::optional<double> corrupt_samples;
  std::optional<double> corrupt_features;
  bool shared_features = false;
  std::optional<int> restarts;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file; flags override its fields");
    app->add_option("--input", input, "CSV matrix, one sample per row");
    app->add_option("--labels", labels, "single-column integer label CSV");
    app->add_option("--method", methods, "epca | classical_pca | pca_om (repeatable)");
    app->add_option("--rank", ranks, "target rank c (repeatable)");
    app->add_option("--sigma", sigmas, "sigma value (repeatable)");
    app->add_option("--log2-sigma-range", log2_range, "sigma grid 2^lo..2^hi")->expected(2);
    app->add_option("--seed", seeds, "trial seed (repeatable)");
    app->add_option("--corrupt-samples", corrupt_samples, "fraction of samples to occlude");
    app->add_option("--corrupt-features", corrupt_features, "fraction of features per occluded sample");
    app->add_flag("--shared-features", shared_features, "one feature subset for all occluded samples");
    app->add_option("--restarts", restarts, "k-means restarts");
    app->add_option("--tol", tol, "relative objective tolerance");
    app->add_option("--max-iter", max_iter, "iteration cap");
    app->add_option("--threads", threads, std::string("worker threads (default: $") +
                                              harness::kThreadsEnv + ")");
  }

  harness::ExperimentConfig build() const {
    harness::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error("cannot open config '" + config_path + "'");
      harness::apply_config_json(cfg, json::parse(in));
    }
    if (!input.empty()) cfg.input_path = input;
    if (!labels.empty()) cfg.labels_path = labels;
    if (!methods.empty()) {
      cfg.methods.clear();
      for (const auto& m : methods) cfg.methods.push_back(harness::parse_method(m));
    }
    if (!ranks.empty()) cfg.ranks = ranks;
    if (!log2_range.empty()) cfg.sigma_grid = harness::log2_grid(log2_range[0], log2_range[1]);
    if (!sigmas.empty()) cfg.sigma_grid = sigmas;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (corrupt_samples) cfg.corruption.sample_fraction = *corrupt_samples;
    if (corrupt_features) cfg.corruption.feature_fraction = *corrupt_features;
    if (shared_features) cfg.corruption.shared_features = true;
    if (restarts) cfg.kmeans_restarts = *restarts;
    if (tol) cfg.tol = *tol;
    if (max_iter) cfg.max_iter = *max_iter;
    if (threads) cfg.threads = *threads;
    if (cfg.input_path.empty()) throw Error("no input matrix (use --input or the config file)");
    return cfg;
  }
};

harness::IngestResult ingest_verbose(const std::string& path,
                                     const std::optional<std::string>& labels = std::nullopt) {
  harness::IngestResult in = harness::ingest_csv(path, labels);
  if (in.header_skipped) std::cerr << "note: skipped header row in " << path << '\n';
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust dimensionality reduction with learned sample weights"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(harness::kVersion));

  // corrupt
  auto* corrupt_cmd = app.add_subcommand("corrupt", "occlude a clean matrix");
  std::string corrupt_in, corrupt_out, corrupt_mask;
  evaluation::CorruptionSpec corruption;
  corrupt_cmd->add_option("--input", corrupt_in, "clean CSV matrix")->required();
  corrupt_cmd->add_option("--out", corrupt_out, "occluded CSV output")->required();
  corrupt_cmd->add_option("--seed", corruption.seed, "corruption seed");
  corrupt_cmd->add_option("--corrupt-samples", corruption.sample_fraction, "fraction of samples");
  corrupt_cmd->add_option("--corrupt-features", corruption.feature_fraction, "fraction of features");
  corrupt_cmd->add_flag("--shared-features", corruption.shared_features,
                        "one feature subset for all occluded samples");
  corrupt_cmd->add_option("--mask-out", corrupt_mask, "JSON file listing the occluded entries");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write it as JSON");
  std::string fit_in, fit_out = "-", fit_method = "epca";
  Eigen::Index fit_rank = 0;
  double fit_sigma = 1.0, fit_tol = 1e-8;
  int fit_max_iter = 100;
  fit_cmd->add_option("--input", fit_in, "CSV matrix")->required();
  fit_cmd->add_option("--method", fit_method, "epca | classical_pca | pca_om");
  fit_cmd->add_option("--rank", fit_rank, "target rank c")->required();
  fit_cmd->add_option("--sigma", fit_sigma, "sigma (epca only)");
  fit_cmd->add_option("--tol", fit_tol, "relative objective tolerance");
  fit_cmd->add_option("--max-iter", fit_max_iter, "iteration cap");
  fit_cmd->add_option("--out", fit_out, "model JSON ('-' for stdout)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a fitted model");
  std::string eval_clean, eval_occ, eval_model, eval_labels, eval_out = "-";
  int eval_restarts = 100;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--clean", eval_clean, "clean CSV matrix")->required();
  eval_cmd->add_option("--occluded", eval_occ, "occluded CSV matrix the model was fitted on")->required();
  eval_cmd->add_option("--model", eval_model, "model JSON written by `fit`")->required();
  eval_cmd->add_option("--labels", eval_labels, "label CSV for clustering accuracy");
  eval_cmd->add_option("--restarts", eval_restarts, "k-means restarts");
  eval_cmd->add_option("--seed", eval_seed, "k-means seed");
  eval_cmd->add_option("--out", eval_out, "result JSON ('-' for stdout)");

  // run
  auto* run_cmd = app.add_subcommand("run", "full corruption / reconstruction / clustering protocol");
  ExperimentFlags run_flags;
  run_flags.attach(run_cmd);
  std::string run_out = "-", run_csv;
  run_cmd->add_option("--out", run_out, "report JSON ('-' for stdout)");
  run_cmd->add_option("--csv", run_csv, "also write the cells as flat CSV");

  // grid-sigma
  auto* grid_cmd = app.add_subcommand("grid-sigma", "coarse + fine search over sigma");
  ExperimentFlags grid_flags;
  grid_flags.attach(grid_cmd);
  std::string grid_out = "-", grid_report;
  grid_cmd->add_option("--out", grid_out, "(log2 sigma, error) CSV ('-' for stdout)");
  grid_cmd->add_option("--report", grid_report, "summary JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corrupt_cmd) {
      harness::IngestResult in = ingest_verbose(corrupt_in);
      const evaluation::CorruptionResult res = evaluation::corrupt(in.data, corruption);
      harness::write_matrix_csv(corrupt_out, res.matrix.values());
      if (!corrupt_mask.empty()) {
        ordered_json mask;
        mask["seed"] = corruption.seed;
        mask["samples"] = res.samples;
        mask["features"] = res.features;
        write_text(corrupt_mask, mask.dump(2) + "\n");
      }
      return 0;
    }

    if (*fit_cmd) {
      harness::IngestResult in = ingest_verbose(fit_in);
      const harness::MethodId method = harness::parse_method(fit_method);
      ordered_json j;
      switch (method) {
        case harness::MethodId::epca: {
          enhanced::FitControls controls;
          controls.tol = fit_tol;
          controls.max_iter = fit_max_iter;
          const enhanced::EpcaFitState state =
              enhanced::fit(in.data, fit_rank, sigmaloss::SigmaLossParams(fit_sigma), controls);
          j = harness::model_to_json(state.model, "epca");
          j["sigma"] = fit_sigma;
          j["iterations"] = state.iterations;
          j["converged"] = state.converged;
          j["objective_trace"] = state.objective_trace;
          j["active_count_trace"] = state.active_count_trace;
          j["alpha"] = state.alpha.weights;
          break;
        }
        case harness::MethodId::classical_pca: {
          const auto m = baselines::fit_classical_pca(in.data, fit_rank);
          j = harness::model_to_json(baselines::as_subspace(m, in.data.values()), "classical_pca");
          break;
        }
        case harness::MethodId::pca_om: {
          const auto m = baselines::fit_pca_om(in.data, fit_rank, fit_tol, fit_max_iter);
          j = harness::model_to_json(baselines::as_subspace(m, in.data.values()), "pca_om");
          j["objective_trace"] = m.objective_trace;
          break;
        }
      }
      write_text(fit_out, j.dump(2) + "\n");
      return 0;
    }

    if (*eval_cmd) {
      std::optional<std::string> labels_path;
      if (!eval_labels.empty()) labels_path = eval_labels;
      harness::IngestResult clean = ingest_verbose(eval_clean, labels_path);
      harness::IngestResult occ = ingest_verbose(eval_occ);
      std::ifstream model_in(eval_model);
      if (!model_in) throw Error("cannot open model '" + eval_model + "'");
      const enhanced::SubspaceModel model = harness::model_from_json(json::parse(model_in));
      ordered_json j;
      j["reconstruction_error"] = evaluation::reconstruction_error(
          clean.data.values(), occ.data.values(), model.basis, model.translation);
      if (clean.labels) {
        const Eigen::MatrixXd coords = enhanced::transform(model, occ.data.values());
        const auto km = evaluation::kmeans(coords, clean.labels->class_count, eval_restarts,
                                           core::RngHandle(eval_seed));
        double acc = 0.0;
        for (const auto& run : km.runs) acc += evaluation::clustering_accuracy(run.labels, *clean.labels);
        j["mean_accuracy"] = acc / static_cast<double>(km.runs.size());
        j["best_inertia_accuracy"] = evaluation::clustering_accuracy(km.best().labels, *clean.labels);
      }
      write_text(eval_out, j.dump(2) + "\n");
      return 0;
    }

    if (*run_cmd) {
      const harness::ExperimentConfig cfg = run_flags.build();
      harness::IngestResult in = ingest_verbose(cfg.input_path, cfg.labels_path);
      const harness::ExperimentReport report = harness::run_experiment(cfg, in.data, in.labels);
      write_text(run_out, harness::report_to_json(report).dump(2) + "\n");
      if (!run_csv.empty()) write_text(run_csv, harness::report_to_csv(report));
      if (report.failures() > 0) {
        std::cerr << report.failures() << " of " << report.cells.size() << " cells failed\n";
        return 2;
      }
      return 0;
    }

    if (*grid_cmd) {
      harness::ExperimentConfig cfg = grid_flags.build();
      if (grid_flags.sigmas.empty() && grid_flags.log2_range.empty() && grid_flags.config_path.empty()) {
        cfg.sigma_grid = harness::log2_grid(-20, 20);
      }
      harness::IngestResult in = ingest_verbose(cfg.input_path);
      const harness::GridSearchResult res = harness::grid_search_sigma(cfg, in.data);
      write_text(grid_out, harness::curve_to_csv(res));
      if (res.boundary_warning) {
        std::cerr << "warning: best coarse sigma lies on the grid boundary\n";
      }
      if (!grid_report.empty()) {
        ordered_json j;
        j["best_sigma"] = res.best_sigma;
        j["best_log2_sigma"] = std::log2(res.best_sigma);
        j["best_error"] = res.best_error;
        j["boundary_warning"] = res.boundary_warning;
        j["rank"] = cfg.ranks.front();
        write_text(grid_report, j.dump(2) + "\n");
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
