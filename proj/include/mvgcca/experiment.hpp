#ifndef MVGCCA_EXPERIMENT_HPP
#define MVGCCA_EXPERIMENT_HPP

#include "mvgcca/checkpoint.hpp"
#include "mvgcca/evaluation.hpp"
#include "mvgcca/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mvgcca {

struct GraphConfig {
  int k = 10;
  std::string metric = "euclidean";
};

struct BaselineConfig {
  int d = 3;
  double gamma = 1.0;
  double eps = 1e-6;
};

/// One experiment: dataset x method x task, plus every knob needed to rerun
/// it. The single seed drives all randomness (training, folds, clustering,
/// seed-user sampling), so identical configs produce identical reports.
struct ExperimentConfig {
  std::string dataset;            // uci7 | uci10 | twitter
  std::string method;             // pca | gpca | mcca | gmcca | mvgcca
  std::string task = "classify";  // classify | cluster | recommend | all
  std::filesystem::path data_dir = "data";
  std::filesystem::path out;  // output directory; empty writes nothing
  std::uint64_t seed = 0;
  GraphConfig graph;
  BaselineConfig baseline;  // pca / gpca / mcca / gmcca settings
  TrainConfig train;        // mvgcca settings
  std::optional<Index> twitter_subsample = 2506;
  double svm_C = 1.0;
  int kmeans_restarts = 10;

  /// Throws std::invalid_argument with a usage-style message on a bad field
  /// combination (unknown enum value, recommend without twitter, ...).
  void validate() const;
};

nlohmann::json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

/// Load + preprocess + graph for the configured dataset. Exposed so tests and
/// the exporter share the exact pipeline.
MultiviewDataset prepare_dataset(const ExperimentConfig& cfg);

/// Runs the full pipeline and returns the metrics. With a nonempty cfg.out it
/// writes report.json there, plus checkpoint.bin and training_log.jsonl for
/// mvgcca.
EvalReport run_experiment(const ExperimentConfig& cfg);

struct GridPoint {
  nlohmann::json overrides;  // dotted config paths -> values
  double mean_accuracy = 0.0;
  std::vector<double> run_accuracies;
  bool failed = false;
  std::string error;
};

struct GridResult {
  std::vector<GridPoint> points;
  int best_index = -1;
  ExperimentConfig best_config;
  EvalReport best_report;
};

/// Cartesian sweep over the grid (object: dotted config path -> array of
/// values; keys iterate alphabetically, the first key varying slowest). Each
/// point runs `runs_per_point` times with seeds base.seed, +1, ... and is
/// scored by mean 10-fold SVM accuracy; ties go to the lower point index.
/// Failing points are recorded and skipped. The best point is rerun with the
/// base task and output settings.
GridResult grid_search(const ExperimentConfig& base, const nlohmann::json& grid,
                       int runs_per_point = 3);

/// Re-embeds the configured dataset with a trained checkpoint and writes a
/// TSV (id, label, one column per latent dimension). Structural disagreement
/// between checkpoint and config fails with the mismatched field named.
void export_embedding(const ExperimentConfig& cfg,
                      const std::filesystem::path& checkpoint_file,
                      const std::filesystem::path& out_file);

struct EmbeddingTable {
  std::vector<Index> ids;
  std::vector<int> labels;
  Matrix z;  // d x n
};
EmbeddingTable read_embedding_tsv(const std::filesystem::path& file);

/// report.json payload: resolved config + one row per metric. No timestamps,
/// so equal runs give byte-identical files.
nlohmann::json report_to_json(const EvalReport& report, const ExperimentConfig& cfg);
void write_report(const EvalReport& report, const ExperimentConfig& cfg,
                  const std::filesystem::path& file);

/// Human-readable metric table.
std::string format_report(const EvalReport& report);

} // namespace mvgcca

#endif
