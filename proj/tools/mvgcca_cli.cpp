#include "mvgcca/experiment.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

nlohmann::json read_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file);
  nlohmann::json j;
  in >> j;
  return j;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiview graph CCA experiment driver"};

  std::string config_file, grid_file, checkpoint_file, export_file;
  std::string dataset, method, task, data_dir, out;
  std::uint64_t seed = 0;
  int latent_dim = 0, knn_k = 0, epochs = 0, batch_size = 0;
  double gamma = 0.0, lr = 0.0, dropout = 0.0;

  app.add_option("--config", config_file, "JSON experiment config; flags override");
  app.add_option("--dataset", dataset, "uci7 | uci10 | twitter");
  app.add_option("--method", method, "pca | gpca | mcca | gmcca | mvgcca");
  app.add_option("--task", task, "classify | cluster | recommend | all");
  app.add_option("--data-dir", data_dir, "directory holding the dataset files");
  app.add_option("--out", out, "output directory (report, checkpoint, log)");
  app.add_option("--seed", seed, "seed for every random choice in the run");
  app.add_option("--latent-dim", latent_dim, "embedding dimension d");
  app.add_option("--gamma", gamma, "graph-regularization weight (gpca, gmcca)");
  app.add_option("--knn-k", knn_k, "neighbours of the sample graph");
  app.add_option("--epochs", epochs, "training epochs (mvgcca)");
  app.add_option("--lr", lr, "Adam learning rate (mvgcca)");
  app.add_option("--batch-size", batch_size, "training batch size (mvgcca)");
  app.add_option("--dropout", dropout, "hidden-layer dropout rate (mvgcca)");
  app.add_option("--grid", grid_file,
                 "JSON grid (config path -> value array); runs a grid search");
  app.add_option("--checkpoint", checkpoint_file, "trained checkpoint to load");
  app.add_option("--export", export_file,
                 "write the checkpoint's embedding TSV to this file and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    mvgcca::ExperimentConfig cfg;
    if (!config_file.empty())
      cfg = mvgcca::experiment_from_json(read_json_file(config_file));

    if (app.count("--dataset")) cfg.dataset = dataset;
    if (app.count("--method")) cfg.method = method;
    if (app.count("--task")) cfg.task = task;
    if (app.count("--data-dir")) cfg.data_dir = data_dir;
    if (app.count("--out")) cfg.out = out;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--latent-dim")) {
      cfg.baseline.d = latent_dim;
      cfg.train.latent_dim = latent_dim;
    }
    if (app.count("--gamma")) cfg.baseline.gamma = gamma;
    if (app.count("--knn-k")) cfg.graph.k = knn_k;
    if (app.count("--epochs")) cfg.train.epochs = epochs;
    if (app.count("--lr")) cfg.train.learning_rate = lr;
    if (app.count("--batch-size")) cfg.train.batch_size = batch_size;
    if (app.count("--dropout")) cfg.train.dropout = dropout;

    if (!export_file.empty()) {
      if (checkpoint_file.empty())
        throw std::invalid_argument("--export requires --checkpoint");
      mvgcca::export_embedding(cfg, checkpoint_file, export_file);
      std::cout << "wrote " << export_file << "\n";
      return 0;
    }

    if (!grid_file.empty()) {
      const mvgcca::GridResult res =
          mvgcca::grid_search(cfg, read_json_file(grid_file), 3);
      std::cout << "grid points: " << res.points.size() << ", best index "
                << res.best_index << " (mean accuracy "
                << res.points[static_cast<size_t>(res.best_index)].mean_accuracy
                << ")\n"
                << "best overrides: "
                << res.points[static_cast<size_t>(res.best_index)].overrides.dump()
                << "\n"
                << mvgcca::format_report(res.best_report);
      return 0;
    }

    const mvgcca::EvalReport report = mvgcca::run_experiment(cfg);
    std::cout << mvgcca::format_report(report);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
