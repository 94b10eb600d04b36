#ifndef MVGCCA_TRAIN_HPP
#define MVGCCA_TRAIN_HPP

#include "mvgcca/model.hpp"

#include <filesystem>
#include <vector>

namespace mvgcca {

struct EpochRecord {
  int epoch = 0;
  double link = 0.0;   // ELBO terms summed over the epoch's batches
  double recon = 0.0;
  double kl = 0.0;
  double neg_elbo = 0.0;
  double wall_sec = 0.0;
};

struct TrainingLog {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
  bool diverged = false;        // training aborted on a non-finite loss
  int last_finite_epoch = -1;   // parameters returned are from this epoch's end
};

struct TrainResult {
  ModelParams params;
  TrainingLog log;
};

/// Minimizes -ELBO with Adam over shuffled batch subgraphs. The dataset must
/// be preprocessed and carry a normalized adjacency. Deterministic per seed.
/// On a non-finite loss the last epoch-end parameters are returned and the
/// log is marked diverged.
TrainResult train(const MultiviewDataset& dataset, const TrainConfig& cfg);

/// Fused posterior means for every node, dropout off. Uses a single
/// full-graph pass when n <= cfg.embed_tile_size, otherwise contiguous tiles
/// with their subgraphs.
Matrix embed(const MultiviewDataset& dataset, const ModelParams& params,
             const TrainConfig& cfg);

/// One epoch record per line, JSON objects.
void write_training_log(const std::filesystem::path& file, const TrainingLog& log);

} // namespace mvgcca

#endif
