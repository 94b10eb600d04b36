#ifndef MVGCCA_DATASET_HPP
#define MVGCCA_DATASET_HPP

#include "mvgcca/types.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mvgcca {

/// Symmetric edge-weight matrix with entries in [0,1]. After
/// normalize_adjacency the maximum entry is 1 and every diagonal entry is 1.
struct Adjacency {
  SpMatrix weights;

  Index size() const { return weights.rows(); }
  bool empty() const { return weights.rows() == 0; }
  Matrix dense() const { return Matrix(weights); }
};

/// M feature matrices (one per view, each d_m x n) over a shared sample set,
/// with optional class labels and a shared weighted graph.
struct MultiviewDataset {
  std::vector<Matrix> views;            // view m is d_m x n
  std::vector<std::string> names;       // one name per view
  std::vector<int> labels;              // empty when absent, else length n
  Adjacency adjacency;                  // empty until a graph is built
  std::vector<std::pair<int, int>> follows;  // (user, account) side data

  Index n() const { return views.empty() ? 0 : views[0].cols(); }
  Index num_views() const { return static_cast<Index>(views.size()); }

  /// Throws std::invalid_argument if the shared-n / label-length / dimension
  /// invariants are violated.
  void validate() const;
};

struct FoldSplit {
  int k = 0;
  std::vector<int> assignments;  // length n, values in [0, k)
};

// ---------------------------------------------------------------------------
// Loaders

/// Reads the six multiple-features view files (mfeat-fou, -fac, -kar, -pix,
/// -zer, -mor: whitespace-separated text, 2000 rows each, digit blocks of 200
/// in order 0..9) and keeps the requested digit classes.
MultiviewDataset load_uci(const std::filesystem::path& data_dir,
                          const std::set<int>& keep_classes);

/// Reads the six 1000-dimensional view tables (<name>.bin or <name>.txt) plus
/// the follower relation file `follower_edges`. When `subsample` is given,
/// that many users are chosen uniformly without replacement using `seed`.
MultiviewDataset load_twitter(const std::filesystem::path& data_dir,
                              std::optional<Index> subsample, std::uint64_t seed);

/// View names expected by load_twitter, in file order.
const std::vector<std::string>& twitter_view_names();

/// Writes a view table in the columnar binary format load_twitter reads.
void write_view_binary(const std::filesystem::path& file, const Matrix& rows_by_cols);

// ---------------------------------------------------------------------------
// Preprocessing and graph construction

/// Per view: subtract the per-feature mean over samples, then divide the whole
/// view by its maximum absolute entry. A view that is all zero after centering
/// is returned centered, with a warning.
MultiviewDataset preprocess_views(const MultiviewDataset& dataset);

/// Symmetric binary kNN graph on the concatenation of the selected views
/// (all views when `view_indices` is empty): edge i-j present iff j is among
/// i's k nearest or vice versa. Ties break by ascending sample index.
/// Self-loops are excluded; normalize_adjacency adds the unit diagonal.
Adjacency build_knn_graph(const MultiviewDataset& dataset, int k,
                          const std::string& metric = "euclidean",
                          const std::vector<Index>& view_indices = {});

/// Divides all weights by the maximum entry (if positive), then sets every
/// diagonal entry to 1. Idempotent.
Adjacency normalize_adjacency(const Adjacency& a);

/// Random permutation partitioned into k near-equal folds, deterministic per
/// seed. Fold sizes differ by at most 1.
FoldSplit split_folds(Index n, int k, std::uint64_t seed);

/// Fold split that keeps every class near-equally represented in each fold.
FoldSplit split_folds_stratified(const std::vector<int>& labels, int k,
                                 std::uint64_t seed);

/// Row-concatenation of the selected views (all when empty): (sum d_m) x n.
Matrix concat_views(const MultiviewDataset& dataset,
                    const std::vector<Index>& view_indices = {});

} // namespace mvgcca

#endif
