#ifndef MVGCCA_EVALUATION_HPP
#define MVGCCA_EVALUATION_HPP

#include "mvgcca/dataset.hpp"
#include "mvgcca/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mvgcca {

struct MetricValue {
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
};

/// Metrics of one experiment plus the metadata needed to reproduce it.
struct EvalReport {
  std::string method;
  std::string dataset;
  int latent_dim = 0;
  std::string config_digest;  // free-form method settings (gamma, lr, ...)
  std::uint64_t seed = 0;
  std::vector<MetricValue> metrics;

  void add(std::string name, double mean, double stddev);
  const MetricValue* find(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Classification

struct SvmParams {
  double C = 1.0;
  int max_iter = 1000;   // outer coordinate-descent passes
  double tol = 1e-4;     // stop when the largest projected gradient is below
  std::uint64_t seed = 0;
};

/// One-vs-rest linear SVMs trained by dual coordinate descent on the
/// bias-augmented samples. Returns num_classes x (d+1); row c scores class c.
Matrix svm_train_ovr(const Matrix& x, const std::vector<int>& y, int num_classes,
                     const SvmParams& params, Rng& rng);

/// Argmax class per column; score ties go to the lower class index.
std::vector<int> svm_predict(const Matrix& w, const Matrix& x);

/// Per fold: train on the other folds, test on the held-out one; returns the
/// mean and standard deviation of the per-fold accuracies. If some class is
/// absent from any fold's training part, the split is redone stratified (with
/// a warning).
std::pair<double, double> svm_accuracy_10fold(const Matrix& z,
                                              const std::vector<int>& labels,
                                              const FoldSplit& folds,
                                              const SvmParams& params);

// ---------------------------------------------------------------------------
// Clustering

/// Pair-counting adjusted Rand index of two labelings of the same samples.
double adjusted_rand_index(const std::vector<int>& pred,
                           const std::vector<int>& truth);

struct KmeansResult {
  std::vector<int> labels;
  Matrix centroids;  // d x n_clusters
  double inertia = 0.0;
};

/// Best of `restarts` Lloyd runs (k-means++ seeding) by inertia. An empty
/// cluster is re-seeded with the point farthest from its current centroid.
KmeansResult kmeans(const Matrix& z, int n_clusters, int restarts,
                    std::uint64_t seed);

/// Mean/std ARI of 10 K-means runs seeded seed, seed+1, ..., seed+9.
std::pair<double, double> kmeans_ari(const Matrix& z, const std::vector<int>& labels,
                                     int n_clusters, int restarts,
                                     std::uint64_t seed);

struct AffinityParams {
  int k = 10;  // neighbours of the kNN affinity graph
};

/// Normalized-Laplacian spectral clustering: kNN affinity on the embedding
/// columns, the n_clusters bottom Laplacian eigenvectors row-normalized, then
/// K-means (10 runs sharing one spectral embedding, as in kmeans_ari). A
/// disconnected affinity graph is benign: each component contributes its own
/// flat eigenvector, so components separate in the spectral embedding.
std::pair<double, double> spectral_ari(const Matrix& z, const std::vector<int>& labels,
                                       int n_clusters, const AffinityParams& affinity,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Friend recommendation

struct RecommendationTask {
  std::vector<int> accounts;                  // target account ids
  std::vector<std::vector<Index>> followers;  // user indices following each account
  std::vector<std::vector<Index>> seeds;      // sampled seed users per account
  int seeds_per_account = 10;
  Index shortlist = 100;
};

/// The `num_accounts` most-followed accounts (ties to the lower account id)
/// with `seeds_per_account` random seed followers each. Accounts with too few
/// followers are skipped with a warning.
RecommendationTask build_recommendation_task(
    const std::vector<std::pair<int, int>>& follows, Index n_users,
    int num_accounts = 20, int seeds_per_account = 10, Index shortlist = 100,
    std::uint64_t seed = 0);

struct RecommendationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double mrr = 0.0;
};

/// Per account: rank every non-seed user by cosine similarity to the mean seed
/// embedding (similarity ties to the lower user index). Precision and recall
/// are over the top-`shortlist` users, the reciprocal rank is that of the
/// first true follower in the full ranking; all three are averaged over
/// accounts. `seed` is only used to sample seed users when the task carries
/// none.
RecommendationMetrics recommend_friends(const Matrix& z, const RecommendationTask& task,
                                        std::uint64_t seed = 0);

/// u.v / (|u||v|); zero for a zero vector, with a warning.
double cosine_similarity(const Vector& u, const Vector& v);

} // namespace mvgcca

#endif
