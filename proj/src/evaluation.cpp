#include "mvgcca/evaluation.hpp"

#include "mvgcca/baselines.hpp"
#include "mvgcca/graph_ops.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace mvgcca {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / xs.size())};
}

} // namespace

void EvalReport::add(std::string name, double mean, double stddev) {
  metrics.push_back({std::move(name), mean, stddev});
}

const MetricValue* EvalReport::find(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.metric == name) return &m;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Linear SVM (dual coordinate descent on the L1-loss problem)

Matrix svm_train_ovr(const Matrix& x, const std::vector<int>& y, int num_classes,
                     const SvmParams& params, Rng& rng) {
  const Index d = x.rows();
  const Index n = x.cols();
  if (static_cast<Index>(y.size()) != n)
    throw std::invalid_argument("svm: label count does not match sample count");
  if (num_classes < 2) throw std::invalid_argument("svm: need at least two classes");
  for (int c : y)
    if (c < 0 || c >= num_classes)
      throw std::invalid_argument("svm: label outside [0, num_classes)");

  // Bias folded in as a constant feature.
  Matrix xa(d + 1, n);
  xa.topRows(d) = x;
  xa.row(d).setOnes();
  const Vector qii = xa.colwise().squaredNorm();

  Matrix w = Matrix::Zero(num_classes, d + 1);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});

  for (int c = 0; c < num_classes; ++c) {
    Vector wc = Vector::Zero(d + 1);
    Vector alpha = Vector::Zero(n);
    for (int pass = 0; pass < params.max_iter; ++pass) {
      std::shuffle(order.begin(), order.end(), rng);
      double max_pg = 0.0;
      for (Index i : order) {
        const double yi = y[i] == c ? 1.0 : -1.0;
        const double g = yi * wc.dot(xa.col(i)) - 1.0;
        double pg = g;
        if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
        else if (alpha[i] >= params.C) pg = std::max(g, 0.0);
        max_pg = std::max(max_pg, std::abs(pg));
        if (std::abs(pg) > 1e-12) {
          const double next = std::clamp(alpha[i] - g / qii[i], 0.0, params.C);
          wc += (next - alpha[i]) * yi * xa.col(i);
          alpha[i] = next;
        }
      }
      if (max_pg < params.tol) break;
    }
    w.row(c) = wc.transpose();
  }
  return w;
}

std::vector<int> svm_predict(const Matrix& w, const Matrix& x) {
  const Index d = w.cols() - 1;
  if (x.rows() != d) throw std::invalid_argument("svm: feature dimension mismatch");
  std::vector<int> pred(static_cast<size_t>(x.cols()));
  for (Index i = 0; i < x.cols(); ++i) {
    Vector scores = w.leftCols(d) * x.col(i) + w.col(d);
    Index best = 0;
    scores.maxCoeff(&best);  // first maximum wins on ties
    pred[static_cast<size_t>(i)] = static_cast<int>(best);
  }
  return pred;
}

std::pair<double, double> svm_accuracy_10fold(const Matrix& z,
                                              const std::vector<int>& labels,
                                              const FoldSplit& folds,
                                              const SvmParams& params) {
  const Index n = z.cols();
  if (static_cast<Index>(labels.size()) != n)
    throw std::invalid_argument("svm: label count does not match sample count");
  if (folds.k < 2 || static_cast<Index>(folds.assignments.size()) != n)
    throw std::invalid_argument("svm: invalid fold split");

  // Compact the label alphabet to 0..L-1.
  std::vector<int> sorted_labels(labels.begin(), labels.end());
  std::sort(sorted_labels.begin(), sorted_labels.end());
  sorted_labels.erase(std::unique(sorted_labels.begin(), sorted_labels.end()),
                      sorted_labels.end());
  const int num_classes = static_cast<int>(sorted_labels.size());
  auto compact = [&](int label) {
    return static_cast<int>(std::lower_bound(sorted_labels.begin(),
                                             sorted_labels.end(), label) -
                            sorted_labels.begin());
  };
  std::vector<int> y(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) y[i] = compact(labels[i]);

  // Every class must appear in every training part; otherwise fall back to a
  // stratified split.
  FoldSplit split = folds;
  {
    std::vector<std::vector<int>> per_fold(split.k, std::vector<int>(num_classes, 0));
    std::vector<int> total(num_classes, 0);
    for (Index i = 0; i < n; ++i) {
      ++per_fold[split.assignments[i]][y[i]];
      ++total[y[i]];
    }
    bool ok = true;
    for (int f = 0; f < split.k && ok; ++f)
      for (int c = 0; c < num_classes && ok; ++c)
        if (total[c] - per_fold[f][c] == 0) ok = false;
    if (!ok) {
      std::cerr << "warning: a class is absent from some training fold; "
                   "re-splitting stratified\n";
      split = split_folds_stratified(labels, folds.k, params.seed);
    }
  }

  std::vector<double> accs;
  accs.reserve(split.k);
  Rng rng(params.seed);
  for (int f = 0; f < split.k; ++f) {
    std::vector<Index> train_idx, test_idx;
    for (Index i = 0; i < n; ++i)
      (split.assignments[i] == f ? test_idx : train_idx).push_back(i);

    Matrix x_train(z.rows(), static_cast<Index>(train_idx.size()));
    std::vector<int> y_train(train_idx.size());
    for (size_t i = 0; i < train_idx.size(); ++i) {
      x_train.col(static_cast<Index>(i)) = z.col(train_idx[i]);
      y_train[i] = y[static_cast<size_t>(train_idx[i])];
    }

    // Center and rescale by the train fold's RMS feature size so the fixed C
    // means the same thing whatever the embedding's arbitrary overall scale.
    // Both maps commute with rotations of z, so accuracy stays invariant under
    // orthogonal changes of basis.
    const Vector center = x_train.rowwise().mean();
    x_train.colwise() -= center;
    double scale = std::sqrt(x_train.squaredNorm() /
                             static_cast<double>(x_train.size()));
    if (scale < 1e-12) scale = 1.0;
    x_train /= scale;

    const Matrix w = svm_train_ovr(x_train, y_train, num_classes, params, rng);

    Matrix x_test(z.rows(), static_cast<Index>(test_idx.size()));
    for (size_t i = 0; i < test_idx.size(); ++i)
      x_test.col(static_cast<Index>(i)) = (z.col(test_idx[i]) - center) / scale;
    const std::vector<int> pred = svm_predict(w, x_test);

    Index correct = 0;
    for (size_t i = 0; i < test_idx.size(); ++i)
      if (pred[i] == y[static_cast<size_t>(test_idx[i])]) ++correct;
    accs.push_back(test_idx.empty() ? 0.0
                                    : static_cast<double>(correct) / test_idx.size());
  }
  return mean_std(accs);
}

// ---------------------------------------------------------------------------
// Clustering

double adjusted_rand_index(const std::vector<int>& pred,
                           const std::vector<int>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("ari: labelings have different lengths");
  const size_t n = pred.size();
  if (n == 0) throw std::invalid_argument("ari: empty labelings");

  std::map<int, int> pid, tid;
  for (int p : pred) pid.emplace(p, static_cast<int>(pid.size()));
  for (int t : truth) tid.emplace(t, static_cast<int>(tid.size()));

  std::map<std::pair<int, int>, double> cont;
  std::vector<double> a(pid.size(), 0.0), b(tid.size(), 0.0);
  for (size_t i = 0; i < n; ++i) {
    const int p = pid[pred[i]];
    const int t = tid[truth[i]];
    cont[{p, t}] += 1.0;
    a[static_cast<size_t>(p)] += 1.0;
    b[static_cast<size_t>(t)] += 1.0;
  }

  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& kv : cont) index += comb2(kv.second);
  double suma = 0.0, sumb = 0.0;
  for (double x : a) suma += comb2(x);
  for (double x : b) sumb += comb2(x);
  const double expected = suma * sumb / comb2(static_cast<double>(n));
  const double max_index = 0.5 * (suma + sumb);
  if (max_index == expected) return 1.0;  // both partitions trivial, hence equal
  return (index - expected) / (max_index - expected);
}

namespace {

// Squared distances of every column of z to one centroid.
Vector dist2_to(const Matrix& z, const Vector& c) {
  return (z.colwise() - c).colwise().squaredNorm().transpose();
}

KmeansResult kmeans_single(const Matrix& z, int kc, Rng& rng) {
  const Index n = z.cols();
  const Index d = z.rows();
  Matrix centroids(d, kc);

  // k-means++ seeding.
  std::uniform_int_distribution<Index> uni(0, n - 1);
  centroids.col(0) = z.col(uni(rng));
  Vector d2 = dist2_to(z, centroids.col(0));
  for (int c = 1; c < kc; ++c) {
    Index pick;
    if (d2.maxCoeff() <= 0.0) {
      pick = uni(rng);
    } else {
      std::discrete_distribution<Index> dist(d2.data(), d2.data() + n);
      pick = dist(rng);
    }
    centroids.col(c) = z.col(pick);
    d2 = d2.cwiseMin(dist2_to(z, centroids.col(c)));
  }

  std::vector<int> assign(static_cast<size_t>(n), -1);
  Vector best(n);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    best.setConstant(std::numeric_limits<double>::infinity());
    for (int c = 0; c < kc; ++c) {
      const Vector dc = dist2_to(z, centroids.col(c));
      for (Index i = 0; i < n; ++i)
        if (dc[i] < best[i]) {
          best[i] = dc[i];
          if (assign[static_cast<size_t>(i)] != c) {
            assign[static_cast<size_t>(i)] = c;
            changed = true;
          }
        }
    }

    std::vector<Index> counts(static_cast<size_t>(kc), 0);
    for (Index i = 0; i < n; ++i) ++counts[static_cast<size_t>(assign[i])];
    for (int c = 0; c < kc; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) continue;
      // Empty cluster: steal the worst-fit point from a cluster that keeps
      // at least one member.
      Index far = -1;
      double worst = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (counts[static_cast<size_t>(assign[static_cast<size_t>(i)])] <= 1) continue;
        if (best[i] > worst) {
          worst = best[i];
          far = i;
        }
      }
      if (far < 0) break;  // fewer distinct points than clusters
      --counts[static_cast<size_t>(assign[static_cast<size_t>(far)])];
      assign[static_cast<size_t>(far)] = c;
      ++counts[static_cast<size_t>(c)];
      best[far] = 0.0;
      changed = true;
    }

    centroids.setZero();
    for (Index i = 0; i < n; ++i) centroids.col(assign[static_cast<size_t>(i)]) += z.col(i);
    for (int c = 0; c < kc; ++c)
      if (counts[static_cast<size_t>(c)] > 0)
        centroids.col(c) /= static_cast<double>(counts[static_cast<size_t>(c)]);

    if (!changed) break;
  }

  KmeansResult out;
  out.labels = std::move(assign);
  out.centroids = std::move(centroids);
  out.inertia = 0.0;
  for (Index i = 0; i < n; ++i)
    out.inertia += (z.col(i) - out.centroids.col(out.labels[static_cast<size_t>(i)]))
                       .squaredNorm();
  return out;
}

} // namespace

KmeansResult kmeans(const Matrix& z, int n_clusters, int restarts,
                    std::uint64_t seed) {
  if (n_clusters < 1) throw std::invalid_argument("kmeans: n_clusters must be >= 1");
  if (z.cols() < n_clusters)
    throw std::invalid_argument("kmeans: fewer samples than clusters");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");
  Rng rng(seed);
  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KmeansResult run = kmeans_single(z, n_clusters, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

std::pair<double, double> kmeans_ari(const Matrix& z, const std::vector<int>& labels,
                                     int n_clusters, int restarts,
                                     std::uint64_t seed) {
  if (static_cast<Index>(labels.size()) != z.cols())
    throw std::invalid_argument("kmeans_ari: label count does not match samples");
  std::vector<double> aris;
  aris.reserve(10);
  for (int run = 0; run < 10; ++run) {
    const KmeansResult res = kmeans(z, n_clusters, restarts, seed + run);
    aris.push_back(adjusted_rand_index(res.labels, labels));
  }
  return mean_std(aris);
}

std::pair<double, double> spectral_ari(const Matrix& z, const std::vector<int>& labels,
                                       int n_clusters, const AffinityParams& affinity,
                                       std::uint64_t seed) {
  const Index n = z.cols();
  if (static_cast<Index>(labels.size()) != n)
    throw std::invalid_argument("spectral_ari: label count does not match samples");
  if (n < n_clusters + 1)
    throw std::invalid_argument("spectral_ari: too few samples");

  MultiviewDataset embed;
  embed.views = {z};
  embed.names = {"embedding"};
  const int k = static_cast<int>(std::min<Index>(affinity.k, n - 1));
  const Adjacency aff = build_knn_graph(embed, k);

  // Bottom eigenvectors of the normalized Laplacian are the top ones of
  // I + D^{-1/2} A D^{-1/2}; that shift keeps the operator positive
  // semidefinite for the iterative solver.
  const SpMatrix prop = propagation_operator(aff, Propagation::Sym);
  Matrix vecs;
  if (n <= 2000) {
    Matrix m = Matrix(prop);
    m.diagonal().array() += 1.0;
    vecs = top_eigenvectors_dense(m, n_clusters);
  } else {
    auto op = [&](const Vector& v) -> Vector { return v + prop * v; };
    vecs = top_eigenvectors_lanczos(op, n, n_clusters, seed);
  }

  // Row-normalize, then cluster rows (as columns of the transposed matrix).
  for (Index i = 0; i < n; ++i) {
    const double norm = vecs.row(i).norm();
    if (norm > 0.0) vecs.row(i) /= norm;
  }
  const Matrix spectral = vecs.transpose();

  std::vector<double> aris;
  aris.reserve(10);
  for (int run = 0; run < 10; ++run) {
    const KmeansResult res = kmeans(spectral, n_clusters, 10, seed + run);
    aris.push_back(adjusted_rand_index(res.labels, labels));
  }
  return mean_std(aris);
}

// ---------------------------------------------------------------------------
// Friend recommendation

double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine: vectors have different lengths");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    std::cerr << "warning: cosine similarity of a zero vector is defined as 0\n";
    return 0.0;
  }
  return u.dot(v) / (nu * nv);
}

RecommendationTask build_recommendation_task(
    const std::vector<std::pair<int, int>>& follows, Index n_users,
    int num_accounts, int seeds_per_account, Index shortlist, std::uint64_t seed) {
  std::map<int, std::vector<Index>> by_account;
  for (const auto& [user, account] : follows) {
    if (user < 0 || static_cast<Index>(user) >= n_users)
      throw std::invalid_argument("recommendation: follower index out of range");
    by_account[account].push_back(user);
  }
  for (auto& [account, users] : by_account) {
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
  }

  // Most-followed first; ties to the lower account id (map order gives that).
  std::vector<std::pair<int, int>> ranked;  // (account, follower count)
  ranked.reserve(by_account.size());
  for (const auto& [account, users] : by_account)
    ranked.emplace_back(account, static_cast<int>(users.size()));
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  if (static_cast<int>(ranked.size()) > num_accounts) ranked.resize(num_accounts);

  RecommendationTask task;
  task.seeds_per_account = seeds_per_account;
  task.shortlist = shortlist;
  Rng rng(seed);
  for (const auto& [account, count] : ranked) {
    if (count < seeds_per_account) {
      std::cerr << "warning: account " << account << " has only " << count
                << " followers; skipped\n";
      continue;
    }
    std::vector<Index> users = by_account[account];
    std::shuffle(users.begin(), users.end(), rng);
    std::vector<Index> seeds(users.begin(), users.begin() + seeds_per_account);
    std::sort(seeds.begin(), seeds.end());
    task.accounts.push_back(account);
    task.followers.push_back(by_account[account]);
    task.seeds.push_back(std::move(seeds));
  }
  if (task.accounts.empty())
    std::cerr << "warning: recommendation task has no usable accounts\n";
  return task;
}

RecommendationMetrics recommend_friends(const Matrix& z, const RecommendationTask& task,
                                        std::uint64_t seed) {
  const Index n = z.cols();
  RecommendationTask local;
  const RecommendationTask* t = &task;
  if (task.seeds.empty() && !task.followers.empty()) {
    // Sample the seed users here when the task carries none.
    local = task;
    Rng rng(seed);
    for (size_t a = 0; a < local.followers.size(); ++a) {
      std::vector<Index> users = local.followers[a];
      std::shuffle(users.begin(), users.end(), rng);
      users.resize(std::min<size_t>(users.size(),
                                    static_cast<size_t>(local.seeds_per_account)));
      std::sort(users.begin(), users.end());
      local.seeds.push_back(std::move(users));
    }
    t = &local;
  }

  const Vector norms = z.colwise().norm();
  std::vector<double> precisions, recalls, rrs;
  for (size_t a = 0; a < t->accounts.size(); ++a) {
    const std::vector<Index>& seeds = t->seeds[a];
    if (static_cast<int>(seeds.size()) < t->seeds_per_account) {
      std::cerr << "warning: account " << t->accounts[a]
                << " has too few seed users; skipped\n";
      continue;
    }
    for (Index s : seeds)
      if (s < 0 || s >= n)
        throw std::invalid_argument("recommendation: seed user outside embedding");

    Vector query = Vector::Zero(z.rows());
    for (Index s : seeds) query += z.col(s);
    query /= static_cast<double>(seeds.size());
    const double qnorm = query.norm();

    std::vector<char> is_seed(static_cast<size_t>(n), 0);
    for (Index s : seeds) is_seed[static_cast<size_t>(s)] = 1;
    std::vector<char> is_follower(static_cast<size_t>(n), 0);
    Index true_count = 0;
    for (Index u : t->followers[a])
      if (!is_seed[static_cast<size_t>(u)] && !is_follower[static_cast<size_t>(u)]) {
        is_follower[static_cast<size_t>(u)] = 1;
        ++true_count;
      }

    std::vector<std::pair<double, Index>> ranking;
    ranking.reserve(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
      if (is_seed[static_cast<size_t>(i)]) continue;
      const double sim = (qnorm == 0.0 || norms[i] == 0.0)
                             ? 0.0
                             : query.dot(z.col(i)) / (qnorm * norms[i]);
      ranking.emplace_back(sim, i);
    }
    std::sort(ranking.begin(), ranking.end(), [](const auto& l, const auto& r) {
      if (l.first != r.first) return l.first > r.first;
      return l.second < r.second;
    });

    const size_t top = std::min<size_t>(ranking.size(),
                                        static_cast<size_t>(t->shortlist));
    Index hits = 0;
    for (size_t i = 0; i < top; ++i)
      if (is_follower[static_cast<size_t>(ranking[i].second)]) ++hits;
    precisions.push_back(static_cast<double>(hits) /
                         static_cast<double>(t->shortlist));
    recalls.push_back(true_count == 0
                          ? 0.0
                          : static_cast<double>(hits) / static_cast<double>(true_count));

    double rr = 0.0;
    for (size_t i = 0; i < ranking.size(); ++i)
      if (is_follower[static_cast<size_t>(ranking[i].second)]) {
        rr = 1.0 / static_cast<double>(i + 1);
        break;
      }
    rrs.push_back(rr);
  }

  RecommendationMetrics out;
  if (precisions.empty()) {
    std::cerr << "warning: no account could be evaluated\n";
    return out;
  }
  out.precision = mean_std(precisions).first;
  out.recall = mean_std(recalls).first;
  out.mrr = mean_std(rrs).first;
  return out;
}

} // namespace mvgcca
