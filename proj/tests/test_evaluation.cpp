#include "mvgcca/evaluation.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace mvgcca;

namespace {

Matrix randn(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd;
  Matrix x(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) x(r, c) = nd(rng);
  return x;
}

// `counts[c]` tight gaussian blobs around well-separated centers.
std::pair<Matrix, std::vector<int>> blobs(const std::vector<int>& counts,
                                          double spread, Rng& rng) {
  const int k = static_cast<int>(counts.size());
  Index n = 0;
  for (int c : counts) n += c;
  Matrix z(2, n);
  std::vector<int> labels;
  std::normal_distribution<double> nd(0.0, spread);
  Index j = 0;
  for (int c = 0; c < k; ++c) {
    const double cx = 10.0 * std::cos(2.0 * M_PI * c / k);
    const double cy = 10.0 * std::sin(2.0 * M_PI * c / k);
    for (int i = 0; i < counts[c]; ++i, ++j) {
      z(0, j) = cx + nd(rng);
      z(1, j) = cy + nd(rng);
      labels.push_back(c);
    }
  }
  return {z, labels};
}

} // namespace

TEST_CASE("adjusted_rand_index") {
  SUBCASE("identical labelings") {
    CHECK(adjusted_rand_index({0, 1, 2, 1}, {0, 1, 2, 1}) == 1.0);
  }
  SUBCASE("label names do not matter") {
    CHECK(adjusted_rand_index({1, 1, 0, 0}, {5, 5, 9, 9}) == 1.0);
  }
  SUBCASE("cross split of two pairs") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) ==
          doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("one merged cluster against a partial split") {
    CHECK(adjusted_rand_index({0, 0, 1, 2}, {0, 0, 1, 1}) ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  }
  SUBCASE("degenerate cases") {
    // Both labelings constant: no pair statistics, defined as perfect match.
    CHECK(adjusted_rand_index({3, 3, 3}, {1, 1, 1}) == 1.0);
    // All singletons against one cluster: exactly chance level.
    CHECK(adjusted_rand_index({0, 1, 2, 3}, {0, 0, 0, 0}) == 0.0);
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(adjusted_rand_index({0, 1}, {0, 1, 2}), std::invalid_argument);
  }
}

TEST_CASE("svm") {
  SvmParams params;

  SUBCASE("separable two-class problem") {
    Rng rng(1);
    Matrix x(2, 40);
    std::vector<int> y;
    for (Index j = 0; j < 40; ++j) {
      const int c = j < 20 ? 0 : 1;
      x(0, j) = (c == 0 ? -2.0 : 2.0) + 0.1 * randn(1, 1, rng)(0, 0);
      x(1, j) = 0.1 * randn(1, 1, rng)(0, 0);
      y.push_back(c);
    }
    Rng train_rng(0);
    const Matrix w = svm_train_ovr(x, y, 2, params, train_rng);
    CHECK(w.rows() == 2);
    CHECK(w.cols() == 3);  // two features plus the bias column
    CHECK(svm_predict(w, x) == y);
  }
  SUBCASE("three classes at triangle corners") {
    Rng rng(2);
    auto [z, labels] = blobs({15, 15, 15}, 0.3, rng);
    Rng train_rng(0);
    const Matrix w = svm_train_ovr(z, labels, 3, params, train_rng);
    CHECK(svm_predict(w, z) == labels);
  }
  SUBCASE("classes separated only through the bias") {
    Rng rng(3);
    Matrix x(1, 40);
    std::vector<int> y;
    for (Index j = 0; j < 40; ++j) {
      const int c = j % 2;
      x(0, j) = (c == 0 ? 3.0 : 5.0) + 0.05 * randn(1, 1, rng)(0, 0);
      y.push_back(c);
    }
    Rng train_rng(0);
    const Matrix w = svm_train_ovr(x, y, 2, params, train_rng);
    CHECK(svm_predict(w, x) == y);
  }
  SUBCASE("ten-fold accuracy on shuffled labels is chance level") {
    Rng rng(4);
    const Index n = 700;
    const Matrix z = randn(3, n, rng);
    std::vector<int> labels;
    std::uniform_int_distribution<int> cls(0, 6);
    for (Index j = 0; j < n; ++j) labels.push_back(cls(rng));
    const FoldSplit folds = split_folds(n, 10, 11);
    auto [mean, stddev] = svm_accuracy_10fold(z, labels, folds, params);
    CHECK(std::abs(mean - 1.0 / 7.0) < 0.05);
    CHECK(stddev >= 0.0);
  }
  SUBCASE("ten-fold accuracy is rotation invariant") {
    Rng rng(5);
    auto [z, labels] = blobs({40, 40, 40}, 2.5, rng);
    const FoldSplit folds = split_folds(z.cols(), 10, 7);
    auto [acc, sd1] = svm_accuracy_10fold(z, labels, folds, params);
    Matrix rot(2, 2);
    rot << std::cos(0.9), -std::sin(0.9), std::sin(0.9), std::cos(0.9);
    auto [acc_rot, sd2] = svm_accuracy_10fold(rot * z, labels, folds, params);
    CHECK(acc > 0.8);  // mostly separated blobs
    CHECK(std::abs(acc - acc_rot) <= 0.015);
  }
  SUBCASE("degenerate fold split falls back to a stratified one") {
    Rng rng(6);
    Matrix x(2, 8);
    std::vector<int> y;
    for (Index j = 0; j < 8; ++j) {
      const int c = j < 4 ? 0 : 1;
      x(0, j) = (c == 0 ? -3.0 : 3.0) + 0.1 * randn(1, 1, rng)(0, 0);
      x(1, j) = 0.1 * randn(1, 1, rng)(0, 0);
      y.push_back(c);
    }
    // Both folds are pure, so each training part misses a class entirely.
    FoldSplit bad;
    bad.k = 2;
    bad.assignments = {0, 0, 0, 0, 1, 1, 1, 1};
    auto [mean, stddev] = svm_accuracy_10fold(x, y, bad, params);
    CHECK(mean == doctest::Approx(1.0));
    CHECK(stddev == doctest::Approx(0.0));
  }
}

TEST_CASE("kmeans") {
  SUBCASE("recovers well-separated blobs") {
    Rng rng(7);
    auto [z, labels] = blobs({20, 20, 20}, 0.05, rng);
    const KmeansResult res = kmeans(z, 3, 5, 0);
    CHECK(adjusted_rand_index(res.labels, labels) == 1.0);
    CHECK(res.centroids.cols() == 3);
  }
  SUBCASE("single cluster statistics") {
    Rng rng(8);
    const Matrix z = randn(2, 30, rng);
    const KmeansResult res = kmeans(z, 1, 1, 0);
    const Vector mean = z.rowwise().mean();
    CHECK((res.centroids.col(0) - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(res.inertia ==
          doctest::Approx((z.colwise() - mean).squaredNorm()).epsilon(1e-10));
    for (int l : res.labels) CHECK(l == 0);
  }
  SUBCASE("as many clusters as points") {
    Rng rng(9);
    const Matrix z = randn(2, 8, rng);
    const KmeansResult res = kmeans(z, 8, 3, 1);
    CHECK(res.inertia == 0.0);
    std::vector<int> seen = res.labels;
    std::sort(seen.begin(), seen.end());
    for (int c = 0; c < 8; ++c) CHECK(seen[c] == c);
  }
  SUBCASE("deterministic, and restarts never hurt") {
    Rng rng(10);
    const Matrix z = randn(2, 50, rng);
    const KmeansResult a = kmeans(z, 4, 3, 5);
    const KmeansResult b = kmeans(z, 4, 3, 5);
    CHECK(a.labels == b.labels);
    CHECK(a.inertia == b.inertia);
    const KmeansResult more = kmeans(z, 4, 10, 5);
    CHECK(more.inertia <= a.inertia + 1e-12);
  }
  SUBCASE("input validation") {
    Rng rng(11);
    const Matrix z = randn(2, 5, rng);
    CHECK_THROWS_AS(kmeans(z, 0, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(z, 6, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(kmeans(z, 2, 0, 0), std::invalid_argument);
  }
  SUBCASE("kmeans_ari on clean blobs") {
    Rng rng(12);
    auto [z, labels] = blobs({25, 25}, 0.05, rng);
    auto [mean, stddev] = kmeans_ari(z, labels, 2, 5, 3);
    CHECK(mean == doctest::Approx(1.0));
    CHECK(stddev == doctest::Approx(0.0));
  }
  SUBCASE("kmeans_ari near zero on unstructured data") {
    Rng rng(13);
    const Matrix z = randn(2, 200, rng);
    std::vector<int> labels;
    std::uniform_int_distribution<int> cls(0, 3);
    for (Index j = 0; j < 200; ++j) labels.push_back(cls(rng));
    auto [mean, stddev] = kmeans_ari(z, labels, 4, 3, 0);
    CHECK(std::abs(mean) < 0.1);
  }
}

TEST_CASE("spectral_ari") {
  SUBCASE("separated blobs") {
    Rng rng(14);
    auto [z, labels] = blobs({20, 20, 20}, 0.05, rng);
    auto [mean, stddev] = spectral_ari(z, labels, 3, AffinityParams{10}, 0);
    CHECK(mean == doctest::Approx(1.0));
    CHECK(stddev == doctest::Approx(0.0));
  }
  SUBCASE("concentric rings that defeat plain k-means") {
    Rng rng(15);
    const Index inner = 30, outer = 40;
    Matrix z(2, inner + outer);
    std::vector<int> labels;
    for (Index i = 0; i < inner; ++i) {
      const double a = 2.0 * M_PI * static_cast<double>(i) / inner;
      z(0, i) = std::cos(a);
      z(1, i) = std::sin(a);
      labels.push_back(0);
    }
    for (Index i = 0; i < outer; ++i) {
      const double a = 2.0 * M_PI * static_cast<double>(i) / outer;
      z(0, inner + i) = 5.0 * std::cos(a);
      z(1, inner + i) = 5.0 * std::sin(a);
      labels.push_back(1);
    }
    auto [spec, spec_sd] = spectral_ari(z, labels, 2, AffinityParams{3}, 0);
    CHECK(spec == doctest::Approx(1.0));
    auto [km, km_sd] = kmeans_ari(z, labels, 2, 10, 0);
    CHECK(km < 0.5);
  }
  SUBCASE("unstructured data scores near zero") {
    Rng rng(16);
    const Matrix z = randn(2, 80, rng);
    std::vector<int> labels;
    std::uniform_int_distribution<int> cls(0, 1);
    for (Index j = 0; j < 80; ++j) labels.push_back(cls(rng));
    auto [mean, stddev] = spectral_ari(z, labels, 2, AffinityParams{10}, 0);
    CHECK(std::abs(mean) < 0.15);
  }
  SUBCASE("deterministic per seed") {
    Rng rng(17);
    auto [z, labels] = blobs({15, 15}, 1.0, rng);
    auto a = spectral_ari(z, labels, 2, AffinityParams{5}, 4);
    auto b = spectral_ari(z, labels, 2, AffinityParams{5}, 4);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
  SUBCASE("too few samples is rejected") {
    Rng rng(18);
    const Matrix z = randn(2, 3, rng);
    CHECK_THROWS_AS(spectral_ari(z, {0, 1, 0}, 3, AffinityParams{2}, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("build_recommendation_task") {
  SUBCASE("most-followed accounts win, ties to the lower id") {
    std::vector<std::pair<int, int>> follows{
        {0, 5}, {1, 5}, {2, 5}, {3, 2}, {4, 2}, {5, 2}, {6, 9}, {7, 9}};
    RecommendationTask task = build_recommendation_task(follows, 10, 2, 2, 100, 0);
    REQUIRE(task.accounts.size() == 2);
    CHECK(task.accounts[0] == 2);
    CHECK(task.accounts[1] == 5);
    for (size_t a = 0; a < 2; ++a) {
      CHECK(task.seeds[a].size() == 2);
      for (Index s : task.seeds[a])
        CHECK(std::count(task.followers[a].begin(), task.followers[a].end(), s) == 1);
    }
  }
  SUBCASE("accounts without enough followers are skipped") {
    std::vector<std::pair<int, int>> follows{
        {0, 5}, {1, 5}, {2, 5}, {3, 2}, {4, 2}, {5, 2}, {6, 9}, {7, 9}};
    RecommendationTask task = build_recommendation_task(follows, 10, 3, 3, 100, 0);
    REQUIRE(task.accounts.size() == 2);
    CHECK(task.accounts[0] == 2);
    CHECK(task.accounts[1] == 5);
  }
  SUBCASE("duplicate follow records count once") {
    std::vector<std::pair<int, int>> follows{{0, 1}, {0, 1}, {0, 1}, {1, 2}, {2, 2}};
    RecommendationTask task = build_recommendation_task(follows, 5, 1, 1, 10, 0);
    REQUIRE(task.accounts.size() == 1);
    CHECK(task.accounts[0] == 2);  // two distinct followers beat one triplicated
    CHECK(task.followers[0].size() == 2);
  }
  SUBCASE("out-of-range users are rejected") {
    CHECK_THROWS_AS(build_recommendation_task({{7, 1}}, 5, 1, 1, 10, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("recommend_friends") {
  SUBCASE("one-hot embeddings are scored exactly") {
    const int accounts = 20, per = 150;
    const Index n = static_cast<Index>(accounts) * per;
    Matrix z = Matrix::Zero(accounts, n);
    std::vector<std::pair<int, int>> follows;
    for (int a = 0; a < accounts; ++a)
      for (int i = 0; i < per; ++i) {
        const Index u = static_cast<Index>(a) * per + i;
        z(a, u) = 1.0;
        follows.emplace_back(static_cast<int>(u), a);
      }
    RecommendationTask task = build_recommendation_task(follows, n, 20, 10, 100, 1);
    REQUIRE(task.accounts.size() == 20);
    const RecommendationMetrics m = recommend_friends(z, task);
    CHECK(m.precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(100.0 / 140.0).epsilon(1e-12));
    CHECK(m.mrr == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("random embeddings score at the base rate") {
    const int accounts = 20, per = 150;
    const Index n = static_cast<Index>(accounts) * per;
    Rng rng(19);
    const Matrix z = randn(8, n, rng);
    std::vector<std::pair<int, int>> follows;
    for (int a = 0; a < accounts; ++a)
      for (int i = 0; i < per; ++i)
        follows.emplace_back(a * per + i, a);
    RecommendationTask task = build_recommendation_task(follows, n, 20, 10, 100, 2);
    const RecommendationMetrics m = recommend_friends(z, task);
    // 140 relevant users among 2990 candidates, 100 recommended.
    const double base = 100.0 * 140.0 / 2990.0 / 100.0;
    CHECK(std::abs(m.precision - base) < 0.02);
    CHECK(m.recall < 0.15);
    CHECK(m.mrr > 0.0);
    CHECK(m.mrr <= 1.0);
  }
  SUBCASE("tasks with no usable account return zeros") {
    RecommendationTask task;
    task.accounts = {4};
    task.followers = {{0, 1, 2}};
    task.seeds = {{0}};  // fewer than seeds_per_account = 10
    Rng rng(20);
    const Matrix z = randn(2, 5, rng);
    const RecommendationMetrics m = recommend_friends(z, task);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.mrr == 0.0);
  }
  SUBCASE("seeds are sampled on demand when the task has none") {
    const Index n = 30;
    Rng rng(21);
    const Matrix z = randn(3, n, rng);
    RecommendationTask task;
    task.accounts = {0};
    task.followers.push_back({});
    for (Index u = 0; u < 20; ++u) task.followers[0].push_back(u);
    task.seeds_per_account = 5;
    task.shortlist = 10;
    const RecommendationMetrics a = recommend_friends(z, task, 3);
    const RecommendationMetrics b = recommend_friends(z, task, 3);
    CHECK(a.precision == b.precision);
    CHECK(a.mrr == b.mrr);
    CHECK(a.precision >= 0.0);
    CHECK(a.precision <= 1.0);
  }
  SUBCASE("seed outside the embedding is rejected") {
    RecommendationTask task;
    task.accounts = {0};
    task.followers = {{0, 1, 9}};
    task.seeds = {{0, 9}};
    task.seeds_per_account = 2;
    Rng rng(22);
    const Matrix z = randn(2, 5, rng);
    CHECK_THROWS_AS(recommend_friends(z, task), std::invalid_argument);
  }
}

TEST_CASE("cosine_similarity") {
  Vector u(3), v(3);
  u << 1.0, 2.0, 2.0;

  SUBCASE("parallel and antiparallel") {
    CHECK(cosine_similarity(u, 2.5 * u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_similarity(u, -0.5 * u) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  SUBCASE("orthogonal") {
    v << 2.0, -1.0, 0.0;
    CHECK(cosine_similarity(u, v) == doctest::Approx(0.0));
  }
  SUBCASE("known angle") {
    Vector a(2), b(2);
    a << 1.0, 0.0;
    b << 1.0, 1.0;
    CHECK(cosine_similarity(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  SUBCASE("zero vector maps to zero") {
    CHECK(cosine_similarity(Vector::Zero(3), u) == 0.0);
  }
}

TEST_CASE("eval report container") {
  EvalReport rep;
  rep.method = "pca";
  rep.add("accuracy", 0.9, 0.01);
  rep.add("ari", 0.5, 0.02);
  REQUIRE(rep.metrics.size() == 2);
  const MetricValue* acc = rep.find("accuracy");
  REQUIRE(acc != nullptr);
  CHECK(acc->mean == 0.9);
  CHECK(rep.find("missing") == nullptr);
}
