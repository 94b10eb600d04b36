#include "mvgcca/dataset.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

using namespace mvgcca;
using test::TempDir;

namespace {

const std::vector<std::pair<std::string, int>> kUciViews = {
    {"fou", 76}, {"fac", 216}, {"kar", 64}, {"pix", 240}, {"zer", 47}, {"mor", 6}};

void write_uci_view(const std::filesystem::path& dir, const std::string& name,
                    int cols, int rows) {
  std::ostringstream os;
  for (int r = 0; r < rows; ++r) {
    const int digit = r / 200;
    for (int c = 0; c < cols; ++c) {
      if (c) os << ' ';
      os << (digit + 1) * 0.125 + 0.01 * ((r + c) % 7);
    }
    os << '\n';
  }
  test::write_text(dir / ("mfeat-" + name), os.str());
}

void write_uci_set(const std::filesystem::path& dir) {
  for (const auto& [name, cols] : kUciViews) write_uci_view(dir, name, cols, 2000);
}

MultiviewDataset tiny_points(const Matrix& x) {
  MultiviewDataset ds;
  ds.views = {x};
  ds.names = {"points"};
  return ds;
}

} // namespace

TEST_CASE("load_uci on the generated digit views") {
  const auto dir = test::data_dir();
  REQUIRE_MESSAGE(!dir.empty(), "MVGCCA_DATA_DIR fixture missing");

  SUBCASE("all ten classes") {
    const MultiviewDataset ds = load_uci(dir, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(ds.n() == 2000);
    REQUIRE(ds.num_views() == 6);
    const std::vector<Index> dims{76, 216, 64, 240, 47, 6};
    for (Index m = 0; m < 6; ++m) {
      CHECK(ds.views[static_cast<size_t>(m)].rows() == dims[static_cast<size_t>(m)]);
      CHECK(ds.views[static_cast<size_t>(m)].cols() == 2000);
    }
    std::map<int, int> hist;
    for (int label : ds.labels) ++hist[label];
    CHECK(hist.size() == 10);
    for (const auto& [label, count] : hist) CHECK(count == 200);
    CHECK(ds.adjacency.empty());
    ds.validate();
  }

  SUBCASE("seven-class subset") {
    const MultiviewDataset ds = load_uci(dir, {1, 2, 3, 4, 7, 8, 9});
    CHECK(ds.n() == 1400);
    std::set<int> distinct(ds.labels.begin(), ds.labels.end());
    CHECK(distinct == std::set<int>{1, 2, 3, 4, 7, 8, 9});
  }

  SUBCASE("single class") {
    const MultiviewDataset ds = load_uci(dir, {3});
    CHECK(ds.n() == 200);
    CHECK(std::all_of(ds.labels.begin(), ds.labels.end(),
                      [](int label) { return label == 3; }));
  }
}

TEST_CASE("load_uci error reporting") {
  SUBCASE("missing file") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(load_uci(dir.path(), {0}), doctest::Contains("mfeat-fou"),
                         std::runtime_error);
  }
  SUBCASE("row-count mismatch") {
    TempDir dir;
    write_uci_set(dir.path());
    write_uci_view(dir.path(), "kar", 64, 1999);
    CHECK_THROWS_WITH_AS(load_uci(dir.path(), {0}), doctest::Contains("mfeat-kar"),
                         std::runtime_error);
  }
  SUBCASE("non-numeric token") {
    TempDir dir;
    write_uci_set(dir.path());
    std::ostringstream os;
    for (int r = 0; r < 2000; ++r) {
      for (int c = 0; c < 6; ++c) os << (c ? " " : "") << "0.5";
      os << '\n';
    }
    std::string text = os.str();
    text.replace(text.find("0.5"), 3, "bad");
    test::write_text(dir.path() / "mfeat-mor", text);
    CHECK_THROWS_WITH_AS(load_uci(dir.path(), {0}), doctest::Contains("row 1"),
                         std::runtime_error);
  }
  SUBCASE("empty class set") {
    TempDir dir;
    CHECK_THROWS_AS(load_uci(dir.path(), {}), std::invalid_argument);
  }
}

TEST_CASE("load_twitter on a synthetic directory") {
  TempDir dir;
  const Index n = 24;
  Rng rng(3);
  std::normal_distribution<double> nd;
  for (const auto& name : twitter_view_names()) {
    Matrix table(n, 1000);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < 1000; ++c) table(r, c) = nd(rng);
    write_view_binary(dir.path() / (name + ".bin"), table);
  }
  {
    std::ostringstream os;
    for (Index u = 0; u < n; ++u) os << u << " " << 100 + u % 3 << "\n";
    test::write_text(dir.path() / "follower_edges", os.str());
  }

  SUBCASE("full load") {
    const MultiviewDataset ds = load_twitter(dir.path(), std::nullopt, 0);
    CHECK(ds.n() == n);
    REQUIRE(ds.num_views() == 6);
    for (const auto& v : ds.views) CHECK(v.rows() == 1000);
    CHECK(ds.follows.size() == static_cast<size_t>(n));
    CHECK(ds.labels.empty());
  }
  SUBCASE("subsample determinism and reindexing") {
    const MultiviewDataset a = load_twitter(dir.path(), Index{10}, 7);
    const MultiviewDataset b = load_twitter(dir.path(), Index{10}, 7);
    CHECK(a.n() == 10);
    CHECK((a.views[0] - b.views[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.follows == b.follows);
    for (const auto& [user, account] : a.follows) {
      CHECK(user >= 0);
      CHECK(user < 10);
    }
    const MultiviewDataset c = load_twitter(dir.path(), Index{10}, 8);
    CHECK((a.views[0] - c.views[0]).cwiseAbs().maxCoeff() > 0.0);  // seed changes the user set
  }
  SUBCASE("subsample larger than n") {
    CHECK_THROWS_AS(load_twitter(dir.path(), Index{1000}, 0), std::invalid_argument);
  }
  SUBCASE("missing view file") {
    std::filesystem::remove(dir.path() / "friendnetwork.bin");
    CHECK_THROWS_WITH_AS(load_twitter(dir.path(), std::nullopt, 0),
                         doctest::Contains("friendnetwork"), std::runtime_error);
  }
}

TEST_CASE("preprocess_views") {
  SUBCASE("hand-computed 1x2 view") {
    MultiviewDataset ds = tiny_points((Matrix(1, 2) << 1.0, 3.0).finished());
    const MultiviewDataset out = preprocess_views(ds);
    CHECK(out.views[0](0, 0) == doctest::Approx(-1.0));
    CHECK(out.views[0](0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("fixed point") {
    Matrix x(2, 2);
    x << -1.0, 1.0, 0.5, -0.5;
    const MultiviewDataset once = preprocess_views(tiny_points(x));
    const MultiviewDataset twice = preprocess_views(once);
    CHECK((once.views[0] - twice.views[0]).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("constant view is centered with a warning") {
    const MultiviewDataset out =
        preprocess_views(tiny_points((Matrix(1, 2) << 5.0, 5.0).finished()));
    CHECK(out.views[0].cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("range bound") {
    Rng rng(1);
    std::normal_distribution<double> nd;
    Matrix x(4, 30);
    for (Index i = 0; i < x.size(); ++i) x(i / 30, i % 30) = 3.0 * nd(rng);
    const MultiviewDataset out = preprocess_views(tiny_points(x));
    CHECK(out.views[0].cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    CHECK(out.views[0].rowwise().mean().cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("build_knn_graph") {
  SUBCASE("three collinear points, k=1") {
    const Matrix x = (Matrix(1, 3) << 0.0, 1.0, 2.0).finished();
    const Adjacency a = build_knn_graph(tiny_points(x), 1);
    const Matrix w = a.dense();
    CHECK(w(0, 1) == 1.0);
    CHECK(w(1, 2) == 1.0);
    CHECK(w(0, 2) == 0.0);
    CHECK(w(1, 0) == 1.0);
    CHECK(w.diagonal().isZero());
  }
  SUBCASE("k = n-1 gives the complete graph") {
    Rng rng(5);
    std::normal_distribution<double> nd;
    Matrix x(2, 6);
    for (Index i = 0; i < 12; ++i) x(i % 2, i / 2) = nd(rng);
    const Matrix w = build_knn_graph(tiny_points(x), 5).dense();
    for (Index i = 0; i < 6; ++i)
      for (Index j = 0; j < 6; ++j) CHECK(w(i, j) == (i == j ? 0.0 : 1.0));
  }
  SUBCASE("duplicate points break ties by index") {
    const Matrix x = (Matrix(1, 3) << 0.0, 0.0, 1.0).finished();
    const Matrix w = build_knn_graph(tiny_points(x), 1).dense();
    CHECK(w(0, 1) == 1.0);  // mutual zero-distance pair
    CHECK(w(0, 2) == 1.0);  // node 2 ties 0 vs 1, picks index 0
    CHECK(w(1, 2) == 0.0);
  }
  SUBCASE("degree is at least k") {
    Rng rng(11);
    std::normal_distribution<double> nd;
    Matrix x(3, 40);
    for (Index i = 0; i < x.size(); ++i) x(i % 3, i / 3) = nd(rng);
    const int k = 4;
    const Matrix w = build_knn_graph(tiny_points(x), k).dense();
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (Index i = 0; i < 40; ++i) CHECK(w.row(i).sum() >= k);
  }
  SUBCASE("argument errors") {
    const Matrix x = (Matrix(1, 3) << 0.0, 1.0, 2.0).finished();
    CHECK_THROWS_AS(build_knn_graph(tiny_points(x), 0), std::invalid_argument);
    CHECK_THROWS_AS(build_knn_graph(tiny_points(x), 3), std::invalid_argument);
    CHECK_THROWS_AS(build_knn_graph(tiny_points(x), 1, "manhattan"),
                    std::invalid_argument);
  }
}

TEST_CASE("normalize_adjacency") {
  SUBCASE("rescales and sets the diagonal") {
    std::vector<Eigen::Triplet<double>> trips{{0, 1, 2.0}, {1, 0, 2.0}};
    Adjacency a;
    a.weights.resize(3, 3);
    a.weights.setFromTriplets(trips.begin(), trips.end());
    const Matrix w = normalize_adjacency(a).dense();
    CHECK(w(0, 1) == 1.0);
    CHECK(w(1, 0) == 1.0);
    CHECK(w(0, 2) == 0.0);
    for (Index i = 0; i < 3; ++i) CHECK(w(i, i) == 1.0);
  }
  SUBCASE("idempotent") {
    const Matrix x = (Matrix(1, 4) << 0.0, 1.0, 2.0, 3.5).finished();
    const Adjacency a = normalize_adjacency(build_knn_graph(tiny_points(x), 2));
    const Adjacency b = normalize_adjacency(a);
    CHECK((a.dense() - b.dense()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("zero matrix maps to the identity pattern") {
    Adjacency a;
    a.weights.resize(2, 2);
    const Matrix w = normalize_adjacency(a).dense();
    CHECK((w - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("fold splitting") {
  SUBCASE("singleton folds") {
    const FoldSplit s = split_folds(10, 10, 0);
    std::vector<int> seen(10, 0);
    for (int f : s.assignments) ++seen[static_cast<size_t>(f)];
    for (int c : seen) CHECK(c == 1);
  }
  SUBCASE("near-equal sizes") {
    const FoldSplit s = split_folds(10, 3, 1);
    std::vector<int> sizes(3, 0);
    for (int f : s.assignments) ++sizes[static_cast<size_t>(f)];
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes == std::vector<int>{3, 3, 4});
  }
  SUBCASE("deterministic per seed") {
    CHECK(split_folds(50, 7, 3).assignments == split_folds(50, 7, 3).assignments);
    CHECK(split_folds(50, 7, 3).assignments != split_folds(50, 7, 4).assignments);
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(split_folds(5, 6, 0), std::invalid_argument);
    CHECK_THROWS_AS(split_folds(5, 1, 0), std::invalid_argument);
  }
  SUBCASE("stratified split balances every class") {
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c)
      for (int i = 0; i < 25; ++i) labels.push_back(c);
    const FoldSplit s = split_folds_stratified(labels, 5, 2);
    REQUIRE(s.assignments.size() == labels.size());
    std::map<std::pair<int, int>, int> per;  // (fold, class) -> count
    for (size_t i = 0; i < labels.size(); ++i)
      ++per[{s.assignments[i], labels[i]}];
    for (const auto& [key, count] : per) CHECK(count == 5);
  }
}

TEST_CASE("concat_views and validate") {
  MultiviewDataset ds;
  ds.views = {(Matrix(1, 2) << 1.0, 2.0).finished(),
              (Matrix(2, 2) << 3.0, 4.0, 5.0, 6.0).finished()};
  ds.names = {"a", "b"};
  const Matrix cat = concat_views(ds);
  CHECK(cat.rows() == 3);
  CHECK(cat(0, 1) == 2.0);
  CHECK(cat(2, 0) == 5.0);

  const Matrix second = concat_views(ds, {1});
  CHECK((second - ds.views[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(concat_views(ds, {2}), std::invalid_argument);

  ds.labels = {0};
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  ds.labels = {0, 1};
  ds.validate();
  ds.views[1] = Matrix::Zero(2, 3);
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}
