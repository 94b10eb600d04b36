#include "mvgcca/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace mvgcca {

namespace fs = std::filesystem;

void MultiviewDataset::validate() const {
  if (views.empty()) throw std::invalid_argument("dataset has no views");
  const Index nn = views[0].cols();
  for (size_t m = 0; m < views.size(); ++m) {
    if (views[m].rows() < 1)
      throw std::invalid_argument("view " + std::to_string(m) + " has no features");
    if (views[m].cols() != nn)
      throw std::invalid_argument("view " + std::to_string(m) +
                                  " has a different sample count");
  }
  if (!labels.empty() && static_cast<Index>(labels.size()) != nn)
    throw std::invalid_argument("label count does not match sample count");
  if (!names.empty() && names.size() != views.size())
    throw std::invalid_argument("view name count does not match view count");
  if (!adjacency.empty() && adjacency.size() != nn)
    throw std::invalid_argument("adjacency size does not match sample count");
}

// ---------------------------------------------------------------------------
// UCI multiple-features loader

namespace {

constexpr int kUciRows = 2000;
constexpr int kUciBlock = 200;  // samples per digit, digits in order 0..9

const std::vector<std::string> kUciFiles = {"mfeat-fou", "mfeat-fac", "mfeat-kar",
                                            "mfeat-pix", "mfeat-zer", "mfeat-mor"};
const std::vector<int> kUciDims = {76, 216, 64, 240, 47, 6};

// Parses a whitespace-separated numeric table with a fixed shape.
// Rows become columns of the result (samples are columns throughout).
Matrix read_numeric_table(const fs::path& file, int expect_rows, int expect_cols) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open view file: " + file.string());

  Matrix out(expect_cols, expect_rows);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;  // blank
    if (row >= expect_rows)
      throw std::runtime_error(file.string() + ": expected " +
                               std::to_string(expect_rows) + " rows, found more");
    std::istringstream iss(line);
    std::string tok;
    int col = 0;
    while (iss >> tok) {
      if (col >= expect_cols)
        throw std::runtime_error(file.string() + ": row " + std::to_string(row + 1) +
                                 " has more than " + std::to_string(expect_cols) +
                                 " columns");
      try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        out(col, row) = v;
      } catch (const std::exception&) {
        throw std::runtime_error(file.string() + ": row " + std::to_string(row + 1) +
                                 ": invalid numeric token '" + tok + "'");
      }
      ++col;
    }
    if (col != expect_cols)
      throw std::runtime_error(file.string() + ": row " + std::to_string(row + 1) +
                               " has " + std::to_string(col) + " columns, expected " +
                               std::to_string(expect_cols));
    ++row;
  }
  if (row != expect_rows)
    throw std::runtime_error(file.string() + ": expected " +
                             std::to_string(expect_rows) + " rows, got " +
                             std::to_string(row));
  return out;
}

} // namespace

MultiviewDataset load_uci(const fs::path& data_dir, const std::set<int>& keep_classes) {
  if (keep_classes.empty()) throw std::invalid_argument("keep_classes is empty");
  for (int c : keep_classes)
    if (c < 0 || c > 9)
      throw std::invalid_argument("digit class out of range: " + std::to_string(c));

  std::vector<Index> keep_cols;
  std::vector<int> labels;
  for (int c : keep_classes) {  // std::set iterates in ascending order
    for (int r = 0; r < kUciBlock; ++r) {
      keep_cols.push_back(static_cast<Index>(c) * kUciBlock + r);
      labels.push_back(c);
    }
  }

  MultiviewDataset ds;
  for (size_t m = 0; m < kUciFiles.size(); ++m) {
    Matrix full = read_numeric_table(data_dir / kUciFiles[m], kUciRows, kUciDims[m]);
    ds.views.push_back(full(Eigen::all, keep_cols));
    ds.names.push_back(kUciFiles[m].substr(std::string("mfeat-").size()));
  }
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Twitter loader

namespace {

const std::vector<std::string> kTwitterViews = {"egotweets",       "mentiontweets",
                                                "friendtweets",    "followerstweets",
                                                "friendnetwork",   "followernetwork"};
constexpr int kTwitterDim = 1000;
constexpr char kViewBinaryMagic[4] = {'M', 'V', 'T', 'B'};

// Columnar binary: magic "MVTB", uint64 rows, uint64 cols, row-major float64.
Matrix read_view_binary(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open view file: " + file.string());
  char magic[4];
  std::uint64_t rows = 0, cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in || std::memcmp(magic, kViewBinaryMagic, 4) != 0)
    throw std::runtime_error(file.string() + ": not a view binary file");
  Matrix out(cols, rows);  // samples as columns
  std::vector<double> row(cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(cols * sizeof(double)));
    if (!in) throw std::runtime_error(file.string() + ": truncated at row " +
                                      std::to_string(r));
    for (std::uint64_t c = 0; c < cols; ++c) out(static_cast<Index>(c), static_cast<Index>(r)) = row[c];
  }
  return out;
}

// Text fallback: one user per row, whitespace-separated.
Matrix read_view_text(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open view file: " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream iss(line);
    std::vector<double> row;
    std::string tok;
    while (iss >> tok) {
      try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error(file.string() + ": line " + std::to_string(lineno) +
                                 ": invalid numeric token '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw std::runtime_error(file.string() + ": line " + std::to_string(lineno) +
                               ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(file.string() + ": empty view file");
  Matrix out(static_cast<Index>(rows[0].size()), static_cast<Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      out(static_cast<Index>(c), static_cast<Index>(r)) = rows[r][c];
  return out;
}

} // namespace

const std::vector<std::string>& twitter_view_names() { return kTwitterViews; }

void write_view_binary(const fs::path& file, const Matrix& rows_by_cols) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write view file: " + file.string());
  const std::uint64_t rows = static_cast<std::uint64_t>(rows_by_cols.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(rows_by_cols.cols());
  out.write(kViewBinaryMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (std::uint64_t r = 0; r < rows; ++r)
    for (std::uint64_t c = 0; c < cols; ++c) {
      double v = rows_by_cols(static_cast<Index>(r), static_cast<Index>(c));
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

MultiviewDataset load_twitter(const fs::path& data_dir, std::optional<Index> subsample,
                              std::uint64_t seed) {
  MultiviewDataset ds;
  for (const auto& name : kTwitterViews) {
    fs::path bin = data_dir / (name + ".bin");
    fs::path txt = data_dir / (name + ".txt");
    Matrix view;
    if (fs::exists(bin))
      view = read_view_binary(bin);
    else
      view = read_view_text(txt);
    if (view.rows() != kTwitterDim)
      throw std::runtime_error("view " + name + " has dimension " +
                               std::to_string(view.rows()) + ", expected " +
                               std::to_string(kTwitterDim));
    if (!ds.views.empty() && view.cols() != ds.views[0].cols())
      throw std::runtime_error("view " + name + " has a mismatched user count");
    ds.views.push_back(std::move(view));
    ds.names.push_back(name);
  }
  const Index n = ds.views[0].cols();

  // Follower relation: "user_id account_id" pairs, user ids are row indices.
  {
    fs::path edges = data_dir / "follower_edges";
    std::ifstream in(edges);
    if (!in) throw std::runtime_error("cannot open " + edges.string());
    long long user = 0, account = 0;
    while (in >> user >> account) {
      if (user < 0 || user >= n)
        throw std::runtime_error(edges.string() + ": user id " +
                                 std::to_string(user) + " out of range");
      ds.follows.emplace_back(static_cast<int>(user), static_cast<int>(account));
    }
  }

  if (subsample) {
    if (*subsample > n)
      throw std::invalid_argument("subsample " + std::to_string(*subsample) +
                                  " exceeds user count " + std::to_string(n));
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    Rng rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<Index> chosen(all.begin(), all.begin() + *subsample);
    std::sort(chosen.begin(), chosen.end());

    std::vector<int> new_id(n, -1);
    for (size_t i = 0; i < chosen.size(); ++i) new_id[chosen[i]] = static_cast<int>(i);

    for (auto& view : ds.views) view = view(Eigen::all, chosen).eval();
    std::vector<std::pair<int, int>> kept;
    for (auto [u, a] : ds.follows)
      if (new_id[u] >= 0) kept.emplace_back(new_id[u], a);
    ds.follows = std::move(kept);
  }

  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Preprocessing

MultiviewDataset preprocess_views(const MultiviewDataset& dataset) {
  dataset.validate();
  MultiviewDataset out = dataset;
  for (size_t m = 0; m < out.views.size(); ++m) {
    Matrix& v = out.views[m];
    v.colwise() -= v.rowwise().mean().eval();
    const double max_abs = v.cwiseAbs().maxCoeff();
    if (max_abs > 0.0) {
      v /= max_abs;
    } else {
      std::cerr << "warning: view " << m
                << " is constant; skipping max-abs scaling\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph construction

Adjacency build_knn_graph(const MultiviewDataset& dataset, int k,
                          const std::string& metric,
                          const std::vector<Index>& view_indices) {
  if (k <= 0) throw std::invalid_argument("knn k must be positive");
  const Index n = dataset.n();
  if (k >= n) throw std::invalid_argument("knn k must be smaller than sample count");
  if (metric != "euclidean" && metric != "cosine")
    throw std::invalid_argument("unknown knn metric: " + metric);

  Matrix x = concat_views(dataset, view_indices);
  if (metric == "cosine") {
    for (Index i = 0; i < n; ++i) {
      const double norm = x.col(i).norm();
      if (norm > 0.0) x.col(i) /= norm;
    }
  }

  // Squared Euclidean distances via the Gram expansion. For cosine, columns
  // are unit vectors so this orders pairs by decreasing cosine similarity.
  const Vector sq = x.colwise().squaredNorm();
  Matrix gram = x.transpose() * x;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(n) * 2 * k);
  std::vector<std::pair<double, Index>> order(n - 1);
  std::vector<std::unordered_set<Index>> chosen(n);
  for (Index i = 0; i < n; ++i) {
    order.clear();
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d2 = sq[i] + sq[j] - 2.0 * gram(i, j);
      order.emplace_back(d2, j);
    }
    // Ascending distance, ties by ascending sample index.
    std::nth_element(order.begin(), order.begin() + k, order.end());
    std::sort(order.begin(), order.begin() + k);
    chosen[i].reserve(k);
    for (int t = 0; t < k; ++t) chosen[i].insert(order[t].second);
  }
  for (Index i = 0; i < n; ++i)
    for (Index j : chosen[i]) {
      trips.emplace_back(i, j, 1.0);
      trips.emplace_back(j, i, 1.0);
    }

  Adjacency a;
  a.weights.resize(n, n);
  a.weights.setFromTriplets(trips.begin(), trips.end(),
                            [](double, double) { return 1.0; });
  return a;
}

Adjacency normalize_adjacency(const Adjacency& a) {
  const Index n = a.size();
  double max_w = 0.0;
  for (int j = 0; j < a.weights.outerSize(); ++j)
    for (SpMatrix::InnerIterator it(a.weights, j); it; ++it)
      max_w = std::max(max_w, it.value());

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(a.weights.nonZeros()) + static_cast<size_t>(n));
  for (int j = 0; j < a.weights.outerSize(); ++j)
    for (SpMatrix::InnerIterator it(a.weights, j); it; ++it) {
      if (it.row() == it.col()) continue;  // diagonal rewritten below
      if (max_w > 0.0) trips.emplace_back(it.row(), it.col(), it.value() / max_w);
    }
  for (Index i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);

  Adjacency out;
  out.weights.resize(n, n);
  out.weights.setFromTriplets(trips.begin(), trips.end());
  return out;
}

// ---------------------------------------------------------------------------
// Fold splits

FoldSplit split_folds(Index n, int k, std::uint64_t seed) {
  if (k <= 1) throw std::invalid_argument("fold count must exceed 1");
  if (static_cast<Index>(k) > n)
    throw std::invalid_argument("fold count exceeds sample count");
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  FoldSplit split;
  split.k = k;
  split.assignments.resize(n);
  // First (n mod k) folds take the extra sample.
  const Index base = n / k, extra = n % k;
  Index pos = 0;
  for (int f = 0; f < k; ++f) {
    const Index size = base + (f < extra ? 1 : 0);
    for (Index t = 0; t < size; ++t) split.assignments[perm[pos++]] = f;
  }
  return split;
}

FoldSplit split_folds_stratified(const std::vector<int>& labels, int k,
                                 std::uint64_t seed) {
  const Index n = static_cast<Index>(labels.size());
  if (k <= 1) throw std::invalid_argument("fold count must exceed 1");
  if (static_cast<Index>(k) > n)
    throw std::invalid_argument("fold count exceeds sample count");

  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  FoldSplit split;
  split.k = k;
  split.assignments.resize(n);
  Rng rng(seed);
  int next_fold = 0;  // round-robin carries across classes to balance sizes
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (Index i : members) {
      split.assignments[i] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return split;
}

Matrix concat_views(const MultiviewDataset& dataset,
                    const std::vector<Index>& view_indices) {
  std::vector<Index> idx = view_indices;
  if (idx.empty())
    for (Index m = 0; m < dataset.num_views(); ++m) idx.push_back(m);
  Index total = 0;
  for (Index m : idx) {
    if (m < 0 || m >= dataset.num_views())
      throw std::invalid_argument("view index out of range");
    total += dataset.views[m].rows();
  }
  Matrix x(total, dataset.n());
  Index row = 0;
  for (Index m : idx) {
    x.middleRows(row, dataset.views[m].rows()) = dataset.views[m];
    row += dataset.views[m].rows();
  }
  return x;
}

} // namespace mvgcca
