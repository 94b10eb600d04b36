#include "mvgcca/graph_ops.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mvgcca {

namespace {

Vector weighted_degrees(const SpMatrix& w) {
  Vector deg = Vector::Zero(w.rows());
  for (int j = 0; j < w.outerSize(); ++j)
    for (SpMatrix::InnerIterator it(w, j); it; ++it) deg[it.row()] += it.value();
  return deg;
}

} // namespace

SpMatrix laplacian(const Adjacency& a) {
  const Index n = a.size();
  const Vector deg = weighted_degrees(a.weights);
  SpMatrix l(n, n);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(a.weights.nonZeros()) + static_cast<size_t>(n));
  for (int j = 0; j < a.weights.outerSize(); ++j)
    for (SpMatrix::InnerIterator it(a.weights, j); it; ++it)
      trips.emplace_back(it.row(), it.col(), -it.value());
  for (Index i = 0; i < n; ++i) trips.emplace_back(i, i, deg[i]);
  l.setFromTriplets(trips.begin(), trips.end());
  return l;
}

SpMatrix propagation_operator(const Adjacency& a, Propagation kind) {
  if (kind == Propagation::None) return a.weights;
  const Vector deg = weighted_degrees(a.weights);
  for (Index i = 0; i < deg.size(); ++i)
    if (deg[i] <= 0.0)
      throw std::invalid_argument("node " + std::to_string(i) +
                                  " has zero degree; normalize the adjacency first");
  SpMatrix p = a.weights;
  for (int j = 0; j < p.outerSize(); ++j)
    for (SpMatrix::InnerIterator it(p, j); it; ++it) {
      if (kind == Propagation::Sym)
        it.valueRef() /= std::sqrt(deg[it.row()] * deg[it.col()]);
      else  // RW
        it.valueRef() /= deg[it.row()];
    }
  return p;
}

Matrix krylov_stack(const Matrix& x, const SpMatrix& prop, int hops) {
  if (hops < 0) throw std::invalid_argument("hops must be nonnegative");
  if (x.cols() != prop.rows())
    throw std::invalid_argument("feature columns do not match graph size");
  const Index d = x.rows(), b = x.cols();
  Matrix stack((hops + 1) * d, b);
  stack.topRows(d) = x;
  for (int t = 1; t <= hops; ++t)
    stack.middleRows(t * d, d) = stack.middleRows((t - 1) * d, d) * prop;
  return stack;
}

Matrix krylov_features(const Matrix& x, const Adjacency& a_sub, int hops,
                       Propagation kind) {
  return krylov_stack(x, propagation_operator(a_sub, kind), hops);
}

Adjacency batch_subgraph(const Adjacency& a, const std::vector<Index>& indices) {
  const Index n = a.size();
  const Index b = static_cast<Index>(indices.size());
  std::unordered_map<Index, Index> pos;
  pos.reserve(indices.size());
  for (Index t = 0; t < b; ++t) {
    const Index i = indices[t];
    if (i < 0 || i >= n)
      throw std::invalid_argument("subgraph index out of range: " + std::to_string(i));
    if (!pos.emplace(i, t).second)
      throw std::invalid_argument("duplicate subgraph index: " + std::to_string(i));
  }

  std::vector<Eigen::Triplet<double>> trips;
  for (Index t = 0; t < b; ++t)
    for (SpMatrix::InnerIterator it(a.weights, indices[t]); it; ++it) {
      auto found = pos.find(it.row());
      if (found != pos.end()) trips.emplace_back(found->second, t, it.value());
    }

  Adjacency out;
  out.weights.resize(b, b);
  out.weights.setFromTriplets(trips.begin(), trips.end());
  return out;
}

} // namespace mvgcca
