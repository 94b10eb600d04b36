#ifndef MVGCCA_GRAPH_OPS_HPP
#define MVGCCA_GRAPH_OPS_HPP

#include "mvgcca/dataset.hpp"
#include "mvgcca/types.hpp"

#include <vector>

namespace mvgcca {

enum class Propagation { None, Sym, RW };

/// Combinatorial Laplacian L = D - W with D the diagonal of weighted degrees.
SpMatrix laplacian(const Adjacency& a);

/// Propagation operator for graph convolutions. Sym (the default elsewhere)
/// is D^{-1/2} A D^{-1/2}; RW is D^{-1} A; None passes A through. Assumes a
/// normalized adjacency (unit diagonal), so no degree can vanish.
SpMatrix propagation_operator(const Adjacency& a, Propagation kind = Propagation::Sym);

/// Vertical stack [X; X P; X P^2; ...; X P^hops] where P is the propagation
/// operator of `a_sub` and X holds node features in columns. Block 0 equals X.
/// Powers are accumulated by repeated multiplication.
Matrix krylov_features(const Matrix& x, const Adjacency& a_sub, int hops,
                       Propagation kind = Propagation::Sym);

/// Same stack given a precomputed propagation operator.
Matrix krylov_stack(const Matrix& x, const SpMatrix& prop, int hops);

/// Row/column restriction of the adjacency to `indices` (order preserved).
Adjacency batch_subgraph(const Adjacency& a, const std::vector<Index>& indices);

} // namespace mvgcca

#endif
