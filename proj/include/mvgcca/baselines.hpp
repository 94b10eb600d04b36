#ifndef MVGCCA_BASELINES_HPP
#define MVGCCA_BASELINES_HPP

#include "mvgcca/dataset.hpp"
#include "mvgcca/types.hpp"

#include <functional>
#include <vector>

namespace mvgcca {

/// Common low-dimensional representation S (d x n) with optional per-view
/// projectors. MCCA/GMCCA outputs satisfy S S^T = I_d.
struct LinearEmbedding {
  Matrix S;
  std::vector<Matrix> U;  // per-view projectors, d x d_m (empty for PCA/GPCA)
  int d = 0;
  double gamma = 0.0;
};

/// Principal component scores of the row-concatenated views: S row k holds the
/// projection onto the k-th leading covariance eigenvector.
LinearEmbedding pca(const MultiviewDataset& views, int d);

/// Top-d eigenvectors (as rows, orthonormal) of X^T X - gamma L with X the
/// concatenated views.
LinearEmbedding graph_pca(const MultiviewDataset& views, const SpMatrix& l,
                          double gamma, int d);

/// Multiview CCA common representation: top-d eigenvectors (as rows) of
/// sum_m X_m^T (X_m X_m^T + ridge_m I)^{-1} X_m with ridge_m =
/// eps * trace(X_m X_m^T) / d_m. Per-view projectors are recovered by
/// ridge-regularized least squares against S.
LinearEmbedding mcca(const MultiviewDataset& views, int d, double eps = 1e-6);

/// Graph-regularized MCCA: same matrix minus gamma L.
LinearEmbedding gmcca(const MultiviewDataset& views, const SpMatrix& l,
                      double gamma, int d, double eps = 1e-6);

/// Instances larger than this use the iterative eigensolver instead of a
/// dense decomposition.
constexpr Index kDenseEigLimit = 5000;

/// Columns are the d leading eigenvectors (largest eigenvalues) of the
/// symmetric matrix.
Matrix top_eigenvectors_dense(const Matrix& sym, int d);

/// Lanczos with full reorthogonalization on a matrix-free symmetric operator.
Matrix top_eigenvectors_lanczos(const std::function<Vector(const Vector&)>& op,
                                Index n, int d, std::uint64_t seed = 0,
                                int krylov_dim = 0);

/// Largest principal angle (radians) between the row spaces of two d x n
/// embeddings. Rows are orthonormalized internally.
double max_principal_angle(const Matrix& s1, const Matrix& s2);

} // namespace mvgcca

#endif
