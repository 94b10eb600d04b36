#include "mvgcca/baselines.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvgcca {

Matrix top_eigenvectors_dense(const Matrix& sym, int d) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("dense eigendecomposition failed");
  const Index n = sym.rows();
  // Eigenvalues come out ascending; take the trailing d columns, largest first.
  Matrix v(n, d);
  for (int j = 0; j < d; ++j) v.col(j) = eig.eigenvectors().col(n - 1 - j);
  return v;
}

Matrix top_eigenvectors_lanczos(const std::function<Vector(const Vector&)>& op,
                                Index n, int d, std::uint64_t seed, int krylov_dim) {
  if (d < 1 || static_cast<Index>(d) > n)
    throw std::invalid_argument("invalid eigenvector count");
  int m = krylov_dim > 0 ? krylov_dim : std::max(3 * d + 20, 60);
  m = static_cast<int>(std::min<Index>(m, n));

  Rng rng(seed);
  std::normal_distribution<double> gauss;
  Matrix q(n, m);
  Vector alpha(m), beta(m);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  v /= v.norm();
  q.col(0) = v;

  int built = 0;
  for (int j = 0; j < m; ++j) {
    Vector w = op(q.col(j));
    alpha[j] = q.col(j).dot(w);
    w -= alpha[j] * q.col(j);
    if (j > 0) w -= beta[j - 1] * q.col(j - 1);
    // Full reorthogonalization, twice.
    for (int pass = 0; pass < 2; ++pass)
      w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    built = j + 1;
    beta[j] = w.norm();
    if (beta[j] < 1e-12) break;  // invariant subspace found
    if (j + 1 < m) q.col(j + 1) = w / beta[j];
  }
  if (built < d) throw std::runtime_error("Lanczos basis smaller than requested d");

  Matrix t = Matrix::Zero(built, built);
  for (int j = 0; j < built; ++j) {
    t(j, j) = alpha[j];
    if (j + 1 < built) t(j, j + 1) = t(j + 1, j) = beta[j];
  }
  Matrix ritz = top_eigenvectors_dense(t, d);
  return q.leftCols(built) * ritz;
}

namespace {

Matrix centered_concat(const MultiviewDataset& views) {
  Matrix x = concat_views(views);
  x.colwise() -= x.rowwise().mean().eval();
  return x;
}

// Top-d eigenvectors of an n x n symmetric kernel, dense or iterative by size.
Matrix kernel_top_eigvecs(const std::function<Vector(const Vector&)>& op,
                          const std::function<Matrix()>& dense, Index n, int d) {
  if (n <= kDenseEigLimit) return top_eigenvectors_dense(dense(), d);
  return top_eigenvectors_lanczos(op, n, d);
}

struct ViewKernel {
  std::vector<Eigen::LLT<Matrix>> gram_llt;  // factorization of X_m X_m^T + ridge
};

ViewKernel factor_view_grams(const MultiviewDataset& views, double eps) {
  ViewKernel k;
  for (Index m = 0; m < views.num_views(); ++m) {
    const Matrix& x = views.views[m];
    Matrix gram = x * x.transpose();
    const double ridge = eps * gram.trace() / static_cast<double>(x.rows());
    gram.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("view " + std::to_string(m) +
                               " Gram matrix is singular; increase the ridge eps");
    k.gram_llt.push_back(std::move(llt));
  }
  return k;
}

} // namespace

LinearEmbedding pca(const MultiviewDataset& views, int d) {
  views.validate();
  Matrix x = centered_concat(views);
  if (d < 1 || d > x.rows())
    throw std::invalid_argument("pca dimension out of range");
  Matrix cov = x * x.transpose() / static_cast<double>(x.cols());
  Matrix u = top_eigenvectors_dense(cov, d);  // D x d
  LinearEmbedding e;
  e.S = u.transpose() * x;
  e.d = d;
  return e;
}

LinearEmbedding graph_pca(const MultiviewDataset& views, const SpMatrix& l,
                          double gamma, int d) {
  views.validate();
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  Matrix x = centered_concat(views);
  const Index n = x.cols();
  if (d < 1 || static_cast<Index>(d) > n)
    throw std::invalid_argument("graph_pca dimension out of range");
  if (l.rows() != n) throw std::invalid_argument("Laplacian size mismatch");

  auto op = [&](const Vector& v) -> Vector {
    return x.transpose() * (x * v) - gamma * (l * v);
  };
  auto dense = [&]() -> Matrix {
    Matrix k = x.transpose() * x;
    k -= gamma * Matrix(l);
    return k;
  };
  LinearEmbedding e;
  e.S = kernel_top_eigvecs(op, dense, n, d).transpose();
  e.d = d;
  e.gamma = gamma;
  return e;
}

namespace {

LinearEmbedding mcca_impl(const MultiviewDataset& views, const SpMatrix* l,
                          double gamma, int d, double eps) {
  views.validate();
  if (views.num_views() < 2)
    throw std::invalid_argument("mcca requires at least two views");
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  const Index n = views.n();
  if (d < 1 || static_cast<Index>(d) > n)
    throw std::invalid_argument("mcca dimension out of range");
  if (l != nullptr && l->rows() != n)
    throw std::invalid_argument("Laplacian size mismatch");

  ViewKernel k = factor_view_grams(views, eps);

  auto op = [&](const Vector& v) -> Vector {
    Vector out = Vector::Zero(n);
    for (Index m = 0; m < views.num_views(); ++m) {
      const Matrix& x = views.views[m];
      out += x.transpose() * k.gram_llt[m].solve(x * v);
    }
    if (l != nullptr) out -= gamma * (*l * v);
    return out;
  };
  auto dense = [&]() -> Matrix {
    Matrix sum = Matrix::Zero(n, n);
    for (Index m = 0; m < views.num_views(); ++m) {
      const Matrix& x = views.views[m];
      sum += x.transpose() * k.gram_llt[m].solve(x);
    }
    if (l != nullptr) sum -= gamma * Matrix(*l);
    return sum;
  };

  LinearEmbedding e;
  e.S = kernel_top_eigvecs(op, dense, n, d).transpose();
  e.d = d;
  e.gamma = l != nullptr ? gamma : 0.0;
  for (Index m = 0; m < views.num_views(); ++m) {
    const Matrix& x = views.views[m];
    // U_m = S X_m^T (X_m X_m^T + ridge)^{-1}, the ridge least-squares fit of
    // U_m X_m to S.
    e.U.push_back(k.gram_llt[m].solve(x * e.S.transpose()).transpose());
  }
  return e;
}

} // namespace

LinearEmbedding mcca(const MultiviewDataset& views, int d, double eps) {
  return mcca_impl(views, nullptr, 0.0, d, eps);
}

LinearEmbedding gmcca(const MultiviewDataset& views, const SpMatrix& l,
                      double gamma, int d, double eps) {
  return mcca_impl(views, &l, gamma, d, eps);
}

double max_principal_angle(const Matrix& s1, const Matrix& s2) {
  if (s1.cols() != s2.cols() || s1.rows() != s2.rows())
    throw std::invalid_argument("embedding shapes differ");
  // Orthonormalize rows via thin QR of the transposes.
  auto orth = [](const Matrix& s) -> Matrix {
    Eigen::HouseholderQR<Matrix> qr(s.transpose());
    return Matrix(qr.householderQ() * Matrix::Identity(s.cols(), s.rows()));
  };
  Matrix q1 = orth(s1), q2 = orth(s2);
  Eigen::JacobiSVD<Matrix> svd(q1.transpose() * q2);
  const double cos_min = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(cos_min);
}

} // namespace mvgcca
