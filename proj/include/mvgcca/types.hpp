#ifndef MVGCCA_TYPES_HPP
#define MVGCCA_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <random>

namespace mvgcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SpMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

using Rng = std::mt19937_64;

} // namespace mvgcca

#endif
