#pragma once

#include <Eigen/Core>

#include "treeten/dense.hpp"

namespace treeten {

// a = u * diag(sigma) * v^T with min(rows, cols) singular triplets.
struct ThinSvd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
};

ThinSvd thin_svd(const Eigen::MatrixXd& a);

int numerical_rank(const Eigen::VectorXd& sigma, RankTol tol = {});
int matrix_rank(const Eigen::MatrixXd& a, RankTol tol = {});

// Flips each column so its largest-magnitude entry is positive; ties are
// broken by the lowest row index.
void fix_column_signs(Eigen::MatrixXd& u);

// Thin Householder Q with a.cols() orthonormal columns (requires cols <= rows).
Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a);

// Spectral-norm distance between the orthogonal projectors onto the column
// spans of qa and qb (both assumed orthonormal).
double projector_distance(const Eigen::MatrixXd& qa, const Eigen::MatrixXd& qb);

}  // namespace treeten
