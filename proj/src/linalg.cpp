#include "treeten/linalg.hpp"

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "treeten/error.hpp"

namespace treeten {

ThinSvd thin_svd(const Eigen::MatrixXd& a) {
  ThinSvd out;
  if (a.rows() == 0 || a.cols() == 0) {
    out.u.resize(a.rows(), 0);
    out.sigma.resize(0);
    out.v.resize(a.cols(), 0);
    return out;
  }
  if (std::min(a.rows(), a.cols()) <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.sigma = svd.singularValues();
    out.v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.sigma = svd.singularValues();
    out.v = svd.matrixV();
  }
  return out;
}

int numerical_rank(const Eigen::VectorXd& sigma, RankTol tol) {
  if (sigma.size() == 0) return 0;
  const double cut = tol.threshold(sigma(0));
  int r = 0;
  while (r < sigma.size() && sigma(r) > cut) ++r;
  return r;
}

int matrix_rank(const Eigen::MatrixXd& a, RankTol tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  return numerical_rank(thin_svd(a).sigma, tol);
}

void fix_column_signs(Eigen::MatrixXd& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index best = 0;
    double mag = -1.0;
    for (Eigen::Index r = 0; r < u.rows(); ++r) {
      const double m = std::abs(u(r, c));
      if (m > mag) {
        mag = m;
        best = r;
      }
    }
    if (u.rows() > 0 && u(best, c) < 0.0) u.col(c) = -u.col(c);
  }
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a) {
  require(a.cols() <= a.rows(), errc::invalid_argument,
          "cannot orthonormalize more columns than rows");
  if (a.cols() == 0) return a;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  return q;
}

double projector_distance(const Eigen::MatrixXd& qa, const Eigen::MatrixXd& qb) {
  require(qa.rows() == qb.rows(), errc::shape_mismatch, "projector dimensions differ");
  const Eigen::MatrixXd diff =
      qa * qa.transpose() - qb * qb.transpose();
  if (diff.rows() == 0) return 0.0;
  return thin_svd(diff).sigma(0);
}

}  // namespace treeten
