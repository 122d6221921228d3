#pragma once

#include <random>

#include <Eigen/Core>

namespace treeten::detail {

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows,
                                       Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  return m;
}

inline std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = normal(rng);
  return v;
}

}  // namespace treeten::detail
