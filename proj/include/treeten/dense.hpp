#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "treeten/dtree.hpp"

namespace treeten {

// Numerical-rank cutoff: singular values sigma > rel*sigma_max + abs count.
struct RankTol {
  double rel = 1e-10;
  double abs = 0.0;
  double threshold(double sigma_max) const { return rel * sigma_max + abs; }
};

// Dense d-way array over mode sizes (n_1,..,n_d), values row-major with the
// last mode fastest.
struct DenseTensor {
  std::vector<int> shape;
  std::vector<double> values;

  DenseTensor() = default;
  DenseTensor(std::vector<int> shape_, std::vector<double> values_);
  static DenseTensor zeros(std::vector<int> shape);

  int order() const noexcept { return static_cast<int>(shape.size()); }
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(values.size()); }
  // 0-based multi-index access.
  double at(const std::vector<int>& index) const;
  double& at(const std::vector<int>& index);
};

// Linear functional on the modes in `modes`, coefficients row-major over the
// sorted mode set.
struct Functional {
  Vertex modes;
  std::vector<double> coefficients;
};

struct Matricized {
  Vertex row_modes;
  Vertex col_modes;
  Eigen::MatrixXd entries;
};

// Outer product of one vector per mode.
DenseTensor elementary(const std::vector<std::vector<double>>& factors);

// Mode-wise application of matrices; modes without an entry keep identity.
// ops maps 1-based mode -> matrix whose column count equals that mode size.
DenseTensor apply_elementary_operator(const DenseTensor& v,
                                      const std::map<int, Eigen::MatrixXd>& ops);

// beta must be a non-empty proper subset of {1..d}.
Matricized matricize(const DenseTensor& v, const Vertex& beta);
DenseTensor dematricize(const Matricized& m, const std::vector<int>& shape);

// Applies functionals covering the complement of `keep`; their mode sets must
// be pairwise disjoint with union equal to the complement. With keep = D and
// no functionals this is the identity.
DenseTensor contract(const DenseTensor& v, const Vertex& keep,
                     const std::vector<Functional>& functionals);

// Frame over the union of the parts' modes: column (i_1..i_s) (row-major,
// last part fastest) is the interleaved outer product of the parts' basis
// columns; rows are lexicographic over the union's sorted modes. Orthonormal
// bases yield an orthonormal frame.
Eigen::MatrixXd product_frame(const std::vector<int>& full_shape, const std::vector<Vertex>& parts,
                              const std::vector<const Eigen::MatrixXd*>& bases);

DenseTensor add(const DenseTensor& a, const DenseTensor& b);
DenseTensor subtract(const DenseTensor& a, const DenseTensor& b);
DenseTensor scale(const DenseTensor& v, double c);
double inner(const DenseTensor& a, const DenseTensor& b);
double frobenius_norm(const DenseTensor& v);
// ||a - b|| / ||b||; plain ||a - b|| when b = 0.
double relative_error(const DenseTensor& a, const DenseTensor& b);

}  // namespace treeten
