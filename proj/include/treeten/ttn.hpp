#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "treeten/minsub.hpp"

namespace treeten {

// Small dense multiway array, row-major with the last axis fastest.
struct CoreArray {
  std::vector<int> dims;
  std::vector<double> values;

  CoreArray() = default;
  CoreArray(std::vector<int> dims_, std::vector<double> values_);
  static CoreArray zeros(std::vector<int> dims);
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(values.size()); }
};

// Matricization of a core with rows indexed by `axis` and columns by the
// remaining axes in their original order.
Eigen::MatrixXd unfold(const CoreArray& c, int axis);
CoreArray fold(const Eigen::MatrixXd& m, int axis, const std::vector<int>& dims);
// Replaces `axis` (length r.cols()) by r.rows(): out[.., k, ..] = sum_i r(k,i) c[.., i, ..].
CoreArray contract_axis(const CoreArray& c, int axis, const Eigen::MatrixXd& r);

// Tree-based representation: one basis matrix per leaf, one transfer core per
// interior vertex expressing its basis in the product of its sons' bases
// (axis 0 is the vertex's own rank index, then son axes in canonical order),
// and the root core holding the coefficients over the root's sons.
struct TreeTensor {
  DimensionTree tree;
  std::vector<int> shape;
  RankTuple ranks;
  std::map<Vertex, Eigen::MatrixXd> leaf_bases;  // {j} -> n_j x r_j
  std::map<Vertex, CoreArray> transfer_cores;    // interior, root excluded
  CoreArray root_core;
  bool orthonormal_leaves = false;
  bool orthonormal_cores = false;
  bool minimal = false;
};

// Throws on any shape inconsistency between tree, shape, ranks and arrays.
void validate(const TreeTensor& t);

DenseTensor evaluate(const TreeTensor& t);

// Materialized basis per non-root vertex, built leaves-to-root: an interior
// vertex's basis is its sons' product frame times its transposed axis-0 core
// matricization.
std::map<Vertex, Eigen::MatrixXd> materialize_bases(const TreeTensor& t);

// Axis of `son`'s rank index inside its parent's core array.
int core_axis(const DimensionTree& tree, const Vertex& parent, const Vertex& son);

// Node-wise truncation control. `tol` discards singular values
// sigma_i <= tol * sigma_max at each vertex (0 keeps the numerical rank);
// rank caps dominate when both are given.
struct HsvdControl {
  double tol = 0.0;
  std::optional<RankTuple> caps;
  RankTol rank_tol = {};
};

struct HsvdInfo {
  std::map<Vertex, std::vector<double>> discarded;  // per-vertex discarded sigma
  std::vector<Vertex> boundary_ties;                // near-equal sigma at the cut
};

TreeTensor hsvd(const DenseTensor& v, const DimensionTree& tree, const HsvdControl& control = {},
                HsvdInfo* info = nullptr);

// Basis change only: leaf bases get orthonormal columns and every transfer
// core a row-orthonormal axis-0 matricization, with the factors pushed
// towards the root core. The evaluated tensor is unchanged.
TreeTensor orthogonalize(const TreeTensor& t);

// Ranks read off the (orthogonalized) cores: axis-0 matricization rank at
// interior vertices, root-core axis rank for sons of the root, and the rank
// of each leaf basis as used by its parent core.
RankTuple core_ranks(const TreeTensor& t, RankTol tol = {});

// Orthonormalized Gaussian leaf bases and Gaussian cores; requires the tuple
// to satisfy the necessary feasibility conditions. Deterministic per seed.
TreeTensor random_tree_tensor(const DimensionTree& tree, const std::vector<int>& shape,
                              const RankTuple& r, std::uint64_t seed);

struct StorageReport {
  std::int64_t parameter_count = 0;
  std::int64_t dense_count = 0;
  double compression_ratio = 0.0;
};

StorageReport storage_report(const TreeTensor& t);

enum class Admissibility { admissible, necessarily_inadmissible, undetermined };

struct AdmissibilityResult {
  Admissibility verdict = Admissibility::undetermined;
  std::string violated_constraint;       // set for necessarily_inadmissible
  std::optional<TreeTensor> witness;     // set for admissible
  int trials_used = 0;
};

// Checks the necessary conditions, then samples random tree tensors looking
// for a witness that attains the tuple exactly. No witness after `trials`
// draws yields `undetermined` (the definition is existential; failed generic
// draws are strong evidence but not a certificate).
AdmissibilityResult is_admissible(const DimensionTree& tree, const std::vector<int>& shape,
                                  const RankTuple& r, int trials = 8, std::uint64_t seed = 0,
                                  RankTol tol = {});

}  // namespace treeten
