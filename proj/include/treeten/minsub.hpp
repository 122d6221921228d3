#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Core>

#include "treeten/dense.hpp"
#include "treeten/linalg.hpp"
#include "treeten/report.hpp"

namespace treeten {

// Orthonormal basis of the minimal subspace of v at a vertex, i.e. of the
// numerical column space of the matricization at that vertex.
struct SubspaceBasis {
  Vertex vertex;
  Eigen::MatrixXd basis;                 // orthonormal columns
  std::vector<double> singular_values;   // retained, descending
  int rank() const { return static_cast<int>(basis.cols()); }
};

// Rank per vertex of a dimension tree. Root rank is 0 only for the zero
// tensor, otherwise 1.
struct RankTuple {
  DimensionTree tree;
  std::map<Vertex, int> ranks;

  RankTuple() = default;
  RankTuple(DimensionTree tree_, std::map<Vertex, int> ranks_);
  static RankTuple constant(const DimensionTree& tree, int r, int root_rank = 1);

  int at(const Vertex& v) const;
  bool all_leq(const RankTuple& other) const;
  friend bool operator==(const RankTuple& a, const RankTuple& b) {
    return a.tree == b.tree && a.ranks == b.ranks;
  }
};

SubspaceBasis minimal_subspace(const DenseTensor& v, const Vertex& alpha, RankTol tol = {});

RankTuple tree_rank(const DenseTensor& v, const DimensionTree& tree, RankTol tol = {});

// Checks rank M_alpha = rank M_alpha^c for the tree's vertices, or for every
// non-trivial subset when all_subsets is set (gated to d <= 5). A singular
// value close to the cutoff marks the record "tolerance_sensitive".
Report verify_rank_duality(const DenseTensor& v, const DimensionTree& tree, RankTol tol = {},
                           bool all_subsets = false);

// Residual of each interior minimal-subspace basis under the projector onto
// the product of its sons' minimal subspaces, relative to the basis norm.
Report verify_nestedness(const DenseTensor& v, const DimensionTree& tree, double tol = 1e-10,
                         RankTol rank_tol = {});

// Spans sampled functional contractions (id_beta x phi^(alpha\beta)) applied
// to elements of the alpha minimal subspace and compares the span against the
// beta minimal subspace. With reuse_functional all samples share one draw,
// which normally leaves the span deficient; the record is marked
// "span_deficient" instead of passing spuriously.
Report span_from_contractions(const DenseTensor& v, const Vertex& beta, const Vertex& alpha,
                              int samples, std::uint64_t seed, double tol = 1e-8,
                              bool reuse_functional = false, RankTol rank_tol = {});

enum class MembershipMode { exact, bounded };

bool in_ft(const DenseTensor& v, const DimensionTree& tree, const RankTuple& r,
           MembershipMode mode, RankTol tol = {});

// Necessary feasibility conditions for a rank tuple: leaf ranks bounded by
// mode sizes, parent ranks bounded by son-rank products, each son rank
// bounded by the product of the remaining core dimensions and both duality
// bounds. Returns an empty string when all hold, otherwise a description
// naming the violated vertex.
std::string rank_tuple_violation(const DimensionTree& tree, const std::vector<int>& shape,
                                 const RankTuple& r);

}  // namespace treeten
