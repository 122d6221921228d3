#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "treeten/ttn.hpp"

namespace treeten {

struct ApproxResult {
  TreeTensor approximant;
  double residual = 0.0;  // Frobenius distance to the target
  int iterations = 0;     // ALS sweeps performed
  int restarts_used = 0;
  std::map<Vertex, std::vector<double>> discarded_spectra;
  std::vector<double> sweep_residuals;  // residual after each sweep
  // Per-run sweep histories; best_approx keeps one entry per restart.
  std::vector<std::vector<double>> run_histories;
};

// Rank-capped hierarchical SVD. The discarded spectra satisfy
// residual^2 <= sum over vertices of the discarded sigma^2.
ApproxResult truncate(const DenseTensor& v, const DimensionTree& tree, const RankTuple& caps);

// Cyclic per-vertex least squares against a dense target, leaves-to-root
// sweeps. The residual is non-increasing per sweep; stops when a sweep
// improves by less than stall_tol * ||target|| or after max_iters sweeps.
ApproxResult als_refine(const DenseTensor& target, const TreeTensor& init, int max_iters = 50,
                        double stall_tol = 1e-10);

// Multi-start search: ALS from the truncation initializer plus restarts-1
// random initializers; returns the best run (ties by lowest restart index).
// The result never exceeds the truncation residual.
ApproxResult best_approx(const DenseTensor& target, const DimensionTree& tree,
                         const RankTuple& caps, int restarts = 3, std::uint64_t seed = 0,
                         int max_iters = 50, double stall_tol = 1e-10);

struct NormEstimate {
  double estimate = 0.0;
  std::vector<std::vector<double>> witness;  // one unit vector per mode
};

// Lower bound on the injective norm by alternating rank-one power iterations,
// maximized over restarts. Exact on elementary tensors; for d = 2 it is the
// spectral norm of the unfolding. Always bounded by the Frobenius norm.
NormEstimate injective_norm(const DenseTensor& v, int restarts = 8, int iters = 1000,
                            std::uint64_t seed = 0);

// Sequences v_n -> v built in representation space, with v_n of tree-based
// rank r; checks per vertex that rank(v) <= min over the tail (last
// ceil(steps/2) iterates) of rank(v_n).
Report lsc_experiment(const DimensionTree& tree, const std::vector<int>& shape,
                      const RankTuple& r, int num_sequences, int steps, std::uint64_t seed,
                      RankTol tol = {});

// Convergent sequences inside the bounded-rank set; checks that each dense
// limit still has tree-based rank bounded by r.
Report closedness_experiment(const DimensionTree& tree, const std::vector<int>& shape,
                             const RankTuple& r, int num_sequences, int steps,
                             std::uint64_t seed, RankTol tol = {});

}  // namespace treeten
