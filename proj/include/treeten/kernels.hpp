#pragma once

#include <cstdint>
#include <vector>

namespace treeten::kernels {

// Shared index plumbing for row-major dense tensors (last mode fastest).

std::int64_t element_count(const std::vector<int>& shape);
std::vector<std::int64_t> row_major_strides(const std::vector<int>& shape);

// Precomputed flat-offset tables for the matricization with rows indexed by
// `row_modes` (1-based, sorted) and columns by the remaining modes, both in
// lexicographic order: flat(v) = row_offset[r] + col_offset[c].
struct UnfoldPlan {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_offset;
  std::vector<std::int64_t> col_offset;
};

UnfoldPlan make_unfold_plan(const std::vector<int>& shape, const std::vector<int>& row_modes);

// One multiplicative factor of a weight vector or product frame living on a
// subset of modes: `digit_pos` are the positions of its modes inside the
// enclosing digit list, `digit_radix` the matching mode sizes.
struct SubsetFactor {
  std::vector<int> digit_pos;
  std::vector<int> digit_radix;
  const double* data = nullptr;   // row-major over the factor's own modes
  std::int64_t rows = 0;          // product of digit_radix
  int cols = 1;                   // 1 for plain weight vectors
};

// Parallel kernels. All are deterministic for any thread count: element-wise
// kernels write disjoint slots and reductions use a fixed chunk grid.

void elementary_fill(const std::vector<int>& shape,
                     const std::vector<const double*>& factors, double* out);

// out is column-major rows x cols.
void matricize(const double* v, const UnfoldPlan& plan, double* out);
void dematricize(const double* m, const UnfoldPlan& plan, double* v);

// out[r] = sum_c v[row_offset[r] + col_offset[c]] * w[c]
void contract_rows(const double* v, const UnfoldPlan& plan, const double* w, double* out);

// w[c] = prod_f f.data[sub-index of c in f's modes], c over `shape` digits.
void weight_fill(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                 double* w);

// Mode-j product: out[.., k, ..] = sum_i a[k + i*m] * v[.., i, ..] where a is
// column-major m x shape[mode]; out has shape[mode] replaced by m.
void mode_product(const double* v, const std::vector<int>& shape, int mode_pos,
                  const double* a, int m, double* out);

// Interleaved product frame K (column-major, element_count(shape) x prod cols):
// K(r, (i_1..i_s)) = prod_f f.data[rowsub_f(r) + i_f * f.rows], columns indexed
// row-major over the factors' column counts (last factor fastest).
void product_frame(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                   double* k);

void axpby(std::int64_t n, double a, const double* x, double b, const double* y, double* out);
void scale(std::int64_t n, double c, const double* x, double* out);
double dot(std::int64_t n, const double* x, const double* y);
double sum_squares(std::int64_t n, const double* x);

// Plain single-threaded reference implementations of the kernels above, kept
// for correctness tests and the kernel benchmark.
namespace serial {
void elementary_fill(const std::vector<int>& shape,
                     const std::vector<const double*>& factors, double* out);
void matricize(const double* v, const UnfoldPlan& plan, double* out);
void dematricize(const double* m, const UnfoldPlan& plan, double* v);
void contract_rows(const double* v, const UnfoldPlan& plan, const double* w, double* out);
void weight_fill(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                 double* w);
void mode_product(const double* v, const std::vector<int>& shape, int mode_pos,
                  const double* a, int m, double* out);
void product_frame(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                   double* k);
void axpby(std::int64_t n, double a, const double* x, double b, const double* y, double* out);
void scale(std::int64_t n, double c, const double* x, double* out);
double dot(std::int64_t n, const double* x, const double* y);
double sum_squares(std::int64_t n, const double* x);
}  // namespace serial

}  // namespace treeten::kernels
