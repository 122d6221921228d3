#include "treeten/kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace treeten::kernels {

namespace {

using std::int64_t;

// Reductions accumulate over a fixed chunk grid so the result does not depend
// on the number of threads.
constexpr int64_t kReductionChunks = 256;
constexpr int64_t kParallelGrain = 2048;

int64_t product(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int s : shape) n *= s;
  return n;
}

// Digits of `flat` over `shape`, row-major (last mode fastest).
inline void decompose(int64_t flat, const std::vector<int>& shape, int* digits) {
  for (int k = static_cast<int>(shape.size()) - 1; k >= 0; --k) {
    digits[k] = static_cast<int>(flat % shape[k]);
    flat /= shape[k];
  }
}

inline int64_t factor_sub_index(const SubsetFactor& f, const int* digits) {
  int64_t sub = 0;
  for (std::size_t k = 0; k < f.digit_pos.size(); ++k)
    sub = sub * f.digit_radix[k] + digits[f.digit_pos[k]];
  return sub;
}

}  // namespace

int64_t element_count(const std::vector<int>& shape) { return product(shape); }

std::vector<int64_t> row_major_strides(const std::vector<int>& shape) {
  std::vector<int64_t> strides(shape.size(), 1);
  for (int k = static_cast<int>(shape.size()) - 2; k >= 0; --k)
    strides[static_cast<std::size_t>(k)] =
        strides[static_cast<std::size_t>(k) + 1] * shape[static_cast<std::size_t>(k) + 1];
  return strides;
}

UnfoldPlan make_unfold_plan(const std::vector<int>& shape, const std::vector<int>& row_modes) {
  const int d = static_cast<int>(shape.size());
  const auto strides = row_major_strides(shape);
  std::vector<int> row_shape, col_shape;
  std::vector<int64_t> row_strides, col_strides;
  std::size_t next = 0;
  for (int j = 1; j <= d; ++j) {
    const std::size_t m = static_cast<std::size_t>(j - 1);
    if (next < row_modes.size() && row_modes[next] == j) {
      row_shape.push_back(shape[m]);
      row_strides.push_back(strides[m]);
      ++next;
    } else {
      col_shape.push_back(shape[m]);
      col_strides.push_back(strides[m]);
    }
  }

  UnfoldPlan plan;
  plan.rows = product(row_shape);
  plan.cols = product(col_shape);
  plan.row_offset.resize(static_cast<std::size_t>(plan.rows));
  plan.col_offset.resize(static_cast<std::size_t>(plan.cols));
  auto fill = [](const std::vector<int>& sh, const std::vector<int64_t>& st,
                 std::vector<int64_t>& out) {
    std::vector<int> digits(sh.size(), 0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      int64_t off = 0;
      for (std::size_t k = 0; k < sh.size(); ++k) off += digits[k] * st[k];
      out[i] = off;
      for (int k = static_cast<int>(sh.size()) - 1; k >= 0; --k) {
        if (++digits[static_cast<std::size_t>(k)] < sh[static_cast<std::size_t>(k)]) break;
        digits[static_cast<std::size_t>(k)] = 0;
      }
    }
  };
  fill(row_shape, row_strides, plan.row_offset);
  fill(col_shape, col_strides, plan.col_offset);
  return plan;
}

void elementary_fill(const std::vector<int>& shape, const std::vector<const double*>& factors,
                     double* out) {
  const int64_t n = product(shape);
  const int d = static_cast<int>(shape.size());
#pragma omp parallel for schedule(static) if (n >= kParallelGrain)
  for (int64_t flat = 0; flat < n; ++flat) {
    int64_t rem = flat;
    double p = 1.0;
    for (int k = d - 1; k >= 0; --k) {
      p *= factors[static_cast<std::size_t>(k)][rem % shape[static_cast<std::size_t>(k)]];
      rem /= shape[static_cast<std::size_t>(k)];
    }
    out[flat] = p;
  }
}

void matricize(const double* v, const UnfoldPlan& plan, double* out) {
  const int64_t rows = plan.rows, cols = plan.cols;
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelGrain)
  for (int64_t c = 0; c < cols; ++c) {
    double* col = out + c * rows;
    const double* base = v + plan.col_offset[static_cast<std::size_t>(c)];
    for (int64_t r = 0; r < rows; ++r) col[r] = base[plan.row_offset[static_cast<std::size_t>(r)]];
  }
}

void dematricize(const double* m, const UnfoldPlan& plan, double* v) {
  const int64_t rows = plan.rows, cols = plan.cols;
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelGrain)
  for (int64_t c = 0; c < cols; ++c) {
    const double* col = m + c * rows;
    double* base = v + plan.col_offset[static_cast<std::size_t>(c)];
    for (int64_t r = 0; r < rows; ++r) base[plan.row_offset[static_cast<std::size_t>(r)]] = col[r];
  }
}

void contract_rows(const double* v, const UnfoldPlan& plan, const double* w, double* out) {
  const int64_t rows = plan.rows, cols = plan.cols;
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelGrain)
  for (int64_t r = 0; r < rows; ++r) {
    const double* base = v + plan.row_offset[static_cast<std::size_t>(r)];
    double acc = 0.0;
    for (int64_t c = 0; c < cols; ++c) acc += base[plan.col_offset[static_cast<std::size_t>(c)]] * w[c];
    out[r] = acc;
  }
}

void weight_fill(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                 double* w) {
  const int64_t n = product(shape);
#pragma omp parallel for schedule(static) if (n >= kParallelGrain)
  for (int64_t flat = 0; flat < n; ++flat) {
    int digits[64];
    decompose(flat, shape, digits);
    double p = 1.0;
    for (const SubsetFactor& f : factors) p *= f.data[factor_sub_index(f, digits)];
    w[flat] = p;
  }
}

void mode_product(const double* v, const std::vector<int>& shape, int mode_pos, const double* a,
                  int m, double* out) {
  const int n_mode = shape[static_cast<std::size_t>(mode_pos)];
  const auto strides = row_major_strides(shape);
  const int64_t stride = strides[static_cast<std::size_t>(mode_pos)];
  std::vector<int> out_shape = shape;
  out_shape[static_cast<std::size_t>(mode_pos)] = m;
  const int64_t n_out = product(out_shape);
  const auto out_strides = row_major_strides(out_shape);
  const int64_t out_stride = out_strides[static_cast<std::size_t>(mode_pos)];
#pragma omp parallel for schedule(static) if (n_out >= kParallelGrain)
  for (int64_t flat = 0; flat < n_out; ++flat) {
    const int64_t k = (flat / out_stride) % m;
    // Position of the same multi-index with mode digit 0 in the input layout.
    const int64_t below = flat % out_stride;
    const int64_t above = flat / (out_stride * m);
    const double* base = v + above * (stride * n_mode) + below;
    double acc = 0.0;
    for (int64_t i = 0; i < n_mode; ++i) acc += a[k + i * m] * base[i * stride];
    out[flat] = acc;
  }
}

void product_frame(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                   double* k) {
  const int64_t rows = product(shape);
  int64_t cols = 1;
  for (const SubsetFactor& f : factors) cols *= f.cols;
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelGrain)
  for (int64_t r = 0; r < rows; ++r) {
    int digits[64];
    decompose(r, shape, digits);
    int64_t subs[64];
    for (std::size_t f = 0; f < factors.size(); ++f)
      subs[f] = factor_sub_index(factors[f], digits);
    for (int64_t c = 0; c < cols; ++c) {
      int64_t rem = c;
      double p = 1.0;
      for (int f = static_cast<int>(factors.size()) - 1; f >= 0; --f) {
        const SubsetFactor& fac = factors[static_cast<std::size_t>(f)];
        const int64_t i = rem % fac.cols;
        rem /= fac.cols;
        p *= fac.data[subs[f] + i * fac.rows];
      }
      k[r + c * rows] = p;
    }
  }
}

void axpby(int64_t n, double a, const double* x, double b, const double* y, double* out) {
#pragma omp parallel for schedule(static) if (n >= kParallelGrain)
  for (int64_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void scale(int64_t n, double c, const double* x, double* out) {
#pragma omp parallel for schedule(static) if (n >= kParallelGrain)
  for (int64_t i = 0; i < n; ++i) out[i] = c * x[i];
}

namespace {

template <class Body>
double chunked_reduce(int64_t n, Body body) {
  if (n < kParallelGrain) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) acc += body(i);
    return acc;
  }
  double partial[kReductionChunks] = {};
  const int64_t chunk = (n + kReductionChunks - 1) / kReductionChunks;
#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < kReductionChunks; ++c) {
    const int64_t lo = c * chunk;
    const int64_t hi = std::min(n, lo + chunk);
    double acc = 0.0;
    for (int64_t i = lo; i < hi; ++i) acc += body(i);
    partial[c] = acc;
  }
  double total = 0.0;
  for (int64_t c = 0; c < kReductionChunks; ++c) total += partial[c];
  return total;
}

}  // namespace

double dot(int64_t n, const double* x, const double* y) {
  return chunked_reduce(n, [&](int64_t i) { return x[i] * y[i]; });
}

double sum_squares(int64_t n, const double* x) {
  return chunked_reduce(n, [&](int64_t i) { return x[i] * x[i]; });
}

namespace serial {

void elementary_fill(const std::vector<int>& shape, const std::vector<const double*>& factors,
                     double* out) {
  const int64_t n = product(shape);
  const int d = static_cast<int>(shape.size());
  for (int64_t flat = 0; flat < n; ++flat) {
    int64_t rem = flat;
    double p = 1.0;
    for (int k = d - 1; k >= 0; --k) {
      p *= factors[static_cast<std::size_t>(k)][rem % shape[static_cast<std::size_t>(k)]];
      rem /= shape[static_cast<std::size_t>(k)];
    }
    out[flat] = p;
  }
}

void matricize(const double* v, const UnfoldPlan& plan, double* out) {
  for (int64_t c = 0; c < plan.cols; ++c)
    for (int64_t r = 0; r < plan.rows; ++r)
      out[r + c * plan.rows] =
          v[plan.row_offset[static_cast<std::size_t>(r)] + plan.col_offset[static_cast<std::size_t>(c)]];
}

void dematricize(const double* m, const UnfoldPlan& plan, double* v) {
  for (int64_t c = 0; c < plan.cols; ++c)
    for (int64_t r = 0; r < plan.rows; ++r)
      v[plan.row_offset[static_cast<std::size_t>(r)] + plan.col_offset[static_cast<std::size_t>(c)]] =
          m[r + c * plan.rows];
}

void contract_rows(const double* v, const UnfoldPlan& plan, const double* w, double* out) {
  for (int64_t r = 0; r < plan.rows; ++r) {
    double acc = 0.0;
    for (int64_t c = 0; c < plan.cols; ++c)
      acc += v[plan.row_offset[static_cast<std::size_t>(r)] +
               plan.col_offset[static_cast<std::size_t>(c)]] *
             w[c];
    out[r] = acc;
  }
}

void weight_fill(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                 double* w) {
  const int64_t n = product(shape);
  for (int64_t flat = 0; flat < n; ++flat) {
    int digits[64];
    decompose(flat, shape, digits);
    double p = 1.0;
    for (const SubsetFactor& f : factors) p *= f.data[factor_sub_index(f, digits)];
    w[flat] = p;
  }
}

void mode_product(const double* v, const std::vector<int>& shape, int mode_pos, const double* a,
                  int m, double* out) {
  const int n_mode = shape[static_cast<std::size_t>(mode_pos)];
  const auto strides = row_major_strides(shape);
  const int64_t stride = strides[static_cast<std::size_t>(mode_pos)];
  std::vector<int> out_shape = shape;
  out_shape[static_cast<std::size_t>(mode_pos)] = m;
  const int64_t n_out = product(out_shape);
  const auto out_strides = row_major_strides(out_shape);
  const int64_t out_stride = out_strides[static_cast<std::size_t>(mode_pos)];
  for (int64_t flat = 0; flat < n_out; ++flat) {
    const int64_t k = (flat / out_stride) % m;
    const int64_t below = flat % out_stride;
    const int64_t above = flat / (out_stride * m);
    const double* base = v + above * (stride * n_mode) + below;
    double acc = 0.0;
    for (int64_t i = 0; i < n_mode; ++i) acc += a[k + i * m] * base[i * stride];
    out[flat] = acc;
  }
}

void product_frame(const std::vector<int>& shape, const std::vector<SubsetFactor>& factors,
                   double* k) {
  const int64_t rows = product(shape);
  int64_t cols = 1;
  for (const SubsetFactor& f : factors) cols *= f.cols;
  for (int64_t r = 0; r < rows; ++r) {
    int digits[64];
    decompose(r, shape, digits);
    for (int64_t c = 0; c < cols; ++c) {
      int64_t rem = c;
      double p = 1.0;
      for (int f = static_cast<int>(factors.size()) - 1; f >= 0; --f) {
        const SubsetFactor& fac = factors[static_cast<std::size_t>(f)];
        const int64_t i = rem % fac.cols;
        rem /= fac.cols;
        p *= fac.data[factor_sub_index(fac, digits) + i * fac.rows];
      }
      k[r + c * rows] = p;
    }
  }
}

void axpby(int64_t n, double a, const double* x, double b, const double* y, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void scale(int64_t n, double c, const double* x, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = c * x[i];
}

double dot(int64_t n, const double* x, const double* y) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double sum_squares(int64_t n, const double* x) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace serial

}  // namespace treeten::kernels
