#include "treeten/dense.hpp"

#include <algorithm>
#include <cmath>

#include "treeten/kernels.hpp"

namespace treeten {

namespace {

void check_shape(const std::vector<int>& shape) {
  require(!shape.empty(), errc::shape_mismatch, "tensor must have at least one mode");
  // The kernels keep per-mode digits in fixed-size scratch arrays.
  require(shape.size() <= 48, errc::shape_mismatch, "tensor order is limited to 48 modes");
  for (int n : shape)
    require(n >= 1, errc::shape_mismatch, "mode sizes must be positive");
}

std::vector<int> subset_shape(const std::vector<int>& shape, const Vertex& v) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(v.size()));
  for (int j : v.indices()) out.push_back(shape[static_cast<std::size_t>(j - 1)]);
  return out;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
  check_shape(shape);
  require(size() == kernels::element_count(shape), errc::shape_mismatch,
          "value count does not match the shape product");
  for (double x : values)
    require(std::isfinite(x), errc::invalid_argument, "tensor values must be finite");
}

DenseTensor DenseTensor::zeros(std::vector<int> shape) {
  check_shape(shape);
  const auto n = static_cast<std::size_t>(kernels::element_count(shape));
  return DenseTensor(std::move(shape), std::vector<double>(n, 0.0));
}

double DenseTensor::at(const std::vector<int>& index) const {
  return const_cast<DenseTensor*>(this)->at(index);
}

double& DenseTensor::at(const std::vector<int>& index) {
  require(index.size() == shape.size(), errc::shape_mismatch, "multi-index order mismatch");
  std::int64_t flat = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    require(index[k] >= 0 && index[k] < shape[k], errc::index_out_of_range,
            "multi-index out of range");
    flat = flat * shape[k] + index[k];
  }
  return values[static_cast<std::size_t>(flat)];
}

DenseTensor elementary(const std::vector<std::vector<double>>& factors) {
  require(!factors.empty(), errc::invalid_argument, "need at least one factor");
  std::vector<int> shape;
  std::vector<const double*> ptrs;
  for (const auto& f : factors) {
    require(!f.empty(), errc::shape_mismatch, "factor vectors must be non-empty");
    shape.push_back(static_cast<int>(f.size()));
    ptrs.push_back(f.data());
  }
  DenseTensor out = DenseTensor::zeros(shape);
  kernels::elementary_fill(shape, ptrs, out.values.data());
  return out;
}

DenseTensor apply_elementary_operator(const DenseTensor& v,
                                      const std::map<int, Eigen::MatrixXd>& ops) {
  DenseTensor cur = v;
  for (const auto& [mode, a] : ops) {
    require(mode >= 1 && mode <= cur.order(), errc::index_out_of_range,
            "operator mode " + std::to_string(mode) + " out of range");
    const int pos = mode - 1;
    require(a.cols() == cur.shape[static_cast<std::size_t>(pos)], errc::shape_mismatch,
            "operator for mode " + std::to_string(mode) + " has wrong column count");
    std::vector<int> out_shape = cur.shape;
    out_shape[static_cast<std::size_t>(pos)] = static_cast<int>(a.rows());
    DenseTensor next = DenseTensor::zeros(out_shape);
    kernels::mode_product(cur.values.data(), cur.shape, pos, a.data(),
                          static_cast<int>(a.rows()), next.values.data());
    cur = std::move(next);
  }
  return cur;
}

Matricized matricize(const DenseTensor& v, const Vertex& beta) {
  const int d = v.order();
  require(beta.size() >= 1 && beta.size() < d, errc::invalid_argument,
          "matricization needs a non-empty proper mode subset");
  require(beta.indices().back() <= d, errc::index_out_of_range,
          "matricization modes out of range");
  const auto plan = kernels::make_unfold_plan(v.shape, beta.indices());
  Matricized m;
  m.row_modes = beta;
  m.col_modes = beta.complement(d);
  m.entries.resize(plan.rows, plan.cols);
  kernels::matricize(v.values.data(), plan, m.entries.data());
  return m;
}

DenseTensor dematricize(const Matricized& m, const std::vector<int>& shape) {
  check_shape(shape);
  const int d = static_cast<int>(shape.size());
  require(m.row_modes.size() + m.col_modes.size() == d, errc::shape_mismatch,
          "row and column modes do not cover the shape");
  Vertex all = Vertex::full(d);
  for (int j : all.indices())
    require(m.row_modes.contains(j) != m.col_modes.contains(j), errc::shape_mismatch,
            "row and column modes must partition the modes");
  const auto plan = kernels::make_unfold_plan(shape, m.row_modes.indices());
  require(plan.rows == m.entries.rows() && plan.cols == m.entries.cols(), errc::shape_mismatch,
          "matrix size inconsistent with the requested shape");
  DenseTensor out = DenseTensor::zeros(shape);
  kernels::dematricize(m.entries.data(), plan, out.values.data());
  return out;
}

DenseTensor contract(const DenseTensor& v, const Vertex& keep,
                     const std::vector<Functional>& functionals) {
  const int d = v.order();
  require(keep.indices().back() <= d, errc::index_out_of_range, "kept modes out of range");

  // The functionals' mode sets must partition the complement of `keep`.
  std::vector<bool> covered(static_cast<std::size_t>(d), false);
  for (int j : keep.indices()) covered[static_cast<std::size_t>(j - 1)] = true;
  for (const auto& f : functionals) {
    std::int64_t len = 1;
    for (int j : f.modes.indices()) {
      require(j >= 1 && j <= d, errc::index_out_of_range, "functional mode out of range");
      require(!covered[static_cast<std::size_t>(j - 1)], errc::invalid_argument,
              "functional modes overlap at index " + std::to_string(j));
      covered[static_cast<std::size_t>(j - 1)] = true;
      len *= v.shape[static_cast<std::size_t>(j - 1)];
    }
    require(static_cast<std::int64_t>(f.coefficients.size()) == len, errc::shape_mismatch,
            "functional on {" + f.modes.key() + "} has wrong coefficient count");
  }
  for (int j = 1; j <= d; ++j)
    require(covered[static_cast<std::size_t>(j - 1)], errc::invalid_argument,
            "mode " + std::to_string(j) + " neither kept nor contracted");

  if (functionals.empty()) return v;

  const auto plan = kernels::make_unfold_plan(v.shape, keep.indices());
  const Vertex comp = keep.complement(d);
  const std::vector<int> comp_shape = subset_shape(v.shape, comp);

  // Digit positions of each functional's modes inside the complement list.
  std::vector<kernels::SubsetFactor> factors;
  for (const auto& f : functionals) {
    kernels::SubsetFactor fac;
    for (int j : f.modes.indices()) {
      const auto& ci = comp.indices();
      const auto it = std::find(ci.begin(), ci.end(), j);
      fac.digit_pos.push_back(static_cast<int>(it - ci.begin()));
      fac.digit_radix.push_back(v.shape[static_cast<std::size_t>(j - 1)]);
    }
    fac.data = f.coefficients.data();
    fac.rows = static_cast<std::int64_t>(f.coefficients.size());
    factors.push_back(std::move(fac));
  }

  std::vector<double> w(static_cast<std::size_t>(plan.cols));
  kernels::weight_fill(comp_shape, factors, w.data());

  DenseTensor out = DenseTensor::zeros(subset_shape(v.shape, keep));
  kernels::contract_rows(v.values.data(), plan, w.data(), out.values.data());
  return out;
}

Eigen::MatrixXd product_frame(const std::vector<int>& full_shape, const std::vector<Vertex>& parts,
                              const std::vector<const Eigen::MatrixXd*>& bases) {
  require(parts.size() == bases.size(), errc::invalid_argument,
          "one basis per part is required");
  std::vector<int> merged;
  for (const Vertex& p : parts)
    for (int j : p.indices()) merged.push_back(j);
  Vertex all(merged);  // rejects overlaps
  require(all.indices().back() <= static_cast<int>(full_shape.size()), errc::index_out_of_range,
          "part modes out of range");

  std::vector<int> union_shape = [&] {
    std::vector<int> s;
    for (int j : all.indices()) s.push_back(full_shape[static_cast<std::size_t>(j - 1)]);
    return s;
  }();

  std::vector<kernels::SubsetFactor> factors;
  std::int64_t cols = 1;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    kernels::SubsetFactor fac;
    std::int64_t rows = 1;
    for (int j : parts[p].indices()) {
      const auto& ai = all.indices();
      fac.digit_pos.push_back(
          static_cast<int>(std::find(ai.begin(), ai.end(), j) - ai.begin()));
      fac.digit_radix.push_back(full_shape[static_cast<std::size_t>(j - 1)]);
      rows *= full_shape[static_cast<std::size_t>(j - 1)];
    }
    require(bases[p]->rows() == rows, errc::shape_mismatch,
            "basis for {" + parts[p].key() + "} has wrong row count");
    fac.data = bases[p]->data();
    fac.rows = rows;
    fac.cols = static_cast<int>(bases[p]->cols());
    cols *= fac.cols;
    factors.push_back(std::move(fac));
  }

  Eigen::MatrixXd k(kernels::element_count(union_shape), cols);
  kernels::product_frame(union_shape, factors, k.data());
  return k;
}

namespace {

void check_same_shape(const DenseTensor& a, const DenseTensor& b) {
  require(a.shape == b.shape, errc::shape_mismatch, "tensor shapes differ");
}

}  // namespace

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b);
  DenseTensor out = DenseTensor::zeros(a.shape);
  kernels::axpby(a.size(), 1.0, a.values.data(), 1.0, b.values.data(), out.values.data());
  return out;
}

DenseTensor subtract(const DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b);
  DenseTensor out = DenseTensor::zeros(a.shape);
  kernels::axpby(a.size(), 1.0, a.values.data(), -1.0, b.values.data(), out.values.data());
  return out;
}

DenseTensor scale(const DenseTensor& v, double c) {
  DenseTensor out = DenseTensor::zeros(v.shape);
  kernels::scale(v.size(), c, v.values.data(), out.values.data());
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  check_same_shape(a, b);
  return kernels::dot(a.size(), a.values.data(), b.values.data());
}

double frobenius_norm(const DenseTensor& v) {
  return std::sqrt(kernels::sum_squares(v.size(), v.values.data()));
}

double relative_error(const DenseTensor& a, const DenseTensor& b) {
  const double nb = frobenius_norm(b);
  const double diff = frobenius_norm(subtract(a, b));
  return nb > 0.0 ? diff / nb : diff;
}

}  // namespace treeten
