#include "treeten/ttn.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "random_util.hpp"
#include "treeten/kernels.hpp"

namespace treeten {

namespace {

std::int64_t product(const std::vector<int>& dims) {
  std::int64_t n = 1;
  for (int d : dims) n *= d;
  return n;
}

}  // namespace

CoreArray::CoreArray(std::vector<int> dims_, std::vector<double> values_)
    : dims(std::move(dims_)), values(std::move(values_)) {
  for (int d : dims)
    require(d >= 0, errc::shape_mismatch, "core dimensions must be non-negative");
  require(static_cast<std::int64_t>(values.size()) == product(dims), errc::shape_mismatch,
          "core value count does not match its dimensions");
}

CoreArray CoreArray::zeros(std::vector<int> dims) {
  const auto n = static_cast<std::size_t>(product(dims));
  return CoreArray(std::move(dims), std::vector<double>(n, 0.0));
}

Eigen::MatrixXd unfold(const CoreArray& c, int axis) {
  const int nd = static_cast<int>(c.dims.size());
  require(axis >= 0 && axis < nd, errc::index_out_of_range, "unfold axis out of range");
  const std::int64_t rows = c.dims[static_cast<std::size_t>(axis)];
  std::int64_t cols = 1;
  for (int k = 0; k < nd; ++k)
    if (k != axis) cols *= c.dims[static_cast<std::size_t>(k)];
  Eigen::MatrixXd m(rows, cols);
  std::vector<int> digits(static_cast<std::size_t>(nd), 0);
  for (std::int64_t flat = 0; flat < c.size(); ++flat) {
    std::int64_t col = 0;
    for (int k = 0; k < nd; ++k)
      if (k != axis) col = col * c.dims[static_cast<std::size_t>(k)] + digits[static_cast<std::size_t>(k)];
    m(digits[static_cast<std::size_t>(axis)], col) = c.values[static_cast<std::size_t>(flat)];
    for (int k = nd - 1; k >= 0; --k) {
      if (++digits[static_cast<std::size_t>(k)] < c.dims[static_cast<std::size_t>(k)]) break;
      digits[static_cast<std::size_t>(k)] = 0;
    }
  }
  return m;
}

CoreArray fold(const Eigen::MatrixXd& m, int axis, const std::vector<int>& dims) {
  const int nd = static_cast<int>(dims.size());
  require(axis >= 0 && axis < nd, errc::index_out_of_range, "fold axis out of range");
  std::int64_t cols = 1;
  for (int k = 0; k < nd; ++k)
    if (k != axis) cols *= dims[static_cast<std::size_t>(k)];
  require(m.rows() == dims[static_cast<std::size_t>(axis)] && m.cols() == cols,
          errc::shape_mismatch, "matrix size inconsistent with fold dimensions");
  CoreArray c = CoreArray::zeros(dims);
  std::vector<int> digits(static_cast<std::size_t>(nd), 0);
  for (std::int64_t flat = 0; flat < c.size(); ++flat) {
    std::int64_t col = 0;
    for (int k = 0; k < nd; ++k)
      if (k != axis) col = col * dims[static_cast<std::size_t>(k)] + digits[static_cast<std::size_t>(k)];
    c.values[static_cast<std::size_t>(flat)] = m(digits[static_cast<std::size_t>(axis)], col);
    for (int k = nd - 1; k >= 0; --k) {
      if (++digits[static_cast<std::size_t>(k)] < dims[static_cast<std::size_t>(k)]) break;
      digits[static_cast<std::size_t>(k)] = 0;
    }
  }
  return c;
}

CoreArray contract_axis(const CoreArray& c, int axis, const Eigen::MatrixXd& r) {
  require(r.cols() == c.dims[static_cast<std::size_t>(axis)], errc::shape_mismatch,
          "contraction matrix does not match the axis length");
  const Eigen::MatrixXd a = r * unfold(c, axis);
  std::vector<int> dims = c.dims;
  dims[static_cast<std::size_t>(axis)] = static_cast<int>(r.rows());
  return fold(a, axis, dims);
}

namespace {

std::vector<int> core_dims(const DimensionTree& tree, const RankTuple& ranks, const Vertex& v) {
  std::vector<int> dims;
  if (!(v == tree.root())) dims.push_back(ranks.at(v));
  for (const Vertex& b : tree.sons(v)) dims.push_back(ranks.at(b));
  return dims;
}

bool is_zero_tensor(const TreeTensor& t) { return t.ranks.at(t.tree.root()) == 0; }

}  // namespace

void validate(const TreeTensor& t) {
  const int d = t.tree.mode_count();
  require(static_cast<int>(t.shape.size()) == d, errc::shape_mismatch,
          "shape length does not match the tree");
  for (int n : t.shape) require(n >= 1, errc::shape_mismatch, "mode sizes must be positive");
  require(t.ranks.tree == t.tree, errc::invalid_rank_tuple,
          "rank tuple belongs to a different tree");

  const int root_rank = t.ranks.at(t.tree.root());
  for (const Vertex& v : t.tree.vertices()) {
    if (root_rank == 0)
      require(t.ranks.at(v) == 0, errc::invalid_rank_tuple,
              "zero tensor must have rank 0 at every vertex");
    if (t.tree.is_leaf(v)) {
      auto it = t.leaf_bases.find(v);
      require(it != t.leaf_bases.end(), errc::shape_mismatch,
              "missing leaf basis for {" + v.key() + "}");
      const int n = t.shape[static_cast<std::size_t>(v.indices().front() - 1)];
      require(it->second.rows() == n && it->second.cols() == t.ranks.at(v),
              errc::shape_mismatch, "leaf basis for {" + v.key() + "} has wrong size");
    } else if (!(v == t.tree.root())) {
      auto it = t.transfer_cores.find(v);
      require(it != t.transfer_cores.end(), errc::shape_mismatch,
              "missing transfer core for {" + v.key() + "}");
      require(it->second.dims == core_dims(t.tree, t.ranks, v), errc::shape_mismatch,
              "transfer core for {" + v.key() + "} has wrong dimensions");
    }
  }
  require(t.leaf_bases.size() == static_cast<std::size_t>(d), errc::shape_mismatch,
          "unexpected extra leaf bases");
  require(t.transfer_cores.size() ==
              t.tree.vertices().size() - static_cast<std::size_t>(d) - 1,
          errc::shape_mismatch, "unexpected extra transfer cores");
  require(t.root_core.dims == core_dims(t.tree, t.ranks, t.tree.root()), errc::shape_mismatch,
          "root core has wrong dimensions");
}

int core_axis(const DimensionTree& tree, const Vertex& parent, const Vertex& son) {
  const auto& sons = tree.sons(parent);
  for (std::size_t i = 0; i < sons.size(); ++i)
    if (sons[i] == son)
      return (parent == tree.root()) ? static_cast<int>(i) : static_cast<int>(i) + 1;
  fail(errc::invalid_argument, "{" + son.key() + "} is not a son of {" + parent.key() + "}");
}

std::map<Vertex, Eigen::MatrixXd> materialize_bases(const TreeTensor& t) {
  std::map<Vertex, Eigen::MatrixXd> mat;
  for (const Vertex& v : t.tree.traversal(TraversalOrder::leaves_to_root)) {
    if (v == t.tree.root()) continue;
    if (t.tree.is_leaf(v)) {
      mat[v] = t.leaf_bases.at(v);
    } else {
      std::vector<const Eigen::MatrixXd*> bases;
      for (const Vertex& b : t.tree.sons(v)) bases.push_back(&mat.at(b));
      const Eigen::MatrixXd frame = product_frame(t.shape, t.tree.sons(v), bases);
      mat[v] = frame * unfold(t.transfer_cores.at(v), 0).transpose();
    }
  }
  return mat;
}

DenseTensor evaluate(const TreeTensor& t) {
  validate(t);
  const auto mat = materialize_bases(t);
  std::vector<const Eigen::MatrixXd*> bases;
  for (const Vertex& b : t.tree.sons(t.tree.root())) bases.push_back(&mat.at(b));
  const Eigen::MatrixXd frame = product_frame(t.shape, t.tree.sons(t.tree.root()), bases);
  const Eigen::Map<const Eigen::VectorXd> coeff(t.root_core.values.data(),
                                                static_cast<Eigen::Index>(t.root_core.size()));
  const Eigen::VectorXd flat = frame * coeff;
  DenseTensor out = DenseTensor::zeros(t.shape);
  std::copy(flat.data(), flat.data() + flat.size(), out.values.begin());
  return out;
}

namespace {

TreeTensor zero_tree_tensor(const DimensionTree& tree, const std::vector<int>& shape) {
  TreeTensor t{tree, shape, RankTuple::constant(tree, 0, 0), {}, {}, CoreArray{}, true, true, true};
  for (const Vertex& v : tree.vertices()) {
    if (tree.is_leaf(v)) {
      t.leaf_bases[v] =
          Eigen::MatrixXd(shape[static_cast<std::size_t>(v.indices().front() - 1)], 0);
    } else if (!(v == tree.root())) {
      t.transfer_cores[v] = CoreArray::zeros(core_dims(tree, t.ranks, v));
    }
  }
  t.root_core = CoreArray::zeros(core_dims(tree, t.ranks, tree.root()));
  return t;
}

constexpr double kOrthoCheckTol = 1e-13;

bool rows_orthonormal(const Eigen::MatrixXd& g) {
  if (g.rows() == 0) return true;
  const Eigen::MatrixXd gram = g * g.transpose();
  return (gram - Eigen::MatrixXd::Identity(g.rows(), g.rows())).cwiseAbs().maxCoeff() <=
         kOrthoCheckTol;
}

bool cols_orthonormal(const Eigen::MatrixXd& a) { return rows_orthonormal(a.transpose()); }

}  // namespace

TreeTensor hsvd(const DenseTensor& v, const DimensionTree& tree, const HsvdControl& control,
                HsvdInfo* info) {
  require(v.order() == tree.mode_count(), errc::shape_mismatch,
          "tensor order does not match the tree");
  require(control.tol >= 0.0, errc::invalid_argument, "tolerance must be non-negative");
  if (control.caps) {
    require(control.caps->tree == tree, errc::invalid_rank_tuple,
            "rank caps belong to a different tree");
    const std::string violation = rank_tuple_violation(tree, v.shape, *control.caps);
    require(violation.empty(), errc::invalid_rank_tuple, violation);
  }
  if (info) *info = HsvdInfo{};

  const bool zero =
      std::none_of(v.values.begin(), v.values.end(), [](double x) { return x != 0.0; });
  if (zero) return zero_tree_tensor(tree, v.shape);

  RankTol node_tol = control.rank_tol;
  node_tol.rel = std::max(node_tol.rel, control.tol);

  std::map<Vertex, Eigen::MatrixXd> basis;
  std::map<Vertex, int> ranks;
  ranks[tree.root()] = 1;
  for (const Vertex& a : tree.traversal(TraversalOrder::leaves_to_root)) {
    if (a == tree.root()) continue;
    const auto svd = thin_svd(matricize(v, a).entries);
    int r = numerical_rank(svd.sigma, node_tol);
    if (control.caps) r = std::min(r, control.caps->at(a));
    if (info) {
      auto& spectrum = (*info).discarded[a];
      spectrum.assign(svd.sigma.data() + r, svd.sigma.data() + svd.sigma.size());
      if (r > 0 && r < svd.sigma.size() &&
          svd.sigma(r - 1) - svd.sigma(r) <= 1e-12 * svd.sigma(0))
        info->boundary_ties.push_back(a);
    }
    Eigen::MatrixXd u = svd.u.leftCols(r);
    fix_column_signs(u);
    basis[a] = std::move(u);
    ranks[a] = r;
  }

  TreeTensor t;
  t.tree = tree;
  t.shape = v.shape;
  t.ranks = RankTuple(tree, ranks);
  for (const Vertex& a : tree.vertices()) {
    if (tree.is_leaf(a)) {
      t.leaf_bases[a] = basis.at(a);
    } else {
      std::vector<const Eigen::MatrixXd*> son_bases;
      for (const Vertex& b : tree.sons(a)) son_bases.push_back(&basis.at(b));
      const Eigen::MatrixXd frame = product_frame(v.shape, tree.sons(a), son_bases);
      if (a == tree.root()) {
        const Eigen::Map<const Eigen::VectorXd> flat(
            v.values.data(), static_cast<Eigen::Index>(v.size()));
        const Eigen::VectorXd coeff = frame.transpose() * flat;
        t.root_core = CoreArray(core_dims(tree, t.ranks, a),
                                std::vector<double>(coeff.data(), coeff.data() + coeff.size()));
      } else {
        const Eigen::MatrixXd g = basis.at(a).transpose() * frame;
        t.transfer_cores[a] = fold(g, 0, core_dims(tree, t.ranks, a));
      }
    }
  }
  t.orthonormal_leaves = true;
  t.orthonormal_cores = true;
  t.minimal = !control.caps && control.tol <= control.rank_tol.rel;

  // Truncation can leave the axis-0 matricizations slightly non-orthonormal;
  // re-orthogonalize in that case so the flags stay honest.
  const bool needs_reortho =
      std::any_of(t.transfer_cores.begin(), t.transfer_cores.end(),
                  [](const auto& entry) { return !rows_orthonormal(unfold(entry.second, 0)); });
  if (needs_reortho) {
    const bool minimal = t.minimal;
    t = orthogonalize(t);
    t.minimal = minimal;
  }
  validate(t);
  return t;
}

TreeTensor orthogonalize(const TreeTensor& t) {
  validate(t);
  TreeTensor s = t;
  if (is_zero_tensor(s)) {
    s.orthonormal_leaves = s.orthonormal_cores = true;
    return s;
  }

  auto parent_core_axis = [&](const Vertex& v) -> std::pair<CoreArray*, int> {
    const Vertex* p = s.tree.parent(v);
    CoreArray* core = (*p == s.tree.root()) ? &s.root_core : &s.transfer_cores.at(*p);
    return {core, core_axis(s.tree, *p, v)};
  };

  for (const Vertex& v : s.tree.traversal(TraversalOrder::leaves_to_root)) {
    if (v == s.tree.root()) continue;
    if (s.tree.is_leaf(v)) {
      const Eigen::MatrixXd& l = s.leaf_bases.at(v);
      if (cols_orthonormal(l)) continue;
      require(l.cols() <= l.rows(), errc::invalid_rank_tuple,
              "leaf basis for {" + v.key() + "} has more columns than rows");
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(l);
      const Eigen::MatrixXd q =
          qr.householderQ() * Eigen::MatrixXd::Identity(l.rows(), l.cols());
      const Eigen::MatrixXd r = q.transpose() * l;
      s.leaf_bases[v] = q;
      auto [core, axis] = parent_core_axis(v);
      *core = contract_axis(*core, axis, r);
    } else {
      const Eigen::MatrixXd g = unfold(s.transfer_cores.at(v), 0);
      if (rows_orthonormal(g)) continue;
      require(g.rows() <= g.cols(), errc::invalid_rank_tuple,
              "transfer core for {" + v.key() + "} has rank larger than its span");
      // g^T = q r, so the old coefficient columns are q times r's columns.
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g.transpose());
      const Eigen::MatrixXd q =
          qr.householderQ() * Eigen::MatrixXd::Identity(g.cols(), g.rows());
      const Eigen::MatrixXd r = q.transpose() * g.transpose();
      s.transfer_cores[v] =
          fold(q.transpose(), 0, s.transfer_cores.at(v).dims);
      auto [core, axis] = parent_core_axis(v);
      *core = contract_axis(*core, axis, r);
    }
  }
  s.orthonormal_leaves = s.orthonormal_cores = true;
  s.minimal = t.minimal;
  return s;
}

RankTuple core_ranks(const TreeTensor& t, RankTol tol) {
  const TreeTensor s =
      (t.orthonormal_leaves && t.orthonormal_cores) ? t : orthogonalize(t);
  std::map<Vertex, int> ranks;
  for (const Vertex& v : s.tree.vertices()) {
    if (v == s.tree.root()) {
      const bool nonzero = std::any_of(s.root_core.values.begin(), s.root_core.values.end(),
                                       [](double x) { return x != 0.0; });
      ranks[v] = nonzero ? 1 : 0;
      continue;
    }
    const Vertex* p = s.tree.parent(v);
    const CoreArray& parent_core =
        (*p == s.tree.root()) ? s.root_core : s.transfer_cores.at(*p);
    const int axis = core_axis(s.tree, *p, v);
    if (s.tree.is_leaf(v)) {
      ranks[v] = matrix_rank(s.leaf_bases.at(v) * unfold(parent_core, axis), tol);
    } else {
      int r = matrix_rank(unfold(s.transfer_cores.at(v), 0), tol);
      if (*p == s.tree.root()) r = std::min(r, matrix_rank(unfold(parent_core, axis), tol));
      ranks[v] = r;
    }
  }
  return RankTuple(s.tree, std::move(ranks));
}

TreeTensor random_tree_tensor(const DimensionTree& tree, const std::vector<int>& shape,
                              const RankTuple& r, std::uint64_t seed) {
  require(static_cast<int>(shape.size()) == tree.mode_count(), errc::shape_mismatch,
          "shape length does not match the tree");
  require(r.tree == tree, errc::invalid_rank_tuple, "rank tuple belongs to a different tree");
  const std::string violation = rank_tuple_violation(tree, shape, r);
  require(violation.empty(), errc::invalid_rank_tuple, violation);

  std::mt19937_64 rng(seed);
  TreeTensor t;
  t.tree = tree;
  t.shape = shape;
  t.ranks = r;
  for (const Vertex& v : tree.vertices()) {
    if (tree.is_leaf(v)) {
      const int n = shape[static_cast<std::size_t>(v.indices().front() - 1)];
      Eigen::MatrixXd basis =
          orthonormal_columns(detail::gaussian_matrix(rng, n, r.at(v)));
      fix_column_signs(basis);
      t.leaf_bases[v] = std::move(basis);
    } else {
      const auto dims = core_dims(tree, r, v);
      const auto n = static_cast<std::size_t>(product(dims));
      CoreArray core(dims, detail::gaussian_vector(rng, n));
      if (v == tree.root())
        t.root_core = std::move(core);
      else
        t.transfer_cores[v] = std::move(core);
    }
  }
  t.orthonormal_leaves = true;
  validate(t);
  return t;
}

StorageReport storage_report(const TreeTensor& t) {
  StorageReport out;
  for (const auto& [v, basis] : t.leaf_bases) {
    (void)v;
    out.parameter_count += basis.size();
  }
  for (const auto& [v, core] : t.transfer_cores) {
    (void)v;
    out.parameter_count += core.size();
  }
  out.parameter_count += t.root_core.size();
  out.dense_count = kernels::element_count(t.shape);
  out.compression_ratio =
      static_cast<double>(out.parameter_count) / static_cast<double>(out.dense_count);
  return out;
}

AdmissibilityResult is_admissible(const DimensionTree& tree, const std::vector<int>& shape,
                                  const RankTuple& r, int trials, std::uint64_t seed,
                                  RankTol tol) {
  require(trials >= 1, errc::invalid_argument, "need at least one trial");
  require(static_cast<int>(shape.size()) == tree.mode_count(), errc::shape_mismatch,
          "shape length does not match the tree");
  AdmissibilityResult out;
  const std::string violation = rank_tuple_violation(tree, shape, r);
  if (!violation.empty()) {
    out.verdict = Admissibility::necessarily_inadmissible;
    out.violated_constraint = violation;
    return out;
  }
  for (int trial = 0; trial < trials; ++trial) {
    TreeTensor candidate = random_tree_tensor(tree, shape, r, seed + static_cast<std::uint64_t>(trial));
    const RankTuple achieved = tree_rank(evaluate(candidate), tree, tol);
    out.trials_used = trial + 1;
    if (achieved.ranks == r.ranks) {
      out.verdict = Admissibility::admissible;
      out.witness = std::move(candidate);
      return out;
    }
  }
  out.verdict = Admissibility::undetermined;
  return out;
}

}  // namespace treeten
