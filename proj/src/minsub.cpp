#include "treeten/minsub.hpp"

#include <algorithm>
#include <cmath>

#include "random_util.hpp"

namespace treeten {

bool Report::pass() const {
  return std::all_of(records.begin(), records.end(),
                     [](const ReportRecord& r) { return r.pass; });
}

int Report::violations() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(),
                                        [](const ReportRecord& r) { return !r.pass; }));
}

RankTuple::RankTuple(DimensionTree tree_, std::map<Vertex, int> ranks_)
    : tree(std::move(tree_)), ranks(std::move(ranks_)) {
  for (const Vertex& v : tree.vertices()) {
    auto it = ranks.find(v);
    require(it != ranks.end(), errc::invalid_rank_tuple,
            "rank tuple is missing vertex {" + v.key() + "}");
    require(it->second >= 0, errc::invalid_rank_tuple,
            "rank at {" + v.key() + "} must be non-negative");
  }
  require(ranks.size() == tree.vertices().size(), errc::invalid_rank_tuple,
          "rank tuple lists vertices outside the tree");
  require(at(tree.root()) <= 1, errc::invalid_rank_tuple, "root rank must be 0 or 1");
}

RankTuple RankTuple::constant(const DimensionTree& tree, int r, int root_rank) {
  std::map<Vertex, int> ranks;
  for (const Vertex& v : tree.vertices()) ranks[v] = r;
  ranks[tree.root()] = root_rank;
  return RankTuple(tree, std::move(ranks));
}

int RankTuple::at(const Vertex& v) const {
  auto it = ranks.find(v);
  require(it != ranks.end(), errc::invalid_rank_tuple,
          "rank tuple has no entry for {" + v.key() + "}");
  return it->second;
}

bool RankTuple::all_leq(const RankTuple& other) const {
  for (const auto& [v, r] : ranks)
    if (r > other.at(v)) return false;
  return true;
}

SubspaceBasis minimal_subspace(const DenseTensor& v, const Vertex& alpha, RankTol tol) {
  const auto svd = thin_svd(matricize(v, alpha).entries);
  const int r = numerical_rank(svd.sigma, tol);
  SubspaceBasis out;
  out.vertex = alpha;
  out.basis = svd.u.leftCols(r);
  fix_column_signs(out.basis);
  out.singular_values.assign(svd.sigma.data(), svd.sigma.data() + r);
  return out;
}

RankTuple tree_rank(const DenseTensor& v, const DimensionTree& tree, RankTol tol) {
  require(v.order() == tree.mode_count(), errc::shape_mismatch,
          "tensor order does not match the tree");
  const bool nonzero =
      std::any_of(v.values.begin(), v.values.end(), [](double x) { return x != 0.0; });
  std::map<Vertex, int> ranks;
  for (const Vertex& a : tree.vertices()) {
    if (a == tree.root()) {
      ranks[a] = nonzero ? 1 : 0;
    } else {
      ranks[a] = matrix_rank(matricize(v, a).entries, tol);
    }
  }
  return RankTuple(tree, std::move(ranks));
}

namespace {

// A singular value close to the retention cutoff makes the computed rank
// tolerance-sensitive.
bool near_cutoff(const Eigen::VectorXd& sigma, RankTol tol) {
  if (sigma.size() == 0) return false;
  const double cut = tol.threshold(sigma(0));
  if (cut <= 0.0) return false;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (std::abs(sigma(i) - cut) <= 1e-3 * cut) return true;
  return false;
}

std::vector<Vertex> all_proper_subsets(int d) {
  std::vector<Vertex> out;
  for (unsigned mask = 1; mask + 1 < (1u << d); ++mask) {
    std::vector<int> idx;
    for (int j = 0; j < d; ++j)
      if (mask & (1u << j)) idx.push_back(j + 1);
    out.emplace_back(std::move(idx));
  }
  return out;
}

}  // namespace

Report verify_rank_duality(const DenseTensor& v, const DimensionTree& tree, RankTol tol,
                           bool all_subsets) {
  require(v.order() == tree.mode_count(), errc::shape_mismatch,
          "tensor order does not match the tree");
  const int d = v.order();
  require(!all_subsets || d <= 5, errc::invalid_argument,
          "all-subsets duality check is limited to d <= 5");

  std::vector<Vertex> subjects;
  if (all_subsets) {
    subjects = all_proper_subsets(d);
  } else {
    for (const Vertex& a : tree.traversal(TraversalOrder::root_to_leaves))
      if (a != tree.root()) subjects.push_back(a);
  }

  Report report{"rank_duality", {}};
  for (const Vertex& a : subjects) {
    const auto sa = thin_svd(matricize(v, a).entries);
    const auto sc = thin_svd(matricize(v, a.complement(d)).entries);
    const int ra = numerical_rank(sa.sigma, tol);
    const int rc = numerical_rank(sc.sigma, tol);
    ReportRecord rec;
    rec.vertex = a.key();
    rec.value = ra;
    rec.threshold = 0.0;
    rec.pass = (ra == rc);
    rec.extra["rank"] = ra;
    rec.extra["rank_complement"] = rc;
    // Gap between the last retained and first discarded singular value.
    if (ra > 0 && ra < sa.sigma.size()) rec.extra["sigma_gap"] = sa.sigma(ra - 1) - sa.sigma(ra);
    if (near_cutoff(sa.sigma, tol) || near_cutoff(sc.sigma, tol)) rec.note = "tolerance_sensitive";
    report.records.push_back(std::move(rec));
  }
  return report;
}

Report verify_nestedness(const DenseTensor& v, const DimensionTree& tree, double tol,
                         RankTol rank_tol) {
  require(v.order() == tree.mode_count(), errc::shape_mismatch,
          "tensor order does not match the tree");
  Report report{"nestedness", {}};
  for (const Vertex& a : tree.traversal(TraversalOrder::root_to_leaves)) {
    if (tree.is_leaf(a) || a == tree.root()) continue;
    const SubspaceBasis ba = minimal_subspace(v, a, rank_tol);
    ReportRecord rec;
    rec.vertex = a.key();
    rec.threshold = tol;
    if (ba.rank() == 0) {
      rec.value = 0.0;
      rec.pass = true;
      report.records.push_back(std::move(rec));
      continue;
    }
    std::vector<Vertex> parts;
    std::vector<SubspaceBasis> son_bases;
    for (const Vertex& b : tree.sons(a)) {
      parts.push_back(b);
      son_bases.push_back(minimal_subspace(v, b, rank_tol));
    }
    std::vector<const Eigen::MatrixXd*> mats;
    for (const auto& sb : son_bases) mats.push_back(&sb.basis);
    const Eigen::MatrixXd frame = product_frame(v.shape, parts, mats);
    const Eigen::MatrixXd resid = ba.basis - frame * (frame.transpose() * ba.basis);
    rec.value = resid.norm() / ba.basis.norm();
    rec.pass = rec.value <= tol;
    rec.extra["rank"] = ba.rank();
    report.records.push_back(std::move(rec));
  }
  return report;
}

namespace {

// Positions (1-based) of `sub`'s modes inside `super`'s sorted index list.
Vertex local_modes(const Vertex& sub, const Vertex& super) {
  std::vector<int> local;
  const auto& si = super.indices();
  for (int j : sub.indices()) {
    const auto it = std::find(si.begin(), si.end(), j);
    local.push_back(static_cast<int>(it - si.begin()) + 1);
  }
  return Vertex(std::move(local));
}

}  // namespace

Report span_from_contractions(const DenseTensor& v, const Vertex& beta, const Vertex& alpha,
                              int samples, std::uint64_t seed, double tol, bool reuse_functional,
                              RankTol rank_tol) {
  const int d = v.order();
  require(samples >= 1, errc::invalid_argument, "need at least one sample");
  require(alpha.contains_all(beta) && beta != alpha, errc::invalid_argument,
          "beta must be a proper subset of alpha");
  require(alpha.indices().back() <= d, errc::index_out_of_range, "alpha out of range");

  const SubspaceBasis target = minimal_subspace(v, beta, rank_tol);

  std::mt19937_64 rng(seed);
  const Vertex alpha_c = (alpha.size() == d) ? Vertex() : alpha.complement(d);

  std::int64_t len_outer = 1;
  if (!alpha_c.empty())
    for (int j : alpha_c.indices()) len_outer *= v.shape[static_cast<std::size_t>(j - 1)];
  std::int64_t len_inner = 1;
  std::vector<int> diff;  // alpha \ beta
  for (int j : alpha.indices())
    if (!beta.contains(j)) diff.push_back(j);
  for (int j : diff) len_inner *= v.shape[static_cast<std::size_t>(j - 1)];
  const Vertex alpha_minus_beta{diff};

  std::vector<double> outer_coeffs, inner_coeffs;
  Eigen::MatrixXd w(target.basis.rows(), samples);
  for (int s = 0; s < samples; ++s) {
    if (s == 0 || !reuse_functional) {
      if (!alpha_c.empty())
        outer_coeffs = detail::gaussian_vector(rng, static_cast<std::size_t>(len_outer));
      inner_coeffs = detail::gaussian_vector(rng, static_cast<std::size_t>(len_inner));
    }
    // Element of the alpha minimal subspace, then a contraction down to beta.
    DenseTensor v_alpha = alpha_c.empty()
                              ? v
                              : contract(v, alpha, {Functional{alpha_c, outer_coeffs}});
    DenseTensor w_s = contract(v_alpha, local_modes(beta, alpha),
                               {Functional{local_modes(alpha_minus_beta, alpha), inner_coeffs}});
    for (std::int64_t i = 0; i < w_s.size(); ++i) w(i, s) = w_s.values[static_cast<std::size_t>(i)];
  }

  const auto svd = thin_svd(w);
  const int span_dim = numerical_rank(svd.sigma, rank_tol);
  const Eigen::MatrixXd q = svd.u.leftCols(span_dim);
  const double dist = projector_distance(q, target.basis);

  Report report{"span_from_contractions", {}};
  ReportRecord rec;
  rec.vertex = beta.key();
  rec.value = dist;
  rec.threshold = tol;
  rec.extra["span_dim"] = span_dim;
  rec.extra["expected_rank"] = target.rank();
  rec.extra["samples"] = samples;
  rec.pass = (span_dim == target.rank()) && dist <= tol;
  if (span_dim < target.rank()) rec.note = "span_deficient";
  report.records.push_back(std::move(rec));
  return report;
}

bool in_ft(const DenseTensor& v, const DimensionTree& tree, const RankTuple& r,
           MembershipMode mode, RankTol tol) {
  const RankTuple actual = tree_rank(v, tree, tol);
  if (mode == MembershipMode::exact) return actual.ranks == r.ranks;
  return actual.all_leq(r);
}

std::string rank_tuple_violation(const DimensionTree& tree, const std::vector<int>& shape,
                                 const RankTuple& r) {
  require(static_cast<int>(shape.size()) == tree.mode_count(), errc::shape_mismatch,
          "shape length does not match the tree");
  for (const Vertex& a : tree.vertices())
    if (r.at(a) < 1) return "rank at {" + a.key() + "} must be positive";
  if (r.at(tree.root()) != 1) return "root rank must be 1";

  for (const Vertex& a : tree.vertices()) {
    const std::int64_t ra = r.at(a);
    if (tree.is_leaf(a)) {
      const int n = shape[static_cast<std::size_t>(a.indices().front() - 1)];
      if (ra > n)
        return "rank " + std::to_string(ra) + " at leaf {" + a.key() + "} exceeds mode size " +
               std::to_string(n);
    } else {
      std::int64_t prod_sons = 1;
      for (const Vertex& b : tree.sons(a)) prod_sons *= r.at(b);
      if (ra > prod_sons)
        return "rank at {" + a.key() + "} exceeds the product of its son ranks";
      for (const Vertex& b : tree.sons(a)) {
        std::int64_t env = ra;
        for (const Vertex& g : tree.sons(a))
          if (!(g == b)) env *= r.at(g);
        if (r.at(b) > env)
          return "rank at {" + b.key() +
                 "} exceeds the remaining core dimensions of its parent";
      }
    }
    // Duality bounds through the ambient mode sizes.
    std::int64_t inside = 1, outside = 1;
    for (int j = 1; j <= tree.mode_count(); ++j) {
      if (a.contains(j))
        inside *= shape[static_cast<std::size_t>(j - 1)];
      else
        outside *= shape[static_cast<std::size_t>(j - 1)];
    }
    if (ra > inside)
      return "rank at {" + a.key() + "} exceeds the dimension of its mode space";
    if (ra > outside)
      return "rank at {" + a.key() + "} exceeds the dimension of the complementary space";
  }
  return {};
}

}  // namespace treeten
