#include "treeten/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "random_util.hpp"

namespace treeten {

ApproxResult truncate(const DenseTensor& v, const DimensionTree& tree, const RankTuple& caps) {
  HsvdControl control;
  control.caps = caps;
  HsvdInfo info;
  ApproxResult out;
  out.approximant = hsvd(v, tree, control, &info);
  out.residual = frobenius_norm(subtract(v, evaluate(out.approximant)));
  out.discarded_spectra = std::move(info.discarded);
  return out;
}

namespace {

// Solves gram * x = rhs, adding 1e-12 * I when gram is numerically singular.
Eigen::MatrixXd gram_solve(Eigen::MatrixXd gram, const Eigen::MatrixXd& rhs) {
  if (gram.rows() == 0) return Eigen::MatrixXd(0, rhs.cols());
  if (matrix_rank(gram, RankTol{1e-12, 0.0}) < gram.rows())
    gram += 1e-12 * Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  return gram.ldlt().solve(rhs);
}

// Environment of `target_vertex`: rows over its complement's sorted modes,
// one column per rank index, so that the tensor is (materialized basis of the
// vertex) times environment^T, matricized at the vertex.
Eigen::MatrixXd environment(const TreeTensor& t, const std::map<Vertex, Eigen::MatrixXd>& mats,
                            const Vertex& target_vertex) {
  const DimensionTree& tree = t.tree;
  // Path from the root down to the target vertex.
  std::vector<Vertex> path{target_vertex};
  while (const Vertex* p = tree.parent(path.back())) path.push_back(*p);
  std::reverse(path.begin(), path.end());

  Eigen::MatrixXd up;  // environment of path[step]; empty while at the root
  for (std::size_t step = 0; step + 1 < path.size(); ++step) {
    const Vertex& parent = path[step];
    const Vertex& child = path[step + 1];
    const CoreArray& core =
        (parent == tree.root()) ? t.root_core : t.transfer_cores.at(parent);

    // Parts ordered like the remaining axes of the core unfolding at the
    // child's axis: the parent's own rank axis first, then the other sons.
    std::vector<Vertex> parts;
    std::vector<const Eigen::MatrixXd*> bases;
    if (!(parent == tree.root())) {
      parts.push_back(parent.complement(tree.mode_count()));
      bases.push_back(&up);
    }
    for (const Vertex& b : tree.sons(parent)) {
      if (b == child) continue;
      parts.push_back(b);
      bases.push_back(&mats.at(b));
    }
    const Eigen::MatrixXd frame = product_frame(t.shape, parts, bases);
    up = frame * unfold(core, core_axis(tree, parent, child)).transpose();
  }
  return up;
}

// Exact least squares for one vertex's parameters with the rest fixed.
void solve_vertex(TreeTensor& t, const DenseTensor& target, const Vertex& v) {
  const DimensionTree& tree = t.tree;
  const auto mats = materialize_bases(t);

  if (v == tree.root()) {
    std::vector<const Eigen::MatrixXd*> bases;
    for (const Vertex& b : tree.sons(v)) bases.push_back(&mats.at(b));
    const Eigen::MatrixXd frame = product_frame(t.shape, tree.sons(v), bases);
    const Eigen::Map<const Eigen::VectorXd> flat(target.values.data(),
                                                 static_cast<Eigen::Index>(target.size()));
    const Eigen::VectorXd coeff =
        gram_solve(frame.transpose() * frame, frame.transpose() * flat);
    t.root_core.values.assign(coeff.data(), coeff.data() + coeff.size());
    return;
  }

  const Eigen::MatrixXd up = environment(t, mats, v);
  const Eigen::MatrixXd gram_up = up.transpose() * up;
  const Eigen::MatrixXd m = matricize(target, v).entries;

  if (tree.is_leaf(v)) {
    // min || m - L up^T ||:  L = m up (up^T up)^{-1}
    const Eigen::MatrixXd l = gram_solve(gram_up, up.transpose() * m.transpose()).transpose();
    t.leaf_bases[v] = l;
  } else {
    std::vector<const Eigen::MatrixXd*> son_bases;
    for (const Vertex& b : tree.sons(v)) son_bases.push_back(&mats.at(b));
    const Eigen::MatrixXd frame = product_frame(t.shape, tree.sons(v), son_bases);
    // min || m - frame X up^T || over X, then the core rows are X columns.
    const Eigen::MatrixXd lhs = gram_solve(frame.transpose() * frame, frame.transpose() * m);
    const Eigen::MatrixXd x = gram_solve(gram_up, (lhs * up).transpose()).transpose();
    t.transfer_cores[v] = fold(x.transpose(), 0, t.transfer_cores.at(v).dims);
  }
}

}  // namespace

ApproxResult als_refine(const DenseTensor& target, const TreeTensor& init, int max_iters,
                        double stall_tol) {
  validate(init);
  require(target.shape == init.shape, errc::shape_mismatch,
          "target shape does not match the initializer");
  require(max_iters >= 0, errc::invalid_argument, "max_iters must be non-negative");

  ApproxResult out;
  out.approximant = init;
  const double target_norm = frobenius_norm(target);
  double residual = frobenius_norm(subtract(target, evaluate(out.approximant)));
  out.residual = residual;
  if (residual <= stall_tol * target_norm || init.ranks.at(init.tree.root()) == 0) {
    out.run_histories.push_back(out.sweep_residuals);
    return out;
  }

  const auto order = init.tree.traversal(TraversalOrder::leaves_to_root);
  for (int sweep = 0; sweep < max_iters; ++sweep) {
    out.approximant = orthogonalize(out.approximant);
    for (const Vertex& v : order) {
      TreeTensor trial = out.approximant;
      solve_vertex(trial, target, v);
      const double trial_residual = frobenius_norm(subtract(target, evaluate(trial)));
      // An exact subproblem solve cannot increase the residual; the guard
      // only filters roundoff from a regularized solve.
      if (trial_residual <= residual) {
        out.approximant = std::move(trial);
        residual = trial_residual;
      }
    }
    out.sweep_residuals.push_back(residual);
    ++out.iterations;
    const double improvement = out.residual - residual;
    out.residual = residual;
    if (improvement < stall_tol * target_norm) break;
  }
  out.run_histories.push_back(out.sweep_residuals);
  return out;
}

ApproxResult best_approx(const DenseTensor& target, const DimensionTree& tree,
                         const RankTuple& caps, int restarts, std::uint64_t seed, int max_iters,
                         double stall_tol) {
  require(restarts >= 1, errc::invalid_argument, "need at least one restart");
  ApproxResult base = truncate(target, tree, caps);

  ApproxResult best = als_refine(target, base.approximant, max_iters, stall_tol);
  std::vector<std::vector<double>> histories = best.run_histories;
  for (int k = 1; k < restarts; ++k) {
    const TreeTensor init =
        random_tree_tensor(tree, target.shape, caps, seed + static_cast<std::uint64_t>(k));
    ApproxResult run = als_refine(target, init, max_iters, stall_tol);
    histories.push_back(run.sweep_residuals);
    if (run.residual < best.residual) best = std::move(run);
  }
  best.restarts_used = restarts;
  best.discarded_spectra = std::move(base.discarded_spectra);
  best.run_histories = std::move(histories);
  return best;
}

NormEstimate injective_norm(const DenseTensor& v, int restarts, int iters, std::uint64_t seed) {
  require(restarts >= 1 && iters >= 1, errc::invalid_argument,
          "restarts and iters must be positive");
  const double norm = frobenius_norm(v);
  require(norm > 0.0, errc::invalid_argument, "injective norm of the zero tensor");

  const int d = v.order();
  if (d == 1) {
    NormEstimate out;
    out.estimate = norm;
    std::vector<double> w(v.values);
    for (double& x : w) x /= norm;
    out.witness.push_back(std::move(w));
    return out;
  }

  std::mt19937_64 rng(seed);
  NormEstimate best;
  best.estimate = -1.0;
  for (int restart = 0; restart < restarts; ++restart) {
    std::vector<std::vector<double>> phi(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      auto g = detail::gaussian_vector(rng, static_cast<std::size_t>(v.shape[static_cast<std::size_t>(j)]));
      const double gn = std::sqrt(
          std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
      for (double& x : g) x /= gn;
      phi[static_cast<std::size_t>(j)] = std::move(g);
    }

    double score = 0.0, prev = -1.0;
    for (int it = 0; it < iters; ++it) {
      for (int j = 1; j <= d; ++j) {
        std::vector<Functional> fs;
        for (int k = 1; k <= d; ++k)
          if (k != j) fs.push_back(Functional{Vertex::single(k), phi[static_cast<std::size_t>(k - 1)]});
        DenseTensor w = contract(v, Vertex::single(j), fs);
        const double wn = frobenius_norm(w);
        if (wn == 0.0) {
          auto g = detail::gaussian_vector(rng, w.values.size());
          const double gn = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
          for (double& x : g) x /= gn;
          phi[static_cast<std::size_t>(j - 1)] = std::move(g);
          continue;
        }
        for (double& x : w.values) x /= wn;
        phi[static_cast<std::size_t>(j - 1)] = std::move(w.values);
        score = wn;
      }
      if (std::abs(score - prev) <= 1e-13 * std::max(score, 1e-300)) break;
      prev = score;
    }
    if (score > best.estimate) {
      best.estimate = score;
      best.witness = phi;
    }
  }
  return best;
}

namespace {

// Embeds a tree tensor into a componentwise larger rank tuple by zero padding.
TreeTensor pad_ranks(const TreeTensor& t, const RankTuple& target) {
  require(t.ranks.all_leq(target), errc::invalid_rank_tuple,
          "padding target must dominate the current ranks");
  TreeTensor out;
  out.tree = t.tree;
  out.shape = t.shape;
  out.ranks = target;
  for (const auto& [v, basis] : t.leaf_bases) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(basis.rows(), target.at(v));
    padded.leftCols(basis.cols()) = basis;
    out.leaf_bases[v] = std::move(padded);
  }
  auto pad_core = [&](const CoreArray& core, const std::vector<int>& new_dims) {
    CoreArray padded = CoreArray::zeros(new_dims);
    if (core.size() == 0) return padded;
    const int nd = static_cast<int>(core.dims.size());
    std::vector<int> digits(static_cast<std::size_t>(nd), 0);
    for (std::int64_t flat = 0; flat < core.size(); ++flat) {
      std::int64_t nf = 0;
      for (int k = 0; k < nd; ++k) nf = nf * new_dims[static_cast<std::size_t>(k)] + digits[static_cast<std::size_t>(k)];
      padded.values[static_cast<std::size_t>(nf)] = core.values[static_cast<std::size_t>(flat)];
      for (int k = nd - 1; k >= 0; --k) {
        if (++digits[static_cast<std::size_t>(k)] < core.dims[static_cast<std::size_t>(k)]) break;
        digits[static_cast<std::size_t>(k)] = 0;
      }
    }
    return padded;
  };
  for (const auto& [v, core] : t.transfer_cores) {
    std::vector<int> dims{target.at(v)};
    for (const Vertex& b : t.tree.sons(v)) dims.push_back(target.at(b));
    out.transfer_cores[v] = pad_core(core, dims);
  }
  std::vector<int> root_dims;
  for (const Vertex& b : t.tree.sons(t.tree.root())) root_dims.push_back(target.at(b));
  out.root_core = pad_core(t.root_core, root_dims);
  validate(out);
  return out;
}

// Parameter-space a + c*b for aligned tree tensors.
TreeTensor axpy_params(const TreeTensor& a, double c, const TreeTensor& b) {
  require(a.tree == b.tree && a.shape == b.shape && a.ranks.ranks == b.ranks.ranks,
          errc::shape_mismatch, "tree tensors are not aligned");
  TreeTensor out = a;
  out.orthonormal_leaves = out.orthonormal_cores = out.minimal = false;
  for (auto& [v, basis] : out.leaf_bases) basis += c * b.leaf_bases.at(v);
  for (auto& [v, core] : out.transfer_cores) {
    const auto& other = b.transfer_cores.at(v).values;
    for (std::size_t i = 0; i < core.values.size(); ++i) core.values[i] += c * other[i];
  }
  for (std::size_t i = 0; i < out.root_core.values.size(); ++i)
    out.root_core.values[i] += c * b.root_core.values[i];
  return out;
}

std::string seq_id(int i) { return "seq:" + std::to_string(i); }

}  // namespace

Report lsc_experiment(const DimensionTree& tree, const std::vector<int>& shape,
                      const RankTuple& r, int num_sequences, int steps, std::uint64_t seed,
                      RankTol tol) {
  require(num_sequences >= 1 && steps >= 2, errc::invalid_argument,
          "need at least one sequence of at least two steps");
  const std::string violation = rank_tuple_violation(tree, shape, r);
  require(violation.empty(), errc::invalid_rank_tuple, violation);

  std::mt19937_64 master(seed);
  Report report{"lower_semicontinuity", {}};
  const int tail = (steps + 1) / 2;
  for (int s = 0; s < num_sequences; ++s) {
    const std::uint64_t seed_lim = master();
    const std::uint64_t seed_dir = master();
    // Cycle through a strict rank drop at the limit, a full-rank limit and a
    // constant sequence.
    const RankTuple limit_tuple = (s % 3 == 0) ? RankTuple::constant(tree, 1) : r;
    const double step_scale = (s % 3 == 2) ? 0.0 : 1.0;
    const TreeTensor t_lim =
        pad_ranks(random_tree_tensor(tree, shape, limit_tuple, seed_lim), r);
    const TreeTensor t_dir = random_tree_tensor(tree, shape, r, seed_dir);

    const DenseTensor limit = evaluate(t_lim);
    const RankTuple limit_ranks = tree_rank(limit, tree, tol);

    std::map<Vertex, int> tail_min;
    for (int n = 1; n <= steps; ++n) {
      const RankTuple rn =
          tree_rank(evaluate(axpy_params(t_lim, step_scale / n, t_dir)), tree, tol);
      if (n <= steps - tail) continue;
      for (const auto& [v, rv] : rn.ranks) {
        auto it = tail_min.find(v);
        if (it == tail_min.end())
          tail_min[v] = rv;
        else
          it->second = std::min(it->second, rv);
      }
    }

    ReportRecord rec;
    rec.vertex = seq_id(s);
    rec.extra["seed"] = static_cast<double>(seed_lim & 0xffffffffu);
    int violations = 0;
    for (const auto& [v, rv] : limit_ranks.ranks) {
      rec.extra["limit_rank " + v.key()] = rv;
      rec.extra["tail_min_rank " + v.key()] = tail_min.at(v);
      if (rv > tail_min.at(v)) ++violations;
    }
    rec.value = violations;
    rec.pass = violations == 0;
    if (!rec.pass) rec.note = "rank dropped along the sequence tail";
    report.records.push_back(std::move(rec));
  }
  return report;
}

Report closedness_experiment(const DimensionTree& tree, const std::vector<int>& shape,
                             const RankTuple& r, int num_sequences, int steps,
                             std::uint64_t seed, RankTol tol) {
  require(num_sequences >= 1 && steps >= 2, errc::invalid_argument,
          "need at least one sequence of at least two steps");
  const std::string violation = rank_tuple_violation(tree, shape, r);
  require(violation.empty(), errc::invalid_rank_tuple, violation);

  std::mt19937_64 master(seed);
  Report report{"closedness", {}};
  for (int s = 0; s < num_sequences; ++s) {
    const std::uint64_t seed_lim = master();
    const std::uint64_t seed_dir = master();
    const RankTuple limit_tuple = (s % 3 == 0) ? RankTuple::constant(tree, 1) : r;
    const double step_scale = (s % 3 == 2) ? 0.0 : 1.0;
    const TreeTensor t_lim =
        pad_ranks(random_tree_tensor(tree, shape, limit_tuple, seed_lim), r);
    const TreeTensor t_dir = random_tree_tensor(tree, shape, r, seed_dir);

    // Every iterate stays inside the bounded-rank set by construction; the
    // check is on the dense limit.
    double max_step_excess = 0.0;
    for (int n = 1; n <= steps; ++n) {
      const RankTuple rn =
          tree_rank(evaluate(axpy_params(t_lim, step_scale / n, t_dir)), tree, tol);
      for (const auto& [v, rv] : rn.ranks)
        max_step_excess = std::max(max_step_excess, static_cast<double>(rv - r.at(v)));
    }
    const DenseTensor limit = evaluate(t_lim);
    const RankTuple limit_ranks = tree_rank(limit, tree, tol);
    const bool member = in_ft(limit, tree, r, MembershipMode::bounded, tol);

    ReportRecord rec;
    rec.vertex = seq_id(s);
    rec.extra["seed"] = static_cast<double>(seed_lim & 0xffffffffu);
    rec.extra["max_step_rank_excess"] = max_step_excess;
    int excess = 0;
    for (const auto& [v, rv] : limit_ranks.ranks) {
      rec.extra["limit_rank " + v.key()] = rv;
      if (rv > r.at(v)) ++excess;
    }
    rec.value = excess;
    rec.pass = member && max_step_excess <= 0.0;
    if (!member) rec.note = "limit left the bounded-rank set";
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace treeten
