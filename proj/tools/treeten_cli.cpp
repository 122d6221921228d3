#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "treeten/approx.hpp"
#include "treeten/io.hpp"

using namespace treeten;
using nlohmann::json;

namespace {

struct CliError {
  int code;
  std::string kind;
  std::string message;
};

[[noreturn]] void die(int code, const std::string& kind, const std::string& message) {
  throw CliError{code, kind, message};
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TT_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      die(2, "invalid_argument", "TT_SEED must be an unsigned integer");
    }
  }
  return 0;
}

std::vector<int> parse_shape(const std::string& text) {
  std::vector<int> shape;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    try {
      shape.push_back(std::stoi(text.substr(pos, next - pos)));
    } catch (...) {
      die(2, "invalid_argument", "bad shape entry in '" + text + "'");
    }
    pos = next + 1;
  }
  if (shape.empty()) die(2, "invalid_argument", "empty shape");
  return shape;
}

// "all:2,root:1" or per-vertex "1:2;1 2:3"; later entries override earlier.
RankTuple parse_ranks(const std::string& text, const DimensionTree& tree) {
  std::map<std::string, int> entries;
  std::vector<std::string> order;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find_first_of(",;", pos);
    if (next == std::string::npos) next = text.size();
    const std::string item = text.substr(pos, next - pos);
    pos = next + 1;
    if (item.empty()) continue;
    const std::size_t colon = item.rfind(':');
    if (colon == std::string::npos)
      die(2, "invalid_argument", "rank entry '" + item + "' is missing ':'");
    int value = 0;
    try {
      value = std::stoi(item.substr(colon + 1));
    } catch (...) {
      die(2, "invalid_argument", "bad rank value in '" + item + "'");
    }
    const std::string key = item.substr(0, colon);
    entries[key] = value;
    order.push_back(key);
  }

  std::map<Vertex, int> ranks;
  for (const std::string& key : order) {
    const int value = entries.at(key);
    if (key == "all") {
      for (const Vertex& v : tree.vertices()) ranks[v] = value;
    } else if (key == "root") {
      ranks[tree.root()] = value;
    } else {
      Vertex v = Vertex::from_key(key);
      if (!tree.has_vertex(v))
        die(2, "invalid_rank_tuple", "vertex {" + key + "} is not in the tree");
      ranks[v] = value;
    }
  }
  for (const Vertex& v : tree.vertices())
    if (!ranks.count(v))
      die(2, "invalid_rank_tuple", "no rank given for vertex {" + v.key() + "}");
  return RankTuple(tree, std::move(ranks));
}

DimensionTree tree_for_shape(const std::string& spec, int d) {
  return build_tree(d, spec);
}

DenseTensor load_dense(const std::string& path) {
  const json j = read_json_file(path);
  const FileKind kind = detect_kind(j);
  if (kind == FileKind::dense) return dense_from_json(j);
  if (kind == FileKind::tree_tensor) return evaluate(tree_tensor_from_json(j));
  die(2, "io_error", "'" + path + "' does not hold a tensor");
}

void emit(const json& j, const std::optional<std::string>& out, bool quiet,
          const std::string& summary) {
  if (out) {
    write_json_file(*out, j);
    if (!quiet) std::cout << summary << "\n";
  } else {
    std::cout << j.dump(2) << "\n";
  }
}

json storage_json(const TreeTensor& t) {
  const StorageReport s = storage_report(t);
  return json{{"parameter_count", s.parameter_count},
              {"dense_count", s.dense_count},
              {"compression_ratio", s.compression_ratio}};
}

int run(int argc, char** argv) {
  CLI::App app{"Tree-based tensor formats: compression, ranks and approximation"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet", quiet, "suppress human-readable summaries");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a dense or tree tensor file");
  std::string gen_shape, gen_tree, gen_ranks, gen_out;
  std::uint64_t gen_seed = default_seed();
  bool gen_elementary = false;
  int gen_sum = 0;
  gen->add_option("--shape", gen_shape, "mode sizes, e.g. 2,3,2")->required();
  gen->add_option("--tree", gen_tree, "parenthesized dimension tree");
  gen->add_option("--ranks", gen_ranks, "rank tuple, e.g. all:2,root:1");
  gen->add_flag("--elementary", gen_elementary, "one random elementary tensor");
  gen->add_option("--sum", gen_sum, "sum of K random elementary tensors");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output file")->required();

  // compress
  auto* compress = app.add_subcommand("compress", "hierarchical SVD of a dense tensor");
  std::string c_in, c_tree, c_ranks, c_out;
  double c_tol = -1.0;
  compress->add_option("--in", c_in)->required();
  compress->add_option("--tree", c_tree)->required();
  compress->add_option("--tol", c_tol, "relative per-node truncation tolerance");
  compress->add_option("--ranks", c_ranks, "rank caps");
  compress->add_option("--out", c_out)->required();

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "densify a tree tensor file");
  std::string r_in, r_out;
  reconstruct->add_option("--in", r_in)->required();
  reconstruct->add_option("--out", r_out)->required();

  // rank
  auto* rank = app.add_subcommand("rank", "tree-based rank of a dense tensor");
  std::string k_in, k_tree, k_out;
  bool k_all = false;
  rank->add_option("--in", k_in)->required();
  rank->add_option("--tree", k_tree)->required();
  rank->add_flag("--all-subsets", k_all, "also rank every non-trivial subset (d <= 5)");
  rank->add_option("--out", k_out);

  // truncate / approx
  auto* trunc = app.add_subcommand("truncate", "rank-capped hierarchical SVD");
  std::string t_in, t_tree, t_ranks, t_out;
  trunc->add_option("--in", t_in)->required();
  trunc->add_option("--tree", t_tree)->required();
  trunc->add_option("--ranks", t_ranks)->required();
  trunc->add_option("--out", t_out);

  auto* approx = app.add_subcommand("approx", "multi-start ALS best approximation");
  std::string a_in, a_tree, a_ranks, a_out;
  int a_restarts = 3, a_iters = 50;
  std::uint64_t a_seed = default_seed();
  approx->add_option("--in", a_in)->required();
  approx->add_option("--tree", a_tree)->required();
  approx->add_option("--ranks", a_ranks)->required();
  approx->add_option("--restarts", a_restarts);
  approx->add_option("--iters", a_iters);
  approx->add_option("--seed", a_seed);
  approx->add_option("--out", a_out);

  // norm
  auto* norm = app.add_subcommand("norm", "injective-norm lower bound");
  std::string n_in;
  int n_restarts = 8, n_iters = 1000;
  std::uint64_t n_seed = default_seed();
  norm->add_option("--in", n_in)->required();
  norm->add_option("--restarts", n_restarts);
  norm->add_option("--iters", n_iters);
  norm->add_option("--seed", n_seed);

  // verify
  auto* verify = app.add_subcommand("verify", "structural verification suites");
  std::string v_in, v_tree, v_suite = "all";
  std::uint64_t v_seed = default_seed();
  verify->add_option("--in", v_in)->required();
  verify->add_option("--tree", v_tree)->required();
  verify->add_option("--suite", v_suite,
                     "duality | nestedness | spans | roundtrip | all");
  verify->add_option("--seed", v_seed);

  // info
  auto* info = app.add_subcommand("info", "describe a file");
  std::string i_in, i_compare;
  info->add_option("--in", i_in)->required();
  info->add_option("--compare", i_compare, "second tensor to compare against");

  for (CLI::App* sub : {gen, compress, reconstruct, rank, trunc, approx, norm, verify, info})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  if (gen->parsed()) {
    const std::vector<int> shape = parse_shape(gen_shape);
    const int modes = static_cast<int>(shape.size());
    const int given = (gen_elementary ? 1 : 0) + (gen_sum > 0 ? 1 : 0) + (!gen_ranks.empty() ? 1 : 0);
    if (given != 1)
      die(2, "invalid_argument", "give exactly one of --elementary, --sum, --ranks");
    std::mt19937_64 rng(gen_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto random_factors = [&] {
      std::vector<std::vector<double>> f;
      for (int n : shape) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (double& x : v) x = normal(rng);
        f.push_back(std::move(v));
      }
      return f;
    };
    if (gen_elementary || gen_sum > 0) {
      const int terms = gen_elementary ? 1 : gen_sum;
      DenseTensor v = DenseTensor::zeros(shape);
      for (int k = 0; k < terms; ++k) v = add(v, elementary(random_factors()));
      emit(to_json(v), gen_out, quiet, "wrote dense tensor to " + gen_out);
    } else {
      if (gen_tree.empty()) die(2, "invalid_argument", "--ranks requires --tree");
      const DimensionTree tree = tree_for_shape(gen_tree, modes);
      const RankTuple ranks = parse_ranks(gen_ranks, tree);
      const TreeTensor t = random_tree_tensor(tree, shape, ranks, gen_seed);
      emit(to_json(t), gen_out, quiet, "wrote tree tensor to " + gen_out);
    }
    return 0;
  }

  if (compress->parsed()) {
    const DenseTensor v = load_dense(c_in);
    const DimensionTree tree = tree_for_shape(c_tree, v.order());
    if (c_tol < 0.0 && c_ranks.empty())
      die(2, "invalid_argument", "give --tol and/or --ranks");
    HsvdControl control;
    if (c_tol >= 0.0) control.tol = c_tol;
    if (!c_ranks.empty()) control.caps = parse_ranks(c_ranks, tree);
    const TreeTensor t = hsvd(v, tree, control);
    emit(to_json(t), c_out, quiet,
         "compressed to " + c_out + " (ratio " +
             std::to_string(storage_report(t).compression_ratio) + ")");
    return 0;
  }

  if (reconstruct->parsed()) {
    const json j = read_json_file(r_in);
    if (detect_kind(j) != FileKind::tree_tensor)
      die(2, "io_error", "'" + r_in + "' is not a tree tensor file");
    const DenseTensor v = evaluate(tree_tensor_from_json(j));
    emit(to_json(v), r_out, quiet, "wrote dense tensor to " + r_out);
    return 0;
  }

  if (rank->parsed()) {
    const DenseTensor v = load_dense(k_in);
    const DimensionTree tree = tree_for_shape(k_tree, v.order());
    const RankTuple r = tree_rank(v, tree);
    json j = to_json(r);
    if (k_all) {
      if (v.order() > 5) die(2, "invalid_argument", "--all-subsets is limited to d <= 5");
      json subsets = json::object();
      for (unsigned mask = 1; mask + 1 < (1u << v.order()); ++mask) {
        std::vector<int> idx;
        for (int b = 0; b < v.order(); ++b)
          if (mask & (1u << b)) idx.push_back(b + 1);
        const Vertex a(idx);
        subsets[a.key()] = matrix_rank(matricize(v, a).entries);
      }
      j["subset_ranks"] = std::move(subsets);
    }
    std::optional<std::string> out_path;
    if (!k_out.empty()) out_path = k_out;
    emit(j, out_path, quiet, "wrote rank tuple to " + k_out);
    return 0;
  }

  if (trunc->parsed() || approx->parsed()) {
    const bool is_trunc = trunc->parsed();
    const std::string in = is_trunc ? t_in : a_in;
    const std::string tree_spec = is_trunc ? t_tree : a_tree;
    const std::string ranks_spec = is_trunc ? t_ranks : a_ranks;
    const std::string out = is_trunc ? t_out : a_out;
    const DenseTensor v = load_dense(in);
    const DimensionTree tree = tree_for_shape(tree_spec, v.order());
    const RankTuple caps = parse_ranks(ranks_spec, tree);

    const ApproxResult res = is_trunc
                                 ? truncate(v, tree, caps)
                                 : best_approx(v, tree, caps, a_restarts, a_seed, a_iters);
    json spectra = json::object();
    for (const auto& [vert, sigma] : res.discarded_spectra) spectra[vert.key()] = sigma;
    json j{{"residual", res.residual},
           {"relative_residual", res.residual / std::max(frobenius_norm(v), 1e-300)},
           {"iterations", res.iterations},
           {"restarts", res.restarts_used},
           {"discarded_spectra", spectra}};
    if (!out.empty()) write_json_file(out, to_json(res.approximant));
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  if (norm->parsed()) {
    const DenseTensor v = load_dense(n_in);
    const NormEstimate est = injective_norm(v, n_restarts, n_iters, n_seed);
    const json j{{"estimate", est.estimate},
                 {"frobenius_norm", frobenius_norm(v)},
                 {"witness", est.witness}};
    std::cout << j.dump(2) << "\n";
    return 0;
  }

  if (verify->parsed()) {
    const DenseTensor v = load_dense(v_in);
    const DimensionTree tree = tree_for_shape(v_tree, v.order());
    std::vector<Report> reports;
    const bool all = v_suite == "all";
    if (all || v_suite == "duality")
      reports.push_back(verify_rank_duality(v, tree, {}, v.order() <= 4));
    if (all || v_suite == "nestedness") reports.push_back(verify_nestedness(v, tree));
    if (all || v_suite == "spans") {
      Report spans{"span_from_contractions", {}};
      const RankTuple r = tree_rank(v, tree);
      std::uint64_t seed = v_seed;
      for (const Vertex& beta : tree.traversal(TraversalOrder::root_to_leaves)) {
        const Vertex* parent = tree.parent(beta);
        if (!parent) continue;
        const Report one =
            span_from_contractions(v, beta, *parent, r.at(beta) + 2, seed++);
        spans.records.insert(spans.records.end(), one.records.begin(), one.records.end());
      }
      reports.push_back(std::move(spans));
    }
    if (all || v_suite == "roundtrip") {
      Report rt{"roundtrip", {}};
      const TreeTensor t = hsvd(v, tree);
      ReportRecord rec;
      rec.vertex = tree.root().key();
      rec.value = relative_error(evaluate(t), v);
      rec.threshold = 1e-10;
      rec.pass = rec.value <= rec.threshold;
      rt.records.push_back(rec);
      const RankTuple cr = core_ranks(t);
      for (const auto& [vert, stored] : t.ranks.ranks) {
        ReportRecord crec;
        crec.vertex = vert.key();
        crec.value = cr.at(vert);
        crec.extra["stored_rank"] = stored;
        crec.pass = cr.at(vert) == stored;
        crec.note = "core_rank";
        rt.records.push_back(std::move(crec));
      }
      reports.push_back(std::move(rt));
    }
    if (reports.empty()) die(2, "invalid_argument", "unknown suite '" + v_suite + "'");

    bool pass = true;
    json out = json::array();
    for (const Report& rep : reports) {
      pass = pass && rep.pass();
      out.push_back(to_json(rep));
    }
    std::cout << json{{"pass", pass}, {"suites", out}}.dump(2) << "\n";
    return pass ? 0 : 1;
  }

  if (info->parsed()) {
    const json j = read_json_file(i_in);
    const FileKind kind = detect_kind(j);
    json out;
    if (kind == FileKind::dense) {
      const DenseTensor v = dense_from_json(j);
      out = json{{"kind", "dense"}, {"shape", v.shape}, {"frobenius_norm", frobenius_norm(v)}};
    } else if (kind == FileKind::tree_tensor) {
      const TreeTensor t = tree_tensor_from_json(j);
      json ranks = json::object();
      for (const auto& [vert, rv] : t.ranks.ranks) ranks[vert.key()] = rv;
      out = json{{"kind", "tree_tensor"},
                 {"shape", t.shape},
                 {"tree", t.tree.render()},
                 {"ranks", ranks},
                 {"storage", storage_json(t)},
                 {"flags",
                  {{"orthonormal_leaves", t.orthonormal_leaves},
                   {"orthonormal_cores", t.orthonormal_cores},
                   {"minimal", t.minimal}}}};
    } else {
      const RankTuple r = rank_tuple_from_json(j);
      json ranks = json::object();
      for (const auto& [vert, rv] : r.ranks) ranks[vert.key()] = rv;
      out = json{{"kind", "rank_tuple"}, {"tree", r.tree.render()}, {"ranks", ranks}};
    }
    if (!i_compare.empty()) {
      const DenseTensor a = load_dense(i_in);
      const DenseTensor b = load_dense(i_compare);
      out["relative_error"] = relative_error(a, b);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CliError& e) {
    std::cerr << json{{"error", e.kind}, {"message", e.message}}.dump() << "\n";
    return e.code;
  } catch (const Error& e) {
    std::cerr << json{{"error", errc_name(e.code())}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }
}
