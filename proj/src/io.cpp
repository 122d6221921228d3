#include "treeten/io.hpp"

#include <fstream>

namespace treeten {

using nlohmann::json;

namespace {

int infer_mode_count(const std::string& tree_spec) {
  int d = 0;
  int cur = -1;
  for (char c : tree_spec) {
    if (c >= '0' && c <= '9') {
      cur = (cur < 0 ? 0 : cur) * 10 + (c - '0');
    } else {
      d = std::max(d, cur);
      cur = -1;
    }
  }
  return std::max(d, cur);
}

DimensionTree tree_from_json(const json& j) {
  require(j.is_string(), errc::io_error, "tree field must be a string");
  const std::string spec = j.get<std::string>();
  return build_tree(infer_mode_count(spec), spec);
}

std::vector<int> shape_from_json(const json& j) {
  require(j.is_array(), errc::io_error, "shape must be an array");
  std::vector<int> shape;
  for (const auto& n : j) {
    require(n.is_number_integer() && n.get<std::int64_t>() >= 1, errc::io_error,
            "mode sizes must be positive integers");
    shape.push_back(n.get<int>());
  }
  return shape;
}

std::vector<double> values_from_json(const json& j) {
  require(j.is_array(), errc::io_error, "values must be an array");
  std::vector<double> values;
  values.reserve(j.size());
  for (const auto& x : j) {
    require(x.is_number(), errc::io_error, "values must be numbers");
    values.push_back(x.get<double>());
  }
  return values;
}

std::map<Vertex, int> ranks_from_json(const json& j) {
  require(j.is_object(), errc::io_error, "ranks must be an object");
  std::map<Vertex, int> ranks;
  for (const auto& [key, val] : j.items()) {
    require(val.is_number_integer() && val.get<std::int64_t>() >= 0, errc::io_error,
            "ranks must be non-negative integers");
    ranks[Vertex::from_key(key)] = val.get<int>();
  }
  return ranks;
}

json core_to_json(const CoreArray& c) {
  return json{{"shape", c.dims}, {"values", c.values}};
}

CoreArray core_from_json(const json& j) {
  require(j.is_object() && j.contains("shape") && j.contains("values"), errc::io_error,
          "core must carry shape and values");
  std::vector<int> dims;
  for (const auto& n : j.at("shape")) dims.push_back(n.get<int>());
  return CoreArray(dims, values_from_json(j.at("values")));
}

}  // namespace

json to_json(const DenseTensor& v) {
  return json{{"shape", v.shape}, {"values", v.values}};
}

DenseTensor dense_from_json(const json& j) {
  require(j.is_object() && j.contains("shape") && j.contains("values"), errc::io_error,
          "dense tensor file must carry shape and values");
  return DenseTensor(shape_from_json(j.at("shape")), values_from_json(j.at("values")));
}

json to_json(const RankTuple& r) {
  json ranks = json::object();
  for (const auto& [v, rank] : r.ranks) ranks[v.key()] = rank;
  return json{{"tree", r.tree.render()}, {"ranks", ranks}};
}

RankTuple rank_tuple_from_json(const json& j) {
  require(j.is_object() && j.contains("tree") && j.contains("ranks"), errc::io_error,
          "rank tuple file must carry tree and ranks");
  return RankTuple(tree_from_json(j.at("tree")), ranks_from_json(j.at("ranks")));
}

json to_json(const TreeTensor& t) {
  json leaf_bases = json::object();
  for (const auto& [v, basis] : t.leaf_bases) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < basis.cols(); ++c) row.push_back(basis(r, c));
      rows.push_back(std::move(row));
    }
    leaf_bases[v.key()] = std::move(rows);
  }
  json cores = json::object();
  for (const auto& [v, core] : t.transfer_cores) cores[v.key()] = core_to_json(core);
  json ranks = json::object();
  for (const auto& [v, rank] : t.ranks.ranks) ranks[v.key()] = rank;
  return json{{"tree", t.tree.render()},
              {"shape", t.shape},
              {"ranks", ranks},
              {"leaf_bases", leaf_bases},
              {"transfer_cores", cores},
              {"root_core", core_to_json(t.root_core)},
              {"flags",
               {{"orthonormal_leaves", t.orthonormal_leaves},
                {"orthonormal_cores", t.orthonormal_cores},
                {"minimal", t.minimal}}}};
}

TreeTensor tree_tensor_from_json(const json& j) {
  require(j.is_object(), errc::io_error, "tree tensor file must be an object");
  for (const char* field : {"tree", "shape", "ranks", "leaf_bases", "transfer_cores", "root_core"})
    require(j.contains(field), errc::io_error,
            std::string("tree tensor file is missing '") + field + "'");
  TreeTensor t;
  t.tree = tree_from_json(j.at("tree"));
  t.shape = shape_from_json(j.at("shape"));
  t.ranks = RankTuple(t.tree, ranks_from_json(j.at("ranks")));
  for (const auto& [key, rows] : j.at("leaf_bases").items()) {
    const Vertex v = Vertex::from_key(key);
    require(rows.is_array(), errc::io_error, "leaf basis must be an array of rows");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::Index r = -1;
    Eigen::MatrixXd basis;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = rows.at(static_cast<std::size_t>(i));
      require(row.is_array(), errc::io_error, "leaf basis rows must be arrays");
      if (r < 0) {
        r = static_cast<Eigen::Index>(row.size());
        basis.resize(n, r);
      }
      require(static_cast<Eigen::Index>(row.size()) == r, errc::io_error,
              "ragged leaf basis rows");
      for (Eigen::Index c = 0; c < r; ++c) basis(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    if (r < 0) basis.resize(n, 0);
    t.leaf_bases[v] = std::move(basis);
  }
  for (const auto& [key, core] : j.at("transfer_cores").items())
    t.transfer_cores[Vertex::from_key(key)] = core_from_json(core);
  t.root_core = core_from_json(j.at("root_core"));
  if (j.contains("flags")) {
    const auto& flags = j.at("flags");
    t.orthonormal_leaves = flags.value("orthonormal_leaves", false);
    t.orthonormal_cores = flags.value("orthonormal_cores", false);
    t.minimal = flags.value("minimal", false);
  }
  validate(t);
  return t;
}

json to_json(const Report& r) {
  json records = json::array();
  for (const ReportRecord& rec : r.records) {
    json item{{"vertex", rec.vertex},
              {"value", rec.value},
              {"threshold", rec.threshold},
              {"pass", rec.pass}};
    if (!rec.note.empty()) item["note"] = rec.note;
    for (const auto& [key, val] : rec.extra) item[key] = val;
    records.push_back(std::move(item));
  }
  return json{{"suite", r.name}, {"pass", r.pass()}, {"records", records}};
}

std::string to_json_lines(const Report& r) {
  std::string out;
  const json full = to_json(r);
  for (const auto& rec : full.at("records")) out += rec.dump() + "\n";
  return out;
}

FileKind detect_kind(const json& j) {
  require(j.is_object(), errc::io_error, "expected a JSON object");
  if (j.contains("leaf_bases")) return FileKind::tree_tensor;
  if (j.contains("values")) return FileKind::dense;
  if (j.contains("ranks") && j.contains("tree")) return FileKind::rank_tuple;
  fail(errc::io_error, "file is not a dense tensor, tree tensor or rank tuple");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), errc::io_error, "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(errc::io_error, "cannot parse '" + path.string() + "': " + e.what());
  }
  return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    require(out.good(), errc::io_error, "cannot write '" + tmp.string() + "'");
    out << j.dump(2) << '\n';
    out.flush();
    require(out.good(), errc::io_error, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, errc::io_error, "cannot move '" + tmp.string() + "' into place: " + ec.message());
}

}  // namespace treeten
