#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "treeten/io.hpp"

using namespace treeten;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("treeten_test_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("dense files round trip exactly, including awkward doubles") {
  DenseTensor v = DenseTensor::zeros({2, 3});
  v.values = {1.0 / 3.0, -0.0, 1e-300, 6.02214076e23, -1.25, 0.1};
  const auto path = temp_file("dense.json");
  write_json_file(path, to_json(v));
  const DenseTensor back = dense_from_json(read_json_file(path));
  CHECK(back.shape == v.shape);
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    // Bit-exact recovery of each 64-bit value.
    CHECK(std::memcmp(&back.values[i], &v.values[i], sizeof(double)) == 0);
  }

  // write -> read -> write is byte-identical.
  const std::string first = slurp(path);
  const auto path2 = temp_file("dense2.json");
  write_json_file(path2, to_json(back));
  CHECK(first == slurp(path2));
  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("rank tuple files carry the tree and per-vertex ranks") {
  const DimensionTree tree = build_tree(4, "(((1)(2))((3)(4)))");
  const RankTuple r = RankTuple::constant(tree, 3);
  const nlohmann::json j = to_json(r);
  CHECK(j.at("tree") == "(((1)(2))((3)(4)))");
  CHECK(j.at("ranks").at("1 2") == 3);
  const RankTuple back = rank_tuple_from_json(j);
  CHECK(back == r);
}

TEST_CASE("tree tensor files validate on read") {
  const DimensionTree tree = linear_tree(3);
  const TreeTensor t = random_tree_tensor(tree, {2, 3, 2}, RankTuple::constant(tree, 2), 11);
  nlohmann::json j = to_json(t);
  const TreeTensor back = tree_tensor_from_json(j);
  CHECK(relative_error(evaluate(back), evaluate(t)) == 0.0);
  CHECK(back.orthonormal_leaves == t.orthonormal_leaves);

  nlohmann::json corrupt = j;
  corrupt["root_core"]["shape"] = {3, 3};
  CHECK_THROWS_AS(tree_tensor_from_json(corrupt), Error);

  nlohmann::json missing = j;
  missing.erase("leaf_bases");
  CHECK_THROWS_AS(tree_tensor_from_json(missing), Error);

  nlohmann::json bad_rank = j;
  bad_rank["ranks"]["2 3"] = 7;
  CHECK_THROWS_AS(tree_tensor_from_json(bad_rank), Error);

  // write -> read -> write is byte-identical.
  const auto path = temp_file("ttn.json");
  write_json_file(path, j);
  const std::string first = slurp(path);
  write_json_file(path, to_json(tree_tensor_from_json(read_json_file(path))));
  CHECK(first == slurp(path));
  fs::remove(path);
}

TEST_CASE("file kinds are detected") {
  const DimensionTree tree = linear_tree(3);
  CHECK(detect_kind(to_json(DenseTensor::zeros({2, 2}))) == FileKind::dense);
  CHECK(detect_kind(to_json(RankTuple::constant(tree, 1))) == FileKind::rank_tuple);
  CHECK(detect_kind(to_json(random_tree_tensor(tree, {2, 2, 2},
                                               RankTuple::constant(tree, 1), 0))) ==
        FileKind::tree_tensor);
  CHECK_THROWS_AS(detect_kind(nlohmann::json{{"foo", 1}}), Error);
}

TEST_CASE("atomic writes leave no temporary behind") {
  const auto path = temp_file("atomic.json");
  write_json_file(path, to_json(DenseTensor::zeros({2, 2})));
  CHECK(fs::exists(path));
  fs::path tmp = path;
  tmp += ".tmp";
  CHECK_FALSE(fs::exists(tmp));
  fs::remove(path);
}

TEST_CASE("reports serialize with per-record fields") {
  Report rep{"demo", {}};
  ReportRecord rec;
  rec.vertex = "1 2";
  rec.value = 0.5;
  rec.threshold = 1.0;
  rec.pass = true;
  rec.extra["rank"] = 2;
  rep.records.push_back(rec);
  rec.vertex = "3";
  rec.pass = false;
  rec.note = "span_deficient";
  rep.records.push_back(rec);

  const nlohmann::json j = to_json(rep);
  CHECK(j.at("suite") == "demo");
  CHECK(j.at("pass") == false);
  CHECK(j.at("records").size() == 2);
  CHECK(j.at("records").at(0).at("vertex") == "1 2");
  CHECK(j.at("records").at(1).at("note") == "span_deficient");

  const std::string lines = to_json_lines(rep);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 2);

  // Parse errors surface as library errors.
  const auto path = temp_file("broken.json");
  std::ofstream(path) << "{not json";
  CHECK_THROWS_AS(read_json_file(path), Error);
  fs::remove(path);
}

}  // TEST_SUITE
