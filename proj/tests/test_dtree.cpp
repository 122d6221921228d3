#include <doctest.h>

#include <random>
#include <set>

#include "treeten/dtree.hpp"

using namespace treeten;

namespace {

// Random non-binary partition trees for property checks.
void random_split(const std::vector<int>& idx, std::mt19937_64& rng,
                  std::map<Vertex, std::vector<Vertex>>& sons) {
  if (idx.size() < 2) return;
  std::uniform_int_distribution<int> parts_dist(2, static_cast<int>(idx.size()));
  const int parts = parts_dist(rng);
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(parts));
  for (std::size_t i = 0; i < idx.size(); ++i)
    buckets[i < static_cast<std::size_t>(parts) ? i : rng() % parts].push_back(idx[i]);
  std::vector<Vertex> s;
  for (auto& b : buckets) {
    std::sort(b.begin(), b.end());
    random_split(b, rng, sons);
    s.emplace_back(b);
  }
  sons.emplace(Vertex(idx), std::move(s));
}

DimensionTree random_tree(int d, std::mt19937_64& rng) {
  std::vector<int> all;
  for (int j = 1; j <= d; ++j) all.push_back(j);
  std::map<Vertex, std::vector<Vertex>> sons;
  random_split(all, rng, sons);
  return DimensionTree(d, std::move(sons));
}

bool is_binary(const DimensionTree& t) {
  for (const Vertex& v : t.vertices())
    if (!t.is_leaf(v) && t.sons(v).size() != 2) return false;
  return true;
}

}  // namespace

TEST_SUITE("dtree") {

TEST_CASE("tucker spec string gives the depth-1 tree on six modes") {
  const DimensionTree t = build_tree(6, "((1)(2)(3)(4)(5)(6))");
  CHECK(t.depth() == 1);
  CHECK(t.vertices().size() == 7);
  CHECK(t == tucker_tree(6));
  CHECK(t.sons(t.root()).size() == 6);
}

TEST_CASE("non-binary depth-2 tree on six modes") {
  const DimensionTree t = build_tree(6, "(((1)(2)(3))((4)(5))(6))");
  CHECK(t.depth() == 2);
  CHECK(t.vertices().size() == 9);
  CHECK(t.has_vertex(Vertex({1, 2, 3})));
  CHECK(t.has_vertex(Vertex({4, 5})));
  CHECK_FALSE(t.has_vertex(Vertex({1, 2})));
  CHECK(t.level(Vertex({4, 5})) == 1);
  CHECK(t.level(Vertex::single(4)) == 2);
  CHECK(t.level(Vertex::single(6)) == 1);
}

TEST_CASE("duplicated index is rejected as overlapping sons") {
  bool threw = false;
  try {
    build_tree(3, "(((1)(1))((2)(3)))");
  } catch (const Error& e) {
    threw = true;
    CHECK(e.code() == errc::overlapping_sons);
  }
  CHECK(threw);
}

TEST_CASE("parse failures carry the right error codes") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return errc::io_error;
  };
  CHECK(code_of([] { build_tree(2, "()"); }) == errc::parse_error);
  CHECK(code_of([] { build_tree(2, "((1))"); }) == errc::single_son);
  CHECK(code_of([] { build_tree(2, "((1)(3))"); }) == errc::index_out_of_range);
  CHECK(code_of([] { build_tree(3, "((1)(2))"); }) == errc::incomplete_union);
  CHECK(code_of([] { build_tree(2, "((1)(2)"); }) == errc::parse_error);
  CHECK(code_of([] { build_tree(2, "((1)(2))x"); }) == errc::parse_error);
  CHECK(code_of([] { build_tree(1, "(1)"); }) == errc::invalid_mode_count);
}

TEST_CASE("factory trees") {
  CHECK(tucker_tree(6).depth() == 1);
  CHECK(tucker_tree(6).vertices().size() == 7);

  const DimensionTree lin3 = linear_tree(3);
  CHECK(lin3.depth() == 2);
  const std::vector<Vertex> expect{Vertex::single(1), Vertex({1, 2, 3}), Vertex::single(2),
                                   Vertex({2, 3}), Vertex::single(3)};
  CHECK(lin3.vertices() == expect);
  CHECK(linear_tree(5).depth() == 4);

  const DimensionTree bal4 = balanced_tree(4);
  CHECK(bal4.depth() == 2);
  CHECK(bal4.sons(bal4.root()) == std::vector<Vertex>{Vertex({1, 2}), Vertex({3, 4})});

  // Odd split: the first half takes the extra index.
  const DimensionTree bal5 = balanced_tree(5);
  CHECK(bal5.sons(bal5.root()) == std::vector<Vertex>{Vertex({1, 2, 3}), Vertex({4, 5})});

  CHECK_THROWS_AS(tucker_tree(1), Error);
  CHECK_THROWS_AS(linear_tree(0), Error);
  CHECK_THROWS_AS(balanced_tree(1), Error);
}

TEST_CASE("traversal orders") {
  const DimensionTree t3 = tucker_tree(3);
  const std::vector<Vertex> down{t3.root(), Vertex::single(1), Vertex::single(2),
                                 Vertex::single(3)};
  CHECK(t3.traversal(TraversalOrder::root_to_leaves) == down);

  const DimensionTree lin = linear_tree(3);
  auto fwd = lin.traversal(TraversalOrder::root_to_leaves);
  auto bwd = lin.traversal(TraversalOrder::leaves_to_root);
  std::reverse(bwd.begin(), bwd.end());
  CHECK(fwd == bwd);

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const DimensionTree t = random_tree(2 + static_cast<int>(rng() % 5), rng);
    const auto order = t.traversal(TraversalOrder::root_to_leaves);
    CHECK(order.front() == t.root());
    for (std::size_t i = 1; i < order.size(); ++i)
      CHECK(t.level(order[i - 1]) <= t.level(order[i]));
  }
}

TEST_CASE("structural invariants over generated trees") {
  std::mt19937_64 rng(13);
  std::vector<DimensionTree> trees;
  for (int d = 2; d <= 6; ++d) {
    trees.push_back(tucker_tree(d));
    trees.push_back(linear_tree(d));
    trees.push_back(balanced_tree(d));
  }
  for (int trial = 0; trial < 20; ++trial)
    trees.push_back(random_tree(2 + static_cast<int>(rng() % 6), rng));

  for (const DimensionTree& t : trees) {
    const int d = t.mode_count();

    // Sons partition their parent exactly.
    for (const Vertex& v : t.vertices()) {
      if (t.is_leaf(v)) continue;
      std::set<int> merged;
      for (const Vertex& b : t.sons(v))
        for (int j : b.indices()) CHECK(merged.insert(j).second);
      CHECK(std::vector<int>(merged.begin(), merged.end()) == v.indices());
    }

    // Leaves are exactly the singletons.
    std::vector<Vertex> leaves;
    for (const Vertex& v : t.vertices())
      if (t.is_leaf(v)) leaves.push_back(v);
    CHECK(leaves == t.leaves());

    // Rendered form round-trips.
    CHECK(build_tree(d, t.render()) == t);

    // Vertex count bound, tight exactly for binary trees.
    const auto n = static_cast<int>(t.vertices().size());
    CHECK(n <= 2 * d - 1);
    CHECK((n == 2 * d - 1) == is_binary(t));
  }
}

TEST_CASE("canonical son order is by smallest contained index") {
  const DimensionTree t = build_tree(3, "(((3)(2))(1))");
  CHECK(t.render() == "((1)((2)(3)))");
  CHECK(t.sons(t.root()).front() == Vertex::single(1));
}

TEST_CASE("vertex keys round trip") {
  const Vertex v({1, 3, 4});
  CHECK(v.key() == "1 3 4");
  CHECK(Vertex::from_key("1 3 4") == v);
  CHECK(v.complement(5) == Vertex({2, 5}));
  CHECK_THROWS_AS(Vertex(std::vector<int>{}), Error);
  CHECK_THROWS_AS(Vertex({1, 1}), Error);
}

}  // TEST_SUITE
