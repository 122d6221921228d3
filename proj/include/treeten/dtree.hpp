#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "treeten/error.hpp"

namespace treeten {

// Non-empty set of 1-based mode indices, stored strictly increasing.
class Vertex {
public:
  Vertex() = default;
  explicit Vertex(std::vector<int> indices);
  static Vertex single(int j);
  static Vertex full(int d);
  static Vertex from_key(std::string_view key);

  const std::vector<int>& indices() const noexcept { return idx_; }
  int size() const noexcept { return static_cast<int>(idx_.size()); }
  bool empty() const noexcept { return idx_.empty(); }
  int min_index() const { return idx_.front(); }
  bool contains(int j) const;
  bool contains_all(const Vertex& other) const;
  Vertex complement(int d) const;
  std::string key() const;  // space-separated indices, e.g. "1 3"

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend auto operator<=>(const Vertex&, const Vertex&) = default;

private:
  std::vector<int> idx_;
};

enum class TraversalOrder { root_to_leaves, leaves_to_root };

// Dimension partition tree over D = {1,..,d}: the root is D, every vertex
// with two or more indices splits into >= 2 pairwise disjoint sons covering
// it, and the leaves are exactly the singletons. Sons are kept ordered by
// smallest contained index. Immutable after construction.
class DimensionTree {
public:
  // An empty placeholder; every accessor below requires a real tree.
  DimensionTree() = default;
  // `sons` lists the son sets of every non-singleton vertex.
  DimensionTree(int d, std::map<Vertex, std::vector<Vertex>> sons);

  int mode_count() const noexcept { return d_; }
  const Vertex& root() const noexcept { return root_; }
  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  bool has_vertex(const Vertex& v) const;
  bool is_leaf(const Vertex& v) const;
  const std::vector<Vertex>& sons(const Vertex& v) const;
  // nullptr at the root.
  const Vertex* parent(const Vertex& v) const;
  int level(const Vertex& v) const;
  int depth() const noexcept { return depth_; }
  // All vertices with #alpha >= 2, including the root, in traversal order.
  std::vector<Vertex> interior_vertices() const;
  std::vector<Vertex> leaves() const;

  std::vector<Vertex> traversal(TraversalOrder order) const;
  std::string render() const;

  friend bool operator==(const DimensionTree& a, const DimensionTree& b) {
    return a.d_ == b.d_ && a.sons_ == b.sons_;
  }

private:
  int d_ = 0;
  Vertex root_;
  std::vector<Vertex> vertices_;               // sorted
  std::map<Vertex, std::vector<Vertex>> sons_;  // interior vertices only
  std::map<Vertex, Vertex> parent_;
  std::map<Vertex, int> levels_;
  std::vector<Vertex> breadth_first_;  // root-to-leaves order
  int depth_ = 0;
};

// Parses the parenthesized tree notation: a leaf is "(j)", an interior
// vertex is "(" followed by its sons ")". Whitespace is ignored.
DimensionTree build_tree(int d, std::string_view spec);

DimensionTree tucker_tree(int d);
DimensionTree linear_tree(int d);
DimensionTree balanced_tree(int d);

}  // namespace treeten
