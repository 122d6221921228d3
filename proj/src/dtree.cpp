#include "treeten/dtree.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace treeten {

const char* errc_name(errc code) {
  switch (code) {
    case errc::parse_error: return "parse_error";
    case errc::index_out_of_range: return "index_out_of_range";
    case errc::overlapping_sons: return "overlapping_sons";
    case errc::incomplete_union: return "incomplete_union";
    case errc::single_son: return "single_son";
    case errc::non_singleton_leaf: return "non_singleton_leaf";
    case errc::invalid_mode_count: return "invalid_mode_count";
    case errc::shape_mismatch: return "shape_mismatch";
    case errc::invalid_rank_tuple: return "invalid_rank_tuple";
    case errc::invalid_argument: return "invalid_argument";
    case errc::io_error: return "io_error";
  }
  return "unknown";
}

Vertex::Vertex(std::vector<int> indices) : idx_(std::move(indices)) {
  require(!idx_.empty(), errc::invalid_argument, "vertex must be non-empty");
  std::sort(idx_.begin(), idx_.end());
  require(std::adjacent_find(idx_.begin(), idx_.end()) == idx_.end(), errc::invalid_argument,
          "vertex indices must be distinct");
  require(idx_.front() >= 1, errc::index_out_of_range, "mode indices are 1-based");
}

Vertex Vertex::single(int j) { return Vertex(std::vector<int>{j}); }

Vertex Vertex::full(int d) {
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 1);
  return Vertex(std::move(idx));
}

Vertex Vertex::from_key(std::string_view key) {
  std::vector<int> idx;
  std::istringstream in{std::string(key)};
  int j = 0;
  while (in >> j) idx.push_back(j);
  require(in.eof(), errc::parse_error, "bad vertex key: '" + std::string(key) + "'");
  return Vertex(std::move(idx));
}

bool Vertex::contains(int j) const {
  return std::binary_search(idx_.begin(), idx_.end(), j);
}

bool Vertex::contains_all(const Vertex& other) const {
  return std::includes(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end());
}

Vertex Vertex::complement(int d) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(d) - idx_.size());
  for (int j = 1; j <= d; ++j)
    if (!contains(j)) out.push_back(j);
  return Vertex(std::move(out));
}

std::string Vertex::key() const {
  std::string s;
  for (std::size_t i = 0; i < idx_.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(idx_[i]);
  }
  return s;
}

DimensionTree::DimensionTree(int d, std::map<Vertex, std::vector<Vertex>> sons)
    : d_(d), sons_(std::move(sons)) {
  require(d_ >= 2, errc::invalid_mode_count, "mode count must be at least 2");
  root_ = Vertex::full(d_);

  for (const auto& [v, s] : sons_) {
    require(v.size() >= 2, errc::invalid_argument,
            "singleton vertex {" + v.key() + "} cannot have sons");
    require(s.size() >= 2, errc::single_son,
            "vertex {" + v.key() + "} has a single son");
    std::set<int> seen;
    std::size_t total = 0;
    for (const Vertex& b : s) {
      require(v.contains_all(b), errc::incomplete_union,
              "son {" + b.key() + "} is not contained in {" + v.key() + "}");
      for (int j : b.indices()) {
        require(seen.insert(j).second, errc::overlapping_sons,
                "sons of {" + v.key() + "} overlap at index " + std::to_string(j));
      }
      total += static_cast<std::size_t>(b.size());
    }
    require(total == static_cast<std::size_t>(v.size()), errc::incomplete_union,
            "sons of {" + v.key() + "} do not cover it");
  }
  require(sons_.count(root_) == 1, errc::incomplete_union,
          "root {" + root_.key() + "} has no sons");

  for (auto& [v, s] : sons_) {
    (void)v;
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) {
      return a.min_index() < b.min_index();
    });
  }

  // Breadth-first walk from the root assigns levels and discovers the
  // reachable vertex set; anything listed in `sons_` but not reached is a
  // stray entry.
  std::set<Vertex> reached;
  std::deque<Vertex> queue{root_};
  levels_[root_] = 0;
  reached.insert(root_);
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    breadth_first_.push_back(v);
    depth_ = std::max(depth_, levels_[v]);
    for (int j : v.indices())
      require(j >= 1 && j <= d_, errc::index_out_of_range,
              "index " + std::to_string(j) + " outside 1.." + std::to_string(d_));
    auto it = sons_.find(v);
    if (it == sons_.end()) {
      require(v.size() == 1, errc::non_singleton_leaf,
              "vertex {" + v.key() + "} has no sons but is not a singleton");
      continue;
    }
    for (const Vertex& b : it->second) {
      require(reached.insert(b).second, errc::overlapping_sons,
              "vertex {" + b.key() + "} appears under two parents");
      parent_.emplace(b, v);
      levels_[b] = levels_[v] + 1;
      queue.push_back(b);
    }
  }
  require(reached.size() == sons_.size() + static_cast<std::size_t>(d_), errc::invalid_argument,
          "son map contains vertices not reachable from the root");

  vertices_.assign(reached.begin(), reached.end());
}

bool DimensionTree::has_vertex(const Vertex& v) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

bool DimensionTree::is_leaf(const Vertex& v) const { return v.size() == 1; }

const std::vector<Vertex>& DimensionTree::sons(const Vertex& v) const {
  auto it = sons_.find(v);
  require(it != sons_.end(), errc::invalid_argument, "vertex {" + v.key() + "} has no sons");
  return it->second;
}

const Vertex* DimensionTree::parent(const Vertex& v) const {
  auto it = parent_.find(v);
  return it == parent_.end() ? nullptr : &it->second;
}

int DimensionTree::level(const Vertex& v) const {
  auto it = levels_.find(v);
  require(it != levels_.end(), errc::invalid_argument,
          "vertex {" + v.key() + "} is not in the tree");
  return it->second;
}

std::vector<Vertex> DimensionTree::interior_vertices() const {
  std::vector<Vertex> out;
  for (const Vertex& v : breadth_first_)
    if (v.size() >= 2) out.push_back(v);
  return out;
}

std::vector<Vertex> DimensionTree::leaves() const {
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(d_));
  for (int j = 1; j <= d_; ++j) out.push_back(Vertex::single(j));
  return out;
}

std::vector<Vertex> DimensionTree::traversal(TraversalOrder order) const {
  std::vector<Vertex> out = breadth_first_;
  if (order == TraversalOrder::leaves_to_root) std::reverse(out.begin(), out.end());
  return out;
}

namespace {

void render_vertex(const DimensionTree& t, const Vertex& v, std::string& out) {
  out += '(';
  if (t.is_leaf(v)) {
    out += std::to_string(v.indices().front());
  } else {
    for (const Vertex& b : t.sons(v)) render_vertex(t, b, out);
  }
  out += ')';
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    require(pos < text.size(), errc::parse_error, "unexpected end of tree spec");
    return text[pos];
  }

  void expect(char c) {
    require(peek() == c, errc::parse_error,
            std::string("expected '") + c + "' at position " + std::to_string(pos));
    ++pos;
  }

  // Returns the vertex and fills `sons` for every interior vertex below it.
  Vertex parse_node(std::map<Vertex, std::vector<Vertex>>& sons, int d) {
    expect('(');
    skip_ws();
    require(pos < text.size(), errc::parse_error, "unexpected end of tree spec");
    if (std::isdigit(static_cast<unsigned char>(text[pos]))) {
      std::size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      int j = std::stoi(std::string(text.substr(start, pos - start)));
      require(j >= 1 && j <= d, errc::index_out_of_range,
              "leaf index " + std::to_string(j) + " outside 1.." + std::to_string(d));
      expect(')');
      return Vertex::single(j);
    }
    std::vector<Vertex> children;
    while (peek() == '(') children.push_back(parse_node(sons, d));
    expect(')');
    require(!children.empty(), errc::parse_error, "empty vertex '()'");
    require(children.size() >= 2, errc::single_son, "interior vertex with a single son");
    std::vector<int> merged;
    for (const Vertex& c : children) {
      for (int j : c.indices()) {
        require(std::find(merged.begin(), merged.end(), j) == merged.end(),
                errc::overlapping_sons, "index " + std::to_string(j) + " used by two sons");
        merged.push_back(j);
      }
    }
    Vertex v(std::move(merged));
    sons.emplace(v, std::move(children));
    return v;
  }
};

}  // namespace

std::string DimensionTree::render() const {
  std::string out;
  render_vertex(*this, root_, out);
  return out;
}

DimensionTree build_tree(int d, std::string_view spec) {
  require(d >= 2, errc::invalid_mode_count, "mode count must be at least 2");
  Parser p{spec};
  std::map<Vertex, std::vector<Vertex>> sons;
  Vertex top = p.parse_node(sons, d);
  p.skip_ws();
  require(p.pos == spec.size(), errc::parse_error,
          "trailing characters after position " + std::to_string(p.pos));
  require(top == Vertex::full(d), errc::incomplete_union,
          "leaves cover {" + top.key() + "}, expected 1.." + std::to_string(d));
  return DimensionTree(d, std::move(sons));
}

DimensionTree tucker_tree(int d) {
  require(d >= 2, errc::invalid_mode_count, "mode count must be at least 2");
  std::map<Vertex, std::vector<Vertex>> sons;
  std::vector<Vertex> s;
  for (int j = 1; j <= d; ++j) s.push_back(Vertex::single(j));
  sons.emplace(Vertex::full(d), std::move(s));
  return DimensionTree(d, std::move(sons));
}

DimensionTree linear_tree(int d) {
  require(d >= 2, errc::invalid_mode_count, "mode count must be at least 2");
  std::map<Vertex, std::vector<Vertex>> sons;
  for (int j = 1; j <= d - 1; ++j) {
    std::vector<int> tail;
    for (int k = j; k <= d; ++k) tail.push_back(k);
    Vertex v(std::move(tail));
    std::vector<int> rest;
    for (int k = j + 1; k <= d; ++k) rest.push_back(k);
    sons.emplace(v, std::vector<Vertex>{Vertex::single(j), Vertex(std::move(rest))});
  }
  return DimensionTree(d, std::move(sons));
}

namespace {

void balanced_split(const std::vector<int>& idx, std::map<Vertex, std::vector<Vertex>>& sons) {
  if (idx.size() < 2) return;
  // Ties give the extra index to the first half.
  std::size_t left = (idx.size() + 1) / 2;
  std::vector<int> a(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(left));
  std::vector<int> b(idx.begin() + static_cast<std::ptrdiff_t>(left), idx.end());
  balanced_split(a, sons);
  balanced_split(b, sons);
  sons.emplace(Vertex(idx), std::vector<Vertex>{Vertex(std::move(a)), Vertex(std::move(b))});
}

}  // namespace

DimensionTree balanced_tree(int d) {
  require(d >= 2, errc::invalid_mode_count, "mode count must be at least 2");
  std::vector<int> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), 1);
  std::map<Vertex, std::vector<Vertex>> sons;
  balanced_split(all, sons);
  return DimensionTree(d, std::move(sons));
}

}  // namespace treeten
