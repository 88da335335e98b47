#include "bandspike/graph_moments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace bandspike {

Word Word::parse(std::string_view text) {
  Word w;
  for (char c : text) {
    if (c < 'a' || c > 'z') {
      throw ArgumentError("word letters must be lowercase a-z, got '" + std::string(1, c) + "'");
    }
    w.letters.push_back(c - 'a');
  }
  return w;
}

Word Word::power(Label letter, int degree) {
  if (degree < 0) throw ArgumentError("negative word degree");
  return Word(std::vector<Label>(static_cast<std::size_t>(degree), letter));
}

std::string Word::to_string() const {
  std::string s;
  for (Label l : letters) {
    if (l >= 0 && l < 26) {
      s.push_back(static_cast<char>('a' + l));
    } else {
      s += "[" + std::to_string(l) + "]";
    }
  }
  return s;
}

Word Word::rotated(int shift) const {
  Word w = *this;
  if (!w.letters.empty()) {
    const int d = degree();
    std::rotate(w.letters.begin(), w.letters.begin() + ((shift % d) + d) % d, w.letters.end());
  }
  return w;
}

TestGraph::TestGraph(int num_vertices, std::vector<Edge> edges,
                     std::optional<std::pair<VertexId, VertexId>> endpoints)
    : num_vertices_(num_vertices), edges_(std::move(edges)), endpoints_(endpoints) {
  if (num_vertices_ < 0) throw ArgumentError("negative vertex count");
  auto valid = [&](VertexId v) { return v >= 0 && v < num_vertices_; };
  for (const auto& e : edges_) {
    if (!valid(e.src) || !valid(e.tar)) throw ArgumentError("edge references a missing vertex");
    if (e.label < 0) throw ArgumentError("edge labels must be nonnegative");
  }
  if (endpoints_ && (!valid(endpoints_->first) || !valid(endpoints_->second))) {
    throw ArgumentError("endpoint references a missing vertex");
  }
}

TestGraph cycle_graph(const Word& word) {
  const int d = word.degree();
  if (d < 1) throw ArgumentError("cycle graph needs a word of degree >= 1");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(d));
  for (int t = 1; t <= d; ++t) {
    edges.push_back({t % d, t - 1, word.letters[static_cast<std::size_t>(t - 1)]});
  }
  return TestGraph(d, std::move(edges));
}

TestGraph path_graph(const Word& word) {
  const int d = word.degree();
  if (d < 1) throw ArgumentError("path graph needs a word of degree >= 1");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(d));
  for (int t = 1; t <= d; ++t) {
    edges.push_back({t, t - 1, word.letters[static_cast<std::size_t>(t - 1)]});
  }
  return TestGraph(d + 1, std::move(edges), std::make_pair(0, d));
}

void write_dot(std::ostream& os, const TestGraph& t, std::string_view name) {
  os << "digraph " << name << " {\n";
  for (int v = 0; v < t.num_vertices(); ++v) os << "  v" << v << ";\n";
  for (std::size_t e = 0; e < t.edges().size(); ++e) {
    const auto& ed = t.edges()[e];
    os << "  v" << ed.src << " -> v" << ed.tar << " [label=\""
       << Word({ed.label}).to_string() << "\", id=\"e" << e << "\"];\n";
  }
  os << "}\n";
}

// ---------------------------------------------------------------------------

SetPartition::SetPartition(std::vector<int> rgs) : block_of_(std::move(rgs)) {
  int next = 0;
  for (int b : block_of_) {
    if (b < 0 || b > next) throw ArgumentError("not a restricted growth string");
    if (b == next) ++next;
  }
  num_blocks_ = next;
}

SetPartition SetPartition::from_blocks(int n, const std::vector<std::vector<int>>& blocks) {
  if (n < 0) throw ArgumentError("negative ground set size");
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw ArgumentError("partition blocks must be nonempty");
    for (int v : blocks[b]) {
      if (v < 0 || v >= n) throw ArgumentError("block element outside the ground set");
      if (owner[v] != -1) throw ArgumentError("partition blocks overlap");
      owner[v] = static_cast<int>(b);
    }
  }
  // Renumber blocks by first occurrence.
  std::vector<int> renumber(blocks.size(), -1);
  std::vector<int> rgs(static_cast<std::size_t>(n));
  int next = 0;
  for (int v = 0; v < n; ++v) {
    if (owner[v] == -1) throw ArgumentError("partition blocks do not cover the ground set");
    auto& id = renumber[owner[v]];
    if (id == -1) id = next++;
    rgs[v] = id;
  }
  return SetPartition(std::move(rgs));
}

SetPartition SetPartition::singletons(int n) {
  std::vector<int> rgs(static_cast<std::size_t>(n));
  std::iota(rgs.begin(), rgs.end(), 0);
  return SetPartition(std::move(rgs));
}

SetPartition SetPartition::single_block(int n) {
  return SetPartition(std::vector<int>(static_cast<std::size_t>(n), 0));
}

std::vector<std::vector<int>> SetPartition::blocks() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(num_blocks_));
  for (int v = 0; v < size(); ++v) out[block_of_[v]].push_back(v);
  return out;
}

PartitionRange::PartitionRange(int n, int guard) : n_(n) {
  if (n < 0) throw ArgumentError("negative ground set size");
  if (n > guard) {
    throw CapacityError("partition enumeration of " + std::to_string(n) +
                        " elements exceeds the guard of " + std::to_string(guard));
  }
}

PartitionRange::iterator::iterator(int n)
    : rgs_(static_cast<std::size_t>(n), 0),
      prefix_max_(static_cast<std::size_t>(n), 0),
      current_(rgs_),
      done_(false) {}

PartitionRange::iterator& PartitionRange::iterator::operator++() {
  // prefix_max_[i] = max(rgs_[0..i-1]) (0 for i = 0).
  const int n = static_cast<int>(rgs_.size());
  int i = n - 1;
  while (i >= 1 && rgs_[i] > prefix_max_[i]) --i;
  if (i < 1) {
    done_ = true;
    return *this;
  }
  ++rgs_[i];
  for (int k = i + 1; k < n; ++k) {
    rgs_[k] = 0;
    prefix_max_[k] = std::max(prefix_max_[k - 1], rgs_[k - 1]);
  }
  current_ = SetPartition(rgs_);
  return *this;
}

std::uint64_t bell_number(int n) {
  if (n < 0) throw ArgumentError("negative argument");
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (int i = 0; i < n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto x : row) next.push_back(next.back() + x);
    row = std::move(next);
  }
  return row.front();
}

TestGraph quotient(const TestGraph& t, const SetPartition& pi) {
  if (pi.size() != t.num_vertices()) {
    throw ArgumentError("partition of " + std::to_string(pi.size()) +
                        " elements does not match a graph with " +
                        std::to_string(t.num_vertices()) + " vertices");
  }
  std::vector<Edge> edges = t.edges();
  for (auto& e : edges) {
    e.src = pi.block_of(e.src);
    e.tar = pi.block_of(e.tar);
  }
  std::optional<std::pair<VertexId, VertexId>> endpoints;
  if (t.endpoints()) {
    endpoints = std::make_pair(pi.block_of(t.endpoints()->first), pi.block_of(t.endpoints()->second));
  }
  return TestGraph(pi.num_blocks(), std::move(edges), endpoints);
}

EdgeClassification edge_classes(const TestGraph& t) {
  std::map<std::pair<VertexId, VertexId>, std::vector<EdgeId>> groups;
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    const auto& ed = t.edge(e);
    groups[std::minmax(ed.src, ed.tar)].push_back(e);
  }
  EdgeClassification out;
  for (auto& [key, edges] : groups) {
    EdgeClass c{key.first, key.second, std::move(edges)};
    (c.is_loop() ? out.loop_classes : out.nonloop_classes).push_back(std::move(c));
  }
  return out;
}

namespace {

bool is_tree(int num_vertices, const std::vector<EdgeClass>& classes) {
  if (static_cast<int>(classes.size()) != num_vertices - 1) return false;
  std::vector<int> parent(static_cast<std::size_t>(num_vertices));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& c : classes) {
    const int ra = find(c.a), rb = find(c.b);
    if (ra == rb) return false;
    parent[ra] = rb;
  }
  return true;
}

}  // namespace

bool is_double_tree(const TestGraph& t) {
  const auto classes = edge_classes(t);
  if (!classes.loop_classes.empty()) return false;
  for (const auto& c : classes.nonloop_classes) {
    if (c.multiplicity() != 2) return false;
  }
  return is_tree(t.num_vertices(), classes.nonloop_classes);
}

bool is_colored_double_tree(const TestGraph& t) {
  if (!is_double_tree(t)) return false;
  for (const auto& c : edge_classes(t).nonloop_classes) {
    if (t.edge(c.edges[0]).label != t.edge(c.edges[1]).label) return false;
  }
  return true;
}

namespace detail {

ChiPlan plan_evaluation(const TestGraph& t, int dimension, const ChiGuard& guard) {
  const int nv = t.num_vertices();
  if (nv > guard.max_vertices || dimension > guard.max_dimension ||
      std::pow(static_cast<double>(dimension), nv) > guard.max_terms) {
    throw CapacityError("graph evaluation with " + std::to_string(nv) +
                        " vertices at dimension " + std::to_string(dimension) +
                        " exceeds the evaluation guard");
  }
  ChiPlan plan;
  plan.n = dimension;
  plan.closing.resize(static_cast<std::size_t>(nv));
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    const auto& ed = t.edge(e);
    plan.closing[std::max(ed.src, ed.tar)].push_back(e);
  }
  return plan;
}

}  // namespace detail

// ---------------------------------------------------------------------------

bool is_noncrossing(const Pairing& p) {
  for (std::size_t x = 0; x < p.size(); ++x) {
    for (std::size_t y = 0; y < p.size(); ++y) {
      const auto [a, c] = p[x];
      const auto [b, d] = p[y];
      if (a < b && b < c && c < d) return false;
    }
  }
  return true;
}

std::vector<Pairing> nc2(int d) {
  if (d > 16) throw CapacityError("noncrossing pairings are enumerated only for d <= 16");
  std::vector<Pairing> out;
  if (d < 0 || d % 2 != 0) return out;

  std::vector<char> paired(static_cast<std::size_t>(d), 0);
  Pairing current;
  // Always pair the smallest unpaired point; an existing pair (c, e) has
  // c < a, so the new pair (a, b) crosses it iff a < e < b.
  auto recurse = [&](auto&& self) -> void {
    int a = 0;
    while (a < d && paired[a]) ++a;
    if (a == d) {
      out.push_back(current);
      return;
    }
    paired[a] = 1;
    for (int b = a + 1; b < d; ++b) {
      if (paired[b]) continue;
      const bool crosses = std::any_of(current.begin(), current.end(), [&](const auto& pr) {
        return a < pr.second && pr.second < b;
      });
      if (crosses) continue;
      paired[b] = 1;
      current.emplace_back(a, b);
      self(self);
      current.pop_back();
      paired[b] = 0;
    }
    paired[a] = 0;
  };
  recurse(recurse);
  return out;
}

std::uint64_t catalan(int k) {
  if (k < 0) throw ArgumentError("negative argument");
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return c;
}

namespace {

double variance_of(const Variances& variances, Label l) {
  auto it = variances.find(l);
  if (it == variances.end()) {
    throw ArgumentError("no variance for letter " + Word({l}).to_string());
  }
  return it->second;
}

}  // namespace

double tau(const Word& word, const Variances& variances) {
  for (Label l : word.letters) variance_of(variances, l);
  double total = 0.0;
  for (const auto& pairing : nc2(word.degree())) {
    double term = 1.0;
    for (const auto& [j, k] : pairing) {
      const Label lj = word.letters[static_cast<std::size_t>(j)];
      const Label lk = word.letters[static_cast<std::size_t>(k)];
      if (lj != lk) {
        term = 0.0;
        break;
      }
      term *= variance_of(variances, lj);
    }
    total += term;
  }
  return total;
}

DoubleTreeSum double_tree_quotient_weight(const Word& word, const Variances& variances,
                                          int guard) {
  for (Label l : word.letters) variance_of(variances, l);
  const TestGraph cycle = cycle_graph(word);
  DoubleTreeSum sum;
  for (const auto& pi : partitions(cycle.num_vertices(), guard)) {
    const TestGraph q = quotient(cycle, pi);
    if (!is_colored_double_tree(q)) continue;
    double w = 1.0;
    for (const auto& c : edge_classes(q).nonloop_classes) {
      w *= variance_of(variances, q.edge(c.edges.front()).label);
    }
    ++sum.qualifying_partitions;
    sum.weight += w;
  }
  return sum;
}

}  // namespace bandspike
