#pragma once

// Exact moment calculus on test graphs: edge-labelled multidigraphs evaluated
// on families of matrices, their quotients by set partitions, double-tree
// classification and the limiting trace functional over noncrossing
// pairings.
//
// Orientation convention: an edge e contributes M_{label(e)}(phi(tar e),
// phi(src e)). The cycle of a word i(1)...i(d) has vertices v_0..v_{d-1} and
// edge e_t running from v_t to v_{t-1} (indices mod d), so
// chi(cycle_graph(w), M) = Tr(M_{i(1)} ... M_{i(d)}).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bandspike/errors.hpp"

namespace bandspike {

using Label = int;
using VertexId = int;
using EdgeId = int;

struct Word {
  std::vector<Label> letters;

  Word() = default;
  explicit Word(std::vector<Label> l) : letters(std::move(l)) {}
  // "abca" -> {0, 1, 2, 0}; only lowercase letters.
  static Word parse(std::string_view text);
  static Word power(Label letter, int degree);

  int degree() const { return static_cast<int>(letters.size()); }
  std::string to_string() const;
  Word rotated(int shift) const;

  bool operator==(const Word&) const = default;
};

struct Edge {
  VertexId src;
  VertexId tar;
  Label label;

  bool operator==(const Edge&) const = default;
};

class TestGraph {
 public:
  TestGraph() = default;
  // Throws ArgumentError on dangling endpoints.
  TestGraph(int num_vertices, std::vector<Edge> edges,
            std::optional<std::pair<VertexId, VertexId>> endpoints = std::nullopt);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }
  // Distinguished (v_0, v_d) of a path graph, carried through quotients.
  const std::optional<std::pair<VertexId, VertexId>>& endpoints() const { return endpoints_; }

  bool operator==(const TestGraph&) const = default;

 private:
  int num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::optional<std::pair<VertexId, VertexId>> endpoints_;
};

TestGraph cycle_graph(const Word& word);
// Vertices v_0..v_d; edge e_t (t = 1..d, id t-1) runs from v_t to v_{t-1}.
TestGraph path_graph(const Word& word);

// DOT text for inspection.
void write_dot(std::ostream& os, const TestGraph& t, std::string_view name = "T");

// Partition of {0, ..., n-1} stored as a restricted growth string: block ids
// are numbered by first occurrence.
class SetPartition {
 public:
  SetPartition() = default;
  // Throws ArgumentError unless rgs is a restricted growth string.
  explicit SetPartition(std::vector<int> rgs);
  // Throws ArgumentError unless the blocks are disjoint, nonempty and cover
  // {0, ..., n-1}.
  static SetPartition from_blocks(int n, const std::vector<std::vector<int>>& blocks);
  static SetPartition singletons(int n);
  static SetPartition single_block(int n);

  int size() const { return static_cast<int>(block_of_.size()); }
  int num_blocks() const { return num_blocks_; }
  int block_of(int v) const { return block_of_.at(static_cast<std::size_t>(v)); }
  const std::vector<int>& rgs() const { return block_of_; }
  std::vector<std::vector<int>> blocks() const;

  bool operator==(const SetPartition&) const = default;

 private:
  std::vector<int> block_of_;
  int num_blocks_ = 0;
};

inline constexpr int kDefaultPartitionGuard = 12;

// Single-pass generator over all set partitions of {0, ..., n-1} in
// restricted-growth-string order.
class PartitionRange {
 public:
  // Throws CapacityError when n exceeds the guard.
  explicit PartitionRange(int n, int guard = kDefaultPartitionGuard);

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = SetPartition;
    using difference_type = std::ptrdiff_t;
    using pointer = const SetPartition*;
    using reference = const SetPartition&;

    iterator() = default;
    const SetPartition& operator*() const { return current_; }
    const SetPartition* operator->() const { return &current_; }
    iterator& operator++();
    bool operator==(const iterator& other) const { return done_ == other.done_; }

   private:
    friend class PartitionRange;
    explicit iterator(int n);

    std::vector<int> rgs_;
    std::vector<int> prefix_max_;
    SetPartition current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(n_); }
  iterator end() const { return iterator(); }

 private:
  int n_;
};

inline PartitionRange partitions(int n, int guard = kDefaultPartitionGuard) {
  return PartitionRange(n, guard);
}

std::uint64_t bell_number(int n);

// Vertices become blocks (numbered as in pi.rgs()); edge ids, labels and
// order are unchanged.
TestGraph quotient(const TestGraph& t, const SetPartition& pi);

struct EdgeClass {
  VertexId a;  // a <= b
  VertexId b;
  std::vector<EdgeId> edges;

  bool is_loop() const { return a == b; }
  int multiplicity() const { return static_cast<int>(edges.size()); }
};

struct EdgeClassification {
  std::vector<EdgeClass> loop_classes;
  std::vector<EdgeClass> nonloop_classes;
};

// Groups edges by unordered endpoint pair, sorted by (a, b).
EdgeClassification edge_classes(const TestGraph& t);

bool is_double_tree(const TestGraph& t);
bool is_colored_double_tree(const TestGraph& t);

// ---------------------------------------------------------------------------
// Evaluation on matrix families

template <class Scalar>
using MatrixFamily = std::map<Label, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>;

template <class Scalar>
using VertexWeights = std::map<VertexId, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

struct ChiGuard {
  int max_vertices = 8;
  int max_dimension = 16;
  double max_terms = 1e7;
};

namespace detail {

struct ChiPlan {
  int n = 0;
  // Edges whose later endpoint (in vertex order) is v.
  std::vector<std::vector<EdgeId>> closing;
};

ChiPlan plan_evaluation(const TestGraph& t, int dimension, const ChiGuard& guard);

template <class Scalar>
int family_dimension(const TestGraph& t, const MatrixFamily<Scalar>& mats) {
  int n = -1;
  for (const auto& e : t.edges()) {
    auto it = mats.find(e.label);
    if (it == mats.end()) {
      throw ArgumentError("no matrix for label " + std::to_string(e.label));
    }
    const int rows = static_cast<int>(it->second.rows());
    if (it->second.cols() != rows || (n >= 0 && rows != n)) {
      throw ArgumentError("matrix family must be square with a common dimension");
    }
    n = rows;
  }
  if (n < 0) {
    if (mats.empty()) throw ArgumentError("empty matrix family for a graph without edges");
    n = static_cast<int>(mats.begin()->second.rows());
  }
  return n;
}

template <class Scalar>
Scalar evaluate(const TestGraph& t, const MatrixFamily<Scalar>& mats,
                const VertexWeights<Scalar>& weights, bool injective, const ChiGuard& guard) {
  const int n = family_dimension(t, mats);
  for (const auto& [v, w] : weights) {
    if (v < 0 || v >= t.num_vertices()) throw ArgumentError("weight on unknown vertex");
    if (w.size() != n) throw ArgumentError("weight vector dimension mismatch");
  }
  const ChiPlan plan = plan_evaluation(t, n, guard);
  const int nv = t.num_vertices();
  if (injective && nv > n) return Scalar(0);

  std::vector<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*> weight_of(nv, nullptr);
  for (const auto& [v, w] : weights) weight_of[v] = &w;

  std::vector<int> phi(nv, 0);
  std::vector<char> used(n, 0);
  Scalar total(0);

  // Depth-first over vertex assignments; partial products carry every edge
  // whose endpoints are both assigned.
  auto recurse = [&](auto&& self, int v, Scalar partial) -> void {
    if (v == nv) {
      total += partial;
      return;
    }
    for (int x = 0; x < n; ++x) {
      if (injective && used[x]) continue;
      phi[v] = x;
      Scalar p = partial;
      if (weight_of[v]) p *= (*weight_of[v])(x);
      for (EdgeId e : plan.closing[v]) {
        const Edge& ed = t.edge(e);
        p *= mats.at(ed.label)(phi[ed.tar], phi[ed.src]);
      }
      if (p == Scalar(0)) continue;
      if (injective) used[x] = 1;
      self(self, v + 1, p);
      if (injective) used[x] = 0;
    }
  };
  recurse(recurse, 0, Scalar(1));
  return total;
}

}  // namespace detail

// Sum over all maps phi: V -> [N] of prod_e M_{label e}(phi(tar e), phi(src e)),
// times prod_v w_v(phi(v)) for every weighted vertex.
template <class Scalar>
Scalar chi(const TestGraph& t, const MatrixFamily<Scalar>& mats,
           const VertexWeights<Scalar>& weights = {}, const ChiGuard& guard = {}) {
  return detail::evaluate(t, mats, weights, false, guard);
}

// As chi, restricted to injective phi.
template <class Scalar>
Scalar chi0(const TestGraph& t, const MatrixFamily<Scalar>& mats,
            const VertexWeights<Scalar>& weights = {}, const ChiGuard& guard = {}) {
  return detail::evaluate(t, mats, weights, true, guard);
}

// Weights of the quotient T^pi: a block's weight is the entrywise product of
// its members' weights.
template <class Scalar>
VertexWeights<Scalar> quotient_weights(const VertexWeights<Scalar>& weights,
                                       const SetPartition& pi) {
  VertexWeights<Scalar> out;
  for (const auto& [v, w] : weights) {
    const int block = pi.block_of(v);
    auto it = out.find(block);
    if (it == out.end()) {
      out.emplace(block, w);
    } else {
      it->second = it->second.cwiseProduct(w);
    }
  }
  return out;
}

// Sum over pi in P(V) of chi0(T^pi); equals chi(T) by Moebius inversion.
template <class Scalar>
Scalar moebius_sum(const TestGraph& t, const MatrixFamily<Scalar>& mats,
                   const VertexWeights<Scalar>& weights = {}, const ChiGuard& guard = {}) {
  Scalar total(0);
  for (const auto& pi : partitions(t.num_vertices())) {
    total += chi0(quotient(t, pi), mats, quotient_weights(weights, pi), guard);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Noncrossing pairings and the limiting trace

// A pairing of {0, ..., d-1} as (j, k) pairs with j < k, sorted by j.
using Pairing = std::vector<std::pair<int, int>>;

// All noncrossing pairings of {0, ..., d-1}; empty for odd d. Throws
// CapacityError for d > 16.
std::vector<Pairing> nc2(int d);

bool is_noncrossing(const Pairing& p);

std::uint64_t catalan(int k);

using Variances = std::map<Label, double>;

// Sum over NC2(d) of prod over pairs of sigma_{i(j)} sigma_{i(k)} [i(j) = i(k)].
double tau(const Word& word, const Variances& variances);

struct DoubleTreeSum {
  std::size_t qualifying_partitions = 0;
  double weight = 0.0;
};

// Sum over partitions pi of the cycle vertices with C_p^pi a colored double
// tree of prod over parallel pairs of sigma^2_{label}.
DoubleTreeSum double_tree_quotient_weight(const Word& word, const Variances& variances,
                                          int guard = kDefaultPartitionGuard);

}  // namespace bandspike
