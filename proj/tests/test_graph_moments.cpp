#include <gtest/gtest.h>

#include <complex>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "bandspike/graph_moments.hpp"

using namespace bandspike;

namespace {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

IntMatrix random_int_matrix(std::mt19937_64& gen, int n, int range = 3) {
  std::uniform_int_distribution<int> d(-range, range);
  IntMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = d(gen);
  }
  return m;
}

IntVector random_int_vector(std::mt19937_64& gen, int n) {
  std::uniform_int_distribution<int> d(-3, 3);
  IntVector v(n);
  for (int i = 0; i < n; ++i) v(i) = d(gen);
  return v;
}

IntMatrix word_product(const Word& w, const MatrixFamily<long long>& mats, int n) {
  IntMatrix p = IntMatrix::Identity(n, n);
  for (Label l : w.letters) p = (p * mats.at(l)).eval();
  return p;
}

// Independent set-partition enumeration: insert element k into each existing
// block or a new one.
std::vector<std::vector<std::vector<int>>> partitions_oracle(int n) {
  std::vector<std::vector<std::vector<int>>> out{{}};
  for (int k = 0; k < n; ++k) {
    std::vector<std::vector<std::vector<int>>> next;
    for (const auto& p : out) {
      for (std::size_t b = 0; b < p.size(); ++b) {
        auto q = p;
        q[b].push_back(k);
        next.push_back(q);
      }
      auto q = p;
      q.push_back({k});
      next.push_back(q);
    }
    out = std::move(next);
  }
  return out;
}

// Bell numbers from the binomial recurrence B(n+1) = sum C(n,k) B(k).
std::uint64_t bell_oracle(int n) {
  std::vector<std::uint64_t> b{1};
  for (int m = 0; m < n; ++m) {
    std::uint64_t sum = 0, binom = 1;
    for (int k = 0; k <= m; ++k) {
      sum += binom * b[k];
      binom = binom * (m - k) / (k + 1);
    }
    b.push_back(sum);
  }
  return b[n];
}

std::uint64_t catalan_oracle(int k) {
  std::vector<std::uint64_t> c{1};
  for (int m = 1; m <= k; ++m) {
    std::uint64_t s = 0;
    for (int i = 0; i < m; ++i) s += c[i] * c[m - 1 - i];
    c.push_back(s);
  }
  return c[k];
}

// All pairings of {0..d-1} by brute force.
void all_pairings(std::vector<int> rest, Pairing cur, std::vector<Pairing>& out) {
  if (rest.empty()) {
    std::sort(cur.begin(), cur.end());
    out.push_back(cur);
    return;
  }
  const int first = rest.front();
  for (std::size_t k = 1; k < rest.size(); ++k) {
    std::vector<int> r;
    for (std::size_t i = 1; i < rest.size(); ++i) {
      if (i != k) r.push_back(rest[i]);
    }
    Pairing c = cur;
    c.emplace_back(first, rest[k]);
    all_pairings(r, c, out);
  }
}

bool crosses(const std::pair<int, int>& p, const std::pair<int, int>& q) {
  return (p.first < q.first && q.first < p.second && p.second < q.second) ||
         (q.first < p.first && p.first < q.second && q.second < p.second);
}

std::vector<Word> words(int degree, int letters) {
  std::vector<Word> out;
  std::vector<Label> w(static_cast<std::size_t>(degree), 0);
  for (;;) {
    out.emplace_back(w);
    int i = degree - 1;
    while (i >= 0 && w[i] == letters - 1) w[i--] = 0;
    if (i < 0) return out;
    ++w[i];
  }
}

}  // namespace

TEST(Word, ParseAndPrint) {
  const Word w = Word::parse("abca");
  EXPECT_EQ(w.letters, (std::vector<Label>{0, 1, 2, 0}));
  EXPECT_EQ(w.to_string(), "abca");
  EXPECT_EQ(Word::power(1, 3).to_string(), "bbb");
  EXPECT_EQ(w.rotated(1).to_string(), "bcaa");
  EXPECT_THROW(Word::parse("aB"), ArgumentError);
}

TEST(CycleGraph, Examples) {
  const TestGraph one = cycle_graph(Word::parse("a"));
  EXPECT_EQ(one.num_vertices(), 1);
  ASSERT_EQ(one.num_edges(), 1);
  EXPECT_EQ(one.edge(0).src, one.edge(0).tar);

  const TestGraph two = cycle_graph(Word::parse("ab"));
  EXPECT_EQ(two.num_vertices(), 2);
  ASSERT_EQ(two.num_edges(), 2);
  EXPECT_EQ(two.edge(0).src, two.edge(1).tar);
  EXPECT_EQ(two.edge(0).tar, two.edge(1).src);
  EXPECT_EQ(two.edge(0).label, 0);
  EXPECT_EQ(two.edge(1).label, 1);
}

TEST(CycleGraph, IdentityFamilyGivesDimension) {
  for (const Word& w : {Word::parse("a"), Word::parse("ab"), Word::parse("abca"), Word::parse("bbbb")}) {
    const MatrixFamily<long long> id{{0, IntMatrix::Identity(3, 3)},
                                     {1, IntMatrix::Identity(3, 3)},
                                     {2, IntMatrix::Identity(3, 3)}};
    EXPECT_EQ(chi(cycle_graph(w), id), 3);
  }
}

TEST(PathGraph, Examples) {
  const TestGraph a = path_graph(Word::parse("a"));
  EXPECT_EQ(a.num_vertices(), 2);
  EXPECT_EQ(a.num_edges(), 1);

  const TestGraph aaa = path_graph(Word::parse("aaa"));
  EXPECT_EQ(aaa.num_vertices(), 4);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(aaa.edge(t).src, t + 1);
    EXPECT_EQ(aaa.edge(t).tar, t);
  }
  ASSERT_TRUE(aaa.endpoints());
  EXPECT_EQ(*aaa.endpoints(), std::make_pair(0, 3));
}

TEST(PathGraph, ClosingEndpointsGivesCycle) {
  for (const Word& w : {Word::parse("a"), Word::parse("ab"), Word::parse("abcab")}) {
    const int d = w.degree();
    std::vector<int> rgs(static_cast<std::size_t>(d + 1));
    for (int v = 0; v < d; ++v) rgs[v] = v;
    rgs[d] = 0;
    const TestGraph q = quotient(path_graph(w), SetPartition(rgs));
    const TestGraph c = cycle_graph(w);
    EXPECT_EQ(q.num_vertices(), c.num_vertices());
    EXPECT_EQ(q.edges(), c.edges());
  }
}

TEST(Partitions, CountsMatchBell) {
  EXPECT_EQ(std::distance(partitions(1).begin(), partitions(1).end()), 1);
  std::size_t three = 0;
  for (const auto& p : partitions(3)) {
    (void)p;
    ++three;
  }
  EXPECT_EQ(three, 5u);
  for (int n = 0; n <= 9; ++n) {
    std::size_t count = 0;
    for (const auto& p : partitions(n)) {
      (void)p;
      ++count;
    }
    EXPECT_EQ(count, bell_oracle(n)) << n;
    EXPECT_EQ(bell_number(n), bell_oracle(n)) << n;
  }
  EXPECT_EQ(bell_number(6), 203u);
}

TEST(Partitions, EachPartitionExactlyOnce) {
  for (int n = 1; n <= 7; ++n) {
    std::set<std::vector<std::vector<int>>> seen;
    for (const auto& p : partitions(n)) {
      auto blocks = p.blocks();
      for (auto& b : blocks) std::sort(b.begin(), b.end());
      std::sort(blocks.begin(), blocks.end());
      EXPECT_TRUE(seen.insert(blocks).second);
    }
    std::set<std::vector<std::vector<int>>> expected;
    for (auto blocks : partitions_oracle(n)) {
      std::sort(blocks.begin(), blocks.end());
      expected.insert(blocks);
    }
    EXPECT_EQ(seen, expected);
  }
}

TEST(Partitions, GuardAndValidation) {
  EXPECT_THROW(partitions(13), CapacityError);
  EXPECT_NO_THROW(partitions(13, 13));
  EXPECT_THROW(SetPartition({1, 0}), ArgumentError);
  EXPECT_THROW(SetPartition::from_blocks(3, {{0, 1}}), ArgumentError);
  EXPECT_THROW(SetPartition::from_blocks(3, {{0, 1}, {1, 2}}), ArgumentError);
  EXPECT_EQ(SetPartition::from_blocks(3, {{2}, {0, 1}}).rgs(), (std::vector<int>{0, 0, 1}));
}

TEST(Quotient, SingletonsAndSingleBlock) {
  const TestGraph c = cycle_graph(Word::parse("abcd"));
  EXPECT_EQ(quotient(c, SetPartition::singletons(4)), c);
  const TestGraph one = quotient(c, SetPartition::single_block(4));
  EXPECT_EQ(one.num_vertices(), 1);
  EXPECT_EQ(one.num_edges(), 4);
  for (const auto& e : one.edges()) EXPECT_EQ(e.src, e.tar);
  EXPECT_THROW(quotient(c, SetPartition::singletons(3)), ArgumentError);
}

TEST(Quotient, PathFoldsIntoDoubleTree) {
  const TestGraph path = path_graph(Word::parse("aaaa"));
  const SetPartition pi = SetPartition::from_blocks(5, {{0, 4}, {1, 3}, {2}});
  const TestGraph q = quotient(path, pi);
  EXPECT_EQ(q.num_vertices(), 3);
  EXPECT_EQ(q.num_edges(), 4);
  EXPECT_TRUE(is_colored_double_tree(q));

  const EdgeClassification classes = edge_classes(q);
  EXPECT_TRUE(classes.loop_classes.empty());
  ASSERT_EQ(classes.nonloop_classes.size(), 2u);
  EXPECT_EQ(classes.nonloop_classes[0].multiplicity(), 2);
  EXPECT_EQ(classes.nonloop_classes[1].multiplicity(), 2);
}

TEST(EdgeClasses, Examples) {
  const EdgeClassification two = edge_classes(cycle_graph(Word::parse("ab")));
  EXPECT_TRUE(two.loop_classes.empty());
  ASSERT_EQ(two.nonloop_classes.size(), 1u);
  EXPECT_EQ(two.nonloop_classes[0].multiplicity(), 2);

  const EdgeClassification loop = edge_classes(cycle_graph(Word::parse("a")));
  ASSERT_EQ(loop.loop_classes.size(), 1u);
  EXPECT_EQ(loop.loop_classes[0].multiplicity(), 1);
  EXPECT_TRUE(loop.nonloop_classes.empty());
}

TEST(EdgeClasses, PartitionTheEdgeSet) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 50; ++rep) {
    const int nv = 1 + static_cast<int>(gen() % 5);
    const int ne = static_cast<int>(gen() % 8);
    std::vector<Edge> edges;
    for (int e = 0; e < ne; ++e) {
      edges.push_back({static_cast<int>(gen() % nv), static_cast<int>(gen() % nv), static_cast<int>(gen() % 2)});
    }
    const EdgeClassification c = edge_classes(TestGraph(nv, edges));
    std::multiset<int> ids;
    for (const auto* group : {&c.loop_classes, &c.nonloop_classes}) {
      for (const auto& cls : *group) {
        for (EdgeId e : cls.edges) {
          ids.insert(e);
          const Edge& ed = edges[e];
          EXPECT_EQ(std::make_pair(std::min(ed.src, ed.tar), std::max(ed.src, ed.tar)), std::make_pair(cls.a, cls.b));
        }
      }
    }
    EXPECT_EQ(ids.size(), static_cast<std::size_t>(ne));
    EXPECT_EQ(std::set<int>(ids.begin(), ids.end()).size(), static_cast<std::size_t>(ne));
  }
}

TEST(DoubleTree, Examples) {
  EXPECT_TRUE(is_colored_double_tree(cycle_graph(Word::parse("aa"))));
  EXPECT_FALSE(is_colored_double_tree(cycle_graph(Word::parse("a"))));
  EXPECT_FALSE(is_colored_double_tree(TestGraph(2, {{0, 1, 0}, {1, 0, 0}, {0, 0, 0}})));
  EXPECT_FALSE(is_colored_double_tree(cycle_graph(Word::parse("ab"))));
  EXPECT_TRUE(is_double_tree(cycle_graph(Word::parse("ab"))));
  // A 4-cycle with each edge doubled is not a tree.
  EXPECT_FALSE(is_double_tree(TestGraph(
      4, {{0, 1, 0}, {1, 0, 0}, {1, 2, 0}, {2, 1, 0}, {2, 3, 0}, {3, 2, 0}, {3, 0, 0}, {0, 3, 0}})));
}

TEST(TestGraph, RejectsDanglingEdges) {
  EXPECT_THROW(TestGraph(2, {{0, 2, 0}}), ArgumentError);
  EXPECT_THROW(TestGraph(2, {{0, 1, -1}}), ArgumentError);
}

TEST(TestGraph, DotOutput) {
  std::ostringstream os;
  write_dot(os, cycle_graph(Word::parse("ab")), "C");
  EXPECT_EQ(os.str(),
            "digraph C {\n  v0;\n  v1;\n  v1 -> v0 [label=\"a\", id=\"e0\"];\n"
            "  v0 -> v1 [label=\"b\", id=\"e1\"];\n}\n");
}

TEST(Chi, Examples) {
  const MatrixFamily<long long> id{{0, IntMatrix::Identity(3, 3)}};
  EXPECT_EQ(chi(cycle_graph(Word::parse("aa")), id), 3);
  EXPECT_EQ(chi0(cycle_graph(Word::parse("aa")), id), 0);

  std::mt19937_64 gen(1);
  const MatrixFamily<long long> m{{0, random_int_matrix(gen, 3)}};
  EXPECT_EQ(chi(cycle_graph(Word::parse("a")), m), m.at(0).trace());

  const MatrixFamily<long long> small{{0, random_int_matrix(gen, 2)}};
  EXPECT_EQ(chi0(cycle_graph(Word::parse("aaaa")), small), 0);
}

TEST(Chi, ErrorsAndGuards) {
  const MatrixFamily<long long> a{{0, IntMatrix::Identity(3, 3)}};
  EXPECT_THROW(chi(cycle_graph(Word::parse("ab")), a), ArgumentError);
  const MatrixFamily<long long> mixed{{0, IntMatrix::Identity(3, 3)}, {1, IntMatrix::Identity(2, 2)}};
  EXPECT_THROW(chi(cycle_graph(Word::parse("ab")), mixed), ArgumentError);
  EXPECT_THROW(chi(cycle_graph(Word::power(0, 9)), a), CapacityError);
  const MatrixFamily<long long> big{{0, IntMatrix::Identity(17, 17)}};
  EXPECT_THROW(chi(cycle_graph(Word::parse("a")), big), CapacityError);
}

TEST(Chi, TraceIdentityAllWords) {
  std::mt19937_64 gen(2);
  for (int n = 1; n <= 5; ++n) {
    for (int d = 1; d <= 6; ++d) {
      for (const Word& w : words(d, 2)) {
        const MatrixFamily<long long> m{{0, random_int_matrix(gen, n)}, {1, random_int_matrix(gen, n)}};
        ASSERT_EQ(chi(cycle_graph(w), m), word_product(w, m, n).trace()) << w.to_string() << " N=" << n;
      }
    }
  }
}

TEST(Chi, MoebiusIdentityRandomGraphs) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 60; ++rep) {
    const int nv = 1 + static_cast<int>(gen() % 6);
    const int n = 1 + static_cast<int>(gen() % (nv == 6 ? 3 : 5));
    const int ne = static_cast<int>(gen() % 7);
    std::vector<Edge> edges;
    for (int e = 0; e < ne; ++e) {
      edges.push_back({static_cast<int>(gen() % nv), static_cast<int>(gen() % nv), static_cast<int>(gen() % 2)});
    }
    const TestGraph t(nv, edges);
    const MatrixFamily<long long> m{{0, random_int_matrix(gen, n)}, {1, random_int_matrix(gen, n)}};
    ASSERT_EQ(moebius_sum(t, m), chi(t, m)) << "rep " << rep;
  }
}

TEST(Chi, WeightedPathIsBilinearForm) {
  std::mt19937_64 gen(4);
  for (int n = 1; n <= 4; ++n) {
    for (int d = 1; d <= 4; ++d) {
      for (const Word& w : words(d, 2)) {
        const MatrixFamily<long long> m{{0, random_int_matrix(gen, n)}, {1, random_int_matrix(gen, n)}};
        const IntVector x = random_int_vector(gen, n), y = random_int_vector(gen, n);
        const TestGraph path = path_graph(w);
        const VertexWeights<long long> weights{{d, x}, {0, y}};
        const IntMatrix p = word_product(w, m, n);
        ASSERT_EQ(chi(path, m, weights), y.dot(p * x));
        ASSERT_EQ(moebius_sum(path, m, weights), y.dot(p * x));

        // Identifying the endpoints forces phi(v_0) = phi(v_d).
        std::vector<int> rgs(static_cast<std::size_t>(d + 1));
        for (int v = 0; v < d; ++v) rgs[v] = v;
        rgs[d] = 0;
        const SetPartition close(rgs);
        const long long diagonal = (p.diagonal().array() * x.array() * y.array()).sum();
        ASSERT_EQ(chi(quotient(path, close), m, quotient_weights(weights, close)), diagonal);
      }
    }
  }
}

TEST(Chi, ComplexWeights) {
  using C = std::complex<double>;
  std::mt19937_64 gen(6);
  std::normal_distribution<double> nd;
  const int n = 3;
  Eigen::MatrixXcd a(n, n);
  Eigen::VectorXcd x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x(i) = C(nd(gen), nd(gen));
    y(i) = C(nd(gen), nd(gen));
    for (int j = 0; j < n; ++j) a(i, j) = C(nd(gen), nd(gen));
  }
  const MatrixFamily<C> m{{0, a}};
  const VertexWeights<C> weights{{2, x}, {0, y.conjugate()}};
  const C got = chi(path_graph(Word::parse("aa")), m, weights);
  const C want = y.dot(a * a * x);
  EXPECT_NEAR(std::abs(got - want), 0.0, 1e-12);
}

TEST(NC2, Examples) {
  EXPECT_EQ(nc2(2).size(), 1u);
  const auto four = nc2(4);
  ASSERT_EQ(four.size(), 2u);
  const std::set<Pairing> got(four.begin(), four.end());
  const std::set<Pairing> want{{{0, 1}, {2, 3}}, {{0, 3}, {1, 2}}};
  EXPECT_EQ(got, want);
  EXPECT_EQ(nc2(6).size(), 5u);
  EXPECT_TRUE(nc2(3).empty());
  EXPECT_THROW(nc2(18), CapacityError);
}

TEST(NC2, MatchesBruteForceFilter) {
  for (int d = 2; d <= 10; d += 2) {
    std::vector<int> ground(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) ground[i] = i;
    std::vector<Pairing> all;
    all_pairings(ground, {}, all);
    std::set<Pairing> expected;
    for (const auto& p : all) {
      bool ok = true;
      for (std::size_t i = 0; i < p.size() && ok; ++i) {
        for (std::size_t j = i + 1; j < p.size() && ok; ++j) ok = !crosses(p[i], p[j]);
      }
      EXPECT_EQ(is_noncrossing(p), ok);
      if (ok) expected.insert(p);
    }
    const auto got = nc2(d);
    EXPECT_EQ(std::set<Pairing>(got.begin(), got.end()), expected);
    EXPECT_EQ(got.size(), catalan_oracle(d / 2));
    EXPECT_EQ(catalan(d / 2), catalan_oracle(d / 2));
  }
}

TEST(Tau, Examples) {
  EXPECT_DOUBLE_EQ(tau(Word::parse("aa"), {{0, 1.0}}), 1.0);
  EXPECT_DOUBLE_EQ(tau(Word::parse("aaaa"), {{0, 1.0}}), 2.0);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_DOUBLE_EQ(tau(Word::power(0, 2 * k), {{0, 1.5}}),
                     static_cast<double>(catalan_oracle(k)) * std::pow(1.5, k));
  }
  EXPECT_DOUBLE_EQ(tau(Word::parse("abab"), {{0, 2.0}, {1, 3.0}}), 0.0);
  EXPECT_DOUBLE_EQ(tau(Word::parse("abba"), {{0, 2.0}, {1, 3.0}}), 6.0);
  EXPECT_THROW(tau(Word::parse("ab"), {{0, 1.0}}), ArgumentError);
}

TEST(Tau, OddVanishesAndRotationInvariant) {
  const Variances v{{0, 1.0}, {1, 2.0}, {2, 3.0}};
  for (int d = 1; d <= 6; ++d) {
    for (const Word& w : words(d, 3)) {
      const double t = tau(w, v);
      if (d % 2) EXPECT_EQ(t, 0.0);
      for (int s = 1; s < d; ++s) ASSERT_DOUBLE_EQ(tau(w.rotated(s), v), t) << w.to_string();
    }
  }
}

TEST(DoubleTreeWeight, Examples) {
  const DoubleTreeSum aa = double_tree_quotient_weight(Word::parse("aa"), {{0, 2.5}});
  EXPECT_EQ(aa.qualifying_partitions, 1u);
  EXPECT_DOUBLE_EQ(aa.weight, 2.5);
  const DoubleTreeSum aaaa = double_tree_quotient_weight(Word::parse("aaaa"), {{0, 2.0}});
  EXPECT_EQ(aaaa.qualifying_partitions, 2u);
  EXPECT_DOUBLE_EQ(aaaa.weight, 8.0);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_EQ(double_tree_quotient_weight(Word::power(0, 2 * k), {{0, 1.0}}).qualifying_partitions,
              catalan_oracle(k));
  }
  EXPECT_THROW(double_tree_quotient_weight(Word::power(0, 13), {{0, 1.0}}), CapacityError);
}

TEST(DoubleTreeWeight, EqualsTauUpToDegreeSix) {
  const Variances v{{0, 1.0}, {1, 2.0}, {2, 3.0}};
  for (int d = 1; d <= 6; ++d) {
    for (const Word& w : words(d, 3)) {
      ASSERT_DOUBLE_EQ(double_tree_quotient_weight(w, v).weight, tau(w, v)) << w.to_string();
    }
  }
}

TEST(DoubleTreeWeight, PathQuotientsCloseEndpoints) {
  for (int d = 1; d <= 5; ++d) {
    for (const Word& w : words(d, 2)) {
      const TestGraph path = path_graph(w);
      for (const auto& pi : partitions(path.num_vertices())) {
        if (is_colored_double_tree(quotient(path, pi))) {
          ASSERT_EQ(pi.block_of(0), pi.block_of(d)) << w.to_string();
        }
      }
    }
  }
}
