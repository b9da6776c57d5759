// Copyright 2026 The summon toolkit developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "summon/causal_graph.hpp"
#include "summon/errors.hpp"

using namespace summon;

namespace {

CausalGraph make(int n, std::vector<std::pair<int, int>> edges) {
  return CausalGraph::from_edges(n, edges);
}

}  // namespace

TEST_CASE("CausalGraph: construction and adjacency") {
  CHECK_THROWS_AS(CausalGraph(0), InputError);
  CHECK_THROWS_AS(CausalGraph(9), InputError);
  CausalGraph g(3);
  CHECK(g.n() == 3);
  CHECK_FALSE(g.adj(0, 1));
  g.set_arrow(0, 1);
  CHECK(g.adj(0, 1));
  CHECK_FALSE(g.adj(1, 0));
  g.set_arrow(0, 1, false);
  CHECK_FALSE(g.adj(0, 1));
  CHECK_THROWS_AS(g.set_arrow(1, 1), InputError);
  CHECK_THROWS_AS(g.adj(0, 3), InputError);
  CHECK_THROWS_AS(make(2, {{0, 2}}), InputError);
}

TEST_CASE("arrow/connected/bidirected") {
  CausalGraph g = make(3, {{0, 1}, {1, 0}, {1, 2}});
  CHECK(arrow(g, 0, 1));
  CHECK(arrow(g, 1, 0));
  CHECK(bidirected(g, 0, 1));
  CHECK(connected(g, 1, 2));
  CHECK_FALSE(bidirected(g, 1, 2));
  CHECK_FALSE(connected(g, 0, 2));
  CHECK_FALSE(is_oriented(g));
  g.set_arrow(1, 0, false);
  CHECK(is_oriented(g));
}

TEST_CASE("is_tournament on subsets") {
  CausalGraph g = make(4, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(is_tournament(g, {0, 1, 2}));
  CHECK_FALSE(is_tournament(g, {0, 1, 3}));   // 3 disconnected
  CHECK(is_tournament(g, {1, 2}));
  CHECK(is_tournament(g, {3}));               // single vertex
  g.set_arrow(1, 0);
  CHECK_FALSE(is_tournament(g, {0, 1, 2}));   // bidirected edge
  CHECK_THROWS_AS(is_tournament(g, {0, 0}), InputError);
}

TEST_CASE("topological_order") {
  // Transitive tournament 2 -> 0 -> 1 (plus 2 -> 1): unique order {2,0,1}.
  CausalGraph g = make(3, {{2, 0}, {0, 1}, {2, 1}});
  auto order = topological_order(g, all_vertices(g));
  REQUIRE(order.has_value());
  CHECK(*order == std::vector<int>{2, 0, 1});

  CausalGraph cyc = make(3, {{0, 1}, {1, 2}, {2, 0}});
  CHECK_FALSE(topological_order(cyc, all_vertices(cyc)).has_value());
  // ... but each 2-vertex induced subgraph is fine.
  auto sub = topological_order(cyc, {1, 2});
  REQUIRE(sub.has_value());
  CHECK(*sub == std::vector<int>{1, 2});

  CausalGraph bi = make(2, {{0, 1}, {1, 0}});
  CHECK_FALSE(topological_order(bi, all_vertices(bi)).has_value());
}

TEST_CASE("classify_triple covers every shape exactly") {
  const std::array<int, 3> t{0, 1, 2};
  CHECK(classify_triple(make(3, {{0, 1}, {2, 1}}), t) == TripleClass::TwoIn);
  CHECK(classify_triple(make(3, {{1, 0}, {1, 2}}), t) == TripleClass::TwoOut);
  CHECK(classify_triple(make(3, {{0, 1}, {1, 2}, {2, 0}}), t) == TripleClass::ThreeCycle);
  CHECK(classify_triple(make(3, {{0, 1}, {1, 2}}), t) == TripleClass::InAndOut);
  // Tournament with a sink: in-degree-2 vertex plus a third edge.
  CHECK(classify_triple(make(3, {{0, 1}, {2, 1}, {0, 2}}), t) ==
        TripleClass::HasTwoInVertex);
  CHECK(classify_triple(make(3, {{0, 1}}), t) == TripleClass::Subcritical);
  CHECK(classify_triple(make(3, {}), t) == TripleClass::Subcritical);
  CHECK(classify_triple(make(3, {{0, 1}, {1, 0}, {0, 2}}), t) ==
        TripleClass::HasBidirected);
  // Works on triples inside larger graphs, any vertex order.
  CausalGraph g = make(5, {{4, 1}, {3, 1}});
  CHECK(classify_triple(g, {1, 3, 4}) == TripleClass::TwoIn);
  CHECK_THROWS_AS(classify_triple(g, {1, 1, 2}), InputError);
}

TEST_CASE("classification is exhaustive and consistent on all oriented triples") {
  GraphEnumeration en = enumerate_graphs(3, false);
  int counts[7] = {0, 0, 0, 0, 0, 0, 0};
  for (std::uint64_t i = 0; i < en.size(); ++i) {
    CausalGraph g = en.at(i);
    TripleClass c = classify_triple(g, {0, 1, 2});
    ++counts[static_cast<int>(c)];
    CHECK(c != TripleClass::HasBidirected);
    const bool two_in = triple_has_two_in_vertex(g, {0, 1, 2});
    CHECK(two_in == (c == TripleClass::TwoIn || c == TripleClass::HasTwoInVertex));
  }
  // 27 oriented triples total: 3 labellings of TwoIn, TwoOut, InAndOut
  // (x2 for edge direction), 2 of ThreeCycle, 6 tournaments with a sink,
  // 1 empty + 6 single-edge subcritical.
  CHECK(counts[static_cast<int>(TripleClass::TwoIn)] == 3);
  CHECK(counts[static_cast<int>(TripleClass::TwoOut)] == 3);
  CHECK(counts[static_cast<int>(TripleClass::ThreeCycle)] == 2);
  CHECK(counts[static_cast<int>(TripleClass::InAndOut)] == 6);
  CHECK(counts[static_cast<int>(TripleClass::HasTwoInVertex)] == 6);
  CHECK(counts[static_cast<int>(TripleClass::Subcritical)] == 7);
}

TEST_CASE("s_set lists vertices with no edge into j") {
  CausalGraph g = make(3, {{0, 1}});
  CHECK(s_set(g, 0) == std::vector<int>{1, 2});
  CHECK(s_set(g, 1) == std::vector<int>{2});
  CHECK(s_set(g, 2) == std::vector<int>{0, 1});
  CausalGraph bi = make(2, {{0, 1}, {1, 0}});
  CHECK(s_set(bi, 0).empty());
}

TEST_CASE("x_partition: frozen shapes") {
  // Two-out: 1 -> 0, 1 -> 2; X = {0,2}, a single non-adjacent pair.
  auto part = x_partition(make(3, {{1, 0}, {1, 2}}));
  REQUIRE(part.has_value());
  CHECK(*part == std::vector<std::pair<int, int>>{{0, 2}});

  // Star: the three leaves are pairwise non-adjacent, so no pairing exists.
  CHECK_FALSE(x_partition(make(4, {{0, 1}, {0, 2}, {0, 3}})).has_value());

  // Tournament: X is empty and the partition is trivially present.
  auto full = x_partition(make(3, {{0, 1}, {1, 2}, {0, 2}}));
  REQUIRE(full.has_value());
  CHECK(full->empty());

  // Two disjoint non-adjacent pairs.
  auto two = x_partition(make(4, {{0, 1}, {0, 3}, {2, 1}, {2, 3}}));
  REQUIRE(two.has_value());
  CHECK(*two == std::vector<std::pair<int, int>>{{0, 2}, {1, 3}});
}

TEST_CASE("nonadjacent pair helpers") {
  CausalGraph g = make(4, {{0, 1}, {2, 3}});
  CHECK(count_nonadjacent_pairs(g) == 4);
  CHECK(nonadjacent_pairs(g) ==
        std::vector<std::pair<int, int>>{{0, 2}, {0, 3}, {1, 2}, {1, 3}});
  CHECK(count_nonadjacent_pairs(make(2, {{0, 1}})) == 0);
}

TEST_CASE("is_transitive_tournament") {
  CHECK(is_transitive_tournament(make(3, {{2, 0}, {0, 1}, {2, 1}})));
  CHECK(is_transitive_tournament(make(1, {})));
  CHECK_FALSE(is_transitive_tournament(make(3, {{0, 1}, {1, 2}, {2, 0}})));
  CHECK_FALSE(is_transitive_tournament(make(3, {{0, 1}, {1, 2}})));
  CHECK_FALSE(is_transitive_tournament(make(2, {{0, 1}, {1, 0}})));
}

TEST_CASE("dominating_gap_pair") {
  // n=3: 0 and 1 non-adjacent, both point at 2.
  auto p3 = dominating_gap_pair(make(3, {{0, 2}, {1, 2}}));
  REQUIRE(p3.has_value());
  CHECK(*p3 == std::pair<int, int>{0, 1});

  // n=4: gap pair {1,3} dominating a 2-vertex tournament {0,2}.
  auto p4 = dominating_gap_pair(
      make(4, {{1, 0}, {1, 2}, {3, 0}, {3, 2}, {0, 2}}));
  REQUIRE(p4.has_value());
  CHECK(*p4 == std::pair<int, int>{1, 3});

  // A transitive tournament has no gap.
  CHECK_FALSE(dominating_gap_pair(make(3, {{2, 0}, {0, 1}, {2, 1}})).has_value());
  // Two non-adjacent pairs: not this shape.
  CHECK_FALSE(
      dominating_gap_pair(make(4, {{0, 1}, {0, 3}, {2, 1}, {2, 3}})).has_value());
  // Gap pair must dominate every other vertex.
  CHECK_FALSE(dominating_gap_pair(make(3, {{0, 2}, {2, 1}})).has_value());
  // Rest must stay a tournament.
  CHECK_FALSE(dominating_gap_pair(
                  make(4, {{1, 0}, {1, 2}, {3, 0}, {3, 2}})).has_value());
  // Bidirected edges disqualify the shape.
  CHECK_FALSE(dominating_gap_pair(
                  make(3, {{0, 2}, {1, 2}, {2, 0}})).has_value());
}

TEST_CASE("GraphEnumeration sizes and decode") {
  CHECK(enumerate_graphs(1, false).size() == 1);
  CHECK(enumerate_graphs(2, false).size() == 3);
  CHECK(enumerate_graphs(2, true).size() == 4);
  CHECK(enumerate_graphs(3, false).size() == 27);
  CHECK(enumerate_graphs(3, true).size() == 64);
  CHECK(enumerate_graphs(6, false).size() == 14348907);  // 3^15
  CHECK_THROWS_AS(enumerate_graphs(7, false), InputError);
  CHECK_THROWS_AS(enumerate_graphs(0, true), InputError);

  // Every oriented graph appears exactly once, none bidirected.
  GraphEnumeration en = enumerate_graphs(3, false);
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < en.size(); ++i) {
    CausalGraph g = en.at(i);
    CHECK(is_oriented(g));
    seen.insert(g.bits());
  }
  CHECK(seen.size() == 27);

  // The bidirected enumeration contains the oriented one.
  GraphEnumeration bi = enumerate_graphs(3, true);
  std::set<std::uint64_t> seen_bi;
  bool found_bidirected = false;
  for (std::uint64_t i = 0; i < bi.size(); ++i) {
    CausalGraph g = bi.at(i);
    seen_bi.insert(g.bits());
    for (int j = 0; j < 3; ++j) {
      for (int k = j + 1; k < 3; ++k) {
        if (bidirected(g, j, k)) found_bidirected = true;
      }
    }
  }
  CHECK(seen_bi.size() == 64);
  CHECK(found_bidirected);
  for (std::uint64_t b : seen) CHECK(seen_bi.count(b) == 1);
}

TEST_CASE("canonical_key identifies relabellings") {
  CausalGraph cyc = make(3, {{0, 1}, {1, 2}, {2, 0}});
  CausalGraph cyc2 = make(3, {{1, 0}, {0, 2}, {2, 1}});  // same cycle, other chirality
  CHECK(canonical_key(cyc) == canonical_key(cyc2));
  CausalGraph trans = make(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(canonical_key(cyc) != canonical_key(trans));
  // All 6 relabellings of the transitive tournament share a key.
  CausalGraph t2 = make(3, {{2, 1}, {1, 0}, {2, 0}});
  CHECK(canonical_key(trans) == canonical_key(t2));
}

TEST_CASE("to_dot is deterministic and renders bidirected pairs once") {
  CausalGraph g = make(3, {{0, 1}, {1, 0}, {2, 0}});
  const std::string dot = to_dot(g);
  CHECK(dot == to_dot(g));
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("dir=both") != std::string::npos);
  CHECK(dot.find("\"D1\"") != std::string::npos);
  CHECK(dot.find("\"D3\" -> \"D1\"") != std::string::npos);

  const std::string named = to_dot(g, {"a", "b", "c"});
  CHECK(named.find("\"a\"") != std::string::npos);
  CHECK_THROWS_AS(to_dot(g, {"onlyone"}), InputError);
}
