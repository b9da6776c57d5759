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

#pragma once

/** \file causal_graph.hpp
 *  Directed-graph algebra over causal diamonds.
 *
 *  Vertices are causal diamonds; a directed edge j→k means the call point of
 *  diamond j can signal the return point of diamond k. Graphs are tiny
 *  (n <= 8), so adjacency is packed into a single 64-bit word and all
 *  classification questions are answered by brute force.
 */

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace summon {

/** Shape of a 3-vertex induced subgraph, used by the two-system and
 *  entanglement decision rules.
 *
 *  The named shapes are exact edge sets (up to relabelling):
 *   - TwoIn:      a→b, c→b, a and c non-adjacent.
 *   - TwoOut:     b→a, b→c, a and c non-adjacent.
 *   - ThreeCycle: a→b, b→c, c→a.
 *   - InAndOut:   a→b, b→c, a and c non-adjacent.
 *  HasTwoInVertex covers every other oriented triple in which some vertex
 *  has in-degree 2 (e.g. triples of a tournament with a sink). Subcritical
 *  covers oriented triples with no in-degree-2 vertex that are proper
 *  spanning subgraphs of TwoOut/ThreeCycle (at most one edge). HasBidirected
 *  flags any triple containing a bidirected edge; it takes priority.
 */
enum class TripleClass {
  TwoIn,
  TwoOut,
  ThreeCycle,
  InAndOut,
  HasTwoInVertex,
  Subcritical,
  HasBidirected,
};

/** Printable name of a TripleClass value. */
std::string to_string(TripleClass c);

/** A causal graph on n <= 8 diamonds plus the start-point causality flags
 *  carried over from task ingestion.
 *
 *  adj(j,k) is true iff D_j→D_k. Self-loops are structurally impossible.
 *  start_in_past records that the task's start point precedes every call
 *  point (and hence everything); start_precedes_all_returns is the weaker
 *  statement needed by the start-relaxation construction.
 */
class CausalGraph {
 public:
  CausalGraph() = default;

  /** An edgeless graph on n vertices (1 <= n <= 8). */
  explicit CausalGraph(int n);

  /** Builds a graph from a list of directed edges (0-based). */
  static CausalGraph from_edges(int n,
                                const std::vector<std::pair<int, int>>& edges);

  int n() const { return n_; }

  /** Raw adjacency: true iff j→k. \throws InputError on bad indices. */
  bool adj(int j, int k) const;

  /** Adds or removes the directed edge j→k. \throws InputError on j==k or
   *  out-of-range indices. */
  void set_arrow(int j, int k, bool present = true);

  /** Packed adjacency bits (bit j*8+k set iff j→k); stable encoding used for
   *  canonical forms and hashing. */
  std::uint64_t bits() const { return bits_; }

  bool operator==(const CausalGraph& other) const {
    return n_ == other.n_ && bits_ == other.bits_ &&
           start_in_past == other.start_in_past &&
           start_precedes_all_returns == other.start_precedes_all_returns;
  }

  bool start_in_past = true;
  bool start_precedes_all_returns = true;

 private:
  int n_ = 1;
  std::uint64_t bits_ = 0;
};

/** D_j→D_k. \throws InputError if j==k or out of range. */
bool arrow(const CausalGraph& g, int j, int k);

/** D_j and D_k causally connected (an edge in at least one direction). */
bool connected(const CausalGraph& g, int j, int k);

/** Edges in both directions between j and k. */
bool bidirected(const CausalGraph& g, int j, int k);

/** True iff the graph has no bidirected edge. */
bool is_oriented(const CausalGraph& g);

/** True iff the induced subgraph on `subset` is oriented and every pair of
 *  its vertices is connected. A single vertex is a tournament. */
bool is_tournament(const CausalGraph& g, const std::vector<int>& subset);

/** All vertices of g, 0..n-1. */
std::vector<int> all_vertices(const CausalGraph& g);

/** A topological order of the induced subgraph: a permutation σ of `subset`
 *  such that every induced edge points from an earlier to a later position.
 *  Absent when the induced subgraph has a directed cycle (a bidirected edge
 *  counts as a 2-cycle). For a transitive tournament the order is unique. */
std::optional<std::vector<int>> topological_order(const CausalGraph& g,
                                                  const std::vector<int>& subset);

/** Classifies the induced subgraph on three distinct vertices. */
TripleClass classify_triple(const CausalGraph& g, const std::array<int, 3>& triple);

/** True iff some vertex of the triple has in-degree 2 within the triple
 *  (the acceptance rule of the unassisted two-system theorem). */
bool triple_has_two_in_vertex(const CausalGraph& g, const std::array<int, 3>& triple);

/** S_j: the vertices with no edge into j, excluding j itself. This is the
 *  candidate set for "where the other call might be" as seen from D_j. */
std::vector<int> s_set(const CausalGraph& g, int j);

/** Partitions X = {j : some vertex is non-adjacent to j} into non-adjacent
 *  pairs. Present exactly when every member of X is non-adjacent to exactly
 *  one other vertex; pairs are returned with smaller index first, sorted. */
std::optional<std::vector<std::pair<int, int>>> x_partition(const CausalGraph& g);

/** Number of unordered non-adjacent vertex pairs. */
int count_nonadjacent_pairs(const CausalGraph& g);

/** The unordered non-adjacent vertex pairs, sorted. */
std::vector<std::pair<int, int>> nonadjacent_pairs(const CausalGraph& g);

/** True iff the whole graph is a tournament admitting a topological order
 *  (equivalently: a tournament with no 3-cycle). */
bool is_transitive_tournament(const CausalGraph& g);

/** Detects the "gapped" two-system shape: exactly one non-adjacent pair
 *  {u,w}, both u and w point at every other vertex, and the remaining
 *  vertices form a tournament. Returns {u,w} (u<w) when the graph matches.
 *  With the additional requirement that the remaining tournament is
 *  transitive this is exactly a transitive tournament with the edge between
 *  its first two vertices removed. */
std::optional<std::pair<int, int>> dominating_gap_pair(const CausalGraph& g);

/** Enumeration of all labelled graphs on n vertices: 3 states per vertex
 *  pair when oriented (none, j→k, k→j), 4 when bidirected edges are allowed.
 *  Graphs are materialized on demand by index, so ranges can be partitioned
 *  across workers. */
class GraphEnumeration {
 public:
  /** \throws InputError unless 1 <= n <= 6. */
  GraphEnumeration(int n, bool allow_bidirected);

  std::uint64_t size() const { return size_; }

  /** The idx-th graph (0-based). Start flags are left at their defaults. */
  CausalGraph at(std::uint64_t idx) const;

 private:
  int n_;
  bool allow_bidirected_;
  int num_pairs_;
  std::uint64_t size_;
};

/** Convenience constructor for GraphEnumeration. */
GraphEnumeration enumerate_graphs(int n, bool allow_bidirected);

/** Minimum packed-bits encoding over all vertex relabellings; equal keys
 *  mean isomorphic labelled graphs. */
std::uint64_t canonical_key(const CausalGraph& g);

/** Deterministic DOT rendering. Bidirected pairs are drawn once with
 *  dir=both. `labels`, when nonempty, must have one entry per vertex;
 *  otherwise vertices are named D1..Dn. */
std::string to_dot(const CausalGraph& g, const std::vector<std::string>& labels = {});

}  // namespace summon
