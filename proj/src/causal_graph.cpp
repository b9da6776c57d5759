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

#include "summon/causal_graph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "summon/errors.hpp"

namespace summon {

namespace {

void check_vertex(const CausalGraph& g, int j, const char* what) {
  if (j < 0 || j >= g.n()) {
    throw InputError(std::string(what) + ": vertex index " + std::to_string(j) +
                     " out of range for n=" + std::to_string(g.n()));
  }
}

void check_pair(const CausalGraph& g, int j, int k, const char* what) {
  check_vertex(g, j, what);
  check_vertex(g, k, what);
  if (j == k) {
    throw InputError(std::string(what) + ": vertex pair must be distinct, got (" +
                     std::to_string(j) + "," + std::to_string(k) + ")");
  }
}

}  // namespace

std::string to_string(TripleClass c) {
  switch (c) {
    case TripleClass::TwoIn: return "two-in";
    case TripleClass::TwoOut: return "two-out";
    case TripleClass::ThreeCycle: return "3-cycle";
    case TripleClass::InAndOut: return "in-and-out";
    case TripleClass::HasTwoInVertex: return "has-two-in-vertex";
    case TripleClass::Subcritical: return "subcritical";
    case TripleClass::HasBidirected: return "has-bidirected";
  }
  return "?";
}

CausalGraph::CausalGraph(int n) : n_(n) {
  if (n < 1 || n > 8) {
    throw InputError("CausalGraph: n must be in 1..8, got " + std::to_string(n));
  }
}

CausalGraph CausalGraph::from_edges(int n,
                                    const std::vector<std::pair<int, int>>& edges) {
  CausalGraph g(n);
  for (const auto& [j, k] : edges) {
    g.set_arrow(j, k);
  }
  return g;
}

bool CausalGraph::adj(int j, int k) const {
  check_vertex(*this, j, "adj");
  check_vertex(*this, k, "adj");
  if (j == k) return false;
  return (bits_ >> (j * 8 + k)) & 1u;
}

void CausalGraph::set_arrow(int j, int k, bool present) {
  check_pair(*this, j, k, "set_arrow");
  const std::uint64_t mask = std::uint64_t{1} << (j * 8 + k);
  if (present) {
    bits_ |= mask;
  } else {
    bits_ &= ~mask;
  }
}

bool arrow(const CausalGraph& g, int j, int k) {
  check_pair(g, j, k, "arrow");
  return g.adj(j, k);
}

bool connected(const CausalGraph& g, int j, int k) {
  check_pair(g, j, k, "connected");
  return g.adj(j, k) || g.adj(k, j);
}

bool bidirected(const CausalGraph& g, int j, int k) {
  check_pair(g, j, k, "bidirected");
  return g.adj(j, k) && g.adj(k, j);
}

bool is_oriented(const CausalGraph& g) {
  for (int j = 0; j < g.n(); ++j) {
    for (int k = j + 1; k < g.n(); ++k) {
      if (g.adj(j, k) && g.adj(k, j)) return false;
    }
  }
  return true;
}

bool is_tournament(const CausalGraph& g, const std::vector<int>& subset) {
  for (int v : subset) check_vertex(g, v, "is_tournament");
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      const int j = subset[a], k = subset[b];
      if (j == k) throw InputError("is_tournament: repeated vertex in subset");
      const bool fwd = g.adj(j, k), bwd = g.adj(k, j);
      if (fwd == bwd) return false;  // non-adjacent or bidirected
    }
  }
  return true;
}

std::vector<int> all_vertices(const CausalGraph& g) {
  std::vector<int> v(static_cast<std::size_t>(g.n()));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::optional<std::vector<int>> topological_order(const CausalGraph& g,
                                                  const std::vector<int>& subset) {
  for (int v : subset) check_vertex(g, v, "topological_order");
  // Kahn's algorithm on the induced subgraph; ties broken by vertex index so
  // the output is deterministic.
  const std::size_t m = subset.size();
  std::vector<int> indeg(m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a != b && g.adj(subset[b], subset[a])) ++indeg[a];
    }
  }
  std::vector<bool> placed(m, false);
  std::vector<int> order;
  order.reserve(m);
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t pick = m;
    for (std::size_t a = 0; a < m; ++a) {
      if (!placed[a] && indeg[a] == 0) {
        pick = a;
        break;
      }
    }
    if (pick == m) return std::nullopt;  // directed cycle remains
    placed[pick] = true;
    order.push_back(subset[pick]);
    for (std::size_t b = 0; b < m; ++b) {
      if (!placed[b] && g.adj(subset[pick], subset[b])) --indeg[b];
    }
  }
  return order;
}

TripleClass classify_triple(const CausalGraph& g, const std::array<int, 3>& t) {
  check_pair(g, t[0], t[1], "classify_triple");
  check_pair(g, t[0], t[2], "classify_triple");
  check_pair(g, t[1], t[2], "classify_triple");
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      if (g.adj(t[a], t[b]) && g.adj(t[b], t[a])) return TripleClass::HasBidirected;
    }
  }
  int edges = 0;
  std::array<int, 3> indeg{0, 0, 0}, outdeg{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a != b && g.adj(t[a], t[b])) {
        ++edges;
        ++outdeg[a];
        ++indeg[b];
      }
    }
  }
  const bool has_in2 = indeg[0] == 2 || indeg[1] == 2 || indeg[2] == 2;
  const bool has_out2 = outdeg[0] == 2 || outdeg[1] == 2 || outdeg[2] == 2;
  if (has_in2) {
    return edges == 2 ? TripleClass::TwoIn : TripleClass::HasTwoInVertex;
  }
  if (edges == 3) return TripleClass::ThreeCycle;
  if (edges == 2) return has_out2 ? TripleClass::TwoOut : TripleClass::InAndOut;
  return TripleClass::Subcritical;
}

bool triple_has_two_in_vertex(const CausalGraph& g, const std::array<int, 3>& t) {
  for (int a = 0; a < 3; ++a) {
    int indeg = 0;
    for (int b = 0; b < 3; ++b) {
      if (a != b && g.adj(t[b], t[a])) ++indeg;
    }
    if (indeg == 2) return true;
  }
  return false;
}

std::vector<int> s_set(const CausalGraph& g, int j) {
  check_vertex(g, j, "s_set");
  std::vector<int> out;
  for (int i = 0; i < g.n(); ++i) {
    if (i != j && !g.adj(i, j)) out.push_back(i);
  }
  return out;
}

std::vector<std::pair<int, int>> nonadjacent_pairs(const CausalGraph& g) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < g.n(); ++j) {
    for (int k = j + 1; k < g.n(); ++k) {
      if (!g.adj(j, k) && !g.adj(k, j)) out.emplace_back(j, k);
    }
  }
  return out;
}

int count_nonadjacent_pairs(const CausalGraph& g) {
  return static_cast<int>(nonadjacent_pairs(g).size());
}

std::optional<std::vector<std::pair<int, int>>> x_partition(const CausalGraph& g) {
  const auto pairs = nonadjacent_pairs(g);
  std::vector<int> partners(static_cast<std::size_t>(g.n()), 0);
  for (const auto& [j, k] : pairs) {
    ++partners[j];
    ++partners[k];
  }
  for (int j = 0; j < g.n(); ++j) {
    if (partners[j] > 1) return std::nullopt;
  }
  return pairs;  // every member of X has exactly one partner
}

bool is_transitive_tournament(const CausalGraph& g) {
  if (!is_tournament(g, all_vertices(g))) return false;
  return topological_order(g, all_vertices(g)).has_value();
}

std::optional<std::pair<int, int>> dominating_gap_pair(const CausalGraph& g) {
  if (!is_oriented(g)) return std::nullopt;
  const auto gaps = nonadjacent_pairs(g);
  if (gaps.size() != 1) return std::nullopt;
  const auto [u, w] = gaps.front();
  std::vector<int> rest;
  for (int v = 0; v < g.n(); ++v) {
    if (v == u || v == w) continue;
    if (!g.adj(u, v) || !g.adj(w, v)) return std::nullopt;
    rest.push_back(v);
  }
  if (!is_tournament(g, rest)) return std::nullopt;
  return std::make_pair(u, w);
}

GraphEnumeration::GraphEnumeration(int n, bool allow_bidirected)
    : n_(n), allow_bidirected_(allow_bidirected) {
  if (n < 1 || n > 6) {
    throw InputError("enumerate_graphs: n must be in 1..6, got " + std::to_string(n));
  }
  num_pairs_ = n * (n - 1) / 2;
  const std::uint64_t base = allow_bidirected ? 4 : 3;
  size_ = 1;
  for (int i = 0; i < num_pairs_; ++i) size_ *= base;
}

CausalGraph GraphEnumeration::at(std::uint64_t idx) const {
  if (idx >= size_) {
    throw InputError("GraphEnumeration: index out of range");
  }
  const std::uint64_t base = allow_bidirected_ ? 4 : 3;
  CausalGraph g(n_);
  for (int j = 0; j < n_; ++j) {
    for (int k = j + 1; k < n_; ++k) {
      const int digit = static_cast<int>(idx % base);
      idx /= base;
      if (digit == 1 || digit == 3) g.set_arrow(j, k);
      if (digit == 2 || digit == 3) g.set_arrow(k, j);
    }
  }
  return g;
}

GraphEnumeration enumerate_graphs(int n, bool allow_bidirected) {
  return GraphEnumeration(n, allow_bidirected);
}

std::uint64_t canonical_key(const CausalGraph& g) {
  std::vector<int> perm = all_vertices(g);
  std::uint64_t best = ~std::uint64_t{0};
  do {
    std::uint64_t bits = 0;
    for (int j = 0; j < g.n(); ++j) {
      for (int k = 0; k < g.n(); ++k) {
        if (j != k && g.adj(perm[j], perm[k])) {
          bits |= std::uint64_t{1} << (j * 8 + k);
        }
      }
    }
    best = std::min(best, bits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string to_dot(const CausalGraph& g, const std::vector<std::string>& labels) {
  if (!labels.empty() && static_cast<int>(labels.size()) != g.n()) {
    throw InputError("to_dot: label count does not match vertex count");
  }
  auto name = [&](int v) {
    return labels.empty() ? "D" + std::to_string(v + 1) : labels[v];
  };
  std::ostringstream out;
  out << "digraph causal {\n";
  for (int v = 0; v < g.n(); ++v) {
    out << "  \"" << name(v) << "\";\n";
  }
  for (int j = 0; j < g.n(); ++j) {
    for (int k = j + 1; k < g.n(); ++k) {
      if (g.adj(j, k) && g.adj(k, j)) {
        out << "  \"" << name(j) << "\" -> \"" << name(k) << "\" [dir=both];\n";
      } else if (g.adj(j, k)) {
        out << "  \"" << name(j) << "\" -> \"" << name(k) << "\";\n";
      } else if (g.adj(k, j)) {
        out << "  \"" << name(k) << "\" -> \"" << name(j) << "\";\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace summon
