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

#include "summon/achievability.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include <json.hpp>

#include "summon/engine.hpp"
#include "summon/errors.hpp"

namespace summon {

namespace {

std::string vertex_name(int v) { return "D" + std::to_string(v + 1); }

/** First causally disconnected pair, ascending scan order. */
std::optional<std::pair<int, int>> first_nonadjacent(const CausalGraph& g) {
  for (int j = 0; j < g.n(); ++j)
    for (int k = j + 1; k < g.n(); ++k)
      if (!connected(g, j, k)) return std::make_pair(j, k);
  return std::nullopt;
}

/** First triple with no in-degree-2 vertex; with `allow_cycle`, 3-cycles are
 *  accepted too (the label-assisted relaxation). Oriented graphs only. */
std::optional<std::array<int, 3>> first_bad_triple(const CausalGraph& g,
                                                   bool allow_cycle) {
  for (int a = 0; a < g.n(); ++a)
    for (int b = a + 1; b < g.n(); ++b)
      for (int c = b + 1; c < g.n(); ++c) {
        const std::array<int, 3> t{a, b, c};
        if (triple_has_two_in_vertex(g, t)) continue;
        if (allow_cycle && classify_triple(g, t) == TripleClass::ThreeCycle)
          continue;
        return t;
      }
  return std::nullopt;
}

/** A vertex disconnected from two others, as {v, p, q}; this kills every
 *  two-system construction regardless of edge directions. */
std::optional<std::array<int, 3>> find_lonely_vertex(const CausalGraph& g) {
  for (int v = 0; v < g.n(); ++v) {
    std::vector<int> lone;
    for (int k = 0; k < g.n(); ++k)
      if (k != v && !connected(g, v, k)) lone.push_back(k);
    if (lone.size() >= 2) return std::array<int, 3>{v, lone[0], lone[1]};
  }
  return std::nullopt;
}

/** A diamond j with two possible partners p, q (no edge into j) that are not
 *  connected to each other; monogamy forbids parking entanglement for both. */
std::optional<std::array<int, 3>> find_partner_clash(const CausalGraph& g) {
  for (int j = 0; j < g.n(); ++j) {
    const std::vector<int> s = s_set(g, j);
    for (std::size_t x = 0; x < s.size(); ++x)
      for (std::size_t y = x + 1; y < s.size(); ++y)
        if (!connected(g, s[x], s[y]))
          return std::array<int, 3>{j, s[x], s[y]};
  }
  return std::nullopt;
}

/** Four diamonds, two of which each precede the other two (the crossed
 *  construction's shape, as a spanning pattern). */
bool has_crossed_pattern(const CausalGraph& g) {
  if (g.n() != 4) return false;
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    if (arrow(g, p[0], p[2]) && arrow(g, p[0], p[3]) &&
        arrow(g, p[1], p[2]) && arrow(g, p[1], p[3]))
      return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

/** Four diamonds in a cycle of bidirected edges with both diagonals
 *  disconnected (the threshold-coding square). */
bool is_bidirected_square(const CausalGraph& g) {
  if (g.n() != 4) return false;
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    if (bidirected(g, p[0], p[1]) && bidirected(g, p[1], p[2]) &&
        bidirected(g, p[2], p[3]) && bidirected(g, p[3], p[0]) &&
        !connected(g, p[0], p[2]) && !connected(g, p[1], p[3]))
      return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

/** Three diamonds: one bidirected pair, the third disconnected from both. */
bool is_bidirected_hub(const CausalGraph& g) {
  if (g.n() != 3) return false;
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    if (bidirected(g, a, b) && !connected(g, a, c) && !connected(g, b, c))
      return true;
  }
  return false;
}

std::vector<std::pair<int, int>> bidirected_pairs(const CausalGraph& g) {
  std::vector<std::pair<int, int>> out;
  for (int j = 0; j < g.n(); ++j)
    for (int k = j + 1; k < g.n(); ++k)
      if (bidirected(g, j, k)) out.emplace_back(j, k);
  return out;
}

/** Keeps exactly one direction of each bidirected pair: bit i of `mask`
 *  clear keeps low->high for pairs[i], set keeps high->low. */
CausalGraph orient_graph(const CausalGraph& g,
                         const std::vector<std::pair<int, int>>& pairs,
                         std::uint64_t mask) {
  CausalGraph o = g;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [j, k] = pairs[i];
    if (mask >> i & 1)
      o.set_arrow(j, k, false);
    else
      o.set_arrow(k, j, false);
  }
  return o;
}

/** Runs `decider` on every orientation of the bidirected edges in mask
 *  order, returning the first Achievable verdict with the chosen
 *  orientation attached to its plan. */
template <typename Decider>
std::optional<Verdict> search_orientations(const TaskSpec& task,
                                           Decider&& decider) {
  const auto pairs = bidirected_pairs(task.graph);
  const std::uint64_t total = std::uint64_t{1} << pairs.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    TaskSpec t = task;
    t.graph = orient_graph(task.graph, pairs, mask);
    Verdict v = decider(t);
    if (v.status != Status::Achievable) continue;
    v.plan->orientation = t.graph;
    v.rule = "orientation:" + v.rule;
    return v;
  }
  return std::nullopt;
}

Verdict achievable(std::string builder, std::string rule,
                   std::optional<CausalGraph> orientation = std::nullopt) {
  Verdict v;
  v.status = Status::Achievable;
  v.plan = ProtocolPlan{std::move(builder), std::move(orientation)};
  v.rule = std::move(rule);
  return v;
}

Verdict unachievable(Witness w, std::string rule) {
  Verdict v;
  v.status = Status::Unachievable;
  v.witness = std::move(w);
  v.rule = std::move(rule);
  return v;
}

Verdict unknown(std::string rule) {
  Verdict v;
  v.status = Status::Unknown;
  v.rule = std::move(rule);
  return v;
}

Witness start_witness() {
  Witness w;
  w.kind = Witness::Kind::StartCausality;
  w.note = "the start point does not causally precede every return point";
  return w;
}

Witness pair_witness(std::pair<int, int> p) {
  Witness w;
  w.kind = Witness::Kind::NonAdjacentPair;
  w.vertices = {p.first, p.second};
  w.note = vertex_name(p.first) + " and " + vertex_name(p.second) +
           " are not causally connected";
  return w;
}

Witness triple_witness(const CausalGraph& g, const std::array<int, 3>& t) {
  Witness w;
  w.kind = Witness::Kind::BadTriple;
  w.vertices = {t[0], t[1], t[2]};
  w.triple_class = classify_triple(g, t);
  w.note = "triple {" + vertex_name(t[0]) + "," + vertex_name(t[1]) + "," +
           vertex_name(t[2]) + "} has no in-degree-2 vertex (" +
           to_string(*w.triple_class) + ")";
  return w;
}

Witness lonely_witness(const std::array<int, 3>& t) {
  Witness w;
  w.kind = Witness::Kind::LonelyVertex;
  w.vertices = {t[0], t[1], t[2]};
  w.note = vertex_name(t[0]) + " is disconnected from both " +
           vertex_name(t[1]) + " and " + vertex_name(t[2]);
  return w;
}

Witness partner_witness(const std::array<int, 3>& t) {
  Witness w;
  w.kind = Witness::Kind::PartnerSet;
  w.vertices = {t[0], t[1], t[2]};
  w.note = "possible partners " + vertex_name(t[1]) + " and " +
           vertex_name(t[2]) + " of " + vertex_name(t[0]) +
           " are not connected (entanglement monogamy)";
  return w;
}

void require_kind(const TaskSpec& task, TaskKind kind, const char* who) {
  if (task.kind != kind)
    throw InputError(std::string(who) + ": task kind must be " +
                     to_string(kind) + ", got " + to_string(task.kind));
}

void require_two_call_size(const TaskSpec& task, const char* who) {
  if (task.graph.n() < 2)
    throw InputError(std::string(who) +
                     ": a two-call task needs at least two diamonds");
}

/** Shape dispatch shared by the oriented two-system deciders; `transitive`
 *  selects the unassisted variant (rails need a topological order). */
std::string two_system_shape_builder(const CausalGraph& g, bool transitive) {
  if (transitive ? is_transitive_tournament(g)
                 : is_tournament(g, all_vertices(g)))
    return transitive ? "two-system-rails" : "label-parallel";
  if (const auto gap = dominating_gap_pair(g)) {
    std::vector<int> rest;
    for (int v = 0; v < g.n(); ++v)
      if (v != gap->first && v != gap->second) rest.push_back(v);
    const bool rest_ok = transitive ? topological_order(g, rest).has_value()
                                    : is_tournament(g, rest);
    if (rest_ok) return transitive ? "two-system-rails-gap" : "label-gap";
  }
  throw ContractViolation(
      "two-system triple condition held but the graph matches neither the "
      "tournament nor the dominating-gap shape");
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::Achievable: return "achievable";
    case Status::Unachievable: return "unachievable";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

std::string to_string(Witness::Kind k) {
  switch (k) {
    case Witness::Kind::NonAdjacentPair: return "non-adjacent-pair";
    case Witness::Kind::BadTriple: return "bad-triple";
    case Witness::Kind::LonelyVertex: return "lonely-vertex";
    case Witness::Kind::PartnerSet: return "partner-set";
    case Witness::Kind::StartCausality: return "start-causality";
  }
  return "?";
}

bool confirm_witness(const TaskSpec& task, const Witness& w) {
  const CausalGraph& g = task.graph;
  for (int v : w.vertices)
    if (v < 0 || v >= g.n()) return false;
  const auto distinct = [&]() {
    std::vector<int> s = w.vertices;
    std::sort(s.begin(), s.end());
    return std::adjacent_find(s.begin(), s.end()) == s.end();
  };
  switch (w.kind) {
    case Witness::Kind::NonAdjacentPair:
      return w.vertices.size() == 2 && distinct() &&
             !connected(g, w.vertices[0], w.vertices[1]);
    case Witness::Kind::BadTriple: {
      if (w.vertices.size() != 3 || !distinct()) return false;
      const std::array<int, 3> t{w.vertices[0], w.vertices[1], w.vertices[2]};
      const TripleClass c = classify_triple(g, t);
      if (c == TripleClass::HasBidirected) return false;
      if (w.triple_class && *w.triple_class != c) return false;
      if (triple_has_two_in_vertex(g, t)) return false;
      // Label and global assistance tolerate 3-cycles, so a 3-cycle triple
      // only refutes the unassisted task.
      if (task.assistance != Assistance::None && c == TripleClass::ThreeCycle)
        return false;
      return true;
    }
    case Witness::Kind::LonelyVertex:
      return w.vertices.size() == 3 && distinct() &&
             !connected(g, w.vertices[0], w.vertices[1]) &&
             !connected(g, w.vertices[0], w.vertices[2]);
    case Witness::Kind::PartnerSet: {
      if (w.vertices.size() != 3 || !distinct()) return false;
      const std::vector<int> s = s_set(g, w.vertices[0]);
      const auto member = [&](int v) {
        return std::find(s.begin(), s.end(), v) != s.end();
      };
      return member(w.vertices[1]) && member(w.vertices[2]) &&
             !connected(g, w.vertices[1], w.vertices[2]);
    }
    case Witness::Kind::StartCausality:
      return !g.start_precedes_all_returns;
  }
  return false;
}

std::string verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["status"] = to_string(v.status);
  j["rule"] = v.rule;
  if (v.plan) {
    nlohmann::ordered_json pj;
    pj["builder"] = v.plan->builder;
    if (v.plan->orientation) {
      auto edges = nlohmann::ordered_json::array();
      const CausalGraph& o = *v.plan->orientation;
      for (int a = 0; a < o.n(); ++a)
        for (int b = 0; b < o.n(); ++b)
          if (a != b && o.adj(a, b)) edges.push_back({a + 1, b + 1});
      pj["orientation"] = edges;
    }
    j["plan"] = pj;
  }
  if (v.witness) {
    nlohmann::ordered_json wj;
    wj["kind"] = to_string(v.witness->kind);
    auto verts = nlohmann::ordered_json::array();
    for (int x : v.witness->vertices) verts.push_back(x + 1);
    wj["vertices"] = verts;
    if (v.witness->triple_class)
      wj["triple_class"] = to_string(*v.witness->triple_class);
    wj["note"] = v.witness->note;
    j["witness"] = wj;
  }
  return j.dump(2);
}

Verdict decide_single(const TaskSpec& task) {
  require_kind(task, TaskKind::SingleSystem, "decide_single");
  const CausalGraph& g = task.graph;
  if (!g.start_precedes_all_returns)
    return unachievable(start_witness(), "start-causality");
  if (const auto p = first_nonadjacent(g))
    return unachievable(pair_witness(*p), "disconnected-pair");
  if (is_oriented(g)) return achievable("single-system", "pairwise-connected");
  // Connected pairs stay connected whichever direction survives, so any
  // orientation yields a tournament; keep low->high for determinism.
  return achievable("single-system", "orientation:pairwise-connected",
                    orient_graph(g, bidirected_pairs(g), 0));
}

Verdict decide_two_system_unassisted(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "decide_two_system_unassisted");
  require_two_call_size(task, "decide_two_system_unassisted");
  if (task.assistance != Assistance::None)
    throw InputError("decide_two_system_unassisted: assistance must be none");
  if (!is_oriented(task.graph)) return decide_two_system_bidirected(task);
  const CausalGraph& g = task.graph;
  if (!g.start_precedes_all_returns)
    return unachievable(start_witness(), "start-causality");
  if (const auto t = first_bad_triple(g, /*allow_cycle=*/false))
    return unachievable(triple_witness(g, *t), "triple-without-in-degree-2");
  return achievable(two_system_shape_builder(g, /*transitive=*/true),
                    "transitive-or-dominated-gap");
}

Verdict decide_two_system_label(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "decide_two_system_label");
  require_two_call_size(task, "decide_two_system_label");
  if (task.assistance != Assistance::Label)
    throw InputError("decide_two_system_label: assistance must be label");
  if (!is_oriented(task.graph)) return decide_two_system_bidirected(task);
  const CausalGraph& g = task.graph;
  if (!g.start_precedes_all_returns)
    return unachievable(start_witness(), "start-causality");
  if (const auto t = first_bad_triple(g, /*allow_cycle=*/true))
    return unachievable(triple_witness(g, *t),
                        "triple-neither-in-degree-2-nor-cycle");
  return achievable(two_system_shape_builder(g, /*transitive=*/false),
                    "tournament-or-dominated-gap");
}

Verdict decide_two_system_global(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "decide_two_system_global");
  require_two_call_size(task, "decide_two_system_global");
  if (task.assistance != Assistance::Global)
    throw InputError("decide_two_system_global: assistance must be global");
  if (!task.graph.start_precedes_all_returns)
    return unachievable(start_witness(), "start-causality");
  // Both called diamonds see the full call tuple, so they can derive labels
  // (1 = the smaller called index) and run any label protocol.
  TaskSpec labelled = task;
  labelled.assistance = Assistance::Label;
  Verdict via_label = is_oriented(task.graph)
                          ? decide_two_system_label(labelled)
                          : decide_two_system_bidirected(labelled);
  if (via_label.status == Status::Achievable) {
    via_label.rule = "label-reduction:" + via_label.rule;
    return via_label;
  }
  if (has_crossed_pattern(task.graph))
    return achievable("global-crossed", "crossed-sources");
  // No structural no-go is known under global assistance.
  return unknown("global-assistance-uncharacterized");
}

Verdict decide_entanglement(const TaskSpec& task) {
  require_kind(task, TaskKind::Entanglement, "decide_entanglement");
  require_two_call_size(task, "decide_entanglement");
  if (task.assistance == Assistance::Global)
    return achievable("entanglement-global", "pairwise-bell-parking");
  if (!is_oriented(task.graph)) return decide_entanglement_bidirected(task);
  if (const auto t = find_partner_clash(task.graph))
    return unachievable(partner_witness(*t), "partner-set-clash");
  return achievable("entanglement-routing", "partner-sets-are-tournaments");
}

Verdict decide_two_system_bidirected(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "decide_two_system_bidirected");
  require_two_call_size(task, "decide_two_system_bidirected");
  if (task.assistance == Assistance::Global)
    throw InputError(
        "decide_two_system_bidirected: global assistance is handled by "
        "decide_two_system_global");
  if (is_oriented(task.graph))
    return task.assistance == Assistance::None
               ? decide_two_system_unassisted(task)
               : decide_two_system_label(task);
  const CausalGraph& g = task.graph;
  if (!g.start_precedes_all_returns)
    return unachievable(start_witness(), "start-causality");
  if (task.assistance == Assistance::None)
    if (const auto t = find_lonely_vertex(g))
      return unachievable(lonely_witness(*t), "doubly-disconnected-vertex");
  const auto inner = [&](const TaskSpec& t) {
    return t.assistance == Assistance::None ? decide_two_system_unassisted(t)
                                            : decide_two_system_label(t);
  };
  if (auto v = search_orientations(task, inner)) return *v;
  if (task.assistance == Assistance::None && is_bidirected_square(g))
    return achievable("bidirected-square", "bidirected-square");
  return unknown("bidirected-uncharacterized");
}

Verdict decide_entanglement_bidirected(const TaskSpec& task) {
  require_kind(task, TaskKind::Entanglement, "decide_entanglement_bidirected");
  require_two_call_size(task, "decide_entanglement_bidirected");
  if (task.assistance == Assistance::Global)
    return achievable("entanglement-global", "pairwise-bell-parking");
  if (is_oriented(task.graph)) return decide_entanglement(task);
  const CausalGraph& g = task.graph;
  // The monogamy argument never uses edge directions, so the partner-set
  // condition stays necessary with bidirected edges.
  if (const auto t = find_partner_clash(g))
    return unachievable(partner_witness(*t), "partner-set-clash");
  if (auto v = search_orientations(
          task, [](const TaskSpec& t) { return decide_entanglement(t); }))
    return *v;
  if (is_bidirected_hub(g)) return achievable("entanglement-hub", "hub-pattern");
  // Sufficiency beyond orientations and the hub is open (e.g. the pentagon
  // of bidirected edges).
  return unknown("bidirected-uncharacterized");
}

Verdict decide(const TaskSpec& task) {
  switch (task.kind) {
    case TaskKind::SingleSystem:
      return decide_single(task);
    case TaskKind::TwoSystem:
      switch (task.assistance) {
        case Assistance::None: return decide_two_system_unassisted(task);
        case Assistance::Label: return decide_two_system_label(task);
        case Assistance::Global: return decide_two_system_global(task);
      }
      break;
    case TaskKind::Entanglement:
      return decide_entanglement(task);
  }
  throw InputError("decide: unrecognized task kind");
}

bool check_localizability(const CausalGraph& g) {
  return count_nonadjacent_pairs(g) <= 1;
}

namespace {

bool gap_with_rest(const CausalGraph& g, bool transitive_rest) {
  const auto gap = dominating_gap_pair(g);
  if (!gap) return false;
  std::vector<int> rest;
  for (int v = 0; v < g.n(); ++v)
    if (v != gap->first && v != gap->second) rest.push_back(v);
  return transitive_rest ? topological_order(g, rest).has_value()
                         : is_tournament(g, rest);
}

}  // namespace

CrosscheckReport crosscheck(int n, TaskKind kind, Assistance assistance,
                            bool allow_bidirected,
                            const CrosscheckOptions& options) {
  if (n < 1 || n > 6)
    throw InputError("crosscheck: n must be between 1 and 6");
  if (allow_bidirected && n > 4)
    throw InputError("crosscheck: bidirected sweeps support n <= 4");
  if (kind != TaskKind::SingleSystem && n < 2)
    throw InputError("crosscheck: two-call tasks need n >= 2");

  CrosscheckReport rep;
  rep.n = n;
  rep.kind = kind;
  rep.assistance = assistance;
  rep.allow_bidirected = allow_bidirected;

  constexpr std::size_t kMaxDiscrepancies = 50;
  const GraphEnumeration en = enumerate_graphs(n, allow_bidirected);
  rep.graphs = en.size();
  std::set<std::uint64_t> simulated;

  for (std::uint64_t idx = 0; idx < en.size(); ++idx) {
    const CausalGraph g = en.at(idx);
    TaskSpec task;
    task.name = "sweep-" + std::to_string(idx);
    task.kind = kind;
    task.assistance = assistance;
    task.graph = g;
    task.dimension = 2;

    const auto fail = [&](const std::string& msg) {
      if (rep.discrepancies.size() < kMaxDiscrepancies)
        rep.discrepancies.push_back("graph #" + std::to_string(idx) + ": " +
                                    msg);
      else if (rep.discrepancies.size() == kMaxDiscrepancies)
        rep.discrepancies.push_back("... further discrepancies suppressed");
    };

    const Verdict v = decide(task);
    switch (v.status) {
      case Status::Achievable: ++rep.achievable; break;
      case Status::Unachievable: ++rep.unachievable; break;
      case Status::Unknown: ++rep.unknown; break;
    }

    // Verdict-shape invariants.
    if (v.status == Status::Achievable &&
        (!v.plan || !known_builder(v.plan->builder)))
      fail("achievable verdict without a known builder plan");
    if (v.status == Status::Unachievable &&
        (!v.witness || !confirm_witness(task, *v.witness)))
      fail("unachievable verdict without a confirmable witness");

    // Independent structural rules per kind/assistance.
    const bool oriented = is_oriented(g);
    switch (kind) {
      case TaskKind::SingleSystem: {
        const bool expect = !first_nonadjacent(g).has_value();
        if ((v.status == Status::Achievable) != expect)
          fail("single-system decider disagrees with the pair condition");
        if (v.status == Status::Unknown)
          fail("single-system decider returned unknown");
        break;
      }
      case TaskKind::TwoSystem: {
        if (assistance == Assistance::None && oriented) {
          const bool cond = !first_bad_triple(g, false).has_value();
          const bool shape =
              is_transitive_tournament(g) || gap_with_rest(g, true);
          if (cond != shape)
            fail("triple condition and shape classification disagree");
          if ((v.status == Status::Achievable) != cond)
            fail("unassisted decider disagrees with the triple condition");
          if (v.status == Status::Unknown)
            fail("unassisted decider returned unknown on an oriented graph");
          if (v.status == Status::Achievable) {
            if (!check_localizability(g))
              fail("achievable graph has two disconnected pairs");
            TaskSpec lt = task;
            lt.assistance = Assistance::Label;
            if (decide(lt).status != Status::Achievable)
              fail("unassisted-achievable graph is not label-achievable");
          }
        } else if (assistance == Assistance::Label && oriented) {
          const bool cond = !first_bad_triple(g, true).has_value();
          const bool shape =
              is_tournament(g, all_vertices(g)) || gap_with_rest(g, false);
          if (cond != shape)
            fail("label triple condition and shape classification disagree");
          if ((v.status == Status::Achievable) != cond)
            fail("label decider disagrees with the triple condition");
          if (v.status == Status::Unknown)
            fail("label decider returned unknown on an oriented graph");
          if (v.status == Status::Achievable && !check_localizability(g))
            fail("achievable graph has two disconnected pairs");
        } else if (assistance == Assistance::Global) {
          if (v.status == Status::Unachievable)
            fail("global decider must never refute a graph");
          if (is_tournament(g, all_vertices(g)) &&
              v.status != Status::Achievable)
            fail("global decider misses a tournament");
        } else if (assistance == Assistance::None) {
          // Bidirected, unassisted: the doubly-disconnected no-go is exact
          // as a refutation rule.
          const bool nogo = find_lonely_vertex(g).has_value();
          if (nogo != (v.status == Status::Unachievable))
            fail("bidirected refutations must match the doubly-disconnected "
                 "rule exactly");
        } else {
          if (v.status == Status::Unachievable)
            fail("label decider refuted a bidirected graph without a rule");
        }
        break;
      }
      case TaskKind::Entanglement: {
        if (assistance == Assistance::Global) {
          if (v.status != Status::Achievable)
            fail("global entanglement must always be achievable");
          break;
        }
        const bool cond = !find_partner_clash(g).has_value();
        if (oriented) {
          if ((v.status == Status::Achievable) != cond)
            fail("entanglement decider disagrees with the partner-set rule");
          if (v.status == Status::Unknown)
            fail("entanglement decider returned unknown on an oriented graph");
          if (assistance == Assistance::None) {
            TaskSpec lt = task;
            lt.assistance = Assistance::Label;
            if (decide(lt).status != v.status)
              fail("label-assisted entanglement differs from unassisted");
          }
        } else {
          if (!cond && v.status != Status::Unachievable)
            fail("partner-set violation must refute the task");
          if (cond && v.status == Status::Unachievable)
            fail("entanglement refuted although the partner-set rule holds");
        }
        break;
      }
    }

    // Soundness by simulation: build and causally validate every achievable
    // graph; run the full simulation once per isomorphism class (the heavy
    // part is labelling-invariant, the tie-breaks are not — validation
    // covers those).
    if (options.verify_protocols && v.status == Status::Achievable &&
        n <= options.verify_max_n) {
      try {
        const ProtocolProgram prog = build_from_plan(task, *v.plan);
        validate_protocol(prog);
        if (!options.dedup_isomorphic ||
            simulated.insert(canonical_key(g)).second) {
          const VerificationReport r =
              verify_protocol(prog, RunMode::Certified, options.seed);
          if (!r.ok)
            fail("protocol verification failed (min fidelity " +
                 std::to_string(r.min_fidelity) + ")");
          else
            ++rep.verified;
        }
      } catch (const std::exception& e) {
        fail(std::string("protocol build or run threw: ") + e.what());
      }
    }

    // Monotonicity: adding one edge never flips Achievable to Unachievable.
    if (options.check_monotonicity && v.status == Status::Achievable) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          if (j == k || g.adj(j, k)) continue;
          if (!allow_bidirected && g.adj(k, j)) continue;
          TaskSpec t2 = task;
          t2.graph.set_arrow(j, k, true);
          if (decide(t2).status == Status::Unachievable)
            fail("adding " + vertex_name(j) + "->" + vertex_name(k) +
                 " flipped achievable to unachievable");
        }
      }
    }
  }

  rep.ok = rep.discrepancies.empty();
  return rep;
}

std::string crosscheck_json(const CrosscheckReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["kind"] = to_string(report.kind);
  j["assistance"] = to_string(report.assistance);
  j["allow_bidirected"] = report.allow_bidirected;
  j["graphs"] = report.graphs;
  j["achievable"] = report.achievable;
  j["unachievable"] = report.unachievable;
  j["unknown"] = report.unknown;
  j["verified"] = report.verified;
  j["discrepancies"] = report.discrepancies;
  j["ok"] = report.ok;
  return j.dump(2);
}

}  // namespace summon
