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

#include "summon/builders.hpp"

#include <algorithm>
#include <array>
#include <climits>
#include <utility>

#include "summon/errors.hpp"

namespace summon {
namespace {

using Guard = std::vector<Condition>;

Condition bit(int diamond, int value) { return Condition{diamond, value, false}; }

Condition partner_is(int diamond, int other) {
  return Condition{diamond, other, true};
}

/** Appends a condition, skipping exact duplicates. */
Guard also(Guard g, Condition c) {
  for (const Condition& have : g)
    if (have == c) return g;
  g.push_back(c);
  return g;
}

Guard also(Guard g, const Guard& more) {
  for (const Condition& c : more) g = also(std::move(g), c);
  return g;
}

std::vector<int> in_within(const CausalGraph& g, const std::vector<int>& subset,
                           int j) {
  std::vector<int> in;
  for (int i : subset)
    if (i != j && arrow(g, i, j)) in.push_back(i);
  return in;
}

std::vector<int> out_within(const CausalGraph& g, const std::vector<int>& subset,
                            int j) {
  std::vector<int> out;
  for (int i : subset)
    if (i != j && arrow(g, j, i)) out.push_back(i);
  return out;
}

/** Guard under which a summoning over `subset` hands its system to diamond j.
 *  Responding to a bare call (key 0) requires j called and every in-neighbour
 *  of j within the subset uncalled (an earlier call would have consumed the
 *  system).  Responding to a label (key 1 or 2) only needs the label, since a
 *  label appears at most once per pattern. */
Guard summon_guard(const CausalGraph& g, const std::vector<int>& subset, int j,
                   int key) {
  if (key != 0) return {bit(j, key)};
  Guard guard{bit(j, 1)};
  for (int i : in_within(g, subset, j)) guard = also(std::move(guard), bit(i, 0));
  return guard;
}

struct SummonDelivery {
  int diamond = -1;
  int wire = -1;
};

/** Values a diamond shows when it is NOT the responder for `key`. */
std::vector<int> silent_values(int key) {
  if (key == 0) return {0};
  return {0, 3 - key};
}

/** Emits a summoning of `input` (currently at `input_at`, a Past or Start
 *  location) over the induced tournament on `subset`: afterwards, for every
 *  j in subset there is a wire at Return(j) that holds the input whenever
 *  summon_guard(subset, j, key) is true.  Routing decisions use `route`
 *  (always a sub-orientation of prog.graph).
 *
 *  Transitive subsets ride a teleportation rail along the topological order;
 *  otherwise the input is ((2,3))-threshold-encoded and the three shares
 *  recurse on a pivot vertex's in/out split, with every return decoding the
 *  two shares routed to reach it. */
std::vector<SummonDelivery> emit_summon(ProtocolProgram& prog,
                                        const CausalGraph& route,
                                        std::vector<int> subset, int input,
                                        Location input_at, int key) {
  if (subset.empty())
    throw ContractViolation("emit_summon: empty diamond subset");
  std::sort(subset.begin(), subset.end());
  if (!is_tournament(route, subset))
    throw Unsupported(
        "summoning requires every pair of target diamonds to be causally "
        "related in one direction");
  const int respond = key == 0 ? 1 : key;
  std::vector<SummonDelivery> out;

  if (auto order = topological_order(route, subset)) {
    // Teleportation rail: the carrier hops from call point to call point as
    // long as nobody responds, and peels off to the return when someone does.
    const std::vector<int>& tau = *order;
    const int len = static_cast<int>(tau.size());
    int cur = input;
    prog.move(cur, Location::call(tau[0]));
    // (measurement id, guard value at the hop's diamond) per executed hop.
    std::vector<std::vector<std::pair<int, int>>> hops;
    for (int i = 0; i < len; ++i) {
      const int v = tau[i];
      const Guard on{bit(v, respond)};
      prog.move(cur, Location::ret(v), on);
      const Guard dg = summon_guard(route, subset, v, key);
      for (int l = i; l-- > 0;)
        for (auto [meas, value] : hops[l])
          prog.correct(meas, cur, Location::ret(v),
                       also(dg, bit(tau[l], value)));
      out.push_back({v, cur});
      if (i + 1 < len) {
        auto [head, next] =
            prog.add_bell(Location::call(v), Location::call(tau[i + 1]));
        std::vector<std::pair<int, int>> variants;
        for (int value : silent_values(key))
          variants.emplace_back(
              prog.bell_measure(cur, head, Location::call(v), {bit(v, value)}),
              value);
        hops.push_back(std::move(variants));
        cur = next;
      }
    }
    return out;
  }

  // Pivot recursion: pick a vertex with both in- and out-neighbours inside
  // the subset (one exists in any non-transitive tournament), minimizing the
  // larger side, and split the threshold shares across the three overlapping
  // sub-summonings.
  int pivot = -1, best = INT_MAX;
  for (int v : subset) {
    const int din = static_cast<int>(in_within(route, subset, v).size());
    const int dout = static_cast<int>(out_within(route, subset, v).size());
    if (din == 0 || dout == 0) continue;
    const int score = std::max(din, dout);
    if (score < best) {
      best = score;
      pivot = v;
    }
  }
  if (pivot < 0)
    throw ContractViolation("emit_summon: no pivot in a non-transitive subset");
  if (prog.dimension < 3)
    throw ContractViolation(
        "emit_summon: threshold recursion needs working dimension >= 3");

  std::vector<int> rest, outs{pivot}, ins{pivot};
  for (int v : subset)
    if (v != pivot) rest.push_back(v);
  for (int v : out_within(route, subset, pivot)) outs.push_back(v);
  for (int v : in_within(route, subset, pivot)) ins.push_back(v);

  const std::vector<int> shares = prog.encode(input, 2, input_at);
  // Evaluation points: share 0 through rest, 1 through {pivot}+out,
  // 2 through {pivot}+in.  Every subset member lies in exactly two of the
  // three, so every return can decode from the two shares that reach it.
  const std::array<std::vector<int>, 3> groups{rest, outs, ins};
  std::array<std::vector<SummonDelivery>, 3> delivered;
  for (int s = 0; s < 3; ++s)
    delivered[s] = emit_summon(prog, route, groups[s], shares[s], input_at, key);

  auto wire_at = [](const std::vector<SummonDelivery>& ds, int j) {
    for (const SummonDelivery& d : ds)
      if (d.diamond == j) return d.wire;
    throw ContractViolation("emit_summon: missing share delivery");
  };
  for (int j : subset) {
    std::vector<int> parts, points;
    for (int s = 0; s < 3; ++s) {
      const auto& group = groups[s];
      if (std::find(group.begin(), group.end(), j) == group.end()) continue;
      parts.push_back(wire_at(delivered[s], j));
      points.push_back(s);
    }
    const int got = prog.decode(parts, points, 2, Location::ret(j),
                                summon_guard(route, subset, j, key));
    out.push_back({j, got});
  }
  return out;
}

/** Working dimension for a task that may invoke the threshold recursion on
 *  any of `subsets`: the task's own dimension, raised to 3 when some subset
 *  is not transitively ordered. */
int summon_dimension(const TaskSpec& task, const CausalGraph& route,
                     const std::vector<std::vector<int>>& subsets) {
  for (const auto& s : subsets)
    if (!topological_order(route, s)) return std::max(task.dimension, 3);
  return task.dimension;
}

void require_kind(const TaskSpec& task, TaskKind kind, const char* builder) {
  if (task.kind != kind)
    throw InputError(std::string(builder) + ": wrong task kind");
}

void require_start_in_past(const TaskSpec& task, const char* builder) {
  if (!task.graph.start_in_past)
    throw Unsupported(std::string(builder) +
                      ": needs the start point in every diamond's past "
                      "(relax_start_point lifts this requirement)");
}

/** Copy of g with every bidirected pair reduced to its low->high edge. */
CausalGraph orient_low_high(const CausalGraph& g) {
  CausalGraph o = g;
  for (int j = 0; j < g.n(); ++j)
    for (int k = j + 1; k < g.n(); ++k)
      if (bidirected(g, j, k)) o.set_arrow(k, j, false);
  return o;
}

ProtocolProgram begin_program(const TaskSpec& task, std::string name) {
  ProtocolProgram prog;
  prog.name = std::move(name);
  prog.kind = task.kind;
  prog.assistance = task.assistance;
  prog.graph = task.graph;
  prog.dimension = task.dimension;
  return prog;
}

}  // namespace

ProtocolProgram build_single_system(const TaskSpec& task) {
  require_kind(task, TaskKind::SingleSystem, "build_single_system");
  require_start_in_past(task, "build_single_system");
  const CausalGraph& g = task.graph;
  const std::vector<int> vs = all_vertices(g);
  for (int j = 0; j < g.n(); ++j)
    for (int k = j + 1; k < g.n(); ++k)
      if (!connected(g, j, k))
        throw Unsupported(
            "build_single_system: every pair of diamonds must be causally "
            "related");
  const CausalGraph route = orient_low_high(g);

  ProtocolProgram prog = begin_program(task, "single-system");
  prog.dimension = summon_dimension(task, route, {vs});
  const int in = prog.add_input(0);
  const auto deliveries = emit_summon(prog, route, vs, in, Location::start(), 0);
  for (const SummonDelivery& d : deliveries)
    prog.output(d.wire, d.diamond, summon_guard(route, vs, d.diamond, 0), 0);
  return prog;
}

ProtocolProgram build_two_system_rails(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "build_two_system_rails");
  require_start_in_past(task, "build_two_system_rails");
  const CausalGraph& g = task.graph;
  if (!is_transitive_tournament(g))
    throw Unsupported("build_two_system_rails: needs a transitive tournament");
  const std::vector<int> sigma = *topological_order(g, all_vertices(g));
  const int n = g.n();
  if (n < 2)
    throw Unsupported("build_two_system_rails: needs at least two diamonds");

  ProtocolProgram prog = begin_program(task, "two-system-rails");
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);

  // Rail wires.  eA[i]/eB[i] is the carrier arriving at position i; the first
  // subsystem rides the E rail, the second rides the F rail until a call is
  // seen, then crosses onto the E rail's next pair.
  std::vector<int> ea(n, -1), eb(std::max(n - 1, 1), -1);
  std::vector<int> eph(std::max(n - 1, 0), -1), fph(std::max(n - 2, 0), -1);
  ea[0] = a;
  eb[0] = b;
  for (int i = 0; i + 1 < n; ++i) {
    auto [head, next] =
        prog.add_bell(Location::call(sigma[i]), Location::call(sigma[i + 1]));
    eph[i] = head;
    ea[i + 1] = next;
  }
  for (int i = 0; i + 2 < n; ++i) {
    auto [head, next] =
        prog.add_bell(Location::call(sigma[i]), Location::call(sigma[i + 1]));
    fph[i] = head;
    eb[i + 1] = next;
  }
  prog.move(a, Location::call(sigma[0]));
  prog.move(b, Location::call(sigma[0]));

  std::vector<int> me(n, -1), mf(n, -1), mx(n, -1);
  for (int i = 0; i < n; ++i) {
    const int v = sigma[i];
    const Location rv = Location::ret(v);
    // Second-rail hops are emitted two positions late: their outcomes are
    // first consumed two returns downstream, and the delay lets the engine
    // retire earlier outcome registers before new ones pile up.
    if (i - 2 >= 0 && i - 2 < n - 2)
      mf[i - 2] = prog.bell_measure(eb[i - 2], fph[i - 2],
                                    Location::call(sigma[i - 2]),
                                    {bit(sigma[i - 2], 0)});
    prog.move(ea[i], rv, {bit(v, 1)});
    // First call at v: the first subsystem arrived along uninterrupted E hops.
    Guard ga{bit(v, 1)};
    for (int m = 0; m < i; ++m) ga = also(std::move(ga), bit(sigma[m], 0));
    for (int l = i; l-- > 0;) prog.correct(me[l], ea[i], rv, ga);
    prog.output(ea[i], v, ga, 0);
    // Second call at v, first call at position t: the second subsystem rode
    // F hops to t, crossed onto the E rail there, then rode E hops to i.
    for (int t = i; t-- > 0;) {
      const Guard gb{bit(v, 1), bit(sigma[t], 1)};
      for (int l = i; l-- > t + 1;)
        prog.correct(me[l], ea[i], rv, also(gb, bit(sigma[l], 0)));
      prog.correct(mx[t], ea[i], rv, gb);
      for (int m = t; m-- > 0;)
        prog.correct(mf[m], ea[i], rv, also(gb, bit(sigma[m], 0)));
      prog.output(ea[i], v, gb, 1);
    }
    if (i < n - 1) {
      me[i] = prog.bell_measure(ea[i], eph[i], Location::call(v), {bit(v, 0)});
      mx[i] = prog.bell_measure(eb[i], eph[i], Location::call(v), {bit(v, 1)});
    }
  }
  return prog;
}

ProtocolProgram build_two_system_rails_gap(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "build_two_system_rails_gap");
  require_start_in_past(task, "build_two_system_rails_gap");
  const CausalGraph& g = task.graph;
  const auto gap = dominating_gap_pair(g);
  if (!gap)
    throw Unsupported(
        "build_two_system_rails_gap: needs one non-adjacent pair that "
        "dominates the remaining diamonds");
  const auto [u, w] = *gap;
  std::vector<int> rest;
  for (int v : all_vertices(g))
    if (v != u && v != w) rest.push_back(v);
  const auto ord = topological_order(g, rest);
  if (!ord)
    throw Unsupported(
        "build_two_system_rails_gap: the dominated diamonds must be "
        "transitively ordered (label assistance handles the general case)");
  const std::vector<int> sigma = *ord;
  const int m = static_cast<int>(sigma.size());

  ProtocolProgram prog = begin_program(task, "two-system-rails-gap");
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);
  prog.move(a, Location::call(u));
  prog.move(b, Location::call(w));
  prog.move(a, Location::ret(u), {bit(u, 1)});
  prog.output(a, u, {bit(u, 1)}, 0);
  prog.move(b, Location::ret(w), {bit(w, 1)});
  prog.output(b, w, {bit(w, 1)}, 1);
  if (m == 0) return prog;  // bare non-adjacent pair: only pattern is {u,w}

  // G pair links the two gap diamonds; E/F rails start at u and run down the
  // dominated chain exactly as in the transitive construction.
  auto [gh, gw] = prog.add_bell(Location::call(u), Location::call(w));
  std::vector<int> ea(m, -1), eb(std::max(m - 1, 1), -1);
  std::vector<int> eph(m, -1), fph(std::max(m - 1, 0), -1);
  {
    auto [head, next] = prog.add_bell(Location::call(u), Location::call(sigma[0]));
    eph[0] = head;  // head of the E rail sits at u
    ea[0] = next;
  }
  for (int i = 0; i + 1 < m; ++i) {
    auto [head, next] =
        prog.add_bell(Location::call(sigma[i]), Location::call(sigma[i + 1]));
    eph[i + 1] = head;
    ea[i + 1] = next;
  }
  int fhu = -1;
  if (m >= 2) {
    auto [head, next] = prog.add_bell(Location::call(u), Location::call(sigma[0]));
    fhu = head;
    eb[0] = next;
    for (int i = 0; i + 2 < m; ++i) {
      auto [h2, n2] =
          prog.add_bell(Location::call(sigma[i]), Location::call(sigma[i + 1]));
      fph[i] = h2;
      eb[i + 1] = n2;
    }
  }

  // u called: the G half crosses onto the E rail (it will carry the second
  // subsystem if w stays silent).  u uncalled: the first subsystem enters the
  // E rail and the G half enters the F rail.
  const int mxu = prog.bell_measure(gh, eph[0], Location::call(u), {bit(u, 1)});
  const int mae = prog.bell_measure(a, eph[0], Location::call(u), {bit(u, 0)});
  const int mgf =
      m >= 2 ? prog.bell_measure(gh, fhu, Location::call(u), {bit(u, 0)}) : -1;
  const int mbg = prog.bell_measure(b, gw, Location::call(w), {bit(w, 0)});

  std::vector<int> me(m, -1), mf(m, -1), mx(m, -1);
  // E-rail hop at chain position i teleports into pair eph[i+1]; crossings
  // at i likewise.  F-rail hop at i uses fph[i].
  for (int i = 0; i < m; ++i) {
    const int v = sigma[i];
    const Location rv = Location::ret(v);
    if (i - 2 >= 0 && i - 2 < m - 2)
      mf[i - 2] = prog.bell_measure(eb[i - 2], fph[i - 2],
                                    Location::call(sigma[i - 2]),
                                    {bit(sigma[i - 2], 0)});
    prog.move(ea[i], rv, {bit(v, 1)});
    // First call at v (u silent): first subsystem rode mae then E hops.
    Guard ga{bit(v, 1), bit(u, 0)};
    for (int mm = 0; mm < i; ++mm) ga = also(std::move(ga), bit(sigma[mm], 0));
    for (int l = i; l-- > 0;) prog.correct(me[l], ea[i], rv, ga);
    prog.correct(mae, ea[i], rv, ga);
    prog.output(ea[i], v, ga, 0);
    // v with u: second subsystem was bounced off w's call point onto the G
    // half, crossed at u, then rode E hops.
    {
      const Guard gu{bit(v, 1), bit(u, 1)};
      for (int l = i; l-- > 0;)
        prog.correct(me[l], ea[i], rv, also(gu, bit(sigma[l], 0)));
      prog.correct(mxu, ea[i], rv, gu);
      prog.correct(mbg, ea[i], rv, also(gu, bit(w, 0)));
      prog.output(ea[i], v, gu, 1);
    }
    // v with an earlier chain call at position t: the second subsystem rode
    // the F rail to t, crossed there, then rode E hops.
    for (int t = i; t-- > 0;) {
      const Guard gt{bit(v, 1), bit(sigma[t], 1)};
      for (int l = i; l-- > t + 1;)
        prog.correct(me[l], ea[i], rv, also(gt, bit(sigma[l], 0)));
      prog.correct(mx[t], ea[i], rv, gt);
      for (int mm = t; mm-- > 0;)
        prog.correct(mf[mm], ea[i], rv, also(gt, bit(sigma[mm], 0)));
      prog.correct(mgf, ea[i], rv, also(gt, bit(u, 0)));
      prog.correct(mbg, ea[i], rv, also(gt, bit(w, 0)));
      prog.output(ea[i], v, gt, 1);
    }
    if (i < m - 1) {
      me[i] = prog.bell_measure(ea[i], eph[i + 1], Location::call(v), {bit(v, 0)});
      mx[i] = prog.bell_measure(eb[i], eph[i + 1], Location::call(v), {bit(v, 1)});
    }
  }
  return prog;
}

ProtocolProgram build_label_parallel(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "build_label_parallel");
  require_start_in_past(task, "build_label_parallel");
  if (task.assistance == Assistance::None)
    throw InputError("build_label_parallel: needs label or global assistance");
  const CausalGraph& g = task.graph;
  const std::vector<int> vs = all_vertices(g);
  if (!is_tournament(g, vs))
    throw Unsupported("build_label_parallel: needs a tournament");

  ProtocolProgram prog = begin_program(task, "label-parallel");
  prog.dimension = summon_dimension(task, g, {vs});
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);
  const auto da = emit_summon(prog, g, vs, a, Location::start(), 1);
  const auto db = emit_summon(prog, g, vs, b, Location::start(), 2);
  for (const SummonDelivery& d : da)
    prog.output(d.wire, d.diamond, {bit(d.diamond, 1)}, 0);
  for (const SummonDelivery& d : db)
    prog.output(d.wire, d.diamond, {bit(d.diamond, 2)}, 1);
  return prog;
}

ProtocolProgram build_label_gap(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "build_label_gap");
  require_start_in_past(task, "build_label_gap");
  if (task.assistance == Assistance::None)
    throw InputError("build_label_gap: needs label or global assistance");
  const CausalGraph& g = task.graph;
  const auto gap = dominating_gap_pair(g);
  if (!gap)
    throw Unsupported(
        "build_label_gap: needs one non-adjacent pair that dominates the "
        "remaining diamonds");
  const auto [u, w] = *gap;
  std::vector<int> rest;
  for (int v : all_vertices(g))
    if (v != u && v != w) rest.push_back(v);

  ProtocolProgram prog = begin_program(task, "label-gap");
  prog.dimension = rest.empty() ? task.dimension
                                : summon_dimension(task, g, {rest});
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);
  prog.move(a, Location::call(u));
  prog.move(b, Location::call(w));
  for (int label : {1, 2}) {
    prog.move(a, Location::ret(u), {bit(u, label)});
    prog.output(a, u, {bit(u, label)}, 0);
    prog.move(b, Location::ret(w), {bit(w, label)});
    prog.output(b, w, {bit(w, label)}, 1);
  }
  if (rest.empty()) return prog;

  // Each subsystem is teleported toward the opposite gap diamond: A onto
  // e_w, B onto f_u (uncalled senders only).  The carrier half is then fed
  // into one of four label-keyed summonings over the dominated tournament,
  // which run on inputs teleported in from the past so all corrections land
  // at the delivering return.
  auto [e_u, e_w] = prog.add_bell(Location::call(u), Location::call(w));
  auto [f_u, f_w] = prog.add_bell(Location::call(u), Location::call(w));
  const int ma = prog.bell_measure(a, e_u, Location::call(u), {bit(u, 0)});
  const int mb = prog.bell_measure(b, f_w, Location::call(w), {bit(w, 0)});

  struct SubSummon {
    int carrier;                // the local half holding the far subsystem
    Location entry;             // the gap call point it sits at
    int key;                    // label the summoning responds to
    int logical;                // ma or mb: the teleport that loaded A or B
    int subsystem;              // which input the delivery carries
    // (entry guard, full call-pattern context) per serving case.  A guard at
    // the entry call point can only read the local call bit (the gap
    // diamonds are mutually unreachable), so the entry teleport fires on the
    // local part; the full context still gates the delivery side.  Entry
    // guards are mutually exclusive across the two subs sharing a carrier,
    // so each carrier is measured at most once per pattern.
    std::vector<std::pair<Guard, Guard>> cases;
  };
  const std::vector<SubSummon> subs{
      {f_u, Location::call(u), 1, mb, 1,
       {{{bit(u, 2)}, {bit(u, 2)}}, {{bit(u, 0)}, {bit(u, 0), bit(w, 0)}}}},
      {f_u, Location::call(u), 2, mb, 1, {{{bit(u, 1)}, {bit(u, 1)}}}},
      {e_w, Location::call(w), 1, ma, 0, {{{bit(w, 2)}, {bit(w, 2)}}}},
      {e_w, Location::call(w), 2, ma, 0,
       {{{bit(w, 1)}, {bit(w, 1)}}, {{bit(w, 0)}, {bit(u, 0), bit(w, 0)}}}},
  };
  for (const SubSummon& sub : subs) {
    auto [entry_half, past_half] = prog.add_bell(sub.entry, Location::past());
    std::vector<std::pair<int, Guard>> entries;  // (entry teleport, context)
    for (const auto& [local, ctx] : sub.cases)
      entries.emplace_back(
          prog.bell_measure(sub.carrier, entry_half, sub.entry, local), ctx);
    const auto deliveries =
        emit_summon(prog, g, rest, past_half, Location::past(), sub.key);
    for (const SummonDelivery& d : deliveries) {
      for (const auto& [entry_meas, ctx] : entries) {
        const Guard guard = also(Guard{bit(d.diamond, sub.key)}, ctx);
        // Undo the entry teleport first (it twisted last), then the teleport
        // that loaded the subsystem onto the carrier.
        prog.correct(entry_meas, d.wire, Location::ret(d.diamond), guard);
        prog.correct(sub.logical, d.wire, Location::ret(d.diamond), guard);
        prog.output(d.wire, d.diamond, guard, sub.subsystem);
      }
    }
  }
  return prog;
}

ProtocolProgram build_global_crossed(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "build_global_crossed");
  require_start_in_past(task, "build_global_crossed");
  if (task.assistance != Assistance::Global)
    throw InputError("build_global_crossed: needs global assistance");
  const CausalGraph& g = task.graph;
  if (g.n() != 4)
    throw Unsupported("build_global_crossed: needs exactly four diamonds");
  // Roles: two sources u1,u2 each pointing at both sinks v1,v2.
  std::array<int, 4> role{-1, -1, -1, -1};  // u1,u2,v1,v2
  bool found = false;
  std::array<int, 4> perm{0, 1, 2, 3};
  std::sort(perm.begin(), perm.end());
  do {
    const int u1 = perm[0], u2 = perm[1], v1 = perm[2], v2 = perm[3];
    if (arrow(g, u1, v1) && arrow(g, u1, v2) && arrow(g, u2, v1) &&
        arrow(g, u2, v2)) {
      role = {u1, u2, v1, v2};
      found = true;
      break;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (!found)
    throw Unsupported(
        "build_global_crossed: needs two diamonds each preceding the other "
        "two");
  const int u1 = role[0], u2 = role[1], v1 = role[2], v2 = role[3];

  ProtocolProgram prog = begin_program(task, "global-crossed");
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);
  auto [e, ep] = prog.add_bell(Location::call(u1), Location::call(u2));
  auto [f, fp] = prog.add_bell(Location::call(u1), Location::call(u2));
  prog.move(a, Location::call(u1));
  prog.move(b, Location::call(u2));

  // Source u1: deliver the first subsystem if called (label value 1 or 2);
  // aim the E half at the partner sink when the partner is a sink, else let
  // it default to v1; if silent, load A onto the F rail toward u2.
  for (int label : {1, 2}) {
    prog.move(a, Location::ret(u1), {bit(u1, label)});
    prog.output(a, u1, {bit(u1, label)}, 0);
  }
  prog.move(e, Location::ret(v1), {partner_is(u1, v1)});
  prog.move(e, Location::ret(v2), {partner_is(u1, v2)});
  prog.move(e, Location::ret(v1), {bit(u1, 0)});
  const int maf = prog.bell_measure(a, f, Location::call(u1), {bit(u1, 0)});
  // Source u2 mirrors with the F' half and the B input.
  for (int label : {1, 2}) {
    prog.move(b, Location::ret(u2), {bit(u2, label)});
    prog.output(b, u2, {bit(u2, label)}, 1);
  }
  prog.move(fp, Location::ret(v1), {partner_is(u2, v1)});
  prog.move(fp, Location::ret(v2), {partner_is(u2, v2)});
  prog.move(fp, Location::ret(v2), {bit(u2, 0)});
  const int mbe = prog.bell_measure(b, ep, Location::call(u2), {bit(u2, 0)});

  // Sinks: the E half carries the second subsystem (loaded at u2) and the
  // F' half carries the first (loaded at u1).
  const auto sink_out = [&](int sink, int with, int wire, int meas, int sub) {
    const Guard gd{partner_is(sink, with)};
    prog.correct(meas, wire, Location::ret(sink), gd);
    prog.output(wire, sink, gd, sub);
  };
  sink_out(v1, u1, e, mbe, 1);
  sink_out(v1, v2, e, mbe, 1);
  sink_out(v1, u2, fp, maf, 0);
  sink_out(v2, u1, e, mbe, 1);
  sink_out(v2, v1, fp, maf, 0);
  sink_out(v2, u2, fp, maf, 0);
  return prog;
}

ProtocolProgram build_entanglement_routing(const TaskSpec& task) {
  require_kind(task, TaskKind::Entanglement, "build_entanglement_routing");
  const CausalGraph& g = task.graph;
  if (!is_oriented(g))
    throw Unsupported(
        "build_entanglement_routing: needs an oriented graph (pick an "
        "orientation of bidirected edges first)");
  const auto xp = x_partition(g);
  if (!xp)
    throw Unsupported(
        "build_entanglement_routing: non-adjacent diamonds must come in "
        "disjoint pairs");
  std::vector<std::vector<int>> sets;
  for (int j = 0; j < g.n(); ++j) {
    sets.push_back(s_set(g, j));
    if (!is_tournament(g, sets.back()))
      throw Unsupported(
          "build_entanglement_routing: every candidate-partner set must be a "
          "tournament");
  }

  ProtocolProgram prog = begin_program(task, "entanglement-routing");
  prog.assistance = Assistance::None;  // labels are never consulted
  std::vector<std::vector<int>> subsets;
  std::vector<bool> in_x(g.n(), false);
  for (const auto& [j, k] : *xp) in_x[j] = in_x[k] = true;
  for (int j = 0; j < g.n(); ++j)
    if (!sets[j].empty()) subsets.push_back(sets[j]);
  prog.dimension = summon_dimension(task, g, subsets);

  // One summoning per Bell half.  A half owned by j is delivered at r_j when
  // j answers first, and at r_v (v an out-neighbour of the half's partner
  // owner i) when v answers alongside i -- then it is exactly the half
  // entangled with the one i walked out with.
  const auto route_half = [&](int wire, int owner, int partner_owner,
                              const std::vector<int>& through) {
    const auto deliveries =
        emit_summon(prog, g, through, wire, Location::past(), 0);
    for (const SummonDelivery& d : deliveries) {
      if (d.diamond == owner) {
        prog.output(d.wire, owner, summon_guard(g, all_vertices(g), owner, 0));
      } else if (arrow(g, partner_owner, d.diamond)) {
        prog.output(d.wire, d.diamond,
                    {bit(d.diamond, 1), bit(partner_owner, 1)});
      }
    }
  };
  for (const auto& [j, k] : *xp) {
    auto [aj, ak] = prog.add_bell(Location::past(), Location::past());
    route_half(aj, j, k, sets[k]);
    route_half(ak, k, j, sets[j]);
  }
  for (int k = 0; k < g.n(); ++k) {
    if (in_x[k]) continue;
    // When every other diamond precedes k, k can never answer first, so the
    // pair reserved for that case would sit unused.
    if (sets[k].empty()) continue;
    auto [ak, bk] = prog.add_bell(Location::past(), Location::past());
    prog.move(ak, Location::call(k));
    prog.move(ak, Location::ret(k), {bit(k, 1)});
    prog.output(ak, k, summon_guard(g, all_vertices(g), k, 0));
    route_half(bk, k, k, sets[k]);
  }
  return prog;
}

ProtocolProgram build_entanglement_global(const TaskSpec& task) {
  require_kind(task, TaskKind::Entanglement, "build_entanglement_global");
  if (task.assistance != Assistance::Global)
    throw InputError("build_entanglement_global: needs global assistance");
  const CausalGraph& g = task.graph;
  ProtocolProgram prog = begin_program(task, "entanglement-global");
  // A dedicated pair per unordered pair of diamonds, each half pre-placed at
  // its return; the global call set names which pair to hand over.
  for (int j = 0; j < g.n(); ++j)
    for (int k = j + 1; k < g.n(); ++k) {
      auto [hj, hk] = prog.add_bell(Location::ret(j), Location::ret(k));
      prog.output(hj, j, {partner_is(j, k)});
      prog.output(hk, k, {partner_is(k, j)});
    }
  return prog;
}

ProtocolProgram build_entanglement_hub(const TaskSpec& task) {
  require_kind(task, TaskKind::Entanglement, "build_entanglement_hub");
  const CausalGraph& g = task.graph;
  int a = -1, b = -1, c = -1;
  if (g.n() == 3) {
    for (int j = 0; j < 3; ++j)
      for (int k = j + 1; k < 3; ++k)
        if (bidirected(g, j, k)) {
          a = j;
          b = k;
          c = 3 - j - k;
        }
  }
  const bool shape =
      a >= 0 && !connected(g, a, c) && !connected(g, b, c) &&
      count_nonadjacent_pairs(g) == 2;
  if (!shape)
    throw Unsupported(
        "build_entanglement_hub: needs three diamonds, one bidirected pair, "
        "and an isolated third");

  ProtocolProgram prog = begin_program(task, "entanglement-hub");
  prog.assistance = Assistance::None;
  auto [gh, gc] = prog.add_bell(Location::call(a), Location::call(c));
  auto [hh, hb] = prog.add_bell(Location::call(a), Location::call(b));
  prog.move(gh, Location::ret(a), {bit(a, 1)});
  prog.move(gh, Location::ret(b), {bit(a, 0)});
  prog.move(hh, Location::ret(a), {bit(a, 1)});
  prog.move(hb, Location::ret(b), {bit(b, 1)});
  prog.move(gc, Location::ret(c), {bit(c, 1)});
  prog.output(hh, a, {bit(a, 1), bit(b, 1)});
  prog.output(gh, a, {bit(a, 1), bit(b, 0)});
  prog.output(hb, b, {bit(b, 1), bit(a, 1)});
  prog.output(gh, b, {bit(b, 1), bit(a, 0)});
  prog.output(gc, c, {bit(c, 1)});
  return prog;
}

ProtocolProgram build_bidirected_square(const TaskSpec& task) {
  require_kind(task, TaskKind::TwoSystem, "build_bidirected_square");
  require_start_in_past(task, "build_bidirected_square");
  const CausalGraph& g = task.graph;
  // Identify the 4-ring: bidirected edges around, no diagonals.
  std::array<int, 4> ring{-1, -1, -1, -1};
  bool found = false;
  if (g.n() == 4) {
    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      bool ok = true;
      for (int i = 0; i < 4 && ok; ++i)
        ok = bidirected(g, perm[i], perm[(i + 1) % 4]);
      ok = ok && !connected(g, perm[0], perm[2]) &&
           !connected(g, perm[1], perm[3]);
      if (ok) {
        ring = perm;
        found = true;
        break;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  if (!found)
    throw Unsupported(
        "build_bidirected_square: needs a bidirected 4-cycle with both "
        "diagonals absent");

  ProtocolProgram prog = begin_program(task, "bidirected-square");
  prog.dimension = std::max(task.dimension, 5);
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);
  // ((3,5)) threshold shares: alpha holds the first subsystem, beta the
  // second.  Each ring vertex hosts one alpha and one beta share; the spare
  // shares sit at opposite corners.
  const std::vector<int> alpha = prog.encode(a, 3, Location::start());
  const std::vector<int> beta = prog.encode(b, 3, Location::start());
  for (int i = 0; i < 4; ++i) {
    prog.move(alpha[i], Location::call(ring[i]));
    prog.move(beta[i], Location::call(ring[i]));
  }
  prog.move(alpha[4], Location::call(ring[0]));
  prog.move(beta[4], Location::call(ring[2]));

  // Every hosted share bounces across one ring edge, direction keyed to the
  // host's call bit; the receiving half falls back to the host's return if
  // the neighbour stays silent.  q[wire index][row] = landing wire.
  const auto bounce = [&](int wire, int from, int to, int row) {
    auto [head, land] = prog.add_bell(Location::call(from), Location::call(to));
    const int meas =
        prog.bell_measure(wire, head, Location::call(from), {bit(from, row)});
    prog.move(land, Location::ret(to), {bit(to, 1)});
    prog.move(land, Location::ret(from), {bit(to, 0)});
    prog.correct(meas, land, Location::ret(to), {bit(from, row), bit(to, 1)});
    prog.correct(meas, land, Location::ret(from), {bit(from, row), bit(to, 0)});
    return land;
  };
  // qa[i][row]: landing wire of ring[i]'s alpha share when its host shows
  // `row`; alpha bounces against the ring direction when called, with it
  // when silent; beta mirrors.
  std::array<std::array<int, 2>, 4> qa{}, qb{};
  for (int i = 0; i < 4; ++i) {
    const int prev = ring[(i + 3) % 4], next = ring[(i + 1) % 4];
    qa[i][1] = bounce(alpha[i], ring[i], prev, 1);
    qa[i][0] = bounce(alpha[i], ring[i], next, 0);
    qb[i][1] = bounce(beta[i], ring[i], next, 1);
    qb[i][0] = bounce(beta[i], ring[i], prev, 0);
  }
  prog.move(alpha[4], Location::ret(ring[0]), {bit(ring[0], 1)});
  prog.move(alpha[4], Location::ret(ring[1]), {bit(ring[0], 0)});
  prog.move(beta[4], Location::ret(ring[2]), {bit(ring[2], 1)});
  prog.move(beta[4], Location::ret(ring[3]), {bit(ring[2], 0)});

  // Reconstruction table: per return, per compatible neighbour pattern, the
  // three shares that land there.  Entries are (wire, evaluation point).
  struct Rebuild {
    int at;                    // ring position of the return
    Guard guard;               // full pattern context (ring coordinates)
    std::vector<std::pair<int, int>> shares;
    int subsystem;
  };
  const auto rg = [&](int i, int v) { return bit(ring[i], v); };
  std::vector<Rebuild> table;
  // r_0:
  table.push_back({0, {rg(0, 1), rg(1, 1), rg(3, 0)},
                   {{qa[0][1], 0}, {qa[1][1], 1}, {qa[3][0], 3}}, 0});
  table.push_back({0, {rg(0, 1), rg(1, 0), rg(3, 0)},
                   {{qa[0][1], 0}, {qa[3][0], 3}, {alpha[4], 4}}, 0});
  table.push_back({0, {rg(0, 1), rg(3, 1), rg(1, 0)},
                   {{qb[0][1], 0}, {qb[1][0], 1}, {qb[3][1], 3}}, 1});
  // r_1:
  table.push_back({1, {rg(1, 1), rg(0, 1), rg(2, 0)},
                   {{qb[0][1], 0}, {qb[1][1], 1}, {qb[2][0], 2}}, 1});
  table.push_back({1, {rg(1, 1), rg(2, 1), rg(0, 0)},
                   {{qa[0][0], 0}, {qa[1][1], 1}, {qa[2][1], 2}}, 0});
  table.push_back({1, {rg(1, 1), rg(0, 0), rg(2, 0)},
                   {{qa[0][0], 0}, {qa[1][1], 1}, {alpha[4], 4}}, 0});
  // r_2:
  table.push_back({2, {rg(2, 1), rg(1, 1), rg(3, 0)},
                   {{qb[1][1], 1}, {qb[2][1], 2}, {qb[3][0], 3}}, 1});
  table.push_back({2, {rg(2, 1), rg(3, 1), rg(1, 0)},
                   {{qa[1][0], 1}, {qa[2][1], 2}, {qa[3][1], 3}}, 0});
  table.push_back({2, {rg(2, 1), rg(1, 0), rg(3, 0)},
                   {{qb[2][1], 2}, {qb[3][0], 3}, {beta[4], 4}}, 1});
  // r_3:
  table.push_back({3, {rg(3, 1), rg(0, 1), rg(2, 0)},
                   {{qa[0][1], 0}, {qa[2][0], 2}, {qa[3][1], 3}}, 0});
  table.push_back({3, {rg(3, 1), rg(2, 1), rg(0, 0)},
                   {{qb[0][0], 0}, {qb[2][1], 2}, {qb[3][1], 3}}, 1});
  table.push_back({3, {rg(3, 1), rg(0, 0), rg(2, 0)},
                   {{qb[0][0], 0}, {qb[3][1], 3}, {beta[4], 4}}, 1});
  for (const Rebuild& r : table) {
    std::vector<int> wires, points;
    for (const auto& [wire, point] : r.shares) {
      wires.push_back(wire);
      points.push_back(point);
    }
    const int got =
        prog.decode(wires, points, 3, Location::ret(ring[r.at]), r.guard);
    prog.output(got, ring[r.at], r.guard, r.subsystem);
  }
  return prog;
}

ProtocolProgram relax_start_point(const ProtocolProgram& inner) {
  if (inner.inputs.empty())
    throw Unsupported("relax_start_point: program has no inputs to relax");
  if (!inner.graph.start_in_past)
    throw Unsupported("relax_start_point: program is already start-relaxed");
  if (!inner.graph.start_precedes_all_returns)
    throw Unsupported(
        "relax_start_point: the start point must at least precede every "
        "return");
  ProtocolProgram out = inner;
  out.graph.start_in_past = false;

  // Everything the inner program did at the start point now happens in the
  // past, on wires entangled with fresh halves that wait at the start point.
  const Location start = Location::start();
  const Location past = Location::past();
  for (auto& bell : out.bells) {
    if (bell.at_a == start) bell.at_a = past;
    if (bell.at_b == start) bell.at_b = past;
  }
  for (auto& fresh : out.freshes)
    if (fresh.at == start) fresh.at = past;
  for (auto& ins : out.instrs)
    if (ins.at == start) ins.at = past;

  // Each input is handed over at the start point and immediately teleported
  // onto the past-based wire the inner program manipulates.
  std::vector<int> meas_for;  // per subsystem
  std::vector<Instr> entry;
  for (auto& din : out.inputs) {
    const int old_wire = din.wire;
    const int handed = out.new_wire();
    auto [half, rewired] = std::pair<int, int>{out.new_wire(), old_wire};
    out.bells.push_back(BellDecl{half, rewired, start, past});
    din.wire = handed;
    Instr bm;
    bm.op = Instr::Op::BellMeasure;
    bm.wires = {handed, half};
    bm.at = start;
    bm.meas_id = out.meas_count++;
    entry.push_back(std::move(bm));
    if (static_cast<int>(meas_for.size()) <= din.subsystem)
      meas_for.resize(din.subsystem + 1, -1);
    meas_for[din.subsystem] = entry.back().meas_id;
  }
  out.instrs.insert(out.instrs.begin(), entry.begin(), entry.end());

  // The inner program routes each (twisted) input faithfully, so undoing the
  // entry teleport right before each output restores the exact state.
  std::vector<Instr> rewritten;
  for (const Instr& ins : out.instrs) {
    if (ins.op == Instr::Op::Output) {
      if (ins.subsystem < 0 ||
          ins.subsystem >= static_cast<int>(meas_for.size()) ||
          meas_for[ins.subsystem] < 0)
        throw Unsupported(
            "relax_start_point: every output must be tagged with the input "
            "subsystem it carries");
      Instr fix;
      fix.op = Instr::Op::Correct;
      fix.wires = ins.wires;
      fix.at = ins.at;
      fix.meas_id = meas_for[ins.subsystem];
      fix.given = ins.given;
      rewritten.push_back(std::move(fix));
    }
    rewritten.push_back(ins);
  }
  out.instrs = std::move(rewritten);
  out.name = inner.name + "+start-relaxed";
  return out;
}

namespace {

using BuilderFn = ProtocolProgram (*)(const TaskSpec&);

struct BuilderEntry {
  const char* name;
  BuilderFn fn;
};

constexpr std::array<BuilderEntry, 10> kBuilders{{
    {"single-system", &build_single_system},
    {"two-system-rails", &build_two_system_rails},
    {"two-system-rails-gap", &build_two_system_rails_gap},
    {"label-parallel", &build_label_parallel},
    {"label-gap", &build_label_gap},
    {"global-crossed", &build_global_crossed},
    {"entanglement-routing", &build_entanglement_routing},
    {"entanglement-global", &build_entanglement_global},
    {"entanglement-hub", &build_entanglement_hub},
    {"bidirected-square", &build_bidirected_square},
}};

BuilderFn find_builder(const std::string& name) {
  for (const BuilderEntry& e : kBuilders)
    if (name == e.name) return e.fn;
  return nullptr;
}

}  // namespace

bool known_builder(const std::string& name) {
  return find_builder(name) != nullptr;
}

ProtocolProgram build_from_plan(const TaskSpec& task, const ProtocolPlan& plan) {
  const BuilderFn fn = find_builder(plan.builder);
  if (!fn) throw InputError("unknown protocol builder: " + plan.builder);

  TaskSpec t = task;
  if (plan.orientation) {
    CausalGraph o = *plan.orientation;
    o.start_in_past = task.graph.start_in_past;
    o.start_precedes_all_returns = task.graph.start_precedes_all_returns;
    t.graph = o;
  }
  const bool needs_relax =
      task.kind != TaskKind::Entanglement && !task.graph.start_in_past;
  if (needs_relax) t.graph.start_in_past = true;

  ProtocolProgram prog = fn(t);
  if (plan.orientation) {
    // Restore the full graph: the construction only used the orientation's
    // edges, and every edge of the real graph may carry its messages.
    CausalGraph real = task.graph;
    real.start_in_past = prog.graph.start_in_past;
    real.start_precedes_all_returns = prog.graph.start_precedes_all_returns;
    prog.graph = real;
  }
  if (needs_relax) prog = relax_start_point(prog);
  return prog;
}

bool apply_mutation(ProtocolProgram& prog, const std::string& name) {
  if (name == "junk-output") {
    for (Instr& ins : prog.instrs) {
      if (ins.op != Instr::Op::Output) continue;
      const int junk = prog.add_fresh(ins.at);
      ins.wires = {junk};
      return true;
    }
    return false;
  }
  if (name == "swap-decode-points") {
    for (Instr& ins : prog.instrs) {
      if (ins.op != Instr::Op::Decode || ins.positions.size() < 2) continue;
      std::swap(ins.positions[0], ins.positions[1]);
      return true;
    }
    return false;
  }
  return false;
}

}  // namespace summon
