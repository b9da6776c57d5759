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

/** \file achievability.hpp
 *  Decision procedures: which summoning tasks admit a protocol.
 *
 *  Each decider inspects a task's causal graph and returns a Verdict:
 *   - Achievable, with a ProtocolPlan naming a builder that compiles the
 *     task (plus, when the graph has bidirected edges and the construction
 *     runs on a one-way sub-orientation, that orientation);
 *   - Unachievable, with a machine-checkable Witness that confirm_witness()
 *     can replay independently of the decision path;
 *   - Unknown, when no known rule applies.  Global assistance and graphs
 *     with bidirected edges are only partially characterized, so Unknown is
 *     a first-class answer, not an error.
 *
 *  The decision rules, per kind and assistance:
 *   - single-system: achievable iff the start point precedes every return
 *     and every pair of diamonds is causally connected;
 *   - two-system, unassisted, oriented: achievable iff the start point
 *     precedes every return and every vertex triple has an in-degree-2
 *     vertex (equivalently, the graph is a transitive tournament or one
 *     non-adjacent pair dominating a transitive tournament);
 *   - two-system, label-assisted, oriented: the triple rule relaxes to
 *     "in-degree-2 vertex or 3-cycle" (tournament, or one non-adjacent pair
 *     dominating a tournament);
 *   - two-system, global-assisted: achievable when the label rule accepts
 *     (both called diamonds can derive labels from the call tuple) or when
 *     four diamonds contain two sources each preceding the other two
 *     (the crossed construction); no no-go is known, so never Unachievable;
 *   - entanglement: global assistance is always achievable (one Bell pair
 *     parked per diamond pair); otherwise achievable iff for every diamond
 *     j the set S_j of possible partners (no edge into j) is causally
 *     connected pairwise, which on oriented graphs also suffices;
 *   - bidirected two-system, unassisted: unachievable when some diamond is
 *     disconnected from two others; achievable when some orientation of the
 *     bidirected edges passes the oriented rule, or the graph is the
 *     four-cycle of bidirected edges ("square") solved by threshold coding;
 *   - bidirected entanglement: the pairwise-connected-S_j condition stays
 *     necessary; sufficiency is known only via orientations or the
 *     three-diamond hub graph, so e.g. the bidirected pentagon is Unknown.
 *
 *  crosscheck() sweeps every labelled graph of a given size, re-derives the
 *  structural characterizations by independent means, confirms witnesses,
 *  optionally runs full protocol verification for each achievable graph,
 *  and checks monotonicity (adding edges never breaks achievability).
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "summon/builders.hpp"
#include "summon/causal_graph.hpp"
#include "summon/task_model.hpp"

namespace summon {

enum class Status { Achievable, Unachievable, Unknown };

std::string to_string(Status s);

/** Machine-checkable evidence for an Unachievable verdict.  `kind` selects
 *  the structural rule that confirm_witness() replays:
 *   - NonAdjacentPair: vertices = {j,k} not causally connected (breaks the
 *     single-system pair condition);
 *   - BadTriple: vertices = a triple with no in-degree-2 vertex and, under
 *     label or global assistance, not a 3-cycle; `triple_class` records the
 *     shape (two-out, in-and-out, 3-cycle, subcritical);
 *   - LonelyVertex: vertices = {v,p,q} with v connected to neither p nor q
 *     (a two-system task tolerates at most one disconnected partner per
 *     diamond, bidirected edges or not);
 *   - PartnerSet: vertices = {j,p,q} with p and q both possible partners of
 *     j (no edge into j) yet not connected to each other, so parking
 *     entanglement for j with both is forbidden by monogamy;
 *   - StartCausality: the start point does not precede every return point,
 *     so the unknown inputs cannot reach the outputs at all.
 */
struct Witness {
  enum class Kind {
    NonAdjacentPair,
    BadTriple,
    LonelyVertex,
    PartnerSet,
    StartCausality,
  };
  Kind kind = Kind::NonAdjacentPair;
  std::vector<int> vertices;  // 0-based diamond indices, meaning per `kind`
  std::optional<TripleClass> triple_class;  // BadTriple only
  std::string note;  // one-line human-readable explanation
};

std::string to_string(Witness::Kind k);

/** Replays the witness's structural rule against the task.  True means the
 *  Unachievable verdict is confirmed independently of the decision path. */
bool confirm_witness(const TaskSpec& task, const Witness& w);

/** A decision with its supporting evidence.  Invariants: Achievable implies
 *  `plan` is present and build_from_plan(task, *plan) succeeds; Unachievable
 *  implies `witness` is present and confirm_witness returns true. */
struct Verdict {
  Status status = Status::Unknown;
  std::optional<ProtocolPlan> plan;
  std::optional<Witness> witness;
  std::string rule;  // short name of the decision rule that fired
};

/** Stable JSON rendering of a verdict (fixed key order; vertices and
 *  orientation edges are 1-based, matching task files). */
std::string verdict_json(const Verdict& v);

/** Dispatches on task kind and assistance.  \throws InputError only for
 *  malformed tasks (never for a merely undecidable graph). */
Verdict decide(const TaskSpec& task);

/** Kind-specific deciders.  Each checks its precondition and throws
 *  InputError when handed the wrong kind or assistance; the two oriented
 *  two-system deciders route graphs with bidirected edges to
 *  decide_two_system_bidirected. */
Verdict decide_single(const TaskSpec& task);
Verdict decide_two_system_unassisted(const TaskSpec& task);
Verdict decide_two_system_label(const TaskSpec& task);
Verdict decide_two_system_global(const TaskSpec& task);
Verdict decide_entanglement(const TaskSpec& task);
Verdict decide_two_system_bidirected(const TaskSpec& task);
Verdict decide_entanglement_bidirected(const TaskSpec& task);

/** True iff at most one unordered pair of diamonds is disconnected — the
 *  localizability bound shared by every one-way two-system construction. */
bool check_localizability(const CausalGraph& g);

/** Options for crosscheck(). */
struct CrosscheckOptions {
  /** Build, causally validate, and simulate achievable plans.  Every
   *  achievable graph is built and validated (builder tie-breaks depend on
   *  the labelling, so this runs per graph); simulation to exact fidelity
   *  runs per isomorphism class unless dedup_isomorphic is cleared. */
  bool verify_protocols = false;
  /** ... but only up to this vertex count (simulation cost grows fast). */
  int verify_max_n = 4;
  /** Check that adding one edge never flips Achievable to Unachievable. */
  bool check_monotonicity = false;
  /** Simulate one labelled representative per isomorphism class; protocol
   *  constructions are structural, so relabelled graphs exercise the same
   *  simulation up to tie-breaks, which validation already covers. */
  bool dedup_isomorphic = true;
  std::uint64_t seed = 1;
};

/** Result of sweeping one (n, kind, assistance) cell. */
struct CrosscheckReport {
  int n = 0;
  TaskKind kind = TaskKind::TwoSystem;
  Assistance assistance = Assistance::None;
  bool allow_bidirected = false;
  std::uint64_t graphs = 0;
  std::uint64_t achievable = 0;
  std::uint64_t unachievable = 0;
  std::uint64_t unknown = 0;
  std::uint64_t verified = 0;  // plans simulated to exact fidelity (one per
                               // isomorphism class when deduplicating)
  std::vector<std::string> discrepancies;  // empty iff every check passed
  bool ok = false;
};

/** Enumerates all labelled graphs on n vertices (3^C(n,2) oriented,
 *  4^C(n,2) with bidirected edges), decides each one, and checks:
 *   - the decider agrees with an independently coded structural rule
 *     (theorem condition vs. explicit graph shapes, per kind/assistance);
 *   - unassisted-achievable implies label-achievable (two-system), and
 *     label-assisted entanglement equals unassisted entanglement;
 *   - every achievable verdict names a known builder, and every
 *     unachievable verdict carries a confirmable witness;
 *   - optionally, every achievable plan verifies by simulation and
 *     achievability is monotone under edge additions.
 *  \throws InputError unless 1 <= n <= 6 (n <= 4 with bidirected edges). */
CrosscheckReport crosscheck(int n, TaskKind kind, Assistance assistance,
                            bool allow_bidirected = false,
                            const CrosscheckOptions& options = {});

/** Stable JSON rendering of a crosscheck report. */
std::string crosscheck_json(const CrosscheckReport& report);

}  // namespace summon
