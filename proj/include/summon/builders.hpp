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

/** \file builders.hpp
 *  Protocol constructions: each builder compiles a task whose causal graph
 *  has a particular shape into an executable ProtocolProgram.
 *
 *  Two-system builders (exactly two diamonds are called):
 *   - build_two_system_rails: transitive tournaments.  Both subsystems ride
 *     teleportation rails laid along the topological order; the second
 *     subsystem crosses onto the first rail once a call is seen.
 *   - build_two_system_rails_gap: tournaments minus one edge, where the two
 *     non-adjacent diamonds jointly dominate a transitive remainder.
 *   - build_label_parallel / build_label_gap: the labelled variants, where
 *     calls carry tags 1 and 2; parallel handles any tournament via two
 *     independent single-system summonings keyed to the labels, gap handles
 *     one non-adjacent pair dominating an arbitrary tournament remainder.
 *   - build_global_crossed: the four-diamond crossed construction available
 *     when both called diamonds learn the full call set.
 *   - build_bidirected_square: the four-cycle of bidirected edges with both
 *     diagonals absent, solved with a ((3,5)) threshold code and bounces.
 *
 *  Entanglement builders (a Bell pair split across the two called diamonds):
 *   - build_entanglement_routing: one Bell half per diamond, summoned
 *     through the set of diamonds that could be its partner's caller.
 *   - build_entanglement_global: with global assistance a half simply waits
 *     at every return for its partner to be named.
 *   - build_entanglement_hub: three diamonds, one bidirected pair, third
 *     isolated; pre-shared pairs through the hub vertex cover every case.
 *
 *  build_single_system compiles the at-most-one-call task for any graph in
 *  which every pair of diamonds is causally related, by recursing on a
 *  pivot vertex with a ((2,3)) threshold code.
 *
 *  relax_start_point rewrites a program that assumed the start point lies in
 *  every diamond's past into one that only needs the start point to precede
 *  every return, by teleporting the inputs in from the past and correcting
 *  at the returns.
 */

#include <optional>
#include <string>
#include <vector>

#include "summon/causal_graph.hpp"
#include "summon/protocol.hpp"
#include "summon/task_model.hpp"

namespace summon {

/** Names a protocol construction for a task, as selected by the deciders.
 *  `orientation` is set when the task's graph has bidirected edges and the
 *  construction runs on a chosen one-way sub-orientation of them: protocol
 *  traffic uses only the orientation's edges, while guard visibility may
 *  still use every edge of the real graph. */
struct ProtocolPlan {
  std::string builder;
  std::optional<CausalGraph> orientation;
};

ProtocolProgram build_single_system(const TaskSpec& task);
ProtocolProgram build_two_system_rails(const TaskSpec& task);
ProtocolProgram build_two_system_rails_gap(const TaskSpec& task);
ProtocolProgram build_label_parallel(const TaskSpec& task);
ProtocolProgram build_label_gap(const TaskSpec& task);
ProtocolProgram build_global_crossed(const TaskSpec& task);
ProtocolProgram build_entanglement_routing(const TaskSpec& task);
ProtocolProgram build_entanglement_global(const TaskSpec& task);
ProtocolProgram build_entanglement_hub(const TaskSpec& task);
ProtocolProgram build_bidirected_square(const TaskSpec& task);

/** Builds `plan.builder` for `task`, applying `plan.orientation` if present
 *  and wrapping with relax_start_point when the task needs it.  Throws
 *  InputError for an unknown builder name. */
ProtocolProgram build_from_plan(const TaskSpec& task, const ProtocolPlan& plan);

/** True iff `name` is one of the builder names build_from_plan accepts. */
bool known_builder(const std::string& name);

/** Rewrites `inner` (which requires its start point in every diamond's
 *  causal past) into a program valid whenever the start point merely
 *  precedes every return: each input is teleported onto a past-based wire
 *  at the start point, and the resulting corrections are applied at the
 *  returns just before each output.  Requires every output of `inner` to be
 *  tagged with the input subsystem it carries.  Throws Unsupported if
 *  `inner` has no inputs or was already relaxed. */
ProtocolProgram relax_start_point(const ProtocolProgram& inner);

/** Test hook: plants a named defect into a built program so that
 *  verification demonstrably fails.  Supported names:
 *   - "junk-output": the first output delivers a fresh blank wire instead
 *     of the summoned system;
 *   - "swap-decode-points": the first threshold decode swaps two of its
 *     evaluation points, reconstructing along the wrong polynomial.
 *  Returns false if the program has no site for the requested defect. */
bool apply_mutation(ProtocolProgram& prog, const std::string& name);

}  // namespace summon
