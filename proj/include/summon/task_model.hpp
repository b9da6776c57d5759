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

/** \file task_model.hpp
 *  Summoning task specifications, call patterns, and task-file ingestion.
 *
 *  A task asks for quantum systems to be produced at called diamonds:
 *   - single: one unknown system, at most one diamond is called;
 *   - two-system: an unknown bipartite system, exactly two diamonds are
 *     called and each must receive one subsystem;
 *   - entanglement: a Bell pair must end up split across the two called
 *     diamonds (the input is known, so no start point is involved).
 *  Assistance describes the classical information accompanying a call:
 *  none (a bare request bit), label (the two calls are tagged 1 and 2), or
 *  global (each called diamond learns the identity of both called diamonds).
 */

#include <optional>
#include <string>
#include <vector>

#include "summon/causal_graph.hpp"
#include "summon/spacetime.hpp"

namespace summon {

enum class TaskKind { SingleSystem, TwoSystem, Entanglement };
enum class Assistance { None, Label, Global };

std::string to_string(TaskKind k);
std::string to_string(Assistance a);

/** A fully validated summoning task. */
struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::TwoSystem;
  Assistance assistance = Assistance::None;
  CausalGraph graph;
  int dimension = 2;  // prime local dimension used for verification

  /** Per-diamond display labels (empty when the task was given abstractly). */
  std::vector<std::string> diamond_ids;

  /** Kept when the task was ingested from coordinates; informational only. */
  std::optional<Geometry> geometry;
};

/** One allowed call configuration.
 *
 *  - SingleSystem: `calls` holds one index, or is empty for the promised
 *    zero-call run used by sub-protocols.
 *  - TwoSystem/Entanglement, assistance none or global: two distinct
 *    indices stored in ascending order (calls are indistinguishable; under
 *    global assistance both called diamonds receive the full pair).
 *  - assistance label: calls[0] is the diamond receiving label 1 and
 *    calls[1] the diamond receiving label 2, so order is meaningful.
 */
struct CallPattern {
  std::vector<int> calls;

  bool called(int j) const;

  /** Label seen at diamond j: 1 or 2 under label assistance, otherwise a
   *  plain request indicator (1 if called). 0 when not called. */
  int label_at(int j) const;

  bool operator==(const CallPattern& other) const { return calls == other.calls; }
};

/** Renders a pattern for reports, e.g. "{1,3}" (1-based). */
std::string to_string(const CallPattern& pattern);

/** Checks that `pattern` satisfies the task's promise (call count, range,
 *  distinctness, ordering convention). \throws InputError otherwise. */
void validate_pattern(const TaskSpec& task, const CallPattern& pattern);

/** All patterns allowed by the task promise: n singletons for single-system
 *  tasks, C(n,2) ascending pairs for unassisted/global two-call tasks,
 *  n(n-1) ordered pairs under label assistance.
 *  \throws InputError when a two-call task has n < 2. */
std::vector<CallPattern> enumerate_call_patterns(const TaskSpec& task);

/** Parses a task document (JSON text, schema below) into a TaskSpec.
 *
 *  Top-level keys: `name` (optional string), `kind` ("single" |
 *  "two-system" | "entanglement"), `assistance` (optional, "none" |
 *  "label" | "global", default none), `dimension` (optional prime, default
 *  2), and exactly one of
 *    `graph`:    { "n": int, "edges": [[j,k],...] (1-based, j→k),
 *                  "start_in_past": optional bool (default true; when false
 *                  the start point is still assumed to precede all returns) }
 *    `geometry`: { "spatial_dims": int, "speed": optional number (default 1),
 *                  "start": optional [t,x...],
 *                  "diamonds": [ { "id": optional string,
 *                                  "call": [t,x...], "return": [t,x...] } ] }
 *  Unknown keys anywhere are rejected.
 *  \throws InputError with the offending key/value in the message. */
TaskSpec parse_task(const std::string& json_text);

/** Reads and parses a task file. \throws InputError on I/O failure. */
TaskSpec load_task_file(const std::string& path);

/** Serializes a TaskSpec back to canonical JSON text (always in graph form;
 *  parse_task(serialize_task(t)) reproduces t's decision-relevant fields). */
std::string serialize_task(const TaskSpec& task);

/** True iff k is a prime number (used for dimension validation). */
bool is_prime(int k);

}  // namespace summon
