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

/** \file protocol.hpp
 *  The protocol intermediate representation and its causal validation.
 *
 *  A protocol is a straight-line list of guarded instructions over named
 *  wires. Wires are created by resource declarations (fresh qudits, Bell
 *  pairs pre-distributed from the common past, and the unknown input
 *  system) or by encode/decode instructions, and they live at spacetime
 *  locations. Only MoveTo changes a wire's location, and validation checks
 *  every move against the causal structure, so a validated program cannot
 *  signal outside the light cone no matter which diamonds get called.
 *
 *  Classical control enters in two ways: instruction guards, which read the
 *  call pattern (information that originates at the call point it concerns),
 *  and Correct instructions, which consume a Bell measurement outcome
 *  (information that originates where the measurement happened). Validation
 *  requires the origin of every bit a step depends on to causally precede
 *  the place where the step acts.
 */

#include <optional>
#include <string>
#include <vector>

#include "summon/causal_graph.hpp"
#include "summon/task_model.hpp"

namespace summon {

/** A spacetime location a protocol step can act at. Past is the common
 *  causal past of everything; Start is where the unknown input is handed
 *  over; Call(j) and Return(j) are diamond j's corner points. */
struct Location {
  enum class Kind : std::uint8_t { Past, Start, Call, Return };
  Kind kind = Kind::Past;
  int diamond = -1;

  static Location past() { return {Kind::Past, -1}; }
  static Location start() { return {Kind::Start, -1}; }
  static Location call(int j) { return {Kind::Call, j}; }
  static Location ret(int j) { return {Kind::Return, j}; }

  bool operator==(const Location& other) const = default;
};

/** Renders a location for reports, e.g. "past", "call(2)" (1-based). */
std::string to_string(const Location& loc);

/** The causal order on locations induced by the graph and its start flags:
 *   - Past precedes everything; every location precedes itself.
 *   - Start precedes Call(j) iff the start point is in the common past;
 *     Start precedes Return(j) also when it merely precedes all returns.
 *   - Call(j) precedes Return(j), and Return(k) iff the graph has j->k.
 *   - Distinct call points never precede each other (they are the
 *     potentially spacelike "corners" of the task), and return points are
 *     terminal.
 *  \throws InputError on out-of-range diamond indices. */
bool location_precedes(const CausalGraph& g, const Location& a, const Location& b);

/** A guard clause: the step runs only when the call pattern satisfies it.
 *  With other_call=false it reads "the label seen at `diamond` equals
 *  `value`" (value 0 meaning "not called"); with other_call=true it reads
 *  "`diamond` is called and the other called diamond is `value`", which is
 *  only known under global assistance. Either way the information
 *  originates at Call(diamond). */
struct Condition {
  int diamond = -1;
  int value = 0;
  bool other_call = false;

  /** Truth of the guard, as seen by the box at Call(diamond): with no
   *  assistance only "called or not" is visible (value must be 0 or 1);
   *  label assistance exposes the label; global assistance exposes the
   *  whole pattern (labels derive as "1 = smaller called index"). */
  bool holds(const CallPattern& pattern, Assistance assistance) const;
  bool operator==(const Condition& other) const = default;
};

/** Location where a condition's information becomes available. */
Location condition_origin(const Condition& c);

struct Instr {
  enum class Op {
    MoveTo,          // wires={w}; send w from its location to `at`
    BellMeasure,     // wires={w1,w2} at `at`; outcome recorded under meas_id
    Correct,         // wires={w}; apply X^{-a} then Z^{b} from meas_id at `at`
    Swap,            // wires={w1,w2}; exchange contents, both at `at`
    Encode,          // wires={in, share_0..share_{2k-2}}; threshold-encode at `at`
    Decode,          // wires={share_1..share_k, out}; junk is engine-internal
    MeasureDiscard,  // wires={w}; computational measurement, outcome ignored
    Output,          // wires={w}; w (already at Return(diamond)) is the answer
  };

  Op op;
  std::vector<int> wires;
  Location at;
  int meas_id = -1;             // BellMeasure (fresh id) and Correct (source)
  int diamond = -1;             // Output: which diamond answers
  int code_k = 0;               // Encode/Decode: threshold parameter k
  std::vector<int> positions;   // Decode: evaluation-point index per share
  int subsystem = -1;           // Output: which input it carries (-1 unknown)
  std::vector<Condition> given; // conjunction of guards; empty = always
};

/** Declarations of the wires that exist before the first instruction. */
struct InputDecl {
  int wire = -1;
  int subsystem = 0;  // 0 = A, 1 = B; inputs live at Start
};
struct BellDecl {
  int wire_a = -1, wire_b = -1;
  Location at_a, at_b;  // pre-distributed from Past, so any placement is causal
};
struct FreshDecl {
  int wire = -1;
  Location at;
};

/** A complete protocol for one task shape. Instructions are listed in an
 *  order consistent with causality; guards select what runs per pattern. */
struct ProtocolProgram {
  std::string name;  // builder-assigned, e.g. "two-system-rails"
  TaskKind kind = TaskKind::TwoSystem;
  Assistance assistance = Assistance::None;
  CausalGraph graph;
  int dimension = 2;  // working prime dimension (>= the task's)

  std::vector<InputDecl> inputs;
  std::vector<BellDecl> bells;
  std::vector<FreshDecl> freshes;
  std::vector<Instr> instrs;
  int wire_count = 0;
  int meas_count = 0;

  // -- construction helpers used by the builders ---------------------------
  int new_wire() { return wire_count++; }
  int add_input(int subsystem);
  std::pair<int, int> add_bell(Location at_a, Location at_b);
  int add_fresh(Location at);
  void move(int wire, Location to, std::vector<Condition> given = {});
  int bell_measure(int w1, int w2, Location at, std::vector<Condition> given = {});
  void correct(int meas, int wire, Location at, std::vector<Condition> given = {});
  void swap_contents(int w1, int w2, Location at, std::vector<Condition> given = {});
  std::vector<int> encode(int in, int k, Location at, std::vector<Condition> given = {});
  /** Returns the decoded wire; positions[i] is shares[i]'s evaluation point. */
  int decode(const std::vector<int>& shares, const std::vector<int>& positions,
             int k, Location at, std::vector<Condition> given = {});
  void measure_discard(int wire, Location at, std::vector<Condition> given = {});
  void output(int wire, int diamond, std::vector<Condition> given = {},
              int subsystem = -1);
  /** move + output in one call. */
  void deliver(int wire, int diamond, std::vector<Condition> given = {},
               int subsystem = -1);
};

/** One classical or quantum transmission in an execution. */
struct Message {
  Location src, dst;
  std::string kind;  // "quantum" or "classical"
  bool operator==(const Message& other) const = default;
};

/** The deterministic classical skeleton of one pattern's execution. */
struct PatternTrace {
  CallPattern pattern;
  std::vector<int> steps;             // indices into instrs, program order
  std::vector<Message> messages;
  std::vector<std::pair<int, int>> outputs;  // (diamond, wire), sorted
};

/** Walks one call pattern through the program, checking that every step is
 *  causally legal (moves stay inside the light cone, guards and corrections
 *  only consume information that can have arrived) and that wires are used
 *  coherently (declared, alive, co-located with the acting point). Returns
 *  the steps that execute, the messages they imply, and the outputs.
 *
 *  \throws CausalityViolation naming the offending step for causal errors,
 *          ContractViolation for structural misuse. */
PatternTrace trace_pattern(const ProtocolProgram& prog, const CallPattern& pattern);

/** Validates the program against every call pattern its task allows,
 *  including that each called diamond ends with exactly the outputs the
 *  task demands. \throws like trace_pattern. */
void validate_protocol(const ProtocolProgram& prog);

}  // namespace summon
