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

/** \file
 *  Executes protocol programs on the qudit simulator and verifies that they
 *  implement their task exactly.
 *
 *  Verification references every task input through half of a maximally
 *  entangled pair that never leaves the lab: delivering the input perfectly
 *  is then equivalent to the reference-output pair ending in the maximally
 *  entangled state, which a single fidelity readout certifies for all input
 *  states at once.
 *
 *  Three run modes:
 *   - Seeded: Bell measurements are sampled; corrections use the sampled
 *     outcomes. One trajectory per pattern.
 *   - Certified: Bell measurements are deferred (basis change only) and the
 *     outcome registers steer corrections coherently. The final fidelity
 *     averages over every outcome branch at once, so fidelity 1 certifies
 *     exactness on all branches.
 *   - AllBranches: every Bell outcome combination is forced explicitly and
 *     each branch is executed to the end; used to cross-check the other two
 *     modes on small programs.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "summon/protocol.hpp"

namespace summon {

enum class RunMode { Seeded, Certified, AllBranches };

std::string to_string(RunMode mode);

/** One sampled Bell outcome (Seeded runs only). */
struct MeasOutcome {
  int meas_id = -1;
  int a = 0, b = 0;
};

/** Result of executing one call pattern. */
struct PatternRun {
  CallPattern pattern;
  std::vector<int> steps;            // executed instruction indices
  std::vector<Message> messages;
  std::vector<MeasOutcome> outcomes; // Seeded only
  double fidelity = 0.0;             // against the exact task channel
  double trace_dist = 0.0;           // entanglement tasks: output vs target
  int assignment = 0;                // two-system: 0 = first input to the
                                     // lower-indexed called diamond
  int peak_qudits = 0;               // max qudits allocated-but-unmeasured;
                                     // mode-independent (certified outcome
                                     // registers are not protocol cost)
  long branches = 1;                 // AllBranches: branches executed
  double min_branch_fidelity = 0.0;  // AllBranches: worst branch
};

/** Aggregate over all call patterns of a task. */
struct VerificationReport {
  std::string protocol;
  TaskKind kind = TaskKind::SingleSystem;
  Assistance assistance = Assistance::None;
  RunMode mode = RunMode::Certified;
  int dimension = 2;
  bool ok = false;
  double min_fidelity = 0.0;
  double max_trace_dist = 0.0;
  int peak_qudits = 0;
  std::vector<PatternRun> patterns;
};

/** Executes one call pattern end to end. \throws CausalityViolation or
 *  ContractViolation if the program is malformed for this pattern, and
 *  Unsupported if an AllBranches run would enumerate too many branches. */
PatternRun run_pattern(const ProtocolProgram& prog, const CallPattern& pattern,
                       RunMode mode = RunMode::Certified,
                       std::uint64_t seed = 1);

/** Validates the program shape, executes every call pattern of the task, and
 *  checks exactness (fidelity within 1e-9 of 1 on every pattern). */
VerificationReport verify_protocol(const ProtocolProgram& prog,
                                   RunMode mode = RunMode::Certified,
                                   std::uint64_t seed = 1);

/** Stable JSON rendering of a report (fixed field order). */
std::string report_json(const VerificationReport& report);

}  // namespace summon
