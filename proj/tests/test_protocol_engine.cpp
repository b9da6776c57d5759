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
#include <vector>

#include "summon/errors.hpp"
#include "summon/protocol.hpp"

using namespace summon;

namespace {

constexpr double kTol = 1e-9;

CausalGraph chain2() {  // D1 -> D2
  return CausalGraph::from_edges(2, {{0, 1}});
}

/** Hand-built single-system program on D1->D2: carry the input to the call
 *  point of D1 and route it onward depending on whether D1 was called. */
ProtocolProgram single_rail_program() {
  ProtocolProgram prog;
  prog.name = "test-rail";
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  prog.dimension = 2;
  const int in = prog.add_input(0);
  prog.move(in, Location::call(0));
  prog.move(in, Location::ret(0), {Condition{0, 1}});
  prog.output(in, 0, {Condition{0, 1}});
  prog.move(in, Location::ret(1), {Condition{0, 0}});
  prog.output(in, 1, {Condition{1, 1}});
  return prog;
}

/** Carry the input to the call point of D1; hand it over directly if D1 is
 *  called, otherwise teleport it onward to Return(2). */
ProtocolProgram teleport_program() {
  ProtocolProgram prog;
  prog.name = "test-teleport";
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  prog.dimension = 3;
  const int in = prog.add_input(0);
  auto [h1, h2] = prog.add_bell(Location::call(0), Location::ret(1));
  prog.move(in, Location::call(0));
  prog.move(in, Location::ret(0), {Condition{0, 1}});
  prog.output(in, 0, {Condition{0, 1}});
  const int m = prog.bell_measure(in, h1, Location::call(0), {Condition{0, 0}});
  prog.correct(m, h2, Location::ret(1), {Condition{0, 0}});
  prog.output(h2, 1, {Condition{1, 1}});
  return prog;
}

bool has_message(const PatternTrace& t, Location src, Location dst,
                 const std::string& kind) {
  return std::find(t.messages.begin(), t.messages.end(),
                   Message{src, dst, kind}) != t.messages.end();
}

}  // namespace

TEST_CASE("location ordering: past precedes everything") {
  const CausalGraph g = chain2();
  for (Location b : {Location::past(), Location::start(), Location::call(0),
                     Location::call(1), Location::ret(0), Location::ret(1)}) {
    CHECK(location_precedes(g, Location::past(), b));
  }
  CHECK_FALSE(location_precedes(g, Location::start(), Location::past()));
  CHECK_FALSE(location_precedes(g, Location::call(0), Location::past()));
}

TEST_CASE("location ordering: start placement follows the task flags") {
  CausalGraph g = chain2();
  SUBCASE("start in the common past") {
    CHECK(location_precedes(g, Location::start(), Location::call(0)));
    CHECK(location_precedes(g, Location::start(), Location::ret(1)));
  }
  SUBCASE("start reaches only the returns") {
    g.start_in_past = false;
    g.start_precedes_all_returns = true;
    CHECK_FALSE(location_precedes(g, Location::start(), Location::call(0)));
    CHECK_FALSE(location_precedes(g, Location::start(), Location::call(1)));
    CHECK(location_precedes(g, Location::start(), Location::ret(0)));
    CHECK(location_precedes(g, Location::start(), Location::ret(1)));
    CHECK(location_precedes(g, Location::start(), Location::start()));
  }
  SUBCASE("start reaches nothing") {
    g.start_in_past = false;
    g.start_precedes_all_returns = false;
    CHECK_FALSE(location_precedes(g, Location::start(), Location::call(0)));
    CHECK_FALSE(location_precedes(g, Location::start(), Location::ret(1)));
  }
}

TEST_CASE("location ordering: calls, returns, and the no-call-to-call rule") {
  const CausalGraph g = chain2();
  CHECK(location_precedes(g, Location::call(0), Location::ret(0)));
  CHECK(location_precedes(g, Location::call(1), Location::ret(1)));
  CHECK(location_precedes(g, Location::call(0), Location::ret(1)));  // arrow
  CHECK_FALSE(location_precedes(g, Location::call(1), Location::ret(0)));
  // Call points are mutually incomparable even along an arrow: the edge
  // relation only promises that c_j precedes r_k.
  CHECK_FALSE(location_precedes(g, Location::call(0), Location::call(1)));
  CHECK_FALSE(location_precedes(g, Location::call(1), Location::call(0)));
  CHECK(location_precedes(g, Location::call(0), Location::call(0)));
  // Returns are terminal.
  CHECK_FALSE(location_precedes(g, Location::ret(0), Location::ret(1)));
  CHECK_FALSE(location_precedes(g, Location::ret(0), Location::call(1)));
  CHECK_FALSE(location_precedes(g, Location::ret(0), Location::start()));
  CHECK(location_precedes(g, Location::ret(0), Location::ret(0)));
  // Nothing but the past precedes the start.
  CHECK_FALSE(location_precedes(g, Location::call(0), Location::start()));
  CHECK_THROWS_AS(location_precedes(g, Location::call(2), Location::ret(0)),
                  InputError);
}

TEST_CASE("condition visibility tracks the assistance level") {
  CallPattern both{{0, 1}};
  CallPattern only1{{1}};
  // Unassisted: a diamond sees only whether it was called.
  CHECK(Condition{0, 1}.holds(both, Assistance::None));
  CHECK(Condition{0, 0}.holds(only1, Assistance::None));
  CHECK_FALSE(Condition{0, 1}.holds(only1, Assistance::None));
  // Labelled: the call carries its position in the request order.
  CallPattern labelled{{2, 0}};  // D3 has label 1, D1 has label 2
  CHECK(Condition{2, 1}.holds(labelled, Assistance::Label));
  CHECK(Condition{0, 2}.holds(labelled, Assistance::Label));
  CHECK_FALSE(Condition{0, 1}.holds(labelled, Assistance::Label));
  CHECK(Condition{1, 0}.holds(labelled, Assistance::Label));
  // Global: a called diamond may also condition on the other call.
  CHECK(Condition{0, 1, true}.holds(both, Assistance::Global));
  CHECK_FALSE(Condition{0, 2, true}.holds(both, Assistance::Global));
  CHECK_FALSE(Condition{0, 1, true}.holds(only1, Assistance::Global));
  CHECK(condition_origin(Condition{1, 0}) == Location::call(1));
}

TEST_CASE("trace_pattern walks the selected steps of a rail program") {
  const ProtocolProgram prog = single_rail_program();
  SUBCASE("called at the first diamond") {
    const PatternTrace t = trace_pattern(prog, CallPattern{{0}});
    CHECK(t.steps == std::vector<int>{0, 1, 2});
    REQUIRE(t.outputs.size() == 1);
    CHECK(t.outputs[0] == std::pair<int, int>{0, 0});
    CHECK(has_message(t, Location::start(), Location::call(0), "quantum"));
    CHECK(has_message(t, Location::call(0), Location::ret(0), "quantum"));
  }
  SUBCASE("called at the second diamond routes along the arrow") {
    const PatternTrace t = trace_pattern(prog, CallPattern{{1}});
    CHECK(t.steps == std::vector<int>{0, 3, 4});
    REQUIRE(t.outputs.size() == 1);
    CHECK(t.outputs[0] == std::pair<int, int>{1, 0});
    CHECK(has_message(t, Location::call(0), Location::ret(1), "quantum"));
    // The output's guard reads the call of D2; that information flows from
    // the call point to the return point inside the diamond.
    CHECK(has_message(t, Location::call(1), Location::ret(1), "classical"));
  }
  SUBCASE("no call: the system still travels, nobody outputs") {
    const PatternTrace t = trace_pattern(prog, CallPattern{{}});
    CHECK(t.outputs.empty());
    CHECK(t.steps == std::vector<int>{0, 3});
  }
  CHECK_NOTHROW(validate_protocol(prog));
}

TEST_CASE("trace_pattern records classical control and correction messages") {
  const ProtocolProgram prog = teleport_program();
  const PatternTrace t = trace_pattern(prog, CallPattern{{1}});
  // The input rides to the call point, then the outcome (and the "not
  // called" bit steering the correction) travels along the arrow.
  CHECK(has_message(t, Location::start(), Location::call(0), "quantum"));
  CHECK(has_message(t, Location::call(0), Location::ret(1), "classical"));
  // The teleported half was pre-placed, so no quantum hop reaches Return(2).
  CHECK_FALSE(has_message(t, Location::call(0), Location::ret(1), "quantum"));
  REQUIRE(t.outputs.size() == 1);
  CHECK(t.outputs[0].first == 1);
  CHECK_NOTHROW(validate_protocol(prog));
}

TEST_CASE("guards that fire where their call cannot be known are rejected") {
  // Same teleport program, but the measurement guard reads D1's call, whose
  // call point does not precede Start.
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  const int in = prog.add_input(0);
  auto [h1, h2] = prog.add_bell(Location::start(), Location::ret(0));
  const int m = prog.bell_measure(in, h1, Location::start(), {Condition{0, 1}});
  prog.correct(m, h2, Location::ret(0), {Condition{0, 1}});
  prog.output(h2, 0, {Condition{0, 1}});
  // When the guard is false the step never runs, so no information had to
  // flow and the trace is clean.
  CHECK_NOTHROW(trace_pattern(prog, CallPattern{{1}}));
  // When it is true, acting on it at Start would need future knowledge.
  CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), CausalityViolation);
}

TEST_CASE("moves must follow causal order") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  SUBCASE("return to call is backwards") {
    const int w = prog.add_fresh(Location::ret(1));
    prog.move(w, Location::call(0));
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), CausalityViolation);
  }
  SUBCASE("against the arrow") {
    const int w = prog.add_fresh(Location::call(1));
    prog.move(w, Location::ret(0));
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), CausalityViolation);
  }
  SUBCASE("start to call without start_in_past") {
    prog.graph.start_in_past = false;
    prog.graph.start_precedes_all_returns = true;
    const int w = prog.add_fresh(Location::start());
    prog.move(w, Location::call(0));
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), CausalityViolation);
  }
  SUBCASE("with the arrow is fine") {
    const int w = prog.add_fresh(Location::call(0));
    prog.move(w, Location::ret(1));
    CHECK_NOTHROW(trace_pattern(prog, CallPattern{{0}}));
  }
}

TEST_CASE("corrections need an outcome that exists and can arrive") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  auto [a1, a2] = prog.add_bell(Location::call(1), Location::ret(0));
  auto [b1, b2] = prog.add_bell(Location::call(1), Location::call(1));
  SUBCASE("outcome cannot flow against the arrow") {
    ProtocolProgram p = prog;
    const int m = p.bell_measure(a1, b1, Location::call(1), {Condition{1, 1}});
    p.correct(m, a2, Location::ret(0), {Condition{1, 1}});
    // Pattern {2}: measurement runs at c_2, but nothing reaches r_1.
    CHECK_THROWS_AS(trace_pattern(p, CallPattern{{1}}), CausalityViolation);
  }
  SUBCASE("correcting before the measurement ran") {
    ProtocolProgram p = prog;
    const int m = p.bell_measure(a1, b1, Location::call(1), {Condition{1, 1}});
    p.correct(m, a2, Location::ret(0), {Condition{0, 1}});
    // Pattern {1}: the guard selects the correction while the measurement
    // never happened.
    CHECK_THROWS_AS(trace_pattern(p, CallPattern{{0}}), ContractViolation);
  }
  SUBCASE("outcome flowing along the arrow is fine") {
    ProtocolProgram p;
    p.kind = TaskKind::SingleSystem;
    p.assistance = Assistance::None;
    p.graph = chain2();
    auto [c1, c2] = p.add_bell(Location::call(0), Location::ret(1));
    auto [d1, d2] = p.add_bell(Location::call(0), Location::call(0));
    const int m = p.bell_measure(c1, d1, Location::call(0));
    p.correct(m, c2, Location::ret(1));
    CHECK_NOTHROW(trace_pattern(p, CallPattern{{1}}));
  }
}

TEST_CASE("operands must be live and co-located") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  SUBCASE("bell measurement across two places") {
    const int u = prog.add_fresh(Location::start());
    const int v = prog.add_fresh(Location::call(0));
    prog.bell_measure(u, v, Location::call(0));
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
  }
  SUBCASE("wire reused after being consumed") {
    const int u = prog.add_fresh(Location::start());
    const int v = prog.add_fresh(Location::start());
    prog.bell_measure(u, v, Location::start());
    prog.move(u, Location::call(0));
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
  }
  SUBCASE("undeclared wire") {
    Instr i;
    i.op = Instr::Op::MoveTo;
    i.wires = {prog.new_wire()};
    i.at = Location::call(0);
    prog.instrs.push_back(i);
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
  }
  SUBCASE("swap keeps both wires live in place") {
    const int u = prog.add_fresh(Location::call(0));
    const int v = prog.add_fresh(Location::call(0));
    prog.swap_contents(u, v, Location::call(0));
    prog.move(u, Location::ret(0));
    prog.move(v, Location::ret(1));
    CHECK_NOTHROW(trace_pattern(prog, CallPattern{{0}}));
  }
}

TEST_CASE("outputs are tied to called diamonds at their return points") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  SUBCASE("output at an uncalled diamond") {
    const int w = prog.add_fresh(Location::ret(0));
    prog.output(w, 0);
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{1}}), ContractViolation);
  }
  SUBCASE("output away from the return point") {
    const int w = prog.add_fresh(Location::call(0));
    Instr i;
    i.op = Instr::Op::Output;
    i.wires = {w};
    i.at = Location::call(0);
    i.diamond = 0;
    prog.instrs.push_back(i);
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
  }
  SUBCASE("two outputs at one return") {
    const int w1 = prog.add_fresh(Location::ret(0));
    const int w2 = prog.add_fresh(Location::ret(0));
    prog.output(w1, 0);
    prog.output(w2, 0);
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
  }
}

TEST_CASE("validate_protocol demands one system per called diamond") {
  SUBCASE("missing branch") {
    ProtocolProgram prog;
    prog.kind = TaskKind::SingleSystem;
    prog.assistance = Assistance::None;
    prog.graph = chain2();
    const int in = prog.add_input(0);
    prog.move(in, Location::call(0));
    prog.move(in, Location::ret(0), {Condition{0, 1}});
    prog.output(in, 0, {Condition{0, 1}});
    // No delivery for the pattern {2}.
    CHECK_THROWS_AS(validate_protocol(prog), ContractViolation);
  }
  SUBCASE("complete rail passes") {
    CHECK_NOTHROW(validate_protocol(single_rail_program()));
  }
}

TEST_CASE("guard shapes are checked even on unselected steps") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  SUBCASE("label value invisible without assistance") {
    const int w = prog.add_fresh(Location::call(0));
    prog.move(w, Location::ret(0), {Condition{0, 2}});
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{1}}), ContractViolation);
  }
  SUBCASE("other-call guard needs global assistance") {
    const int w = prog.add_fresh(Location::call(0));
    prog.move(w, Location::ret(0), {Condition{0, 1, true}});
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{1}}), ContractViolation);
  }
  SUBCASE("guard outside the vertex set") {
    const int w = prog.add_fresh(Location::call(0));
    prog.move(w, Location::ret(0), {Condition{5, 1}});
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{1}}), ContractViolation);
  }
}

TEST_CASE("threshold code arities are enforced in the walk") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  prog.dimension = 3;
  const int in = prog.add_input(0);
  SUBCASE("encode then decode round-trips the wire lifecycle") {
    auto shares = prog.encode(in, 2, Location::start());
    REQUIRE(shares.size() == 3);
    const int out =
        prog.decode({shares[0], shares[2]}, {0, 2}, 2, Location::start());
    prog.measure_discard(shares[1], Location::start());
    prog.move(out, Location::call(0));
    prog.move(out, Location::ret(0), {Condition{0, 1}});
    prog.output(out, 0, {Condition{0, 1}});
    prog.move(out, Location::ret(1), {Condition{0, 0}});
    prog.output(out, 1, {Condition{1, 1}});
    CHECK_NOTHROW(validate_protocol(prog));
  }
  SUBCASE("dimension must fit the code") {
    prog.dimension = 2;
    prog.encode(in, 2, Location::start());
    CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
  }
  SUBCASE("share positions must be distinct and in range") {
    auto shares = prog.encode(in, 2, Location::start());
    ProtocolProgram bad = prog;
    bad.decode({shares[0], shares[1]}, {0, 0}, 2, Location::start());
    CHECK_THROWS_AS(trace_pattern(bad, CallPattern{{0}}), ContractViolation);
    ProtocolProgram bad2 = prog;
    bad2.decode({shares[0], shares[1]}, {0, 9}, 2, Location::start());
    CHECK_THROWS_AS(trace_pattern(bad2, CallPattern{{0}}), ContractViolation);
    ProtocolProgram bad3 = prog;
    bad3.decode({shares[0], shares[0]}, {0, 1}, 2, Location::start());
    CHECK_THROWS_AS(trace_pattern(bad3, CallPattern{{0}}), ContractViolation);
  }
}

TEST_CASE("measurement ids are single-use") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  const int u = prog.add_fresh(Location::start());
  const int v = prog.add_fresh(Location::start());
  const int a = prog.add_fresh(Location::start());
  const int b = prog.add_fresh(Location::start());
  const int m = prog.bell_measure(u, v, Location::start());
  Instr i;
  i.op = Instr::Op::BellMeasure;
  i.wires = {a, b};
  i.at = Location::start();
  i.meas_id = m;  // reuse
  prog.instrs.push_back(i);
  CHECK_THROWS_AS(trace_pattern(prog, CallPattern{{0}}), ContractViolation);
}

// ---------------------------------------------------------------------------
// Execution engine
// ---------------------------------------------------------------------------

#include "summon/engine.hpp"

#include <json.hpp>

namespace {

/** Two-hop relay: the input is teleported to Call(1) unconditionally; if D1
 *  is called it is fixed up and handed over there, otherwise it hops on to
 *  Return(2) and both corrections are applied at the destination.
 *  `reverse_order` undoes the last hop first. */
ProtocolProgram relay_program(bool reverse_order) {
  ProtocolProgram prog;
  prog.name = "test-relay";
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = chain2();
  prog.dimension = 3;
  const int in = prog.add_input(0);
  auto [h1, h2] = prog.add_bell(Location::start(), Location::call(0));
  auto [g1, g2] = prog.add_bell(Location::call(0), Location::ret(1));
  const int m1 = prog.bell_measure(in, h1, Location::start());
  prog.correct(m1, h2, Location::call(0), {Condition{0, 1}});
  prog.move(h2, Location::ret(0), {Condition{0, 1}});
  prog.output(h2, 0, {Condition{0, 1}});
  const int m2 = prog.bell_measure(h2, g1, Location::call(0), {Condition{0, 0}});
  if (reverse_order) {
    prog.correct(m2, g2, Location::ret(1), {Condition{0, 0}});
    prog.correct(m1, g2, Location::ret(1), {Condition{0, 0}});
  } else {
    prog.correct(m1, g2, Location::ret(1), {Condition{0, 0}});
    prog.correct(m2, g2, Location::ret(1), {Condition{0, 0}});
  }
  prog.output(g2, 1, {Condition{1, 1}});
  return prog;
}

}  // namespace

TEST_CASE("engine: a pure transport program is exact in every mode") {
  const ProtocolProgram prog = single_rail_program();
  for (RunMode mode :
       {RunMode::Seeded, RunMode::Certified, RunMode::AllBranches}) {
    CAPTURE(to_string(mode));
    const VerificationReport report = verify_protocol(prog, mode, 7);
    CHECK(report.ok);
    CHECK(report.min_fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(report.patterns.size() == 3);  // {1}, {2}, and the no-call run
  }
}

TEST_CASE("engine: teleportation branch is exact and bounded in width") {
  const ProtocolProgram prog = teleport_program();
  SUBCASE("seeded trajectories record their outcomes") {
    const PatternRun run = run_pattern(prog, CallPattern{{1}}, RunMode::Seeded, 3);
    CHECK(run.fidelity == doctest::Approx(1.0).epsilon(kTol));
    REQUIRE(run.outcomes.size() == 1);
    const PatternRun again = run_pattern(prog, CallPattern{{1}}, RunMode::Seeded, 3);
    CHECK(again.outcomes[0].a == run.outcomes[0].a);
    CHECK(again.outcomes[0].b == run.outcomes[0].b);
    const PatternRun direct = run_pattern(prog, CallPattern{{0}}, RunMode::Seeded, 3);
    CHECK(direct.fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(direct.outcomes.empty());
  }
  SUBCASE("certified run covers every outcome at once") {
    const PatternRun run = run_pattern(prog, CallPattern{{1}}, RunMode::Certified);
    CHECK(run.fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(run.outcomes.empty());
    // input+reference (2) + pair (2) + outcome registers retired after use.
    CHECK(run.peak_qudits <= 6);
  }
  SUBCASE("all-branches enumerates the nine outcome pairs") {
    const PatternRun run = run_pattern(prog, CallPattern{{1}}, RunMode::AllBranches);
    CHECK(run.branches == 9);
    CHECK(run.fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(run.min_branch_fidelity == doctest::Approx(1.0).epsilon(kTol));
  }
}

TEST_CASE("engine: multi-hop corrections are exact in both orders") {
  // Undoing the last hop first keeps the deferred outcome registers pairwise
  // decoupled; the forward order works up to register-register phases, which
  // the certified average still cancels.
  for (bool reverse : {true, false}) {
    CAPTURE(reverse);
    const ProtocolProgram prog = relay_program(reverse);
    for (RunMode mode :
         {RunMode::Seeded, RunMode::Certified, RunMode::AllBranches}) {
      CAPTURE(to_string(mode));
      const VerificationReport report = verify_protocol(prog, mode, 11);
      CHECK(report.ok);
      CHECK(report.min_fidelity == doctest::Approx(1.0).epsilon(kTol));
    }
  }
  // Reverse-hop ordering also lets every outcome register retire, keeping
  // the certified footprint at the transport cost alone.
  const PatternRun tight =
      run_pattern(relay_program(true), CallPattern{{1}}, RunMode::Certified);
  CHECK(tight.peak_qudits <= 8);
}

TEST_CASE("engine: a skipped correction is caught by every mode") {
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = CausalGraph(1);
  prog.dimension = 3;
  const int in = prog.add_input(0);
  auto [h1, h2] = prog.add_bell(Location::start(), Location::ret(0));
  prog.bell_measure(in, h1, Location::start());
  prog.output(h2, 0, {Condition{0, 1}});  // forgot the correction
  const PatternRun cert = run_pattern(prog, CallPattern{{0}}, RunMode::Certified);
  // Averaged over outcomes the delivered state is maximally mixed alongside
  // the reference: fidelity 1/p^2.
  CHECK(cert.fidelity == doctest::Approx(1.0 / 9).epsilon(1e-6));
  const PatternRun branches =
      run_pattern(prog, CallPattern{{0}}, RunMode::AllBranches);
  CHECK(branches.fidelity == doctest::Approx(1.0 / 9).epsilon(1e-6));
  // Only the (0,0) outcome branch is accidentally correct.
  CHECK(branches.min_branch_fidelity < 0.2);
  CHECK_FALSE(verify_protocol(prog, RunMode::Certified).ok);
}

TEST_CASE("engine: threshold coding inside a program is exact") {
  // Encode at Start, ship two shares through different diamonds, decode at
  // the only return that can see both.
  ProtocolProgram prog;
  prog.kind = TaskKind::SingleSystem;
  prog.assistance = Assistance::None;
  prog.graph = CausalGraph::from_edges(2, {{0, 1}, {1, 0}});  // bidirected
  prog.dimension = 3;
  const int in = prog.add_input(0);
  auto shares = prog.encode(in, 2, Location::start());
  prog.move(shares[0], Location::call(0));
  prog.move(shares[1], Location::call(1));
  prog.measure_discard(shares[2], Location::start());
  // Each share's carrier decides from its own call point: keep the share
  // when called, forward it across the bidirected edge when not.
  prog.move(shares[0], Location::ret(0), {Condition{0, 1}});
  prog.move(shares[0], Location::ret(1), {Condition{0, 0}});
  prog.move(shares[1], Location::ret(1), {Condition{1, 1}});
  prog.move(shares[1], Location::ret(0), {Condition{1, 0}});
  for (int d = 0; d < 2; ++d) {
    const Condition here{d, 1};
    const int out = prog.decode({shares[0], shares[1]}, {0, 1}, 2,
                                Location::ret(d), {here});
    prog.output(out, d, {here});
  }
  for (RunMode mode :
       {RunMode::Seeded, RunMode::Certified, RunMode::AllBranches}) {
    CAPTURE(to_string(mode));
    const VerificationReport report = verify_protocol(prog, mode, 5);
    CHECK(report.ok);
    CHECK(report.min_fidelity == doctest::Approx(1.0).epsilon(kTol));
  }
}

TEST_CASE("engine: two-system delivery reports the matching assignment") {
  ProtocolProgram prog;
  prog.kind = TaskKind::TwoSystem;
  prog.assistance = Assistance::None;
  prog.graph = CausalGraph::from_edges(2, {});
  prog.dimension = 2;
  const int a = prog.add_input(0);
  const int b = prog.add_input(1);
  SUBCASE("straight delivery") {
    prog.deliver(a, 0);
    prog.deliver(b, 1);
    const PatternRun run = run_pattern(prog, CallPattern{{0, 1}}, RunMode::Certified);
    CHECK(run.fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(run.assignment == 0);
  }
  SUBCASE("swapped delivery") {
    prog.deliver(a, 1);
    prog.deliver(b, 0);
    const PatternRun run = run_pattern(prog, CallPattern{{0, 1}}, RunMode::Certified);
    CHECK(run.fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(run.assignment == 1);
  }
  SUBCASE("swap instruction exchanges the payloads") {
    prog.swap_contents(a, b, Location::start());
    prog.deliver(a, 1);
    prog.deliver(b, 0);
    const PatternRun run = run_pattern(prog, CallPattern{{0, 1}}, RunMode::Certified);
    CHECK(run.fidelity == doctest::Approx(1.0).epsilon(kTol));
    CHECK(run.assignment == 0);
  }
}

TEST_CASE("engine: entanglement tasks check the delivered pair directly") {
  ProtocolProgram prog;
  prog.kind = TaskKind::Entanglement;
  prog.assistance = Assistance::None;
  prog.graph = CausalGraph::from_edges(2, {});
  prog.dimension = 3;
  auto [e1, e2] = prog.add_bell(Location::ret(0), Location::ret(1));
  prog.output(e1, 0, {Condition{0, 1}});
  prog.output(e2, 1, {Condition{1, 1}});
  const VerificationReport report = verify_protocol(prog, RunMode::Certified);
  CHECK(report.ok);
  CHECK(report.min_fidelity == doctest::Approx(1.0).epsilon(kTol));
  CHECK(report.max_trace_dist < kTol);
  // A broken variant handing out halves of different pairs.
  ProtocolProgram bad;
  bad.kind = TaskKind::Entanglement;
  bad.assistance = Assistance::None;
  bad.graph = CausalGraph::from_edges(2, {});
  bad.dimension = 3;
  auto [f1, f2] = bad.add_bell(Location::ret(0), Location::start());
  auto [g1, g2] = bad.add_bell(Location::ret(1), Location::start());
  bad.output(f1, 0, {Condition{0, 1}});
  bad.output(g1, 1, {Condition{1, 1}});
  const VerificationReport broken = verify_protocol(bad, RunMode::Certified);
  CHECK_FALSE(broken.ok);
  CHECK(broken.min_fidelity == doctest::Approx(1.0 / 9).epsilon(1e-6));
  CHECK(broken.max_trace_dist > 0.5);
}

TEST_CASE("engine: run modes agree on the certified average") {
  const ProtocolProgram prog = relay_program(true);
  const PatternRun cert = run_pattern(prog, CallPattern{{1}}, RunMode::Certified);
  const PatternRun all = run_pattern(prog, CallPattern{{1}}, RunMode::AllBranches);
  CHECK(cert.fidelity == doctest::Approx(all.fidelity).epsilon(1e-9));
  CHECK(all.branches == 81);
}

TEST_CASE("engine: io-shape and branch-count guards") {
  SUBCASE("input declarations must match the task kind") {
    ProtocolProgram prog;
    prog.kind = TaskKind::TwoSystem;
    prog.graph = CausalGraph::from_edges(2, {});
    prog.add_input(0);  // missing subsystem 1
    CHECK_THROWS_AS(run_pattern(prog, CallPattern{{0, 1}}, RunMode::Seeded),
                    ContractViolation);
  }
  SUBCASE("entanglement programs declare no inputs") {
    ProtocolProgram prog;
    prog.kind = TaskKind::Entanglement;
    prog.graph = CausalGraph::from_edges(2, {});
    prog.add_input(0);
    CHECK_THROWS_AS(run_pattern(prog, CallPattern{{0, 1}}, RunMode::Seeded),
                    ContractViolation);
  }
  SUBCASE("all-branches refuses runaway enumeration") {
    ProtocolProgram prog;
    prog.kind = TaskKind::SingleSystem;
    prog.graph = chain2();
    prog.dimension = 3;
    const int in = prog.add_input(0);
    prog.move(in, Location::call(0));
    prog.move(in, Location::ret(0), {Condition{0, 1}});
    prog.output(in, 0, {Condition{0, 1}});
    for (int i = 0; i < 8; ++i) {
      const int u = prog.add_fresh(Location::start());
      const int v = prog.add_fresh(Location::start());
      prog.bell_measure(u, v, Location::start());
    }
    CHECK_THROWS_AS(run_pattern(prog, CallPattern{{0}}, RunMode::AllBranches),
                    Unsupported);
    CHECK_NOTHROW(run_pattern(prog, CallPattern{{0}}, RunMode::Certified));
  }
}

TEST_CASE("engine: report JSON has the stable field layout") {
  const VerificationReport report =
      verify_protocol(single_rail_program(), RunMode::Certified);
  const std::string text = report_json(report);
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["protocol"] == "test-rail");
  CHECK(j["kind"] == "single");
  CHECK(j["assistance"] == "none");
  CHECK(j["mode"] == "certified");
  CHECK(j["ok"] == true);
  CHECK(j["patterns"].size() == 3);
  CHECK(j["patterns"][0].contains("pattern"));
  CHECK(j["patterns"][0].contains("fidelity"));
  CHECK(j["patterns"][0].contains("assignment"));
  CHECK(j["patterns"][0].contains("messages"));
  CHECK(j["patterns"][0].contains("peak_qudits"));
  // Stable across calls.
  CHECK(report_json(report) == text);
}
