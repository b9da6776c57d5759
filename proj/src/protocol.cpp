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

#include "summon/protocol.hpp"

#include <algorithm>

#include "summon/errors.hpp"

namespace summon {

namespace {

const char* op_name(Instr::Op op) {
  switch (op) {
    case Instr::Op::MoveTo: return "MoveTo";
    case Instr::Op::BellMeasure: return "BellMeasure";
    case Instr::Op::Correct: return "Correct";
    case Instr::Op::Swap: return "Swap";
    case Instr::Op::Encode: return "Encode";
    case Instr::Op::Decode: return "Decode";
    case Instr::Op::MeasureDiscard: return "MeasureDiscard";
    case Instr::Op::Output: return "Output";
  }
  return "?";
}

std::string step_tag(std::size_t index, const Instr& instr) {
  return "step " + std::to_string(index) + " (" + op_name(instr.op) + " at " +
         to_string(instr.at) + ")";
}

}  // namespace

std::string to_string(const Location& loc) {
  switch (loc.kind) {
    case Location::Kind::Past: return "past";
    case Location::Kind::Start: return "start";
    case Location::Kind::Call: return "call(" + std::to_string(loc.diamond + 1) + ")";
    case Location::Kind::Return:
      return "return(" + std::to_string(loc.diamond + 1) + ")";
  }
  return "?";
}

bool location_precedes(const CausalGraph& g, const Location& a, const Location& b) {
  auto check_index = [&](const Location& loc) {
    if ((loc.kind == Location::Kind::Call || loc.kind == Location::Kind::Return) &&
        (loc.diamond < 0 || loc.diamond >= g.n())) {
      throw InputError("location_precedes: diamond index out of range in " +
                       to_string(loc));
    }
  };
  check_index(a);
  check_index(b);
  if (a == b) return true;
  switch (a.kind) {
    case Location::Kind::Past:
      return true;
    case Location::Kind::Start:
      if (b.kind == Location::Kind::Call) return g.start_in_past;
      if (b.kind == Location::Kind::Return) {
        return g.start_in_past || g.start_precedes_all_returns;
      }
      return false;
    case Location::Kind::Call:
      if (b.kind == Location::Kind::Return) {
        return b.diamond == a.diamond || arrow(g, a.diamond, b.diamond);
      }
      return false;  // distinct call points are mutually unreachable
    case Location::Kind::Return:
      return false;  // return points are terminal
  }
  return false;
}

bool Condition::holds(const CallPattern& pattern, Assistance assistance) const {
  if (other_call) {
    if (!pattern.called(diamond) || pattern.calls.size() != 2) return false;
    const int other =
        pattern.calls[0] == diamond ? pattern.calls[1] : pattern.calls[0];
    return other == value;
  }
  const int visible = assistance == Assistance::None
                          ? (pattern.called(diamond) ? 1 : 0)
                          : pattern.label_at(diamond);
  return visible == value;
}

Location condition_origin(const Condition& c) { return Location::call(c.diamond); }

int ProtocolProgram::add_input(int subsystem) {
  InputDecl d;
  d.wire = new_wire();
  d.subsystem = subsystem;
  inputs.push_back(d);
  return d.wire;
}

std::pair<int, int> ProtocolProgram::add_bell(Location at_a, Location at_b) {
  BellDecl d;
  d.wire_a = new_wire();
  d.wire_b = new_wire();
  d.at_a = at_a;
  d.at_b = at_b;
  bells.push_back(d);
  return {d.wire_a, d.wire_b};
}

int ProtocolProgram::add_fresh(Location at) {
  FreshDecl d;
  d.wire = new_wire();
  d.at = at;
  freshes.push_back(d);
  return d.wire;
}

void ProtocolProgram::move(int wire, Location to, std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::MoveTo;
  i.wires = {wire};
  i.at = to;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
}

int ProtocolProgram::bell_measure(int w1, int w2, Location at,
                                  std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::BellMeasure;
  i.wires = {w1, w2};
  i.at = at;
  i.meas_id = meas_count++;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
  return instrs.back().meas_id;
}

void ProtocolProgram::correct(int meas, int wire, Location at,
                              std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::Correct;
  i.wires = {wire};
  i.at = at;
  i.meas_id = meas;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
}

void ProtocolProgram::swap_contents(int w1, int w2, Location at,
                                    std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::Swap;
  i.wires = {w1, w2};
  i.at = at;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
}

std::vector<int> ProtocolProgram::encode(int in, int k, Location at,
                                         std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::Encode;
  i.wires = {in};
  std::vector<int> shares;
  for (int s = 0; s < 2 * k - 1; ++s) {
    shares.push_back(new_wire());
    i.wires.push_back(shares.back());
  }
  i.at = at;
  i.code_k = k;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
  return shares;
}

int ProtocolProgram::decode(const std::vector<int>& shares,
                            const std::vector<int>& positions, int k,
                            Location at, std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::Decode;
  i.wires = shares;
  const int out = new_wire();
  i.wires.push_back(out);
  i.at = at;
  i.code_k = k;
  i.positions = positions;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
  return out;
}

void ProtocolProgram::measure_discard(int wire, Location at,
                                      std::vector<Condition> given) {
  Instr i;
  i.op = Instr::Op::MeasureDiscard;
  i.wires = {wire};
  i.at = at;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
}

void ProtocolProgram::output(int wire, int diamond, std::vector<Condition> given,
                             int subsystem) {
  Instr i;
  i.op = Instr::Op::Output;
  i.wires = {wire};
  i.at = Location::ret(diamond);
  i.diamond = diamond;
  i.subsystem = subsystem;
  i.given = std::move(given);
  instrs.push_back(std::move(i));
}

void ProtocolProgram::deliver(int wire, int diamond, std::vector<Condition> given,
                              int subsystem) {
  move(wire, Location::ret(diamond), given);
  output(wire, diamond, std::move(given), subsystem);
}

namespace {

enum class WireState { Unborn, Live, Dead };

struct Walker {
  const ProtocolProgram& prog;
  const CallPattern& pattern;
  std::vector<WireState> state;
  std::vector<Location> loc;
  std::vector<bool> meas_done;
  std::vector<Location> meas_loc;
  PatternTrace trace;

  explicit Walker(const ProtocolProgram& p, const CallPattern& pat)
      : prog(p), pattern(pat) {
    state.assign(prog.wire_count, WireState::Unborn);
    loc.assign(prog.wire_count, Location::past());
    meas_done.assign(prog.meas_count, false);
    meas_loc.assign(prog.meas_count, Location::past());
    trace.pattern = pattern;
  }

  void push_message(Location src, Location dst, const char* kind) {
    Message m{src, dst, kind};
    if (std::find(trace.messages.begin(), trace.messages.end(), m) ==
        trace.messages.end()) {
      trace.messages.push_back(std::move(m));
    }
  }

  void born(int wire, Location at, const std::string& tag) {
    if (wire < 0 || wire >= prog.wire_count) {
      throw ContractViolation(tag + ": wire " + std::to_string(wire) +
                              " out of range");
    }
    if (state[wire] != WireState::Unborn) {
      throw ContractViolation(tag + ": wire " + std::to_string(wire) +
                              " already exists");
    }
    state[wire] = WireState::Live;
    loc[wire] = at;
  }

  void need_live_at(int wire, Location at, const std::string& tag) {
    need_live(wire, tag);
    if (!(loc[wire] == at)) {
      throw ContractViolation(tag + ": wire " + std::to_string(wire) + " is at " +
                              to_string(loc[wire]) + ", not co-located");
    }
  }

  void need_live(int wire, const std::string& tag) {
    if (wire < 0 || wire >= prog.wire_count) {
      throw ContractViolation(tag + ": wire " + std::to_string(wire) +
                              " out of range");
    }
    if (state[wire] != WireState::Live) {
      throw ContractViolation(tag + ": wire " + std::to_string(wire) +
                              " is not live");
    }
  }

  void kill(int wire) { state[wire] = WireState::Dead; }

  void check_condition_shape(const Condition& c, const std::string& tag) {
    if (c.diamond < 0 || c.diamond >= prog.graph.n()) {
      throw ContractViolation(tag + ": guard names diamond " +
                              std::to_string(c.diamond + 1) + " outside the task");
    }
    if (c.other_call) {
      if (prog.assistance != Assistance::Global || prog.kind == TaskKind::SingleSystem) {
        throw ContractViolation(tag +
                                ": guard reads the other call without global assistance");
      }
      if (c.value < 0 || c.value >= prog.graph.n() || c.value == c.diamond) {
        throw ContractViolation(tag + ": guard names an impossible other call");
      }
      return;
    }
    const int max_label = prog.kind == TaskKind::SingleSystem ? 1
                          : prog.assistance == Assistance::None ? 1
                                                                : 2;
    if (c.value < 0 || c.value > max_label) {
      throw ContractViolation(tag + ": guard value " + std::to_string(c.value) +
                              " is not visible under this assistance");
    }
  }

  void run() {
    for (std::size_t i = 0; i < prog.instrs.size(); ++i) {
      const Instr& in = prog.instrs[i];
      const std::string tag = step_tag(i, in);

      bool selected = true;
      for (const Condition& c : in.given) {
        check_condition_shape(c, tag);
        if (!c.holds(pattern, prog.assistance)) selected = false;
      }
      if (!selected) continue;

      // Where the decision to act is taken: the sender for a move, the
      // acting point otherwise.
      if (in.wires.empty()) throw ContractViolation(tag + ": no operand wires");
      Location decision = in.at;
      if (in.op == Instr::Op::MoveTo) {
        need_live(in.wires[0], tag);
        decision = loc[in.wires[0]];
      }
      for (const Condition& c : in.given) {
        const Location origin = condition_origin(c);
        if (!location_precedes(prog.graph, origin, decision)) {
          throw CausalityViolation(tag + ": guard depends on the call at " +
                                   to_string(origin) +
                                   ", which cannot reach " + to_string(decision));
        }
        if (!(origin == decision)) push_message(origin, decision, "classical");
      }

      switch (in.op) {
        case Instr::Op::MoveTo: {
          const int w = in.wires[0];
          if (!location_precedes(prog.graph, loc[w], in.at)) {
            throw CausalityViolation(tag + ": wire " + std::to_string(w) +
                                     " cannot travel from " + to_string(loc[w]) +
                                     " to " + to_string(in.at));
          }
          if (!(loc[w] == in.at)) push_message(loc[w], in.at, "quantum");
          loc[w] = in.at;
          break;
        }
        case Instr::Op::BellMeasure: {
          if (in.wires.size() != 2 || in.wires[0] == in.wires[1]) {
            throw ContractViolation(tag + ": needs two distinct wires");
          }
          need_live_at(in.wires[0], in.at, tag);
          need_live_at(in.wires[1], in.at, tag);
          if (in.meas_id < 0 || in.meas_id >= prog.meas_count ||
              meas_done[in.meas_id]) {
            throw ContractViolation(tag + ": bad or reused measurement id");
          }
          meas_done[in.meas_id] = true;
          meas_loc[in.meas_id] = in.at;
          kill(in.wires[0]);
          kill(in.wires[1]);
          break;
        }
        case Instr::Op::Correct: {
          need_live_at(in.wires[0], in.at, tag);
          if (in.meas_id < 0 || in.meas_id >= prog.meas_count ||
              !meas_done[in.meas_id]) {
            throw ContractViolation(tag + ": corrects a measurement that has not "
                                          "happened in this pattern");
          }
          if (!location_precedes(prog.graph, meas_loc[in.meas_id], in.at)) {
            throw CausalityViolation(
                tag + ": outcome measured at " + to_string(meas_loc[in.meas_id]) +
                " cannot reach " + to_string(in.at));
          }
          if (!(meas_loc[in.meas_id] == in.at)) {
            push_message(meas_loc[in.meas_id], in.at, "classical");
          }
          break;
        }
        case Instr::Op::Swap: {
          if (in.wires.size() != 2 || in.wires[0] == in.wires[1]) {
            throw ContractViolation(tag + ": needs two distinct wires");
          }
          need_live_at(in.wires[0], in.at, tag);
          need_live_at(in.wires[1], in.at, tag);
          break;
        }
        case Instr::Op::Encode: {
          const int k = in.code_k;
          if (k < 1 || in.wires.size() != static_cast<std::size_t>(2 * k)) {
            throw ContractViolation(tag + ": malformed encode arity");
          }
          if (prog.dimension < 2 * k - 1) {
            throw ContractViolation(tag + ": dimension too small for a ((" +
                                    std::to_string(k) + "," +
                                    std::to_string(2 * k - 1) + ")) code");
          }
          need_live_at(in.wires[0], in.at, tag);
          kill(in.wires[0]);
          for (std::size_t s = 1; s < in.wires.size(); ++s) {
            born(in.wires[s], in.at, tag);
          }
          break;
        }
        case Instr::Op::Decode: {
          const int k = in.code_k;
          if (k < 1 || in.wires.size() != static_cast<std::size_t>(k + 1) ||
              in.positions.size() != static_cast<std::size_t>(k)) {
            throw ContractViolation(tag + ": malformed decode arity");
          }
          for (int s = 0; s < k; ++s) {
            need_live_at(in.wires[s], in.at, tag);
            for (int r = 0; r < s; ++r) {
              if (in.wires[r] == in.wires[s]) {
                throw ContractViolation(tag + ": duplicate share wire");
              }
            }
          }
          for (int s = 0; s < k; ++s) {
            if (in.positions[s] < 0 || in.positions[s] > 2 * (k - 1)) {
              throw ContractViolation(tag + ": share position out of range");
            }
            for (int r = 0; r < s; ++r) {
              if (in.positions[r] == in.positions[s]) {
                throw ContractViolation(tag + ": duplicate share position");
              }
            }
          }
          for (int s = 0; s < k; ++s) kill(in.wires[s]);
          born(in.wires[k], in.at, tag);
          break;
        }
        case Instr::Op::MeasureDiscard: {
          need_live_at(in.wires[0], in.at, tag);
          kill(in.wires[0]);
          break;
        }
        case Instr::Op::Output: {
          if (in.diamond < 0 || in.diamond >= prog.graph.n() ||
              !(in.at == Location::ret(in.diamond))) {
            throw ContractViolation(tag + ": output must act at its return point");
          }
          if (!pattern.called(in.diamond)) {
            throw ContractViolation(tag + ": outputs at an uncalled diamond");
          }
          need_live_at(in.wires[0], in.at, tag);
          for (const auto& [d, w] : trace.outputs) {
            if (d == in.diamond) {
              throw ContractViolation(tag + ": second output at one return");
            }
          }
          trace.outputs.emplace_back(in.diamond, in.wires[0]);
          kill(in.wires[0]);
          break;
        }
      }
      trace.steps.push_back(static_cast<int>(i));
    }
    std::sort(trace.outputs.begin(), trace.outputs.end());
  }
};

}  // namespace

PatternTrace trace_pattern(const ProtocolProgram& prog, const CallPattern& pattern) {
  if (prog.wire_count < 0 || prog.graph.n() < 1) {
    throw ContractViolation("trace_pattern: malformed program");
  }
  Walker walker(prog, pattern);
  // Stand up the declared wires.
  for (const InputDecl& d : prog.inputs) {
    if (prog.kind == TaskKind::Entanglement) {
      throw ContractViolation("trace_pattern: entanglement tasks have no input");
    }
    walker.born(d.wire, Location::start(), "input declaration");
  }
  for (const BellDecl& d : prog.bells) {
    walker.born(d.wire_a, d.at_a, "resource declaration");
    walker.born(d.wire_b, d.at_b, "resource declaration");
  }
  for (const FreshDecl& d : prog.freshes) {
    walker.born(d.wire, d.at, "resource declaration");
  }
  walker.run();
  return walker.trace;
}

void validate_protocol(const ProtocolProgram& prog) {
  TaskSpec shape;
  shape.kind = prog.kind;
  shape.assistance = prog.assistance;
  shape.graph = prog.graph;
  std::vector<CallPattern> patterns = enumerate_call_patterns(shape);
  if (prog.kind == TaskKind::SingleSystem) {
    patterns.push_back(CallPattern{{}});  // the promised no-call run
  }
  for (const CallPattern& pattern : patterns) {
    PatternTrace trace = trace_pattern(prog, pattern);
    // The task's demand: one system per called diamond.
    std::vector<int> expect = pattern.calls;
    std::sort(expect.begin(), expect.end());
    std::vector<int> got;
    for (const auto& [d, w] : trace.outputs) got.push_back(d);
    if (got != expect) {
      throw ContractViolation("validate_protocol: pattern " + to_string(pattern) +
                              " does not deliver exactly one system per called "
                              "diamond");
    }
  }
}

}  // namespace summon
