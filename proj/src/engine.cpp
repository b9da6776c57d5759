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

#include "summon/engine.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <utility>

#include "summon/errors.hpp"
#include "summon/qudit_sim.hpp"

namespace summon {

namespace {

constexpr double kExact = 1e-9;

/** Where a wire's qudit comes from when it is first touched. */
struct WireSource {
  enum Kind { Input, BellA, BellB, Fresh, Derived } kind = Derived;
  int index = -1;
};

std::vector<WireSource> wire_sources(const ProtocolProgram& prog) {
  std::vector<WireSource> src(prog.wire_count);
  auto place = [&](int wire, WireSource s) {
    if (wire < 0 || wire >= prog.wire_count) {
      throw ContractViolation("engine: declared wire out of range");
    }
    if (src[wire].kind != WireSource::Derived || src[wire].index != -1) {
      throw ContractViolation("engine: wire declared twice");
    }
    src[wire] = s;
  };
  for (std::size_t i = 0; i < prog.inputs.size(); ++i) {
    place(prog.inputs[i].wire, {WireSource::Input, static_cast<int>(i)});
  }
  for (std::size_t i = 0; i < prog.bells.size(); ++i) {
    place(prog.bells[i].wire_a, {WireSource::BellA, static_cast<int>(i)});
    place(prog.bells[i].wire_b, {WireSource::BellB, static_cast<int>(i)});
  }
  for (std::size_t i = 0; i < prog.freshes.size(); ++i) {
    place(prog.freshes[i].wire, {WireSource::Fresh, static_cast<int>(i)});
  }
  return src;
}

struct Ctx {
  const ProtocolProgram& prog;
  const PatternTrace& trace;
  RunMode mode;
  std::vector<WireSource> src;
  std::map<int, int> last_wire;  // wire -> position in steps of last mention
  std::map<int, int> last_meas;  // meas id -> position of last mention
};

struct ExecState {
  SimState sim;
  std::vector<QuditRef> bind;  // wire -> live handle, or {-1}
  std::vector<char> mat;       // wire has been materialized
  std::vector<QuditRef> refs;  // per input subsystem: the reference half
  std::map<int, std::pair<QuditRef, QuditRef>> regs;  // meas -> (b_reg, a_reg)
  std::map<int, std::pair<int, int>> outs;            // meas -> (a, b)
  std::map<int, QuditRef> outputs;                    // diamond -> handle
  std::vector<QuditRef> garbage;  // pending retirement (certified runs)
  // Physical footprint: qudits allocated and not yet measured.  Certified
  // runs keep measured qudits around as outcome registers, which is a
  // verification device rather than a protocol cost, so the footprint is
  // tracked separately from the simulator width and agrees across modes.
  int phys = 0;
  int phys_peak = 0;

  explicit ExecState(int p, std::uint64_t seed) : sim(p, seed) {}

  void phys_add(int n) {
    phys += n;
    phys_peak = std::max(phys_peak, phys);
  }
};

struct Accum {
  double sum_pf = 0.0;
  double min_f = 2.0;
  double max_td = 0.0;
  long branches = 0;
  int peak = 0;
  int assignment = 0;
  bool assignment_set = false;
  std::vector<MeasOutcome> outcomes;  // from the single seeded branch
};

/** |Phi> (x) |Phi> laid out over digits (ref0, out1, ref1, out2). */
Eigen::VectorXcd double_bell(int p) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<long>(p) * p * p * p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      v(((static_cast<long>(a) * p + a) * p + b) * p + b) = 1.0 / p;
    }
  }
  return v;
}

void materialize(const Ctx& ctx, ExecState& st, int wire) {
  if (st.mat[wire]) return;
  const WireSource s = ctx.src[wire];
  switch (s.kind) {
    case WireSource::Fresh: {
      st.bind[wire] = st.sim.alloc();
      st.mat[wire] = 1;
      st.phys_add(1);
      break;
    }
    case WireSource::BellA:
    case WireSource::BellB: {
      const BellDecl& d = ctx.prog.bells[s.index];
      auto [qa, qb] = st.sim.bell_pair();
      st.phys_add(2);
      st.bind[d.wire_a] = qa;
      st.bind[d.wire_b] = qb;
      st.mat[d.wire_a] = 1;
      st.mat[d.wire_b] = 1;
      // A half that is never mentioned in this pattern can only be dropped
      // once it decouples; queue it for opportunistic retirement.
      if (ctx.mode == RunMode::Certified) {
        const int other = s.kind == WireSource::BellA ? d.wire_b : d.wire_a;
        if (ctx.last_wire.find(other) == ctx.last_wire.end()) {
          st.garbage.push_back(st.bind[other]);
        }
      }
      break;
    }
    case WireSource::Input:
      throw ContractViolation("engine: input wire was not set up");
    case WireSource::Derived:
      throw ContractViolation("engine: wire used before being produced");
  }
}

QuditRef need(const Ctx& ctx, ExecState& st, int wire) {
  materialize(ctx, st, wire);
  if (st.bind[wire].id < 0) {
    throw ContractViolation("engine: wire " + std::to_string(wire) +
                            " holds no qudit");
  }
  return st.bind[wire];
}

void collect_garbage(const Ctx& ctx, ExecState& st, int pos) {
  if (ctx.mode != RunMode::Certified) return;
  for (auto it = st.regs.begin(); it != st.regs.end();) {
    const auto lm = ctx.last_meas.find(it->first);
    if (lm != ctx.last_meas.end() && lm->second == pos) {
      st.garbage.push_back(it->second.first);
      st.garbage.push_back(it->second.second);
      it = st.regs.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [wire, last] : ctx.last_wire) {
    if (last == pos && st.bind[wire].id >= 0) {
      st.garbage.push_back(st.bind[wire]);
      st.bind[wire] = QuditRef{-1};
    }
  }
  if (st.garbage.empty()) return;
  // Whatever decoupled by now can go; survivors are retried one by one (a
  // grouped attempt fails if any member is still entangled) and kept for
  // later steps.
  st.sim.retire_decoupled(st.garbage);
  std::vector<QuditRef> left;
  for (QuditRef q : st.garbage) {
    if (!st.sim.is_live(q)) continue;
    if (!st.sim.retire_decoupled({q})) left.push_back(q);
  }
  st.garbage = std::move(left);
}

/** Executes one instruction; Bell measurements arrive here only in Seeded
 *  and Certified modes (AllBranches forks before calling). */
void exec_one(const Ctx& ctx, ExecState& st, int idx) {
  const Instr& in = ctx.prog.instrs[idx];
  switch (in.op) {
    case Instr::Op::MoveTo: {
      // Pure transport: locations are tracked by the trace walker, and the
      // state is untouched, so a qudit that is only ever carried around is
      // never allocated (it first costs at a state-touching instruction).
      break;
    }
    case Instr::Op::BellMeasure: {
      const QuditRef q1 = need(ctx, st, in.wires[0]);
      const QuditRef q2 = need(ctx, st, in.wires[1]);
      if (ctx.mode == RunMode::Certified) {
        st.sim.measure_bell_defer(q1, q2);
        st.regs.emplace(in.meas_id, std::make_pair(q1, q2));
      } else {
        const auto [a, b] = st.sim.measure_bell(q1, q2);
        st.outs.emplace(in.meas_id, std::make_pair(a, b));
      }
      st.bind[in.wires[0]] = QuditRef{-1};
      st.bind[in.wires[1]] = QuditRef{-1};
      st.phys_add(-2);
      break;
    }
    case Instr::Op::Correct: {
      const QuditRef q = need(ctx, st, in.wires[0]);
      if (ctx.mode == RunMode::Certified) {
        const auto& [b_reg, a_reg] = st.regs.at(in.meas_id);
        st.sim.apply_sum(a_reg, q, -1);
        st.sim.apply_czpow(b_reg, q, 1);
      } else {
        const auto& [a, b] = st.outs.at(in.meas_id);
        st.sim.apply_x(q, -a);
        st.sim.apply_z(q, b);
      }
      break;
    }
    case Instr::Op::Swap: {
      need(ctx, st, in.wires[0]);
      need(ctx, st, in.wires[1]);
      std::swap(st.bind[in.wires[0]], st.bind[in.wires[1]]);
      break;
    }
    case Instr::Op::Encode: {
      const QuditRef q = need(ctx, st, in.wires[0]);
      const CssCode code(in.code_k, ctx.prog.dimension);
      const std::vector<QuditRef> shares = cgl_encode(st.sim, q, code);
      st.bind[in.wires[0]] = QuditRef{-1};
      st.phys_add(static_cast<int>(in.wires.size()) - 2);
      for (std::size_t s = 1; s < in.wires.size(); ++s) {
        st.bind[in.wires[s]] = shares[s - 1];
        st.mat[in.wires[s]] = 1;
      }
      break;
    }
    case Instr::Op::Decode: {
      const int k = in.code_k;
      const CssCode code(k, ctx.prog.dimension);
      std::vector<QuditRef> shares;
      for (int s = 0; s < k; ++s) shares.push_back(need(ctx, st, in.wires[s]));
      const int out_wire = in.wires[k];
      if (ctx.mode == RunMode::Certified) {
        const std::vector<QuditRef> kept =
            cgl_decode_keep(st.sim, shares, in.positions, code);
        st.bind[out_wire] = kept[0];
        for (std::size_t j = 1; j < kept.size(); ++j) {
          st.garbage.push_back(kept[j]);
        }
      } else {
        st.bind[out_wire] = cgl_decode(st.sim, shares, in.positions, code);
      }
      st.mat[out_wire] = 1;
      for (int s = 0; s < k; ++s) st.bind[in.wires[s]] = QuditRef{-1};
      st.phys_add(-(k - 1));
      break;
    }
    case Instr::Op::MeasureDiscard: {
      const QuditRef q = need(ctx, st, in.wires[0]);
      if (ctx.mode == RunMode::Certified) {
        // Leave the wire to the final partial trace; if it is genuinely
        // uninformative it decouples and retires, and if not the fidelity
        // readout exposes it.
        st.garbage.push_back(q);
      } else {
        st.sim.measure_out(q);
      }
      st.bind[in.wires[0]] = QuditRef{-1};
      st.phys_add(-1);
      break;
    }
    case Instr::Op::Output: {
      const QuditRef q = need(ctx, st, in.wires[0]);
      st.outputs.emplace(in.diamond, q);
      st.bind[in.wires[0]] = QuditRef{-1};
      break;
    }
  }
}

void finish_branch(const Ctx& ctx, ExecState& st, double prob, Accum& acc) {
  const int p = ctx.prog.dimension;
  double fid = 1.0;
  double td = 0.0;
  int assignment = 0;
  if (!st.outputs.empty()) {
    std::vector<QuditRef> outs;
    for (const auto& [d, q] : st.outputs) outs.push_back(q);  // diamond order
    switch (ctx.prog.kind) {
      case TaskKind::SingleSystem: {
        fid = st.sim.fidelity_with({st.refs.at(0), outs.at(0)}, bell_state(p));
        break;
      }
      case TaskKind::TwoSystem: {
        const Eigen::VectorXcd target = double_bell(p);
        const double f0 = st.sim.fidelity_with(
            {st.refs.at(0), outs.at(0), st.refs.at(1), outs.at(1)}, target);
        const double f1 = st.sim.fidelity_with(
            {st.refs.at(0), outs.at(1), st.refs.at(1), outs.at(0)}, target);
        fid = std::max(f0, f1);
        assignment = f0 >= f1 ? 0 : 1;
        break;
      }
      case TaskKind::Entanglement: {
        const Eigen::MatrixXcd rho = st.sim.reduced_state({outs.at(0), outs.at(1)});
        const Eigen::VectorXcd phi = bell_state(p);
        fid = (phi.adjoint() * rho * phi)(0, 0).real();
        td = trace_distance(rho, phi * phi.adjoint());
        break;
      }
    }
  }
  acc.sum_pf += prob * fid;
  acc.min_f = std::min(acc.min_f, fid);
  acc.max_td = std::max(acc.max_td, td);
  acc.branches += 1;
  acc.peak = std::max(acc.peak, st.phys_peak);
  if (!acc.assignment_set) {
    acc.assignment = assignment;
    acc.assignment_set = true;
  }
  if (ctx.mode != RunMode::AllBranches) {
    for (const auto& [id, ab] : st.outs) {
      acc.outcomes.push_back(MeasOutcome{id, ab.first, ab.second});
    }
  }
}

void run_steps(const Ctx& ctx, ExecState st, std::size_t pos, double prob,
               Accum& acc) {
  for (; pos < ctx.trace.steps.size(); ++pos) {
    const int idx = ctx.trace.steps[pos];
    const Instr& in = ctx.prog.instrs[idx];
    if (in.op == Instr::Op::BellMeasure && ctx.mode == RunMode::AllBranches) {
      need(ctx, st, in.wires[0]);
      need(ctx, st, in.wires[1]);
      const int p = ctx.prog.dimension;
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
          ExecState branch = st;
          const double pr = branch.sim.measure_bell_forced(
              branch.bind[in.wires[0]], branch.bind[in.wires[1]], a, b);
          if (pr <= 1e-12) continue;
          branch.outs.emplace(in.meas_id, std::make_pair(a, b));
          branch.bind[in.wires[0]] = QuditRef{-1};
          branch.bind[in.wires[1]] = QuditRef{-1};
          branch.phys_add(-2);
          run_steps(ctx, std::move(branch), pos + 1, prob * pr, acc);
        }
      }
      return;
    }
    exec_one(ctx, st, idx);
    collect_garbage(ctx, st, static_cast<int>(pos));
  }
  finish_branch(ctx, st, prob, acc);
}

void check_io_shape(const ProtocolProgram& prog) {
  std::vector<int> subsystems;
  for (const InputDecl& d : prog.inputs) subsystems.push_back(d.subsystem);
  std::sort(subsystems.begin(), subsystems.end());
  bool ok = true;
  switch (prog.kind) {
    case TaskKind::SingleSystem: ok = subsystems == std::vector<int>{0}; break;
    case TaskKind::TwoSystem: ok = subsystems == std::vector<int>{0, 1}; break;
    case TaskKind::Entanglement: ok = subsystems.empty(); break;
  }
  if (!ok) {
    throw ContractViolation("engine: input declarations do not match the "
                            "task kind of protocol '" + prog.name + "'");
  }
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Seeded: return "seeded";
    case RunMode::Certified: return "certified";
    case RunMode::AllBranches: return "all-branches";
  }
  return "?";
}

PatternRun run_pattern(const ProtocolProgram& prog, const CallPattern& pattern,
                       RunMode mode, std::uint64_t seed) {
  check_io_shape(prog);
  const PatternTrace trace = trace_pattern(prog, pattern);
  Ctx ctx{prog, trace, mode, wire_sources(prog), {}, {}};
  for (std::size_t pos = 0; pos < ctx.trace.steps.size(); ++pos) {
    const Instr& in = prog.instrs[ctx.trace.steps[pos]];
    for (int w : in.wires) ctx.last_wire[w] = static_cast<int>(pos);
    if (in.op == Instr::Op::BellMeasure || in.op == Instr::Op::Correct) {
      ctx.last_meas[in.meas_id] = static_cast<int>(pos);
    }
  }
  if (mode == RunMode::AllBranches) {
    int meas = 0;
    for (int idx : ctx.trace.steps) {
      if (prog.instrs[idx].op == Instr::Op::BellMeasure) ++meas;
    }
    if (2.0 * meas * std::log(static_cast<double>(prog.dimension)) >
        std::log(20000.0)) {
      throw Unsupported("all-branches run would enumerate too many outcome "
                        "combinations");
    }
  }

  ExecState st(prog.dimension, seed);
  st.bind.assign(prog.wire_count, QuditRef{-1});
  st.mat.assign(prog.wire_count, 0);
  st.refs.assign(prog.inputs.empty() ? 0 : 2, QuditRef{-1});
  for (const InputDecl& d : prog.inputs) {
    auto [ref, half] = st.sim.bell_pair();
    st.refs[d.subsystem] = ref;
    st.bind[d.wire] = half;
    st.mat[d.wire] = 1;
    st.phys_add(2);
  }

  Accum acc;
  run_steps(ctx, std::move(st), 0, 1.0, acc);

  PatternRun run;
  run.pattern = pattern;
  run.steps = ctx.trace.steps;
  run.messages = ctx.trace.messages;
  run.outcomes = std::move(acc.outcomes);
  run.fidelity = acc.sum_pf;
  run.trace_dist = acc.max_td;
  run.assignment = acc.assignment;
  run.peak_qudits = acc.peak;
  run.branches = acc.branches;
  run.min_branch_fidelity = acc.min_f;
  return run;
}

VerificationReport verify_protocol(const ProtocolProgram& prog, RunMode mode,
                                   std::uint64_t seed) {
  check_io_shape(prog);
  validate_protocol(prog);
  TaskSpec shape;
  shape.kind = prog.kind;
  shape.assistance = prog.assistance;
  shape.graph = prog.graph;
  std::vector<CallPattern> patterns = enumerate_call_patterns(shape);
  if (prog.kind == TaskKind::SingleSystem) {
    patterns.push_back(CallPattern{{}});
  }

  VerificationReport report;
  report.protocol = prog.name;
  report.kind = prog.kind;
  report.assistance = prog.assistance;
  report.mode = mode;
  report.dimension = prog.dimension;
  report.min_fidelity = 2.0;
  for (const CallPattern& pattern : patterns) {
    report.patterns.push_back(run_pattern(prog, pattern, mode, seed));
    const PatternRun& run = report.patterns.back();
    report.min_fidelity = std::min(report.min_fidelity, run.fidelity);
    report.max_trace_dist = std::max(report.max_trace_dist, run.trace_dist);
    report.peak_qudits = std::max(report.peak_qudits, run.peak_qudits);
  }
  report.ok = report.min_fidelity >= 1.0 - kExact &&
              report.max_trace_dist <= kExact;
  return report;
}

std::string report_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["protocol"] = report.protocol;
  j["kind"] = to_string(report.kind);
  j["assistance"] = to_string(report.assistance);
  j["mode"] = to_string(report.mode);
  j["dimension"] = report.dimension;
  j["ok"] = report.ok;
  j["min_fidelity"] = report.min_fidelity;
  j["max_trace_dist"] = report.max_trace_dist;
  j["peak_qudits"] = report.peak_qudits;
  j["patterns"] = nlohmann::ordered_json::array();
  for (const PatternRun& run : report.patterns) {
    nlohmann::ordered_json pj;
    pj["pattern"] = to_string(run.pattern);
    pj["fidelity"] = run.fidelity;
    pj["trace_dist"] = run.trace_dist;
    pj["assignment"] = run.assignment;
    pj["peak_qudits"] = run.peak_qudits;
    pj["branches"] = run.branches;
    pj["min_branch_fidelity"] = run.min_branch_fidelity;
    pj["steps"] = run.steps;
    pj["outcomes"] = nlohmann::ordered_json::array();
    for (const MeasOutcome& o : run.outcomes) {
      pj["outcomes"].push_back({o.meas_id, o.a, o.b});
    }
    pj["messages"] = nlohmann::ordered_json::array();
    for (const Message& m : run.messages) {
      nlohmann::ordered_json mj;
      mj["src"] = to_string(m.src);
      mj["dst"] = to_string(m.dst);
      mj["kind"] = m.kind;
      pj["messages"].push_back(mj);
    }
    j["patterns"].push_back(std::move(pj));
  }
  return j.dump(2) + "\n";
}

}  // namespace summon
