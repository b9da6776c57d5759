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
 *  Command-line front end for the summoning toolkit.
 *
 *  Subcommands:
 *    check      decide a task file; print the verdict (plan or witness)
 *    simulate   run the planned protocol once on a chosen call pattern
 *    verify     run the planned protocol over every call pattern
 *    enumerate  sweep all causal graphs of a given size and task family
 *    graph      render a task's causal graph as Graphviz DOT
 *
 *  Exit codes (shared across subcommands):
 *    0  success; for `check` it additionally means the task is achievable
 *    1  usage, input, or environment error
 *    2  the task is unachievable (`check`, and `simulate`/`verify` when the
 *       decider refuses to plan a protocol)
 *    3  the decider cannot classify the task (`check`/`simulate`/`verify`)
 *    4  a built protocol failed verification (`verify`, `enumerate --simulate`)
 *
 *  All output is byte-deterministic for identical inputs and seeds: JSON is
 *  emitted with a fixed field order, CSV columns are fixed and documented in
 *  each subcommand's --help, and nothing depends on wall time or iteration
 *  order of unordered containers.
 */

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "summon/achievability.hpp"
#include "summon/builders.hpp"
#include "summon/engine.hpp"
#include "summon/errors.hpp"
#include "summon/task_model.hpp"

namespace {

using nlohmann::ordered_json;
using namespace summon;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUnachievable = 2;
constexpr int kExitUnknown = 3;
constexpr int kExitVerifyFailed = 4;

int status_exit(Status s) {
  switch (s) {
    case Status::Achievable: return kExitOk;
    case Status::Unachievable: return kExitUnachievable;
    case Status::Unknown: return kExitUnknown;
  }
  return kExitError;
}

/** Writes `text` to `out_path`, or to stdout when the path is empty. */
void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + out_path);
  out << text;
  if (!out) throw InputError("cannot write output file: " + out_path);
}

/** Opens the row stream for `enumerate`: the file at `out_path` or stdout. */
std::ostream& open_stream(const std::string& out_path, std::ofstream& file) {
  if (out_path.empty()) return std::cout;
  file.open(out_path, std::ios::binary);
  if (!file) throw InputError("cannot open output file: " + out_path);
  return file;
}

/** One-way / two-way edge token, 1-based: "1>2", "2>1", or "1<>2". */
std::string edge_token(const CausalGraph& g, int j, int k) {
  const bool jk = g.adj(j, k), kj = g.adj(k, j);
  if (jk && kj) return std::to_string(j + 1) + "<>" + std::to_string(k + 1);
  if (jk) return std::to_string(j + 1) + ">" + std::to_string(k + 1);
  return std::to_string(k + 1) + ">" + std::to_string(j + 1);
}

std::vector<std::string> edge_tokens(const CausalGraph& g) {
  std::vector<std::string> tokens;
  for (int j = 0; j < g.n(); ++j)
    for (int k = j + 1; k < g.n(); ++k)
      if (g.adj(j, k) || g.adj(k, j)) tokens.push_back(edge_token(g, j, k));
  return tokens;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/** Standard CSV quoting: wrap when the value contains , " or newline. */
std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string hex_key(const CausalGraph& g) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(canonical_key(g)));
  return buf;
}

ordered_json task_summary(const TaskSpec& task) {
  ordered_json doc;
  doc["name"] = task.name;
  doc["kind"] = to_string(task.kind);
  doc["assistance"] = to_string(task.assistance);
  doc["n"] = task.graph.n();
  doc["dimension"] = task.dimension;
  doc["edges"] = edge_tokens(task.graph);
  doc["start_in_past"] = task.graph.start_in_past;
  return doc;
}

const char* op_name(Instr::Op op) {
  switch (op) {
    case Instr::Op::MoveTo: return "move";
    case Instr::Op::BellMeasure: return "bell-measure";
    case Instr::Op::Correct: return "correct";
    case Instr::Op::Swap: return "swap";
    case Instr::Op::Encode: return "encode";
    case Instr::Op::Decode: return "decode";
    case Instr::Op::MeasureDiscard: return "measure-discard";
    case Instr::Op::Output: return "output";
  }
  return "?";
}

std::string guard_string(const std::vector<Condition>& given) {
  std::vector<std::string> parts;
  for (const Condition& c : given) {
    if (c.other_call) {
      parts.push_back("D" + std::to_string(c.diamond + 1) + " called with D" +
                      std::to_string(c.value + 1));
    } else {
      parts.push_back("label(D" + std::to_string(c.diamond + 1) +
                      ")=" + std::to_string(c.value));
    }
  }
  return join(parts, " & ");
}

ordered_json step_json(const ProtocolProgram& prog, int index) {
  const Instr& ins = prog.instrs.at(static_cast<std::size_t>(index));
  ordered_json doc;
  doc["op"] = op_name(ins.op);
  doc["wires"] = ins.wires;
  doc["at"] = to_string(ins.at);
  if (ins.op == Instr::Op::BellMeasure || ins.op == Instr::Op::Correct)
    doc["meas"] = ins.meas_id;
  if (ins.op == Instr::Op::Encode || ins.op == Instr::Op::Decode)
    doc["k"] = ins.code_k;
  if (ins.op == Instr::Op::Decode) doc["positions"] = ins.positions;
  if (ins.op == Instr::Op::Output) {
    doc["diamond"] = ins.diamond + 1;
    if (ins.subsystem >= 0) doc["subsystem"] = ins.subsystem;
  }
  if (!ins.given.empty()) doc["guard"] = guard_string(ins.given);
  return doc;
}

ordered_json plan_json(const ProtocolPlan& plan) {
  ordered_json doc;
  doc["builder"] = plan.builder;
  if (plan.orientation) doc["orientation"] = edge_tokens(*plan.orientation);
  return doc;
}

/** Splices the verdict's JSON fields (status, rule, plan/witness) into doc. */
void splice_verdict(ordered_json& doc, const Verdict& v) {
  const ordered_json fields = ordered_json::parse(verdict_json(v));
  for (const auto& item : fields.items()) doc[item.key()] = item.value();
}

std::string witness_kind_string(const Verdict& v) {
  return v.witness ? to_string(v.witness->kind) : std::string();
}

std::string witness_vertices_string(const Verdict& v) {
  if (!v.witness) return {};
  std::vector<std::string> parts;
  for (int d : v.witness->vertices) parts.push_back("D" + std::to_string(d + 1));
  return join(parts, ";");
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const std::string& task_path, const std::string& format,
              const std::string& out_path) {
  const TaskSpec task = load_task_file(task_path);
  const Verdict v = decide(task);
  std::string text;
  if (format == "json") {
    ordered_json doc;
    doc["task"] = task_summary(task);
    splice_verdict(doc, v);
    doc["localizable"] = check_localizability(task.graph);
    text = doc.dump(2) + "\n";
  } else {  // csv; column order is part of the output contract
    text = "name,kind,assistance,n,status,rule,builder,orientation,witness,"
           "witness_vertices,localizable\n";
    std::vector<std::string> row{
        task.name,
        to_string(task.kind),
        to_string(task.assistance),
        std::to_string(task.graph.n()),
        to_string(v.status),
        v.rule,
        v.plan ? v.plan->builder : std::string(),
        v.plan && v.plan->orientation ? join(edge_tokens(*v.plan->orientation), " ")
                                      : std::string(),
        witness_kind_string(v),
        witness_vertices_string(v),
        check_localizability(task.graph) ? "1" : "0"};
    std::vector<std::string> quoted;
    for (const std::string& f : row) quoted.push_back(csv_field(f));
    text += join(quoted, ",") + "\n";
  }
  write_output(text, out_path);
  return status_exit(v.status);
}

// ---------------------------------------------------------------------------
// simulate

CallPattern parse_calls(const TaskSpec& task, const std::string& calls_arg) {
  CallPattern pattern;
  if (calls_arg != "none") {
    std::stringstream in(calls_arg);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(tok, &used);
      } catch (const std::exception&) {
        throw InputError("bad --calls entry: '" + tok + "'");
      }
      if (used != tok.size() || value < 1)
        throw InputError("bad --calls entry: '" + tok + "' (want 1-based indices)");
      pattern.calls.push_back(value - 1);
    }
    if (pattern.calls.empty()) throw InputError("--calls lists no diamonds");
  }
  // Unassisted and globally assisted calls are unordered; store ascending.
  // Under label assistance the order given is the label assignment.
  if (task.assistance != Assistance::Label)
    std::sort(pattern.calls.begin(), pattern.calls.end());
  validate_pattern(task, pattern);
  return pattern;
}

int cmd_simulate(const std::string& task_path, const std::string& calls_arg,
                 std::uint64_t seed, const std::string& out_path) {
  const TaskSpec task = load_task_file(task_path);
  const CallPattern pattern = parse_calls(task, calls_arg);
  const Verdict v = decide(task);
  if (!v.plan) {
    std::cerr << "no protocol: task is " << to_string(v.status) << " (rule "
              << v.rule << ")\n";
    return status_exit(v.status);
  }
  const ProtocolProgram prog = build_from_plan(task, *v.plan);
  const PatternRun run = run_pattern(prog, pattern, RunMode::Seeded, seed);

  ordered_json doc;
  doc["task"] = task_summary(task);
  doc["plan"] = plan_json(*v.plan);
  doc["protocol"] = prog.name;
  doc["dimension"] = prog.dimension;
  doc["pattern"] = to_string(pattern);
  doc["mode"] = to_string(RunMode::Seeded);
  doc["seed"] = seed;
  doc["fidelity"] = run.fidelity;
  doc["trace_dist"] = run.trace_dist;
  doc["assignment"] = run.assignment;
  doc["peak_qudits"] = run.peak_qudits;
  ordered_json steps = ordered_json::array();
  for (int idx : run.steps) steps.push_back(step_json(prog, idx));
  doc["steps"] = steps;
  ordered_json messages = ordered_json::array();
  for (const Message& m : run.messages) {
    ordered_json msg;
    msg["from"] = to_string(m.src);
    msg["to"] = to_string(m.dst);
    msg["kind"] = m.kind;
    messages.push_back(msg);
  }
  doc["messages"] = messages;
  ordered_json outcomes = ordered_json::array();
  for (const MeasOutcome& o : run.outcomes) {
    ordered_json oc;
    oc["meas"] = o.meas_id;
    oc["a"] = o.a;
    oc["b"] = o.b;
    outcomes.push_back(oc);
  }
  doc["outcomes"] = outcomes;
  ordered_json outputs = ordered_json::array();
  for (int idx : run.steps) {
    const Instr& ins = prog.instrs.at(static_cast<std::size_t>(idx));
    if (ins.op != Instr::Op::Output) continue;
    ordered_json entry;
    entry["diamond"] = ins.diamond + 1;
    if (ins.subsystem >= 0) entry["subsystem"] = ins.subsystem;
    outputs.push_back(entry);
  }
  doc["outputs"] = outputs;
  write_output(doc.dump(2) + "\n", out_path);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& task_path, bool exhaustive,
               std::uint64_t seed, const std::string& mutate,
               const std::string& out_path) {
  const TaskSpec task = load_task_file(task_path);
  const Verdict v = decide(task);
  if (!v.plan) {
    std::cerr << "no protocol: task is " << to_string(v.status) << " (rule "
              << v.rule << ")\n";
    return status_exit(v.status);
  }
  ProtocolProgram prog = build_from_plan(task, *v.plan);
  if (!mutate.empty() && !apply_mutation(prog, mutate))
    throw InputError("mutation '" + mutate + "' has no site in this protocol");
  const RunMode mode = exhaustive ? RunMode::AllBranches : RunMode::Certified;
  VerificationReport report;
  try {
    report = verify_protocol(prog, mode, seed);
  } catch (const CausalityViolation& e) {
    std::cerr << "verify failed: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const ContractViolation& e) {
    std::cerr << "verify failed: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  write_output(report_json(report), out_path);
  if (!report.ok) {
    for (const PatternRun& run : report.patterns) {
      if (run.fidelity < 1.0 - 1e-9 || run.trace_dist > 1e-9) {
        std::cerr << "verify failed: pattern " << to_string(run.pattern)
                  << " fidelity " << run.fidelity << " trace-dist "
                  << run.trace_dist << "\n";
        break;
      }
    }
    return kExitVerifyFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// enumerate

struct EnumerateParams {
  int n = 3;
  std::string kind = "two-system";
  std::string assistance = "none";
  bool bidirected = false;
  bool simulate = false;
  std::string format = "json";
  std::string out_path;
  std::uint64_t seed = 1;
};

TaskKind parse_kind(const std::string& s) {
  if (s == "single") return TaskKind::SingleSystem;
  if (s == "two-system") return TaskKind::TwoSystem;
  if (s == "entanglement") return TaskKind::Entanglement;
  throw InputError("unknown kind: " + s);
}

Assistance parse_assistance(const std::string& s) {
  if (s == "none") return Assistance::None;
  if (s == "label") return Assistance::Label;
  if (s == "global") return Assistance::Global;
  throw InputError("unknown assistance: " + s);
}

/** Builds graph number `index` in the sweep: one base-3 (oriented) or
 *  base-4 (bidirected) digit per vertex pair (j<k), pairs in lexicographic
 *  order, least significant digit first. Digit 0 = no edge, 1 = j->k,
 *  2 = k->j, 3 = both. */
CausalGraph graph_at(int n, std::uint64_t index, bool bidirected) {
  CausalGraph g(n);
  const std::uint64_t base = bidirected ? 4 : 3;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const int digit = static_cast<int>(index % base);
      index /= base;
      if (digit == 1 || digit == 3) g.set_arrow(j, k);
      if (digit == 2 || digit == 3) g.set_arrow(k, j);
    }
  }
  return g;
}

std::uint64_t sweep_size(int n, bool bidirected) {
  const int pairs = n * (n - 1) / 2;
  std::uint64_t total = 1;
  for (int i = 0; i < pairs; ++i) total *= bidirected ? 4 : 3;
  return total;
}

int cmd_enumerate(const EnumerateParams& p) {
  const TaskKind kind = parse_kind(p.kind);
  const Assistance assistance = parse_assistance(p.assistance);
  if (p.n < 2 || (p.bidirected ? p.n > 4 : p.n > 6))
    throw InputError("enumerate supports n in [2,6] oriented, [2,4] bidirected");

  std::ofstream file;
  std::ostream& out = open_stream(p.out_path, file);
  const std::uint64_t total = sweep_size(p.n, p.bidirected);
  std::uint64_t achievable = 0, unachievable = 0, unknown = 0, verified = 0;
  std::set<std::uint64_t> simulated_classes;
  std::string failure;

  if (p.format == "json") {
    ordered_json params;
    params["n"] = p.n;
    params["kind"] = p.kind;
    params["assistance"] = p.assistance;
    params["bidirected"] = p.bidirected;
    params["simulate"] = p.simulate;
    params["seed"] = p.seed;
    out << "{\n  \"params\": " << params.dump() << ",\n  \"rows\": [\n";
  } else {
    // Fixed column order; part of the output contract.
    out << "index,edges,key,status,rule,builder,orientation,witness_kind,"
           "witness_vertices,verified\n";
  }

  for (std::uint64_t index = 0; index < total; ++index) {
    const CausalGraph g = graph_at(p.n, index, p.bidirected);
    TaskSpec task;
    task.name = "enumerated";
    task.kind = kind;
    task.assistance = assistance;
    task.graph = g;
    const Verdict v = decide(task);
    switch (v.status) {
      case Status::Achievable: ++achievable; break;
      case Status::Unachievable: ++unachievable; break;
      case Status::Unknown: ++unknown; break;
    }

    bool row_verified = false;
    if (p.simulate && failure.empty() && v.status == Status::Achievable &&
        p.n <= 4 && v.plan) {
      try {
        const ProtocolProgram prog = build_from_plan(task, *v.plan);
        validate_protocol(prog);
        // Certified simulation once per isomorphism class; static causal
        // validation above still runs for every row.
        if (simulated_classes.insert(canonical_key(g)).second) {
          const VerificationReport r = verify_protocol(prog, RunMode::Certified, p.seed);
          if (!r.ok) {
            failure = "graph " + std::to_string(index) + " verification failed";
          } else {
            ++verified;
          }
        }
        row_verified = failure.empty();
      } catch (const std::exception& e) {
        failure = "graph " + std::to_string(index) + ": " + e.what();
      }
    }

    if (p.format == "json") {
      ordered_json row;
      row["index"] = index;
      row["edges"] = edge_tokens(g);
      row["key"] = hex_key(g);
      splice_verdict(row, v);
      if (p.simulate) row["verified"] = row_verified;
      out << "    " << row.dump() << (index + 1 < total ? ",\n" : "\n");
    } else {
      std::vector<std::string> row{
          std::to_string(index),
          join(edge_tokens(g), " "),
          hex_key(g),
          to_string(v.status),
          v.rule,
          v.plan ? v.plan->builder : std::string(),
          v.plan && v.plan->orientation
              ? join(edge_tokens(*v.plan->orientation), " ")
              : std::string(),
          witness_kind_string(v),
          witness_vertices_string(v),
          p.simulate ? (row_verified ? "1" : "0") : std::string()};
      std::vector<std::string> quoted;
      for (const std::string& f : row) quoted.push_back(csv_field(f));
      out << join(quoted, ",") << "\n";
    }
  }

  if (p.format == "json") {
    ordered_json summary;
    summary["graphs"] = total;
    summary["achievable"] = achievable;
    summary["unachievable"] = unachievable;
    summary["unknown"] = unknown;
    if (p.simulate) summary["verified_classes"] = verified;
    out << "  ],\n  \"summary\": " << summary.dump() << "\n}\n";
  } else {
    out << "# graphs=" << total << " achievable=" << achievable
        << " unachievable=" << unachievable << " unknown=" << unknown;
    if (p.simulate) out << " verified_classes=" << verified;
    out << "\n";
  }
  out.flush();
  if (!out) throw InputError("cannot write enumeration output");

  if (!failure.empty()) {
    std::cerr << "enumerate --simulate failed: " << failure << "\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// graph

int cmd_graph(const std::string& task_path, const std::string& dot_path) {
  const TaskSpec task = load_task_file(task_path);
  write_output(to_dot(task.graph, task.diamond_ids), dot_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "summon: decide, build, and verify quantum summoning protocols on "
      "causal diamonds"};
  app.require_subcommand(1);

  // ---- check ----
  std::string check_task, check_format = "json", check_out;
  CLI::App* check = app.add_subcommand(
      "check",
      "Decide achievability of a task file. Prints the verdict with the "
      "protocol plan or a refuting witness. Exit code: 0 achievable, 2 "
      "unachievable, 3 unknown, 1 error. CSV columns: name,kind,assistance,"
      "n,status,rule,builder,orientation,witness,witness_vertices,"
      "localizable.");
  check->add_option("task", check_task, "task JSON file")->required();
  check->add_option("--format", check_format, "output format (default json)")
      ->check(CLI::IsMember({"json", "csv"}));
  check->add_option("--out", check_out, "write output to this file");

  // ---- simulate ----
  std::string sim_task, sim_calls, sim_out, sim_format = "json";
  std::uint64_t sim_seed = 1;
  CLI::App* simulate = app.add_subcommand(
      "simulate",
      "Run the planned protocol once on one call pattern (sampled Bell "
      "outcomes) and print a JSON transcript: executed steps, messages, "
      "outcomes, deliveries, fidelity. Exit code: 0 ran, 2/3 when no "
      "protocol is planned, 1 error.");
  simulate->add_option("task", sim_task, "task JSON file")->required();
  simulate
      ->add_option("--calls,--labels,--tuple", sim_calls,
                   "called diamonds, 1-based, comma-separated (e.g. 1,3). "
                   "Order is the label assignment for label-assisted tasks "
                   "and ignored otherwise. Use 'none' for a single-system "
                   "run with no call.")
      ->required();
  simulate->add_option("--seed", sim_seed, "measurement sampling seed");
  simulate->add_option("--format", sim_format, "output format (json only)")
      ->check(CLI::IsMember({"json"}));
  simulate->add_option("--out", sim_out, "write output to this file");

  // ---- verify ----
  std::string ver_task, ver_out, ver_mutate, ver_format = "json";
  std::uint64_t ver_seed = 1;
  bool ver_exhaustive = false;
  int ver_jobs = 1;
  CLI::App* verify = app.add_subcommand(
      "verify",
      "Build the planned protocol and verify exactness on every call "
      "pattern (certified mode: fidelity 1 certifies all measurement "
      "branches). Prints the verification report. Exit code: 0 all "
      "patterns exact, 4 any failure, 2/3 when no protocol is planned, 1 "
      "error.");
  verify->add_option("task", ver_task, "task JSON file")->required();
  verify->add_flag("--exhaustive-outcomes", ver_exhaustive,
                   "force every Bell outcome branch explicitly instead of "
                   "certifying them at once (small programs only)");
  verify->add_option("--seed", ver_seed, "seed (labels the report)");
  verify->add_option("--jobs", ver_jobs,
                     "worker count; results are identical for any value")
      ->check(CLI::PositiveNumber);
  verify->add_option("--format", ver_format, "output format (json only)")
      ->check(CLI::IsMember({"json"}));
  verify->add_option("--out", ver_out, "write output to this file");
  verify->add_option("--mutate", ver_mutate, "plant a named defect (test hook)")
      ->group("");  // hidden

  // ---- enumerate ----
  EnumerateParams ep;
  int enum_jobs = 1;
  CLI::App* enumerate = app.add_subcommand(
      "enumerate",
      "Sweep every causal graph on n diamonds for one task family and "
      "print a row per graph (verdict, plan or witness) plus summary "
      "counts. CSV columns: index,edges,key,status,rule,builder,"
      "orientation,witness_kind,witness_vertices,verified; the final '# "
      "...' line carries the summary. Exit code: 0 done, 4 a --simulate "
      "verification failed, 1 error.");
  enumerate->add_option("--n", ep.n, "number of diamonds (2-6 oriented, 2-4 bidirected)")
      ->required();
  enumerate->add_option("--kind", ep.kind, "single | two-system | entanglement")
      ->check(CLI::IsMember({"single", "two-system", "entanglement"}));
  enumerate->add_option("--assistance", ep.assistance, "none | label | global")
      ->check(CLI::IsMember({"none", "label", "global"}));
  enumerate->add_flag("--bidirected", ep.bidirected,
                      "include graphs with two-way edges");
  enumerate->add_flag("--simulate", ep.simulate,
                      "verify every achievable row (n <= 4): build and "
                      "statically validate each protocol, certified-run one "
                      "representative per graph isomorphism class");
  enumerate->add_option("--seed", ep.seed, "seed for --simulate runs");
  enumerate->add_option("--jobs", enum_jobs,
                        "worker count; results are identical for any value")
      ->check(CLI::PositiveNumber);
  enumerate->add_option("--format", ep.format, "output format (default json)")
      ->check(CLI::IsMember({"json", "csv"}));
  enumerate->add_option("--out", ep.out_path, "write output to this file");

  // ---- graph ----
  std::string graph_task, graph_dot;
  CLI::App* graph = app.add_subcommand(
      "graph", "Render the task's causal graph as Graphviz DOT (two-way "
               "edges use dir=both). Writes to --dot or stdout.");
  graph->add_option("task", graph_task, "task JSON file")->required();
  graph->add_option("--dot", graph_dot, "write DOT to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (check->parsed()) return cmd_check(check_task, check_format, check_out);
    if (simulate->parsed()) return cmd_simulate(sim_task, sim_calls, sim_seed, sim_out);
    if (verify->parsed())
      return cmd_verify(ver_task, ver_exhaustive, ver_seed, ver_mutate, ver_out);
    if (enumerate->parsed()) return cmd_enumerate(ep);
    if (graph->parsed()) return cmd_graph(graph_task, graph_dot);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const Unsupported& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
