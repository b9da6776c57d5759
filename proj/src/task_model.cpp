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

#include "summon/task_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "summon/errors.hpp"

namespace summon {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& object, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InputError("parse_task: unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

Point parse_point(const json& value, const std::string& where, int spatial_dims) {
  if (!value.is_array() || value.size() != static_cast<std::size_t>(spatial_dims) + 1) {
    throw InputError("parse_task: " + where + " must be an array [t, x1..x" +
                     std::to_string(spatial_dims) + "]");
  }
  for (const auto& c : value) {
    if (!c.is_number()) {
      throw InputError("parse_task: " + where + " has a non-numeric coordinate");
    }
  }
  Point p;
  p.t = value[0].get<double>();
  for (std::size_t i = 1; i < value.size(); ++i) {
    p.x.push_back(value[i].get<double>());
  }
  return p;
}

TaskKind parse_kind(const json& value) {
  const std::string s = value.is_string() ? value.get<std::string>() : "";
  if (s == "single") return TaskKind::SingleSystem;
  if (s == "two-system") return TaskKind::TwoSystem;
  if (s == "entanglement") return TaskKind::Entanglement;
  throw InputError("parse_task: kind must be \"single\", \"two-system\" or "
                   "\"entanglement\"");
}

Assistance parse_assistance(const json& value) {
  const std::string s = value.is_string() ? value.get<std::string>() : "";
  if (s == "none") return Assistance::None;
  if (s == "label") return Assistance::Label;
  if (s == "global") return Assistance::Global;
  throw InputError("parse_task: assistance must be \"none\", \"label\" or \"global\"");
}

CausalGraph parse_graph_object(const json& object) {
  reject_unknown_keys(object, "graph", {"n", "edges", "start_in_past"});
  if (!object.contains("n") || !object["n"].is_number_integer()) {
    throw InputError("parse_task: graph.n must be an integer");
  }
  const int n = object["n"].get<int>();
  if (n < 1 || n > 8) {
    throw InputError("parse_task: graph.n must be in 1..8, got " + std::to_string(n));
  }
  CausalGraph g(n);
  if (!object.contains("edges") || !object["edges"].is_array()) {
    throw InputError("parse_task: graph.edges must be an array of [j,k] pairs");
  }
  for (const auto& e : object["edges"]) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer()) {
      throw InputError("parse_task: graph edge entries must be 1-based [j,k] pairs");
    }
    const int j = e[0].get<int>(), k = e[1].get<int>();
    if (j < 1 || j > n || k < 1 || k > n || j == k) {
      throw InputError("parse_task: graph edge [" + std::to_string(j) + "," +
                       std::to_string(k) + "] out of range for n=" + std::to_string(n));
    }
    g.set_arrow(j - 1, k - 1);
  }
  g.start_in_past = true;
  g.start_precedes_all_returns = true;
  if (object.contains("start_in_past")) {
    if (!object["start_in_past"].is_boolean()) {
      throw InputError("parse_task: graph.start_in_past must be a boolean");
    }
    g.start_in_past = object["start_in_past"].get<bool>();
    // An abstract task can only weaken the start premise one notch: when the
    // start point is not in the common past it is still assumed to precede
    // every return point, which is the weakest premise any protocol uses.
    g.start_precedes_all_returns = true;
  }
  return g;
}

Geometry parse_geometry_object(const json& object, std::vector<std::string>* ids) {
  reject_unknown_keys(object, "geometry", {"spatial_dims", "speed", "start", "diamonds"});
  Geometry geo;
  if (!object.contains("spatial_dims") || !object["spatial_dims"].is_number_integer()) {
    throw InputError("parse_task: geometry.spatial_dims must be an integer");
  }
  geo.spatial_dims = object["spatial_dims"].get<int>();
  if (geo.spatial_dims < 1) {
    throw InputError("parse_task: geometry.spatial_dims must be >= 1");
  }
  if (object.contains("speed")) {
    if (!object["speed"].is_number()) {
      throw InputError("parse_task: geometry.speed must be a number");
    }
    geo.speed = object["speed"].get<double>();
    if (!(geo.speed > 0)) {
      throw InputError("parse_task: geometry.speed must be positive");
    }
  }
  if (object.contains("start")) {
    geo.start = parse_point(object["start"], "geometry.start", geo.spatial_dims);
  }
  if (!object.contains("diamonds") || !object["diamonds"].is_array() ||
      object["diamonds"].empty()) {
    throw InputError("parse_task: geometry.diamonds must be a nonempty array");
  }
  std::size_t index = 0;
  for (const auto& entry : object["diamonds"]) {
    if (!entry.is_object()) {
      throw InputError("parse_task: geometry.diamonds entries must be objects");
    }
    reject_unknown_keys(entry, "geometry.diamonds[" + std::to_string(index) + "]",
                        {"id", "call", "return"});
    Diamond d;
    if (entry.contains("id")) {
      if (!entry["id"].is_string()) {
        throw InputError("parse_task: diamond id must be a string");
      }
      d.id = entry["id"].get<std::string>();
    }
    if (!entry.contains("call") || !entry.contains("return")) {
      throw InputError("parse_task: each diamond needs \"call\" and \"return\" points");
    }
    d.call = parse_point(entry["call"], "diamond call point", geo.spatial_dims);
    d.ret = parse_point(entry["return"], "diamond return point", geo.spatial_dims);
    ids->push_back(d.id);
    geo.diamonds.push_back(std::move(d));
    ++index;
  }
  return geo;
}

}  // namespace

bool is_prime(int k) {
  if (k < 2) return false;
  for (int d = 2; d * d <= k; ++d) {
    if (k % d == 0) return false;
  }
  return true;
}

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::SingleSystem: return "single";
    case TaskKind::TwoSystem: return "two-system";
    case TaskKind::Entanglement: return "entanglement";
  }
  return "?";
}

std::string to_string(Assistance a) {
  switch (a) {
    case Assistance::None: return "none";
    case Assistance::Label: return "label";
    case Assistance::Global: return "global";
  }
  return "?";
}

bool CallPattern::called(int j) const {
  return std::find(calls.begin(), calls.end(), j) != calls.end();
}

int CallPattern::label_at(int j) const {
  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (calls[i] == j) return static_cast<int>(i) + 1;
  }
  return 0;
}

std::string to_string(const CallPattern& pattern) {
  std::string out = "{";
  for (std::size_t i = 0; i < pattern.calls.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(pattern.calls[i] + 1);
  }
  return out + "}";
}

void validate_pattern(const TaskSpec& task, const CallPattern& pattern) {
  const int n = task.graph.n();
  for (int j : pattern.calls) {
    if (j < 0 || j >= n) {
      throw InputError("call pattern: index " + std::to_string(j + 1) +
                       " out of range for n=" + std::to_string(n));
    }
  }
  if (task.kind == TaskKind::SingleSystem) {
    if (pattern.calls.size() > 1) {
      throw InputError("call pattern: single-system tasks promise at most one call");
    }
    return;
  }
  if (pattern.calls.size() != 2 || pattern.calls[0] == pattern.calls[1]) {
    throw InputError("call pattern: exactly two distinct called diamonds required");
  }
  if (task.assistance != Assistance::Label && pattern.calls[0] > pattern.calls[1]) {
    throw InputError("call pattern: unlabelled patterns are unordered; "
                     "list the smaller index first");
  }
}

std::vector<CallPattern> enumerate_call_patterns(const TaskSpec& task) {
  const int n = task.graph.n();
  std::vector<CallPattern> out;
  if (task.kind == TaskKind::SingleSystem) {
    for (int j = 0; j < n; ++j) out.push_back(CallPattern{{j}});
    return out;
  }
  if (n < 2) {
    throw InputError("enumerate_call_patterns: two-call tasks need n >= 2");
  }
  if (task.assistance == Assistance::Label) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (j != k) out.push_back(CallPattern{{j, k}});
      }
    }
  } else {
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        out.push_back(CallPattern{{j, k}});
      }
    }
  }
  return out;
}

TaskSpec parse_task(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("parse_task: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw InputError("parse_task: top level must be a JSON object");
  }
  reject_unknown_keys(doc, "task document",
                      {"name", "kind", "assistance", "dimension", "graph", "geometry"});
  TaskSpec task;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) {
      throw InputError("parse_task: name must be a string");
    }
    task.name = doc["name"].get<std::string>();
  }
  if (!doc.contains("kind")) {
    throw InputError("parse_task: missing required key \"kind\"");
  }
  task.kind = parse_kind(doc["kind"]);
  if (doc.contains("assistance")) {
    task.assistance = parse_assistance(doc["assistance"]);
  }
  if (task.kind == TaskKind::SingleSystem) {
    task.assistance = Assistance::None;  // single-system tasks ignore assistance
  }
  if (doc.contains("dimension")) {
    if (!doc["dimension"].is_number_integer()) {
      throw InputError("parse_task: dimension must be an integer");
    }
    task.dimension = doc["dimension"].get<int>();
    if (!is_prime(task.dimension)) {
      throw InputError("parse_task: dimension must be a prime >= 2, got " +
                       std::to_string(task.dimension));
    }
  }
  const bool has_graph = doc.contains("graph");
  const bool has_geometry = doc.contains("geometry");
  if (has_graph == has_geometry) {
    throw InputError("parse_task: exactly one of \"graph\" or \"geometry\" is required");
  }
  if (has_graph) {
    if (!doc["graph"].is_object()) {
      throw InputError("parse_task: graph must be an object");
    }
    task.graph = parse_graph_object(doc["graph"]);
  } else {
    if (!doc["geometry"].is_object()) {
      throw InputError("parse_task: geometry must be an object");
    }
    Geometry geo = parse_geometry_object(doc["geometry"], &task.diamond_ids);
    task.graph = graph_from_geometry(geo);
    task.geometry = std::move(geo);
    const bool all_empty =
        std::all_of(task.diamond_ids.begin(), task.diamond_ids.end(),
                    [](const std::string& s) { return s.empty(); });
    if (all_empty) task.diamond_ids.clear();
  }
  if (task.kind != TaskKind::Entanglement && !task.graph.start_in_past &&
      !task.graph.start_precedes_all_returns) {
    throw InputError("parse_task: single/two-system tasks need the start point to "
                     "precede every return point");
  }
  return task;
}

TaskSpec load_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open task file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_task(buffer.str());
}

std::string serialize_task(const TaskSpec& task) {
  json graph_obj;
  graph_obj["n"] = task.graph.n();
  json edges = json::array();
  for (int j = 0; j < task.graph.n(); ++j) {
    for (int k = 0; k < task.graph.n(); ++k) {
      if (j != k && task.graph.adj(j, k)) {
        edges.push_back(json::array({j + 1, k + 1}));
      }
    }
  }
  graph_obj["edges"] = std::move(edges);
  graph_obj["start_in_past"] = task.graph.start_in_past;
  json doc;
  if (!task.name.empty()) doc["name"] = task.name;
  doc["kind"] = to_string(task.kind);
  doc["assistance"] = to_string(task.assistance);
  doc["dimension"] = task.dimension;
  doc["graph"] = std::move(graph_obj);
  return doc.dump(2) + "\n";
}

}  // namespace summon
