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

#include <cstdio>
#include <fstream>

#include "summon/errors.hpp"
#include "summon/task_model.hpp"

using namespace summon;

TEST_CASE("parse_task: minimal graph-form document") {
  TaskSpec t = parse_task(R"({
    "kind": "two-system",
    "graph": {"n": 3, "edges": [[1,2],[2,3],[3,1]]}
  })");
  CHECK(t.name.empty());
  CHECK(t.kind == TaskKind::TwoSystem);
  CHECK(t.assistance == Assistance::None);
  CHECK(t.dimension == 2);
  CHECK(t.graph.n() == 3);
  CHECK(arrow(t.graph, 0, 1));
  CHECK(arrow(t.graph, 1, 2));
  CHECK(arrow(t.graph, 2, 0));
  CHECK_FALSE(arrow(t.graph, 1, 0));
  CHECK(t.graph.start_in_past);
  CHECK_FALSE(t.geometry.has_value());
  CHECK(t.diamond_ids.empty());
}

TEST_CASE("parse_task: full document with options") {
  TaskSpec t = parse_task(R"({
    "name": "pair over a cycle",
    "kind": "entanglement",
    "assistance": "label",
    "dimension": 5,
    "graph": {"n": 2, "edges": [[1,2]], "start_in_past": false}
  })");
  CHECK(t.name == "pair over a cycle");
  CHECK(t.kind == TaskKind::Entanglement);
  CHECK(t.assistance == Assistance::Label);
  CHECK(t.dimension == 5);
  CHECK_FALSE(t.graph.start_in_past);
  CHECK(t.graph.start_precedes_all_returns);
}

TEST_CASE("parse_task: rejects malformed documents") {
  // Unknown keys at every level.
  CHECK_THROWS_WITH_AS(parse_task(R"({"kind":"single","graph":{"n":1,"edges":[]},"frobnicate":1})"),
                       doctest::Contains("frobnicate"), InputError);
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","graph":{"n":1,"edges":[],"weights":[]}})"),
                  InputError);
  // Missing/invalid kind.
  CHECK_THROWS_AS(parse_task(R"({"graph":{"n":1,"edges":[]}})"), InputError);
  CHECK_THROWS_AS(parse_task(R"({"kind":"both","graph":{"n":1,"edges":[]}})"), InputError);
  // Graph XOR geometry.
  CHECK_THROWS_AS(parse_task(R"({"kind":"single"})"), InputError);
  CHECK_THROWS_AS(parse_task(
      R"({"kind":"single","graph":{"n":1,"edges":[]},
          "geometry":{"spatial_dims":1,"diamonds":[{"call":[0,0],"return":[1,0]}]}})"),
      InputError);
  // Composite dimension.
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","dimension":4,"graph":{"n":1,"edges":[]}})"),
                  InputError);
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","dimension":1,"graph":{"n":1,"edges":[]}})"),
                  InputError);
  // Edges: 0-based, out of range, self-loop.
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","graph":{"n":2,"edges":[[0,1]]}})"),
                  InputError);
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","graph":{"n":2,"edges":[[1,3]]}})"),
                  InputError);
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","graph":{"n":2,"edges":[[2,2]]}})"),
                  InputError);
  // Bad JSON and bad top-level type.
  CHECK_THROWS_AS(parse_task("{"), InputError);
  CHECK_THROWS_AS(parse_task("[1,2]"), InputError);
  CHECK_THROWS_AS(parse_task(R"({"kind":"single","graph":{"n":9,"edges":[]}})"),
                  InputError);
}

TEST_CASE("parse_task: single-system tasks ignore assistance") {
  TaskSpec t = parse_task(R"({
    "kind": "single", "assistance": "global",
    "graph": {"n": 2, "edges": [[1,2]]}
  })");
  CHECK(t.assistance == Assistance::None);
}

TEST_CASE("parse_task: geometry form derives the graph and keeps ids") {
  TaskSpec t = parse_task(R"({
    "kind": "two-system",
    "geometry": {
      "spatial_dims": 1,
      "diamonds": [
        {"id": "left",  "call": [0, 0], "return": [3, 0]},
        {"id": "right", "call": [1, 0], "return": [2, 0]}
      ]
    }
  })");
  REQUIRE(t.graph.n() == 2);
  CHECK(bidirected(t.graph, 0, 1));
  CHECK(t.diamond_ids == std::vector<std::string>{"left", "right"});
  REQUIRE(t.geometry.has_value());
  CHECK(t.geometry->diamonds.size() == 2);

  // Unlabelled diamonds leave the id list empty.
  TaskSpec anon = parse_task(R"({
    "kind": "two-system",
    "geometry": {"spatial_dims": 1,
                 "diamonds": [{"call": [0,0], "return": [3,0]},
                              {"call": [1,0], "return": [2,0]}]}
  })");
  CHECK(anon.diamond_ids.empty());
}

TEST_CASE("parse_task: start premise required for unknown-input tasks") {
  // A start point preceding neither calls nor returns is fine for
  // entanglement (known input)...
  const char* geo = R"({
    "kind": "%s",
    "geometry": {"spatial_dims": 1, "start": [5, 100],
                 "diamonds": [{"call": [0,0], "return": [3,0]},
                              {"call": [1,0], "return": [2,0]}]}
  })";
  char buf[512];
  std::snprintf(buf, sizeof buf, geo, "entanglement");
  CHECK_NOTHROW(parse_task(buf));
  // ...but not for tasks whose unknown input must reach the returns.
  std::snprintf(buf, sizeof buf, geo, "two-system");
  CHECK_THROWS_AS(parse_task(buf), InputError);
  std::snprintf(buf, sizeof buf, geo, "single");
  CHECK_THROWS_AS(parse_task(buf), InputError);
}

TEST_CASE("CallPattern: labels and rendering") {
  CallPattern unordered{{1, 3}};
  CHECK(unordered.called(1));
  CHECK(unordered.called(3));
  CHECK_FALSE(unordered.called(0));
  CHECK(unordered.label_at(1) == 1);
  CHECK(unordered.label_at(3) == 2);
  CHECK(unordered.label_at(0) == 0);
  CHECK(to_string(unordered) == "{2,4}");
  CHECK(to_string(CallPattern{{0}}) == "{1}");
  CHECK(to_string(CallPattern{{}}) == "{}");
}

TEST_CASE("validate_pattern enforces the promise") {
  TaskSpec task;
  task.kind = TaskKind::TwoSystem;
  task.graph = CausalGraph(4);

  CHECK_NOTHROW(validate_pattern(task, CallPattern{{0, 2}}));
  CHECK_THROWS_AS(validate_pattern(task, CallPattern{{2, 0}}), InputError);
  CHECK_THROWS_AS(validate_pattern(task, CallPattern{{1}}), InputError);
  CHECK_THROWS_AS(validate_pattern(task, CallPattern{{1, 1}}), InputError);
  CHECK_THROWS_AS(validate_pattern(task, CallPattern{{0, 4}}), InputError);

  task.assistance = Assistance::Label;
  CHECK_NOTHROW(validate_pattern(task, CallPattern{{2, 0}}));  // order = labels

  task.kind = TaskKind::SingleSystem;
  task.assistance = Assistance::None;
  CHECK_NOTHROW(validate_pattern(task, CallPattern{{3}}));
  CHECK_NOTHROW(validate_pattern(task, CallPattern{{}}));  // promised no-call run
  CHECK_THROWS_AS(validate_pattern(task, CallPattern{{0, 1}}), InputError);
}

TEST_CASE("enumerate_call_patterns counts") {
  TaskSpec task;
  task.graph = CausalGraph(4);

  task.kind = TaskKind::SingleSystem;
  CHECK(enumerate_call_patterns(task).size() == 4);

  task.kind = TaskKind::TwoSystem;
  CHECK(enumerate_call_patterns(task).size() == 6);
  task.assistance = Assistance::Global;
  CHECK(enumerate_call_patterns(task).size() == 6);
  task.assistance = Assistance::Label;
  CHECK(enumerate_call_patterns(task).size() == 12);

  for (const CallPattern& p : enumerate_call_patterns(task)) {
    CHECK_NOTHROW(validate_pattern(task, p));
  }

  task.graph = CausalGraph(1);
  CHECK_THROWS_AS(enumerate_call_patterns(task), InputError);
}

TEST_CASE("serialize_task round-trips decision-relevant fields") {
  TaskSpec t = parse_task(R"({
    "name": "roundtrip", "kind": "two-system", "assistance": "global",
    "dimension": 3,
    "graph": {"n": 3, "edges": [[1,2],[3,2]], "start_in_past": false}
  })");
  TaskSpec back = parse_task(serialize_task(t));
  CHECK(back.name == t.name);
  CHECK(back.kind == t.kind);
  CHECK(back.assistance == t.assistance);
  CHECK(back.dimension == t.dimension);
  CHECK(back.graph == t.graph);

  // Geometry-form tasks serialize to their derived graph.
  TaskSpec geo = parse_task(R"({
    "kind": "entanglement",
    "geometry": {"spatial_dims": 1,
                 "diamonds": [{"call": [0,0], "return": [3,0]},
                              {"call": [1,0], "return": [2,0]}]}
  })");
  TaskSpec geoback = parse_task(serialize_task(geo));
  CHECK(geoback.graph == geo.graph);
}

TEST_CASE("load_task_file") {
  const char* path = "tmp_task_model_test.json";
  {
    std::ofstream out(path);
    out << R"({"kind":"single","graph":{"n":1,"edges":[]}})";
  }
  TaskSpec t = load_task_file(path);
  CHECK(t.kind == TaskKind::SingleSystem);
  std::remove(path);
  CHECK_THROWS_AS(load_task_file("does_not_exist.json"), InputError);
}

TEST_CASE("is_prime") {
  CHECK(is_prime(2));
  CHECK(is_prime(3));
  CHECK(is_prime(13));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(9));
  CHECK_FALSE(is_prime(0));
  CHECK_FALSE(is_prime(-7));
}
