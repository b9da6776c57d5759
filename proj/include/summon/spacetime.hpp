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

/** \file spacetime.hpp
 *  Points in flat Minkowski spacetime, causal precedence, and derivation of
 *  causal graphs from diamond coordinates.
 *
 *  A causal diamond is the intersection of the causal future of a call point
 *  c with the causal past of a return point r; it is nonempty exactly when
 *  c precedes r. Tasks may be ingested either as abstract graphs or as
 *  coordinate geometries; this module turns the latter into the former.
 */

#include <optional>
#include <string>
#include <vector>

#include "summon/causal_graph.hpp"

namespace summon {

/** Absolute slack used on the light-cone inequality so that hand-entered
 *  lightlike coordinates (as in the figures) robustly count as causal. */
inline constexpr double kCausalSlack = 1e-9;

/** A spacetime point: one time coordinate and d >= 1 spatial coordinates. */
struct Point {
  double t = 0.0;
  std::vector<double> x;
};

/** A causal diamond given by its call point and return point. */
struct Diamond {
  std::string id;  // optional label used in reports; may be empty
  Point call;
  Point ret;
};

/** A full coordinate description of a task's spacetime layout. */
struct Geometry {
  int spatial_dims = 1;
  double speed = 1.0;  // signal speed; one global speed for all links
  std::optional<Point> start;
  std::vector<Diamond> diamonds;
};

/** Causal precedence p ≼ q in flat spacetime:
 *  q.t >= p.t and |q.x - p.x| <= speed * (q.t - p.t), with absolute slack
 *  kCausalSlack on the inequalities. Lightlike separation counts as causal
 *  and the relation is reflexive.
 *
 *  \throws InputError if the points have different spatial dimensions or
 *          the speed is not positive.
 */
bool precedes(const Point& p, const Point& q, double speed = 1.0);

/** Derives the causal graph of a geometry: edge (j,k), j != k, exactly when
 *  call_j precedes return_k. Also records whether the start point (when
 *  present) precedes every call point (start_in_past) and every return point
 *  (start_precedes_all_returns); both default to true when no start point is
 *  given, modelling preparation in the distant past.
 *
 *  \throws InputError if any diamond is empty (call does not precede return),
 *          if coordinates mix spatial dimensions, or n is outside 1..8.
 */
CausalGraph graph_from_geometry(const Geometry& geometry);

}  // namespace summon
