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

#include "summon/spacetime.hpp"

#include <cmath>

#include "summon/errors.hpp"

namespace summon {

namespace {

void check_finite(const Point& p, const std::string& what) {
  if (!std::isfinite(p.t)) {
    throw InputError(what + ": non-finite time coordinate");
  }
  for (double c : p.x) {
    if (!std::isfinite(c)) {
      throw InputError(what + ": non-finite spatial coordinate");
    }
  }
}

std::string diamond_name(const Diamond& d, std::size_t index) {
  return d.id.empty() ? "D" + std::to_string(index + 1) : d.id;
}

}  // namespace

bool precedes(const Point& p, const Point& q, double speed) {
  if (p.x.size() != q.x.size() || p.x.empty()) {
    throw InputError("precedes: points must share a spatial dimension >= 1");
  }
  if (!(speed > 0.0)) {
    throw InputError("precedes: signal speed must be positive");
  }
  check_finite(p, "precedes");
  check_finite(q, "precedes");
  const double dt = q.t - p.t;
  if (dt < -kCausalSlack) return false;
  double dist2 = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    const double d = q.x[i] - p.x[i];
    dist2 += d * d;
  }
  return std::sqrt(dist2) <= speed * dt + kCausalSlack;
}

CausalGraph graph_from_geometry(const Geometry& geometry) {
  const int n = static_cast<int>(geometry.diamonds.size());
  if (n < 1 || n > 8) {
    throw InputError("graph_from_geometry: need 1..8 diamonds, got " +
                     std::to_string(n));
  }
  if (geometry.spatial_dims < 1) {
    throw InputError("graph_from_geometry: spatial_dims must be >= 1");
  }
  const auto dims = static_cast<std::size_t>(geometry.spatial_dims);
  for (int j = 0; j < n; ++j) {
    const Diamond& d = geometry.diamonds[j];
    if (d.call.x.size() != dims || d.ret.x.size() != dims) {
      throw InputError("graph_from_geometry: diamond " + diamond_name(d, j) +
                       " has coordinates of the wrong spatial dimension");
    }
    if (!precedes(d.call, d.ret, geometry.speed)) {
      throw InputError("graph_from_geometry: diamond " + diamond_name(d, j) +
                       " is empty (call point does not precede return point)");
    }
  }
  CausalGraph g(n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j != k &&
          precedes(geometry.diamonds[j].call, geometry.diamonds[k].ret,
                   geometry.speed)) {
        g.set_arrow(j, k);
      }
    }
  }
  if (geometry.start.has_value()) {
    const Point& s = *geometry.start;
    if (s.x.size() != dims) {
      throw InputError("graph_from_geometry: start point has the wrong spatial dimension");
    }
    g.start_in_past = true;
    g.start_precedes_all_returns = true;
    for (int j = 0; j < n; ++j) {
      if (!precedes(s, geometry.diamonds[j].call, geometry.speed)) {
        g.start_in_past = false;
      }
      if (!precedes(s, geometry.diamonds[j].ret, geometry.speed)) {
        g.start_precedes_all_returns = false;
      }
    }
  }
  return g;
}

}  // namespace summon
