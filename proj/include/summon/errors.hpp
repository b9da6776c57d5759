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

#include <stdexcept>
#include <string>

namespace summon {

/** Invalid user-supplied data: malformed coordinates, out-of-range vertex
 *  indices, unparseable task files, bad call patterns. */
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& message)
      : std::invalid_argument(message) {}
};

/** A protocol step that would require information to travel outside the
 *  causal order: an acausal send, a branch on an invisible classical value,
 *  or a correction whose measurement outcome cannot have arrived yet. */
class CausalityViolation : public std::logic_error {
 public:
  explicit CausalityViolation(const std::string& message)
      : std::logic_error(message) {}
};

/** A builder was asked to construct a protocol for a graph shape it does not
 *  handle, or an engine feature was requested outside its contract. */
class Unsupported : public std::logic_error {
 public:
  explicit Unsupported(const std::string& message)
      : std::logic_error(message) {}
};

/** An internal precondition was broken by the caller: discarding an
 *  entangled qudit, using a dead handle, mismatched dimensions. */
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& message)
      : std::logic_error(message) {}
};

}  // namespace summon
