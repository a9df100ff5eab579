// Copyright 2026 The restevo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RESTEVO_TARGETS_H_
#define RESTEVO_TARGETS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "restevo/error.h"
#include "restevo/swagger.h"

namespace restevo {

// Canonical target id strings. These appear verbatim on the controller wire
// protocol and in reports:
//   LINE:<unit>:<index>
//   BRANCH:<unit>:<index>:<TRUE|FALSE>
//   STATUS:<verb>:<pathTemplate>:<2xx|500|...>
using TargetId = std::string;

enum class TargetKind { kLine, kBranch, kStatus };

struct LineTarget {
  std::string unit;
  int64_t index = 0;
  friend bool operator==(const LineTarget&, const LineTarget&) = default;
};

struct BranchTarget {
  std::string unit;
  int64_t index = 0;
  bool outcome = true;
  friend bool operator==(const BranchTarget&, const BranchTarget&) = default;
};

struct StatusTarget {
  std::string verb;
  std::string path_template;
  // "2xx" style class or a three digit code.
  std::string status;
  friend bool operator==(const StatusTarget&, const StatusTarget&) = default;
};

using ParsedTarget = std::variant<LineTarget, BranchTarget, StatusTarget>;

TargetId LineTargetId(std::string_view unit, int64_t index);
TargetId BranchTargetId(std::string_view unit, int64_t index, bool outcome);
TargetId StatusTargetId(std::string_view verb, std::string_view path_template,
                        std::string_view status);

TargetId ToTargetId(const ParsedTarget& target);
std::optional<ParsedTarget> ParseTargetId(std::string_view id);
std::optional<TargetKind> KindOf(std::string_view id);

class TargetError : public Error {
 public:
  using Error::Error;
};

// 1 for a satisfied predicate (d == 0), otherwise 1 / (1 + d). Strictly
// decreasing in d and never exactly 1 for d > 0.
double BranchDistanceHeuristic(double distance);

// The class target and the exact-code target for an observed response.
// Throws TargetError for statuses outside [100, 599].
std::set<TargetId> StatusTargetsFor(const RestAction& action, int status);

struct TargetRecord {
  TargetId id;
  double best_heuristic = 0;
  bool covered() const { return best_heuristic >= 1.0; }
};

// Best heuristic value seen so far for every known target. Values only grow.
class TargetRegistry {
 public:
  // Max-merges `results` and returns the ids whose value strictly improved,
  // in id order.
  std::vector<TargetId> MergeExecution(
      const std::map<TargetId, double>& results);

  const TargetRecord* Find(std::string_view id) const;
  double Value(std::string_view id) const;
  bool IsCovered(std::string_view id) const;

  size_t size() const { return records_.size(); }
  size_t CoveredCount() const;
  size_t CoveredCount(TargetKind kind) const;
  size_t Count(TargetKind kind) const;
  bool AllCovered() const { return CoveredCount() == records_.size(); }

  std::vector<TargetId> Uncovered() const;
  std::vector<TargetId> Covered() const;

  const std::map<TargetId, TargetRecord, std::less<>>& records() const {
    return records_;
  }

 private:
  std::map<TargetId, TargetRecord, std::less<>> records_;
};

}  // namespace restevo

#endif  // RESTEVO_TARGETS_H_
