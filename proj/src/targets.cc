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

#include "restevo/targets.h"

#include <charconv>
#include <cmath>

#include "restevo/http.h"

namespace restevo {

namespace {

std::optional<int64_t> ParseIndex(std::string_view text) {
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

TargetId LineTargetId(std::string_view unit, int64_t index) {
  return "LINE:" + std::string(unit) + ":" + std::to_string(index);
}

TargetId BranchTargetId(std::string_view unit, int64_t index, bool outcome) {
  return "BRANCH:" + std::string(unit) + ":" + std::to_string(index) +
         (outcome ? ":TRUE" : ":FALSE");
}

TargetId StatusTargetId(std::string_view verb, std::string_view path_template,
                        std::string_view status) {
  return "STATUS:" + std::string(verb) + ":" + std::string(path_template) +
         ":" + std::string(status);
}

TargetId ToTargetId(const ParsedTarget& target) {
  if (const auto* line = std::get_if<LineTarget>(&target)) {
    return LineTargetId(line->unit, line->index);
  }
  if (const auto* branch = std::get_if<BranchTarget>(&target)) {
    return BranchTargetId(branch->unit, branch->index, branch->outcome);
  }
  const auto& status = std::get<StatusTarget>(target);
  return StatusTargetId(status.verb, status.path_template, status.status);
}

std::optional<ParsedTarget> ParseTargetId(std::string_view id) {
  if (id.starts_with("LINE:")) {
    std::string_view rest = id.substr(5);
    size_t sep = rest.rfind(':');
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    auto index = ParseIndex(rest.substr(sep + 1));
    if (!index) return std::nullopt;
    return LineTarget{std::string(rest.substr(0, sep)), *index};
  }
  if (id.starts_with("BRANCH:")) {
    std::string_view rest = id.substr(7);
    size_t outcome_sep = rest.rfind(':');
    if (outcome_sep == std::string_view::npos) return std::nullopt;
    std::string_view outcome = rest.substr(outcome_sep + 1);
    if (outcome != "TRUE" && outcome != "FALSE") return std::nullopt;
    rest = rest.substr(0, outcome_sep);
    size_t sep = rest.rfind(':');
    if (sep == std::string_view::npos || sep == 0) return std::nullopt;
    auto index = ParseIndex(rest.substr(sep + 1));
    if (!index) return std::nullopt;
    return BranchTarget{std::string(rest.substr(0, sep)), *index,
                        outcome == "TRUE"};
  }
  if (id.starts_with("STATUS:")) {
    std::string_view rest = id.substr(7);
    size_t verb_sep = rest.find(':');
    size_t status_sep = rest.rfind(':');
    if (verb_sep == std::string_view::npos || status_sep == verb_sep) {
      return std::nullopt;
    }
    std::string_view verb = rest.substr(0, verb_sep);
    std::string_view path = rest.substr(verb_sep + 1, status_sep - verb_sep - 1);
    std::string_view status = rest.substr(status_sep + 1);
    if (!ParseVerb(verb) || path.empty() || status.size() != 3) {
      return std::nullopt;
    }
    return StatusTarget{std::string(verb), std::string(path),
                        std::string(status)};
  }
  return std::nullopt;
}

std::optional<TargetKind> KindOf(std::string_view id) {
  if (id.starts_with("LINE:")) return TargetKind::kLine;
  if (id.starts_with("BRANCH:")) return TargetKind::kBranch;
  if (id.starts_with("STATUS:")) return TargetKind::kStatus;
  return std::nullopt;
}

double BranchDistanceHeuristic(double distance) {
  if (distance <= 0) return 1.0;
  double h = 1.0 / (1.0 + distance);
  // 1 / (1 + d) rounds to 1 for d below half an ulp of 1.
  if (h >= 1.0) h = std::nextafter(1.0, 0.0);
  return h;
}

std::set<TargetId> StatusTargetsFor(const RestAction& action, int status) {
  if (status < 100 || status > 599) {
    throw TargetError("invalid HTTP status " + std::to_string(status));
  }
  std::string_view verb = VerbName(action.verb);
  return {StatusTargetId(verb, action.path_template, StatusClass(status)),
          StatusTargetId(verb, action.path_template, std::to_string(status))};
}

std::vector<TargetId> TargetRegistry::MergeExecution(
    const std::map<TargetId, double>& results) {
  std::vector<TargetId> improved;
  for (const auto& [id, value] : results) {
    auto [it, inserted] = records_.try_emplace(id, TargetRecord{id, 0.0});
    if (value > it->second.best_heuristic) {
      it->second.best_heuristic = std::min(value, 1.0);
      improved.push_back(id);
    }
  }
  return improved;
}

const TargetRecord* TargetRegistry::Find(std::string_view id) const {
  auto it = records_.find(id);
  return it == records_.end() ? nullptr : &it->second;
}

double TargetRegistry::Value(std::string_view id) const {
  const TargetRecord* r = Find(id);
  return r == nullptr ? 0.0 : r->best_heuristic;
}

bool TargetRegistry::IsCovered(std::string_view id) const {
  const TargetRecord* r = Find(id);
  return r != nullptr && r->covered();
}

size_t TargetRegistry::CoveredCount() const {
  size_t n = 0;
  for (const auto& [id, r] : records_) n += r.covered() ? 1 : 0;
  return n;
}

size_t TargetRegistry::CoveredCount(TargetKind kind) const {
  size_t n = 0;
  for (const auto& [id, r] : records_) {
    if (r.covered() && KindOf(id) == kind) ++n;
  }
  return n;
}

size_t TargetRegistry::Count(TargetKind kind) const {
  size_t n = 0;
  for (const auto& [id, r] : records_) n += KindOf(id) == kind ? 1 : 0;
  return n;
}

std::vector<TargetId> TargetRegistry::Uncovered() const {
  std::vector<TargetId> out;
  for (const auto& [id, r] : records_) {
    if (!r.covered()) out.push_back(id);
  }
  return out;
}

std::vector<TargetId> TargetRegistry::Covered() const {
  std::vector<TargetId> out;
  for (const auto& [id, r] : records_) {
    if (r.covered()) out.push_back(id);
  }
  return out;
}

}  // namespace restevo
