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

#ifndef RESTEVO_SEARCH_H_
#define RESTEVO_SEARCH_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "restevo/driver.h"
#include "restevo/error.h"
#include "restevo/http.h"
#include "restevo/rng.h"
#include "restevo/swagger.h"
#include "restevo/targets.h"
#include "restevo/test_case.h"

namespace restevo {

enum class Algorithm { kGa, kRandom };

struct SearchConfig {
  Algorithm algorithm = Algorithm::kGa;
  size_t population_size = 30;
  double crossover_prob = 0.7;
  // Initial suites draw their size uniformly from [1, initial_suite_max].
  size_t initial_suite_max = 30;
  size_t suite_cap = 50;
  // Random tests draw their number of calls uniformly from [1, this].
  size_t max_test_length = 3;
  double add_test_prob = 0.1;
  double remove_test_prob = 0.1;
  // Chance that an added test is a mutated copy of an archived test rather
  // than a random one.
  double archive_sample_prob = 0.5;
  // After evaluation, drop tests that hold no per-target maximum of their
  // suite (keeping at least one).
  bool trim_suites = true;
  // Number of executed tests.
  uint64_t budget = 100000;
  uint64_t rng_seed = 0;

  // Throws SearchError(kInvalidConfig).
  void Validate() const;
};

class SearchError : public Error {
 public:
  enum class Kind { kInvalidConfig, kNoActions };
  SearchError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// What one execution of a test (from a reset state) produced.
struct TestResult {
  // One entry per call; 0 when the call failed at the transport level.
  std::vector<int> statuses;
  // LINE/BRANCH values reported by the controller plus the STATUS targets of
  // the observed responses. Empty when `transport_error` is set.
  std::map<TargetId, double> values;
  bool transport_error = false;
};

// Runs tests against the SUT. Each call resets the SUT state first.
class TestExecutor {
 public:
  virtual ~TestExecutor() = default;
  // Fills statuses and the controller-reported values; STATUS targets are
  // added by the engine.
  virtual TestResult Execute(const TestCase& test,
                             std::span<const TargetId> query_ids,
                             bool new_discoveries) = 0;
};

// Executor that talks to a controller and the SUT over HTTP.
class RemoteExecutor : public TestExecutor {
 public:
  RemoteExecutor(DriverClient& driver, const std::string& sut_base_url,
                 std::string base_path,
                 std::vector<AuthCredential> credentials);
  TestResult Execute(const TestCase& test, std::span<const TargetId> query_ids,
                     bool new_discoveries) override;

 private:
  DriverClient& driver_;
  HttpCaller caller_;
  std::string base_path_;
  std::vector<AuthCredential> credentials_;
};

struct SuiteTest {
  TestCase test;
  // Cached result of the unchanged test; cleared when the test is mutated.
  std::shared_ptr<const TestResult> result;
};

struct SuiteFitness {
  std::map<TargetId, double> per_target;
  double aggregate = 0;
};

struct TestSuiteIndividual {
  std::vector<SuiteTest> tests;
  SuiteFitness fitness;
  size_t CallCount() const;
};

// A test kept by the archive, with the targets it covers and the statuses
// it produced.
struct ArchivedTest {
  uint64_t id = 0;  // creation order
  TestCase test;
  std::vector<int> statuses;
  std::set<TargetId> covered;
  bool IsFaultCandidate() const;
};

// Best (fewest calls, then earliest) covering test per covered target.
class Archive {
 public:
  // Stores `test` for every target in `covered` that has no entry yet or
  // whose entry has more calls. Returns true if anything changed.
  bool Offer(const std::shared_ptr<const ArchivedTest>& test,
             const std::set<TargetId>& covered);
  const std::map<TargetId, std::shared_ptr<const ArchivedTest>>& entries()
      const {
    return entries_;
  }
  // Distinct tests, in creation order.
  std::vector<std::shared_ptr<const ArchivedTest>> Tests() const;
  size_t size() const { return entries_.size(); }

 private:
  std::map<TargetId, std::shared_ptr<const ArchivedTest>> entries_;
};

// Children from one shared cut ratio: parent i is split at floor(alpha *
// len_i) and the tails are swapped. Children are truncated to `cap`.
std::pair<TestSuiteIndividual, TestSuiteIndividual> Crossover(
    const TestSuiteIndividual& p1, const TestSuiteIndividual& p2, size_t cap,
    Rng& rng);
std::pair<TestSuiteIndividual, TestSuiteIndividual> CrossoverAt(
    const TestSuiteIndividual& p1, const TestSuiteIndividual& p2, size_t split1,
    size_t split2, size_t cap);

// Mutates each of the n leaves with probability 1/n. Returns the number of
// mutated leaves.
size_t MutateTest(TestCase& test, Rng& rng);

using TestFactory = std::function<TestCase(Rng&)>;

// MutateTest on every test, then add a test from `factory` with
// probability add_prob (below `cap`) and remove one with probability
// remove_prob (above size 1). Mutated tests lose their cached result.
void MutateSuite(TestSuiteIndividual& suite, Rng& rng, size_t cap,
                 double add_prob, double remove_prob,
                 const TestFactory& factory);

// Greedy set cover over the union of the tests' covered sets: repeatedly
// take the test with most uncovered targets, then fewer calls, then lower
// id; then drop any selected test whose targets the others still cover.
// Output is in selection order.
std::vector<ArchivedTest> Minimize(std::span<const ArchivedTest> tests);

struct TargetCounts {
  size_t covered = 0;
  size_t total = 0;
};

struct SearchStats {
  uint64_t evaluations = 0;
  uint64_t refresh_evaluations = 0;
  uint64_t generations = 0;
  uint64_t budget = 0;
  std::string stop_reason;
  TargetCounts line, branch, status;
  // Distinct endpoints (verb and path template) that answered 5xx.
  size_t fault_endpoints = 0;
  // Distinct (endpoint, status code) pairs observed.
  size_t status_codes = 0;
  size_t tests = 0;
  size_t fault_candidates = 0;
  std::optional<std::string> error;
};

void to_json(nlohmann::json& j, const SearchStats& stats);

struct ProgressEvent {
  uint64_t generation = 0;
  uint64_t evaluations = 0;
  size_t covered = 0;
  double best_fitness = 0;
  double mean_suite_size = 0;
};

struct SearchResult {
  SearchStats stats;
  // Minimized suite with re-verified covered sets and statuses.
  std::vector<ArchivedTest> tests;
};

class SearchEngine {
 public:
  SearchEngine(SearchConfig config, std::vector<RestAction> actions,
               size_t auth_options, TestExecutor& executor);
  SearchEngine(SearchEngine&&) noexcept = default;

  // Runs until the budget is spent, every known target is covered, or
  // `cancel` is set. A DriverError other than a transport failure ends the
  // search early; the result then holds the archive as recorded so far and
  // stats.error is set.
  SearchResult Run(const std::function<void(const ProgressEvent&)>& progress =
                       {},
                   const std::atomic<bool>* cancel = nullptr);

  // Executes the suite's tests that have no cached result and recomputes
  // its fitness. Stops early when the budget runs out.
  void Evaluate(TestSuiteIndividual& suite);

  TestCase RandomTest(Rng& rng) const;
  const TargetRegistry& registry() const { return registry_; }
  const Archive& archive() const { return archive_; }
  uint64_t evaluations() const { return evaluations_; }

 private:
  std::shared_ptr<const TestResult> ExecuteOne(const TestCase& test);
  bool BudgetSpent() const;
  bool ShouldStop() const;
  void ComputeFitness(TestSuiteIndividual& suite) const;
  void Trim(TestSuiteIndividual& suite) const;
  const TestSuiteIndividual& Tournament(
      const std::vector<TestSuiteIndividual>& population);
  void RunGa(const std::function<void(const ProgressEvent&)>& progress);
  void RunRandom(const std::function<void(const ProgressEvent&)>& progress);
  std::vector<ArchivedTest> Refresh();
  SearchStats MakeStats(const std::vector<ArchivedTest>& tests) const;

  SearchConfig config_;
  std::vector<std::shared_ptr<const RestAction>> actions_;
  size_t auth_options_;
  TestExecutor* executor_;
  Rng rng_;
  TargetRegistry registry_;
  Archive archive_;
  uint64_t evaluations_ = 0;
  uint64_t refresh_evaluations_ = 0;
  uint64_t generations_ = 0;
  uint64_t next_test_id_ = 0;
  std::set<const RestAction*> executed_actions_;
  bool initialized_ = false;
  const std::atomic<bool>* cancel_ = nullptr;
  std::map<std::pair<std::string, std::string>, std::set<int>> seen_statuses_;
};

}  // namespace restevo

#endif  // RESTEVO_SEARCH_H_
