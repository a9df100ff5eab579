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

#include "restevo/search.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "restevo/gene.h"

namespace restevo {

void SearchConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw SearchError(SearchError::Kind::kInvalidConfig, what);
  };
  if (population_size < 2) fail("population size must be at least 2");
  for (double p : {crossover_prob, add_test_prob, remove_test_prob,
                   archive_sample_prob}) {
    if (!(p >= 0 && p <= 1)) fail("probabilities must lie in [0, 1]");
  }
  if (initial_suite_max < 1) fail("initial suite size must be at least 1");
  if (suite_cap < 1) fail("suite cap must be at least 1");
  if (max_test_length < 1) fail("test length must be at least 1");
  if (budget == 0) fail("budget must be positive");
}

RemoteExecutor::RemoteExecutor(DriverClient& driver,
                               const std::string& sut_base_url,
                               std::string base_path,
                               std::vector<AuthCredential> credentials)
    : driver_(driver),
      caller_(sut_base_url),
      base_path_(std::move(base_path)),
      credentials_(std::move(credentials)) {}

TestResult RemoteExecutor::Execute(const TestCase& test,
                                   std::span<const TargetId> query_ids,
                                   bool new_discoveries) {
  TestResult result;
  driver_.ResetState();
  driver_.NewTestWindow();
  std::vector<HttpRequestPlan> requests;
  try {
    requests = Render(test, base_path_, credentials_);
  } catch (const GeneError&) {
    result.statuses.assign(test.calls.size(), 0);
    result.transport_error = true;
    return result;
  }
  for (const auto& request : requests) {
    try {
      result.statuses.push_back(caller_.Send(request).status);
    } catch (const DriverError& e) {
      if (e.kind() != DriverError::Kind::kHttpTransport) throw;
      result.statuses.push_back(0);
      result.transport_error = true;
    }
  }
  if (result.transport_error) return result;
  for (auto& info : driver_.FetchTargetInfos(query_ids, new_discoveries)) {
    result.values[info.id] = info.value;
  }
  return result;
}

size_t TestSuiteIndividual::CallCount() const {
  size_t n = 0;
  for (const auto& t : tests) n += t.test.calls.size();
  return n;
}

bool ArchivedTest::IsFaultCandidate() const {
  return std::any_of(statuses.begin(), statuses.end(),
                     [](int s) { return s >= 500; });
}

bool Archive::Offer(const std::shared_ptr<const ArchivedTest>& test,
                    const std::set<TargetId>& covered) {
  bool changed = false;
  for (const auto& id : covered) {
    auto [it, inserted] = entries_.try_emplace(id, test);
    if (!inserted &&
        test->test.calls.size() < it->second->test.calls.size()) {
      it->second = test;
      inserted = true;
    }
    changed |= inserted;
  }
  return changed;
}

std::vector<std::shared_ptr<const ArchivedTest>> Archive::Tests() const {
  std::map<uint64_t, std::shared_ptr<const ArchivedTest>> by_id;
  for (const auto& [id, test] : entries_) by_id.emplace(test->id, test);
  std::vector<std::shared_ptr<const ArchivedTest>> out;
  for (auto& [id, test] : by_id) out.push_back(test);
  return out;
}

std::pair<TestSuiteIndividual, TestSuiteIndividual> CrossoverAt(
    const TestSuiteIndividual& p1, const TestSuiteIndividual& p2, size_t split1,
    size_t split2, size_t cap) {
  auto splice = [cap](const TestSuiteIndividual& head, size_t head_len,
                      const TestSuiteIndividual& tail, size_t tail_from) {
    TestSuiteIndividual child;
    for (size_t i = 0; i < head_len; ++i) child.tests.push_back(head.tests[i]);
    for (size_t i = tail_from; i < tail.tests.size(); ++i) {
      child.tests.push_back(tail.tests[i]);
    }
    if (child.tests.size() > cap) child.tests.resize(cap);
    return child;
  };
  return {splice(p1, split1, p2, split2), splice(p2, split2, p1, split1)};
}

std::pair<TestSuiteIndividual, TestSuiteIndividual> Crossover(
    const TestSuiteIndividual& p1, const TestSuiteIndividual& p2, size_t cap,
    Rng& rng) {
  double alpha = rng.UniformReal();
  auto split = [alpha](size_t len) {
    return std::min(len, static_cast<size_t>(std::floor(alpha * len)));
  };
  return CrossoverAt(p1, p2, split(p1.tests.size()), split(p2.tests.size()),
                     cap);
}

size_t MutateTest(TestCase& test, Rng& rng) {
  size_t n = LeafCount(test);
  if (n == 0) return 0;
  double p = 1.0 / static_cast<double>(n);
  size_t mutated = 0;
  // Descending, so that resizing an array does not shift pending indices.
  for (size_t i = n; i-- > 0;) {
    if (rng.Bernoulli(p)) {
      MutateLeaf(test, i, rng);
      ++mutated;
    }
  }
  return mutated;
}

void MutateSuite(TestSuiteIndividual& suite, Rng& rng, size_t cap,
                 double add_prob, double remove_prob,
                 const TestFactory& factory) {
  for (auto& t : suite.tests) {
    if (MutateTest(t.test, rng) > 0) t.result.reset();
  }
  if (suite.tests.size() < cap && rng.Bernoulli(add_prob)) {
    suite.tests.push_back({factory(rng), nullptr});
  }
  if (suite.tests.size() > 1 && rng.Bernoulli(remove_prob)) {
    suite.tests.erase(suite.tests.begin() +
                      static_cast<ptrdiff_t>(rng.Index(suite.tests.size())));
  }
}

std::vector<ArchivedTest> Minimize(std::span<const ArchivedTest> tests) {
  std::set<TargetId> uncovered;
  for (const auto& t : tests) uncovered.insert(t.covered.begin(), t.covered.end());

  std::vector<size_t> chosen;
  std::vector<bool> used(tests.size(), false);
  while (!uncovered.empty()) {
    std::optional<size_t> best;
    size_t best_gain = 0;
    for (size_t i = 0; i < tests.size(); ++i) {
      if (used[i]) continue;
      size_t gain = 0;
      for (const auto& id : tests[i].covered) gain += uncovered.count(id);
      if (gain == 0) continue;
      bool better = false;
      if (!best || gain > best_gain) {
        better = true;
      } else if (gain == best_gain) {
        const ArchivedTest& a = tests[i];
        const ArchivedTest& b = tests[*best];
        better = a.test.calls.size() != b.test.calls.size()
                     ? a.test.calls.size() < b.test.calls.size()
                     : a.id < b.id;
      }
      if (better) {
        best = i;
        best_gain = gain;
      }
    }
    used[*best] = true;
    chosen.push_back(*best);
    for (const auto& id : tests[*best].covered) uncovered.erase(id);
  }

  // A greedy cover can leave a test whose targets were all picked up by
  // later choices.
  for (size_t k = chosen.size(); k-- > 0;) {
    std::map<TargetId, size_t> multiplicity;
    for (size_t i : chosen) {
      for (const auto& id : tests[i].covered) ++multiplicity[id];
    }
    const auto& candidate = tests[chosen[k]].covered;
    bool redundant = std::all_of(candidate.begin(), candidate.end(),
                                 [&](const TargetId& id) {
                                   return multiplicity[id] > 1;
                                 });
    if (redundant) chosen.erase(chosen.begin() + static_cast<ptrdiff_t>(k));
  }

  std::vector<ArchivedTest> out;
  out.reserve(chosen.size());
  for (size_t i : chosen) out.push_back(tests[i]);
  return out;
}

void to_json(nlohmann::json& j, const SearchStats& s) {
  auto counts = [](const TargetCounts& c) {
    return nlohmann::json{{"covered", c.covered}, {"total", c.total}};
  };
  j = nlohmann::json{
      {"evaluations", s.evaluations},
      {"refreshEvaluations", s.refresh_evaluations},
      {"generations", s.generations},
      {"budget", s.budget},
      {"stopReason", s.stop_reason},
      {"targets",
       {{"line", counts(s.line)},
        {"branch", counts(s.branch)},
        {"status", counts(s.status)}}},
      {"faultEndpoints", s.fault_endpoints},
      {"statusCodes", s.status_codes},
      {"tests", s.tests},
      {"faultCandidates", s.fault_candidates},
  };
  if (s.error) j["error"] = *s.error;
}

SearchEngine::SearchEngine(SearchConfig config, std::vector<RestAction> actions,
                           size_t auth_options, TestExecutor& executor)
    : config_(config),
      auth_options_(auth_options),
      executor_(&executor),
      rng_(config.rng_seed) {
  config_.Validate();
  if (actions.empty()) {
    throw SearchError(SearchError::Kind::kNoActions, "no actions to test");
  }
  for (auto& a : actions) {
    actions_.push_back(std::make_shared<const RestAction>(std::move(a)));
  }
}

TestCase SearchEngine::RandomTest(Rng& rng) const {
  TestCase test;
  auto length = static_cast<size_t>(
      rng.UniformInt(1, static_cast<int64_t>(config_.max_test_length)));
  for (size_t i = 0; i < length; ++i) {
    test.calls.push_back(
        RandomCall(actions_[rng.Index(actions_.size())], auth_options_, rng));
  }
  return test;
}

bool SearchEngine::BudgetSpent() const {
  return evaluations_ >= config_.budget ||
         (cancel_ != nullptr && cancel_->load());
}

bool SearchEngine::ShouldStop() const {
  if (BudgetSpent()) return true;
  return initialized_ && executed_actions_.size() == actions_.size() &&
         registry_.AllCovered();
}

std::shared_ptr<const TestResult> SearchEngine::ExecuteOne(
    const TestCase& test) {
  std::vector<TargetId> query;
  for (const auto& id : registry_.Uncovered()) {
    if (KindOf(id) != TargetKind::kStatus) query.push_back(id);
  }
  TestResult result = executor_->Execute(test, query, true);
  ++evaluations_;
  for (const auto& call : test.calls) executed_actions_.insert(call.action.get());
  if (!result.transport_error) {
    for (size_t i = 0; i < result.statuses.size(); ++i) {
      const RestAction& action = *test.calls[i].action;
      int status = result.statuses[i];
      for (const auto& id : StatusTargetsFor(action, status)) {
        result.values[id] = 1.0;
      }
      seen_statuses_[{std::string(VerbName(action.verb)),
                      action.path_template}]
          .insert(status);
    }
  }
  registry_.MergeExecution(result.values);

  std::set<TargetId> covered;
  for (const auto& [id, value] : result.values) {
    if (value >= 1.0) covered.insert(id);
  }
  if (!covered.empty()) {
    auto archived = std::make_shared<ArchivedTest>();
    archived->id = next_test_id_;
    archived->test = test;
    archived->statuses = result.statuses;
    archived->covered = covered;
    archive_.Offer(archived, covered);
  }
  ++next_test_id_;
  return std::make_shared<const TestResult>(std::move(result));
}

void SearchEngine::ComputeFitness(TestSuiteIndividual& suite) const {
  SuiteFitness f;
  for (const auto& t : suite.tests) {
    if (!t.result) continue;
    for (const auto& [id, value] : t.result->values) {
      if (registry_.IsCovered(id)) continue;
      double& slot = f.per_target[id];
      slot = std::max(slot, value);
    }
  }
  // Covered targets are no longer queried; they count fully for everyone.
  for (const auto& id : registry_.Covered()) f.per_target[id] = 1.0;
  for (const auto& [id, value] : f.per_target) f.aggregate += value;
  suite.fitness = std::move(f);
}

void SearchEngine::Evaluate(TestSuiteIndividual& suite) {
  for (auto& t : suite.tests) {
    if (t.result) continue;
    if (ShouldStop()) break;
    t.result = ExecuteOne(t.test);
  }
  if (config_.trim_suites) Trim(suite);
  ComputeFitness(suite);
}

void SearchEngine::Trim(TestSuiteIndividual& suite) const {
  std::map<TargetId, std::pair<double, size_t>> holder;
  for (size_t i = 0; i < suite.tests.size(); ++i) {
    const auto& result = suite.tests[i].result;
    if (!result) continue;
    for (const auto& [id, value] : result->values) {
      if (value <= 0 || registry_.IsCovered(id)) continue;
      auto [it, inserted] = holder.try_emplace(id, value, i);
      if (!inserted && value > it->second.first) it->second = {value, i};
    }
  }
  std::set<size_t> keep;
  for (const auto& [id, best] : holder) keep.insert(best.second);
  if (keep.empty()) return;
  std::vector<SuiteTest> kept;
  for (size_t i = 0; i < suite.tests.size(); ++i) {
    // Unevaluated tests (budget ran out) are kept as they are.
    if (keep.contains(i) || !suite.tests[i].result) {
      kept.push_back(std::move(suite.tests[i]));
    }
  }
  suite.tests = std::move(kept);
}

namespace {

// Sign of aggregate(a) - aggregate(b), computed as a sum of per-target
// differences: equal terms cancel exactly, so a tiny heuristic value is not
// absorbed by the large shared part of both aggregates.
int CompareAggregate(const SuiteFitness& a, const SuiteFitness& b) {
  long double diff = 0;
  auto ia = a.per_target.begin();
  auto ib = b.per_target.begin();
  while (ia != a.per_target.end() || ib != b.per_target.end()) {
    if (ib == b.per_target.end() ||
        (ia != a.per_target.end() && ia->first < ib->first)) {
      diff += ia++->second;
    } else if (ia == a.per_target.end() || ib->first < ia->first) {
      diff -= ib++->second;
    } else {
      diff += static_cast<long double>(ia->second) - ib->second;
      ++ia;
      ++ib;
    }
  }
  return diff > 0 ? 1 : (diff < 0 ? -1 : 0);
}

// True if `a` is preferred over `b`: higher fitness, then fewer tests, then
// fewer calls.
bool Fitter(const TestSuiteIndividual& a, const TestSuiteIndividual& b) {
  if (int c = CompareAggregate(a.fitness, b.fitness); c != 0) return c > 0;
  if (a.tests.size() != b.tests.size()) return a.tests.size() < b.tests.size();
  return a.CallCount() < b.CallCount();
}

}  // namespace

const TestSuiteIndividual& SearchEngine::Tournament(
    const std::vector<TestSuiteIndividual>& population) {
  const auto& a = population[rng_.Index(population.size())];
  const auto& b = population[rng_.Index(population.size())];
  return Fitter(b, a) ? b : a;
}

void SearchEngine::RunGa(
    const std::function<void(const ProgressEvent&)>& progress) {
  TestFactory factory = [this](Rng& rng) {
    if (archive_.size() > 0 && rng.Bernoulli(config_.archive_sample_prob)) {
      auto archived = archive_.Tests();
      TestCase copy = archived[rng.Index(archived.size())]->test;
      MutateTest(copy, rng);
      return copy;
    }
    return RandomTest(rng);
  };
  std::vector<TestSuiteIndividual> population;
  for (size_t i = 0; i < config_.population_size; ++i) {
    TestSuiteIndividual suite;
    auto size = static_cast<size_t>(rng_.UniformInt(
        1, static_cast<int64_t>(
               std::min(config_.initial_suite_max, config_.suite_cap))));
    for (size_t k = 0; k < size; ++k) suite.tests.push_back({RandomTest(rng_), nullptr});
    population.push_back(std::move(suite));
  }
  for (auto& suite : population) Evaluate(suite);
  initialized_ = true;

  auto report = [&] {
    if (!progress) return;
    double best = 0;
    double tests = 0;
    for (const auto& s : population) {
      best = std::max(best, s.fitness.aggregate);
      tests += static_cast<double>(s.tests.size());
    }
    progress({generations_, evaluations_, registry_.CoveredCount(), best,
              tests / static_cast<double>(population.size())});
  };
  report();

  while (!ShouldStop()) {
    // Covered targets move between fitness terms as the registry grows.
    for (auto& suite : population) ComputeFitness(suite);
    std::vector<TestSuiteIndividual> next;
    next.push_back(*std::min_element(
        population.begin(), population.end(),
        [](const auto& a, const auto& b) { return Fitter(a, b); }));
    while (next.size() < config_.population_size && !ShouldStop()) {
      const TestSuiteIndividual& p1 = Tournament(population);
      const TestSuiteIndividual& p2 = Tournament(population);
      std::pair<TestSuiteIndividual, TestSuiteIndividual> children =
          rng_.Bernoulli(config_.crossover_prob)
              ? Crossover(p1, p2, config_.suite_cap, rng_)
              : std::make_pair(p1, p2);
      for (TestSuiteIndividual* child : {&children.first, &children.second}) {
        if (next.size() >= config_.population_size) break;
        MutateSuite(*child, rng_, config_.suite_cap, config_.add_test_prob,
                    config_.remove_test_prob, factory);
        Evaluate(*child);
        next.push_back(std::move(*child));
      }
    }
    population = std::move(next);
    ++generations_;
    report();
  }
}

void SearchEngine::RunRandom(
    const std::function<void(const ProgressEvent&)>& progress) {
  initialized_ = true;
  const uint64_t report_every = 1000;
  while (!ShouldStop()) {
    ExecuteOne(RandomTest(rng_));
    if (progress && evaluations_ % report_every == 0) {
      progress({evaluations_ / report_every, evaluations_,
                registry_.CoveredCount(),
                static_cast<double>(registry_.CoveredCount()), 1.0});
    }
  }
}

std::vector<ArchivedTest> SearchEngine::Refresh() {
  std::vector<TargetId> query;
  for (const auto& [id, record] : registry_.records()) {
    if (KindOf(id) != TargetKind::kStatus) query.push_back(id);
  }
  std::vector<ArchivedTest> out;
  for (const auto& archived : archive_.Tests()) {
    TestResult result = executor_->Execute(archived->test, query, true);
    ++refresh_evaluations_;
    ArchivedTest fresh;
    fresh.id = archived->id;
    fresh.test = archived->test;
    fresh.statuses = result.statuses;
    if (!result.transport_error) {
      for (const auto& [id, value] : result.values) {
        if (value >= 1.0) fresh.covered.insert(id);
      }
      for (size_t i = 0; i < result.statuses.size(); ++i) {
        for (const auto& id :
             StatusTargetsFor(*archived->test.calls[i].action, result.statuses[i])) {
          fresh.covered.insert(id);
        }
      }
    }
    out.push_back(std::move(fresh));
  }
  return out;
}

SearchStats SearchEngine::MakeStats(
    const std::vector<ArchivedTest>& tests) const {
  SearchStats s;
  s.evaluations = evaluations_;
  s.refresh_evaluations = refresh_evaluations_;
  s.generations = generations_;
  s.budget = config_.budget;
  s.line = {registry_.CoveredCount(TargetKind::kLine),
            registry_.Count(TargetKind::kLine)};
  s.branch = {registry_.CoveredCount(TargetKind::kBranch),
              registry_.Count(TargetKind::kBranch)};
  s.status = {registry_.CoveredCount(TargetKind::kStatus),
              registry_.Count(TargetKind::kStatus)};
  for (const auto& [endpoint, statuses] : seen_statuses_) {
    s.status_codes += statuses.size();
    if (!statuses.empty() && *statuses.rbegin() >= 500) ++s.fault_endpoints;
  }
  s.tests = tests.size();
  s.fault_candidates = static_cast<size_t>(
      std::count_if(tests.begin(), tests.end(),
                    [](const ArchivedTest& t) { return t.IsFaultCandidate(); }));
  return s;
}

SearchResult SearchEngine::Run(
    const std::function<void(const ProgressEvent&)>& progress,
    const std::atomic<bool>* cancel) {
  cancel_ = cancel;
  std::optional<std::string> error;
  try {
    if (config_.algorithm == Algorithm::kGa) {
      RunGa(progress);
    } else {
      RunRandom(progress);
    }
  } catch (const DriverError& e) {
    error = e.what();
  }

  std::string stop_reason;
  if (error) {
    stop_reason = "error";
  } else if (cancel_ != nullptr && cancel_->load()) {
    stop_reason = "cancelled";
  } else if (evaluations_ >= config_.budget) {
    stop_reason = "budget";
  } else {
    stop_reason = "allCovered";
  }

  std::vector<ArchivedTest> verified;
  if (!error) {
    try {
      verified = Refresh();
    } catch (const DriverError& e) {
      error = e.what();
      stop_reason = "error";
    }
  }
  if (error) {
    verified.clear();
    for (const auto& t : archive_.Tests()) verified.push_back(*t);
  }

  SearchResult result;
  result.tests = Minimize(verified);
  result.stats = MakeStats(result.tests);
  result.stats.stop_reason = stop_reason;
  result.stats.error = error;
  return result;
}

}  // namespace restevo
