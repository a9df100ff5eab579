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

#include <gtest/gtest.h>

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "direct_executor.h"
#include "restevo/simulator.h"
#include "restevo/test_case.h"
#include "test_util.h"

namespace restevo {
namespace {

using testing::DirectExecutor;
using testing::Fixture;

// A test made of a single GET /t{tag} call, so tests can be told apart.
TestCase Tagged(int tag, size_t calls = 1) {
  auto action = std::make_shared<RestAction>();
  action->path_template = "/t" + std::to_string(tag);
  TestCase t;
  for (size_t i = 0; i < calls; ++i) t.calls.push_back({action, {}, {}, 0});
  return t;
}

int TagOf(const SuiteTest& t) {
  return std::stoi(t.test.calls[0].action->path_template.substr(2));
}

TestSuiteIndividual Suite(std::initializer_list<int> tags) {
  TestSuiteIndividual s;
  for (int tag : tags) s.tests.push_back({Tagged(tag), nullptr});
  return s;
}

std::vector<int> Tags(const TestSuiteIndividual& s) {
  std::vector<int> out;
  for (const auto& t : s.tests) out.push_back(TagOf(t));
  return out;
}

// An action with `n` required boolean query parameters and no credentials:
// exactly n mutable leaves per call.
std::shared_ptr<const RestAction> BooleanAction(int n) {
  auto a = std::make_shared<RestAction>();
  a->path_template = "/b";
  for (int i = 0; i < n; ++i) {
    ParamSpec p;
    p.name = "p" + std::to_string(i);
    p.location = ParamLocation::kQuery;
    p.required = true;
    p.schema.kind = SchemaKind::kBoolean;
    a->params.push_back(p);
  }
  return a;
}

ArchivedTest Archived(uint64_t id, int tag, size_t calls,
                      std::set<TargetId> covered) {
  return {id, Tagged(tag, calls), std::vector<int>(calls, 200),
          std::move(covered)};
}

std::vector<uint64_t> Ids(const std::vector<ArchivedTest>& tests) {
  std::vector<uint64_t> out;
  for (const auto& t : tests) out.push_back(t.id);
  return out;
}

TEST(Crossover, SplitsSwapTails) {
  auto [c1, c2] = CrossoverAt(Suite({1, 2}), Suite({3, 4}), 1, 1, 50);
  EXPECT_EQ(Tags(c1), (std::vector<int>{1, 4}));
  EXPECT_EQ(Tags(c2), (std::vector<int>{3, 2}));
}

TEST(Crossover, IdenticalParentsGiveIdenticalChildren) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    auto p = Suite({1, 2, 3, 4, 5});
    auto [c1, c2] = Crossover(p, p, 50, rng);
    EXPECT_EQ(Tags(c1), Tags(p));
    EXPECT_EQ(Tags(c2), Tags(p));
  }
}

TEST(Crossover, SingletonParentsGiveCopies) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    auto [c1, c2] = Crossover(Suite({1}), Suite({2}), 50, rng);
    std::multiset<int> got = {Tags(c1)[0], Tags(c2)[0]};
    EXPECT_EQ(c1.tests.size(), 1u);
    EXPECT_EQ(c2.tests.size(), 1u);
    EXPECT_EQ(got, (std::multiset<int>{1, 2}));
  }
}

TEST(Crossover, PreservesTheMultisetAndNeverEmpties) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    TestSuiteIndividual a, b;
    std::multiset<int> all;
    int tag = 0;
    for (int k = static_cast<int>(rng.UniformInt(1, 8)); k > 0; --k) {
      a.tests.push_back({Tagged(++tag), nullptr});
      all.insert(tag);
    }
    for (int k = static_cast<int>(rng.UniformInt(1, 8)); k > 0; --k) {
      b.tests.push_back({Tagged(++tag), nullptr});
      all.insert(tag);
    }
    auto [c1, c2] = Crossover(a, b, 50, rng);
    ASSERT_GE(c1.tests.size(), 1u);
    ASSERT_GE(c2.tests.size(), 1u);
    std::multiset<int> got;
    for (int t : Tags(c1)) got.insert(t);
    for (int t : Tags(c2)) got.insert(t);
    ASSERT_EQ(got, all);
  }
}

TEST(Crossover, RespectsTheCap) {
  TestSuiteIndividual a, b;
  for (int i = 0; i < 10; ++i) a.tests.push_back({Tagged(i), nullptr});
  for (int i = 10; i < 20; ++i) b.tests.push_back({Tagged(i), nullptr});
  auto [c1, c2] = CrossoverAt(a, b, 9, 1, 12);
  EXPECT_EQ(c1.tests.size(), 12u);
  EXPECT_EQ(c2.tests.size(), 2u);
}

TEST(Crossover, ChildrenAreDeepCopies) {
  Rng rng(4);
  auto action = BooleanAction(3);
  TestSuiteIndividual a, b;
  for (int i = 0; i < 2; ++i) {
    a.tests.push_back({TestCase{{RandomCall(action, 0, rng)}}, nullptr});
    b.tests.push_back({TestCase{{RandomCall(action, 0, rng)}}, nullptr});
  }
  TestSuiteIndividual a0 = a, b0 = b;
  auto [c1, c2] = CrossoverAt(a, b, 1, 1, 50);
  for (int i = 0; i < 20; ++i) {
    for (auto& t : c1.tests) MutateTest(t.test, rng);
    for (auto& t : c2.tests) MutateTest(t.test, rng);
  }
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(a.tests[i].test, a0.tests[i].test);
    EXPECT_EQ(b.tests[i].test, b0.tests[i].test);
  }
}

TEST(MutateTest, SingleLeafAlwaysMutates) {
  Rng rng(5);
  auto action = BooleanAction(1);
  for (int i = 0; i < 1000; ++i) {
    TestCase t{{RandomCall(action, 0, rng)}};
    ASSERT_EQ(LeafCount(t), 1u);
    TestCase before = t;
    EXPECT_EQ(MutateTest(t, rng), 1u);
    EXPECT_NE(t, before);
  }
}

TEST(MutateTest, ExpectedOneChangePerTest) {
  // n = 4 leaves, each flipped with probability 1/4: the mean number of
  // changes is 4 * 1/4 = 1. Counted by comparing leaf values, not by
  // trusting the returned count.
  Rng rng(6);
  auto action = BooleanAction(4);
  const int trials = 10000;
  double changes = 0;
  for (int i = 0; i < trials; ++i) {
    TestCase t{{RandomCall(action, 0, rng)}};
    TestCase before = t;
    MutateTest(t, rng);
    for (size_t p = 0; p < 4; ++p) {
      changes += !(t.calls[0].bindings[p] == before.calls[0].bindings[p]);
    }
  }
  double mean = changes / trials;
  EXPECT_GE(mean, 0.95);
  EXPECT_LE(mean, 1.05);
}

TEST(MutateSuite, AddIsSuppressedAtTheCap) {
  Rng rng(7);
  int made = 0;
  TestFactory factory = [&](Rng&) { return Tagged(100 + made++); };
  auto suite = Suite({1, 2, 3});
  for (int i = 0; i < 200; ++i) {
    MutateSuite(suite, rng, 3, 1.0, 0.0, factory);
    ASSERT_EQ(suite.tests.size(), 3u);
  }
  EXPECT_EQ(made, 0);
  MutateSuite(suite, rng, 4, 1.0, 0.0, factory);
  EXPECT_EQ(suite.tests.size(), 4u);
}

TEST(MutateSuite, RemoveNeverEmptiesTheSuite) {
  Rng rng(8);
  TestFactory factory = [](Rng&) { return Tagged(0); };
  auto suite = Suite({1, 2, 3});
  for (int i = 0; i < 200; ++i) {
    MutateSuite(suite, rng, 50, 0.0, 1.0, factory);
    ASSERT_GE(suite.tests.size(), 1u);
  }
  EXPECT_EQ(suite.tests.size(), 1u);
}

TEST(MutateSuite, MutatedTestsLoseTheirCachedResult) {
  Rng rng(9);
  auto action = BooleanAction(1);
  TestSuiteIndividual suite;
  suite.tests.push_back({TestCase{{RandomCall(action, 0, rng)}},
                         std::make_shared<TestResult>()});
  MutateSuite(suite, rng, 50, 0.0, 0.0, [](Rng&) { return Tagged(0); });
  EXPECT_EQ(suite.tests[0].result, nullptr);
}

TEST(Minimize, GreedyCover) {
  std::vector<ArchivedTest> tests = {Archived(1, 1, 1, {"A", "B"}),
                                     Archived(2, 2, 1, {"C"})};
  EXPECT_EQ(Ids(Minimize(tests)), (std::vector<uint64_t>{1, 2}));
}

TEST(Minimize, SingleTarget) {
  std::vector<ArchivedTest> tests = {Archived(1, 1, 1, {"A"})};
  EXPECT_EQ(Minimize(tests).size(), 1u);
}

TEST(Minimize, IdenticalCoverKeepsTheShorterTest) {
  std::vector<ArchivedTest> tests = {Archived(1, 1, 3, {"A", "B"}),
                                     Archived(2, 2, 2, {"A", "B"})};
  EXPECT_EQ(Ids(Minimize(tests)), (std::vector<uint64_t>{2}));
  // Equal length: the earlier one.
  tests = {Archived(5, 1, 2, {"A"}), Archived(3, 2, 2, {"A"})};
  EXPECT_EQ(Ids(Minimize(tests)), (std::vector<uint64_t>{3}));
}

TEST(Minimize, DropsTestsMadeRedundantByLaterChoices) {
  // All four tests gain 3; greedy takes 1 (lowest id), then 2, 3, 4, after
  // which 1 is covered by the others and is dropped.
  std::vector<ArchivedTest> tests = {
      Archived(1, 1, 1, {"A", "B", "X"}), Archived(2, 2, 1, {"A", "C", "D"}),
      Archived(3, 3, 1, {"B", "E", "F"}), Archived(4, 4, 1, {"X", "G", "H"})};
  auto out = Minimize(tests);
  std::set<TargetId> covered;
  for (const auto& t : out) covered.insert(t.covered.begin(), t.covered.end());
  EXPECT_EQ(covered.size(), 9u);
  EXPECT_EQ(Ids(out), (std::vector<uint64_t>{2, 3, 4}));
}

TEST(Minimize, PropertiesOnRandomArchives) {
  Rng rng(10);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ArchivedTest> tests;
    std::set<TargetId> all;
    int n = static_cast<int>(rng.UniformInt(1, 12));
    for (int i = 0; i < n; ++i) {
      std::set<TargetId> cov;
      for (int k = static_cast<int>(rng.UniformInt(1, 4)); k > 0; --k) {
        cov.insert("T" + std::to_string(rng.UniformInt(0, 15)));
      }
      all.insert(cov.begin(), cov.end());
      tests.push_back(Archived(static_cast<uint64_t>(i), i,
                               static_cast<size_t>(rng.UniformInt(1, 3)), cov));
    }
    auto out = Minimize(tests);
    std::set<TargetId> covered;
    for (const auto& t : out) covered.insert(t.covered.begin(), t.covered.end());
    ASSERT_EQ(covered, all);
    // No selected test can be dropped.
    for (size_t skip = 0; skip < out.size(); ++skip) {
      std::set<TargetId> rest;
      for (size_t i = 0; i < out.size(); ++i) {
        if (i != skip) rest.insert(out[i].covered.begin(), out[i].covered.end());
      }
      ASSERT_NE(rest, all) << "trial " << trial;
    }
    ASSERT_EQ(Ids(Minimize(tests)), Ids(out));
  }
}

TEST(Archive, KeepsTheShortestCoveringTest) {
  Archive archive;
  auto long_test = std::make_shared<ArchivedTest>(Archived(1, 1, 3, {"A"}));
  auto short_test = std::make_shared<ArchivedTest>(Archived(2, 2, 1, {"A"}));
  auto same = std::make_shared<ArchivedTest>(Archived(3, 3, 1, {"A"}));
  EXPECT_TRUE(archive.Offer(long_test, {"A"}));
  EXPECT_TRUE(archive.Offer(short_test, {"A"}));
  EXPECT_FALSE(archive.Offer(same, {"A"}));
  EXPECT_EQ(archive.entries().at("A")->id, 2u);
  EXPECT_TRUE(archive.Offer(same, {"B"}));
  EXPECT_EQ(archive.Tests().size(), 2u);
}

TEST(SearchConfig, Validation) {
  SearchConfig ok;
  EXPECT_NO_THROW(ok.Validate());
  auto bad = [](auto edit) {
    SearchConfig c;
    edit(c);
    try {
      c.Validate();
      return false;
    } catch (const SearchError& e) {
      return e.kind() == SearchError::Kind::kInvalidConfig;
    }
  };
  EXPECT_TRUE(bad([](SearchConfig& c) { c.budget = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.crossover_prob = 1.5; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.add_test_prob = -0.1; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.population_size = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.suite_cap = 0; }));
  EXPECT_TRUE(bad([](SearchConfig& c) { c.initial_suite_max = 0; }));
}

// Engine tests run against the in-process simulator.
class EngineTest : public ::testing::Test {
 protected:
  void Load(const std::string& fixture) {
    sim_ = std::make_unique<Simulator>(LoadScenario(Fixture(fixture)),
                                       "http://sut");
    executor_ = std::make_unique<DirectExecutor>(*sim_);
    actions_ = ExtractActions(sim_->scenario().doc);
  }
  // Each engine starts from a fresh SUT, as a new search session would.
  SearchEngine Engine(SearchConfig config) {
    executor_->Restart();
    return SearchEngine(config, actions_, sim_->scenario().auth.size(),
                        *executor_);
  }
  TestCase Call(HttpVerb verb, const std::string& path,
                std::vector<Gene> genes, std::optional<size_t> auth) {
    for (const auto& a : actions_) {
      if (a.verb != verb || a.path_template != path) continue;
      ActionCall call;
      call.action = std::make_shared<const RestAction>(a);
      for (size_t i = 0; i < a.params.size(); ++i) {
        call.bindings.push_back({a.params[i].name, genes[i]});
      }
      call.auth = auth;
      call.auth_options = sim_->scenario().auth.size();
      return TestCase{{call}};
    }
    ADD_FAILURE() << path;
    return {};
  }
  TestCase Item(int64_t id) {
    return Call(HttpVerb::kGet, "/items/{id}",
                {Gene(IntegerGene{id, INT32_MIN, INT32_MAX})}, std::nullopt);
  }

  std::unique_ptr<Simulator> sim_;
  std::unique_ptr<DirectExecutor> executor_;
  std::vector<RestAction> actions_;
};

TEST_F(EngineTest, NoActionsIsAnError) {
  Load("ping.json");
  try {
    SearchEngine engine({}, {}, 0, *executor_);
    FAIL();
  } catch (const SearchError& e) {
    EXPECT_EQ(e.kind(), SearchError::Kind::kNoActions);
  }
}

TEST_F(EngineTest, BudgetOfOneExecutesOneTest) {
  Load("fig3.json");
  SearchConfig config;
  config.budget = 1;
  SearchEngine engine = Engine(config);
  SearchResult result = engine.Run();
  EXPECT_EQ(result.stats.evaluations, 1u);
  EXPECT_EQ(result.stats.stop_reason, "budget");
  EXPECT_EQ(executor_->executions(),
            result.stats.evaluations + result.stats.refresh_evaluations);
  std::set<TargetId> archived;
  for (const auto& [id, t] : engine.archive().entries()) archived.insert(id);
  std::set<TargetId> covered;
  for (const auto& id : engine.registry().Covered()) covered.insert(id);
  EXPECT_EQ(archived, covered);
  EXPECT_FALSE(covered.empty());
  EXPECT_EQ(engine.archive().Tests().size(), 1u);
}

TEST_F(EngineTest, StopsEarlyWhenEverythingIsCovered) {
  Load("ping.json");
  SearchConfig config;
  config.budget = 10000;
  SearchResult result = Engine(config).Run();
  EXPECT_EQ(result.stats.stop_reason, "allCovered");
  // Only the initial population is evaluated.
  EXPECT_LE(result.stats.evaluations,
            config.population_size * config.initial_suite_max);
  // LINE:ping:0 plus the 2xx and 200 status targets.
  EXPECT_EQ(result.stats.line.covered, 1u);
  EXPECT_EQ(result.stats.status.covered, 2u);
  EXPECT_EQ(result.tests.size(), 1u);
}

TEST_F(EngineTest, SuiteFitnessTakesTheBestTestPerTarget) {
  Load("linear-eq.json");
  SearchConfig config;
  config.budget = 100;
  SearchEngine engine = Engine(config);

  TestSuiteIndividual near;
  near.tests.push_back({Item(4245), nullptr});
  engine.Evaluate(near);
  // d = 3.
  EXPECT_DOUBLE_EQ(near.fitness.per_target.at("BRANCH:items:0:TRUE"), 0.25);

  TestSuiteIndividual both;
  both.tests.push_back({Item(4245), nullptr});
  both.tests.push_back({Item(4242), nullptr});
  engine.Evaluate(both);
  EXPECT_EQ(both.fitness.per_target.at("BRANCH:items:0:TRUE"), 1.0);
  EXPECT_EQ(both.fitness.per_target.at("BRANCH:items:0:FALSE"), 1.0);
  EXPECT_EQ(both.fitness.per_target.at("LINE:items:1"), 1.0);
  EXPECT_EQ(both.fitness.per_target.at("STATUS:GET:/items/{id}:404"), 1.0);
  EXPECT_EQ(both.fitness.per_target.at("STATUS:GET:/items/{id}:200"), 1.0);
  double sum = 0;
  for (const auto& [id, v] : both.fitness.per_target) sum += v;
  EXPECT_DOUBLE_EQ(both.fitness.aggregate, sum);
  EXPECT_EQ(engine.evaluations(), 3u);

  // Cached results are not re-executed.
  engine.Evaluate(both);
  EXPECT_EQ(engine.evaluations(), 3u);
}

TEST_F(EngineTest, AddingATestNeverLowersTheAggregate) {
  Load("linear-eq.json");
  SearchConfig config;
  config.budget = 100000;
  SearchEngine engine = Engine(config);
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    TestSuiteIndividual s;
    for (int k = static_cast<int>(rng.UniformInt(1, 4)); k > 0; --k) {
      s.tests.push_back({Item(4242 + rng.UniformInt(-50, 50)), nullptr});
    }
    TestSuiteIndividual bigger = s;
    bigger.tests.push_back({Item(4242 + rng.UniformInt(-50, 50)), nullptr});
    engine.Evaluate(bigger);
    engine.Evaluate(s);
    ASSERT_GE(bigger.fitness.aggregate, s.fitness.aggregate);
  }
}

TEST_F(EngineTest, ServerErrorsAreArchivedAsFaultCandidates) {
  Load("fig3.json");
  SearchConfig config;
  config.budget = 10;
  SearchEngine engine = Engine(config);
  OptionalGene size;
  size.inner = Box<Gene>(Gene(IntegerGene{-141220, INT32_MIN, INT32_MAX}));
  size.active = true;
  TestSuiteIndividual s;
  s.tests.push_back(
      {Call(HttpVerb::kGet, "/v1/media_files/{id}/file",
            {Gene(IntegerGene{99, INT64_MIN, INT64_MAX}), Gene(size)}, 0),
       nullptr});
  engine.Evaluate(s);
  const auto& entries = engine.archive().entries();
  ASSERT_TRUE(entries.contains("STATUS:GET:/v1/media_files/{id}/file:500"));
  ASSERT_TRUE(entries.contains("STATUS:GET:/v1/media_files/{id}/file:5xx"));
  EXPECT_TRUE(
      entries.at("STATUS:GET:/v1/media_files/{id}/file:500")->IsFaultCandidate());
}

// Re-runs every final test and compares the covered set with the record.
void ExpectSound(TestExecutor& executor, const SearchResult& result) {
  std::set<TargetId> recorded;
  for (const auto& t : result.tests) {
    recorded.insert(t.covered.begin(), t.covered.end());
  }
  for (const auto& t : result.tests) {
    std::vector<TargetId> query;
    for (const auto& id : t.covered) {
      if (KindOf(id) != TargetKind::kStatus) query.push_back(id);
    }
    TestResult r = executor.Execute(t.test, query, false);
    EXPECT_EQ(r.statuses, t.statuses);
    for (const auto& id : query) EXPECT_EQ(r.values[id], 1.0) << id;
  }
}

TEST_F(EngineTest, GaBeatsRandomOnASingleEquality) {
  Load("linear-eq.json");
  int ga = 0, random = 0;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    for (Algorithm algorithm : {Algorithm::kGa, Algorithm::kRandom}) {
      SearchConfig config;
      config.algorithm = algorithm;
      config.budget = 20000;
      config.rng_seed = seed;
      SearchEngine engine = Engine(config);
      SearchResult result = engine.Run();
      bool hit = engine.registry().IsCovered("BRANCH:items:0:TRUE");
      (algorithm == Algorithm::kGa ? ga : random) += hit;
      if (seed < 3) ExpectSound(*executor_, result);
    }
  }
  EXPECT_GE(ga, 28);
  EXPECT_LE(random, 5);
}

TEST_F(EngineTest, CoverageNeverDropsAcrossGenerations) {
  Load("activities.json");
  SearchConfig config;
  config.budget = 3000;
  config.rng_seed = 4;
  SearchEngine engine = Engine(config);
  size_t last = 0;
  uint64_t last_evals = 0;
  engine.Run([&](const ProgressEvent& e) {
    EXPECT_GE(e.covered, last);
    EXPECT_GE(e.evaluations, last_evals);
    last = e.covered;
    last_evals = e.evaluations;
  });
  EXPECT_LE(engine.evaluations(), config.budget + config.population_size);
}

TEST_F(EngineTest, SameSeedSameSuite) {
  Load("fig3.json");
  auto run = [&](uint64_t seed) {
    SearchConfig config;
    config.budget = 2000;
    config.rng_seed = seed;
    SearchResult result = Engine(config).Run();
    std::vector<std::vector<HttpRequestPlan>> out;
    for (const auto& t : result.tests) {
      out.push_back(Render(t.test, "/api", sim_->scenario().auth));
    }
    return out;
  };
  for (uint64_t seed : {1u, 2u, 3u}) EXPECT_EQ(run(seed), run(seed));
  EXPECT_NE(run(1), run(2));
}

TEST_F(EngineTest, CancelStopsTheSearch) {
  Load("nested-3.json");
  SearchConfig config;
  config.budget = 1000000;
  std::atomic<bool> cancel{false};
  SearchEngine engine = Engine(config);
  SearchResult result = engine.Run(
      [&](const ProgressEvent& e) {
        if (e.generation >= 3) cancel = true;
      },
      &cancel);
  EXPECT_EQ(result.stats.stop_reason, "cancelled");
  EXPECT_LT(result.stats.evaluations, 10000u);
}

}  // namespace
}  // namespace restevo
