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

// restevo: search-based test generation for REST APIs.
//
//   restevo generate --controller-url URL [--budget N] [--seed S] ...
//   restevo simulate --scenario FILE [--port P] [--disable-faults]
//   restevo replay --plan FILE [--controller-url URL]

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "restevo/driver.h"
#include "restevo/search.h"
#include "restevo/simulator.h"
#include "restevo/swagger.h"
#include "restevo/test_writer.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFaultFound = 2;
constexpr int kExitInterrupted = 130;

constexpr char kPlanFile[] = "restevo-plan.json";
constexpr char kStatsFile[] = "restevo-stats.json";
constexpr char kScriptFile[] = "restevo-tests.sh";

std::atomic<bool> interrupted{false};

void OnSignal(int) { interrupted.store(true); }

void Emit(const json& event) {
  std::cout << event.dump() << std::endl;
}

void EmitError(const std::string& message) {
  std::cerr << json{{"event", "error"}, {"message", message}}.dump()
            << std::endl;
}

struct GenerateFlags {
  std::string controller_url;
  uint64_t budget = 100000;
  uint64_t seed = 0;
  size_t population = 30;
  double crossover_prob = 0.7;
  size_t suite_cap = 50;
  std::string algorithm = "ga";
  std::string out_dir = ".";
  std::string format = "plan";
  bool quarantine_faults = false;
  std::optional<std::string> timestamp;
};

int Generate(const GenerateFlags& flags) {
  restevo::SearchConfig config;
  config.algorithm = flags.algorithm == "random" ? restevo::Algorithm::kRandom
                                                 : restevo::Algorithm::kGa;
  config.budget = flags.budget;
  config.rng_seed = flags.seed;
  config.population_size = flags.population;
  config.crossover_prob = flags.crossover_prob;
  config.suite_cap = flags.suite_cap;
  config.Validate();

  std::optional<std::string> dialect;
  if (flags.format.starts_with("script:")) {
    dialect = flags.format.substr(7);
    // Reject unknown dialects before touching the network.
    restevo::EmitScript(restevo::TestPlan{}, *dialect);
  } else if (flags.format != "plan") {
    throw restevo::PlanError(restevo::PlanError::Kind::kUnsupportedDialect,
                             "unknown format " + flags.format);
  }
  std::filesystem::create_directories(flags.out_dir);

  restevo::DriverClient driver(flags.controller_url);
  restevo::SutInfo info = driver.StartSut();
  Emit({{"event", "started"}, {"baseUrl", info.base_url}});

  int exit_code = kExitOk;
  try {
    restevo::SwaggerDoc doc =
        restevo::ParseSwagger(restevo::FetchUrl(info.swagger_json_url));
    std::vector<std::string> warnings = doc.warnings;
    std::vector<restevo::RestAction> actions =
        restevo::ExtractActions(doc, &warnings);
    for (const auto& w : warnings) Emit({{"event", "warning"}, {"message", w}});
    std::vector<restevo::AuthCredential> credentials = driver.GetAuthInfo();
    Emit({{"event", "actions"}, {"count", actions.size()},
          {"credentials", credentials.size()}});

    restevo::RemoteExecutor executor(driver, info.base_url, doc.base_path,
                                     credentials);
    restevo::SearchEngine engine(config, std::move(actions),
                                 credentials.size(), executor);
    restevo::SearchResult result = engine.Run(
        [](const restevo::ProgressEvent& e) {
          Emit({{"event", "generation"},
                {"generation", e.generation},
                {"evaluations", e.evaluations},
                {"covered", e.covered},
                {"bestFitness", e.best_fitness}});
        },
        &interrupted);

    restevo::PlanMeta meta;
    meta.controller_url = flags.controller_url;
    meta.rng_seed = flags.seed;
    meta.timestamp = flags.timestamp;
    restevo::TestPlan plan =
        restevo::BuildPlan(result.tests, doc.base_path, credentials, meta,
                           flags.quarantine_faults);
    std::filesystem::path dir(flags.out_dir);
    restevo::WritePlan(plan, (dir / kPlanFile).string());
    {
      std::ofstream stats((dir / kStatsFile).string());
      stats << json(result.stats).dump(2) << "\n";
      if (!stats) {
        throw restevo::PlanError(restevo::PlanError::Kind::kIoError,
                                 "cannot write stats report");
      }
    }
    if (dialect) {
      std::string path = (dir / kScriptFile).string();
      std::ofstream script(path);
      script << restevo::EmitScript(plan, *dialect);
      script.close();
      if (!script) {
        throw restevo::PlanError(restevo::PlanError::Kind::kIoError,
                                 "cannot write " + path);
      }
      std::filesystem::permissions(
          path,
          std::filesystem::perms::owner_exec | std::filesystem::perms::group_exec |
              std::filesystem::perms::others_exec,
          std::filesystem::perm_options::add);
    }
    Emit({{"event", "done"},
          {"plan", (dir / kPlanFile).string()},
          {"stats", result.stats}});

    if (result.stats.error) {
      EmitError(*result.stats.error);
      exit_code = kExitError;
    } else if (interrupted.load()) {
      exit_code = kExitInterrupted;
    } else if (result.stats.fault_candidates > 0) {
      exit_code = kExitFaultFound;
    }
  } catch (...) {
    try {
      driver.StopSut();
    } catch (const restevo::Error&) {
    }
    throw;
  }
  driver.StopSut();
  return exit_code;
}

int Simulate(const std::string& scenario_path, int port, bool disable_faults,
             std::optional<uint64_t> constant_seed) {
  restevo::ScenarioOptions options;
  options.disable_faults = disable_faults;
  options.constant_seed = constant_seed;
  restevo::Scenario scenario =
      restevo::LoadScenarioFile(scenario_path, options);
  std::string name = scenario.name;
  auto server =
      restevo::SimulatorServer::Start(std::move(scenario), "127.0.0.1", port);
  Emit({{"event", "listening"},
        {"controllerUrl", server->url()},
        {"port", server->port()},
        {"scenario", name}});
  while (!interrupted.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server->Stop();
  Emit({{"event", "stopped"}});
  return kExitOk;
}

int Replay(const std::string& plan_path,
           std::optional<std::string> controller_url) {
  restevo::TestPlan plan = restevo::ReadPlan(plan_path);
  restevo::ReplayReport report = restevo::ReplayPlan(
      plan, controller_url.value_or(plan.meta.controller_url));
  for (const auto& entry : json(report)) {
    json event = entry;
    event["event"] = "test";
    Emit(event);
  }
  Emit({{"event", "replayed"},
        {"tests", report.tests.size()},
        {"failed", report.FailedCount()}});
  return report.AllPassed() ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"restevo: search-based test generation for REST APIs"};
  app.require_subcommand(1);

  GenerateFlags gen;
  CLI::App* generate =
      app.add_subcommand("generate", "evolve a test suite against a SUT");
  generate->add_option("--controller-url", gen.controller_url,
                       "controller base URL")
      ->required();
  generate->add_option("--budget", gen.budget, "executed tests")
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--population", gen.population, "population size")
      ->check(CLI::Range(2, 100000));
  generate->add_option("--crossover-prob", gen.crossover_prob)
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--suite-cap", gen.suite_cap, "max tests per suite")
      ->check(CLI::PositiveNumber);
  generate->add_option("--algorithm", gen.algorithm)
      ->check(CLI::IsMember({"ga", "random"}));
  generate->add_option("--out-dir", gen.out_dir);
  generate->add_option("--format", gen.format, "plan or script:<dialect>");
  generate->add_flag("--quarantine-faults", gen.quarantine_faults,
                     "leave 5xx tests out of the plan");
  generate->add_option("--timestamp", gen.timestamp,
                       "recorded in the plan metadata");

  std::string scenario_path;
  int port = 0;
  bool disable_faults = false;
  std::optional<uint64_t> constant_seed;
  CLI::App* simulate =
      app.add_subcommand("simulate", "serve a scenario as a fake SUT");
  simulate->add_option("--scenario", scenario_path)
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--port", port)->check(CLI::Range(0, 65535));
  simulate->add_flag("--disable-faults", disable_faults);
  simulate->add_option("--constant-seed", constant_seed);

  std::string plan_path;
  std::optional<std::string> replay_url;
  CLI::App* replay =
      app.add_subcommand("replay", "re-run a plan and compare statuses");
  replay->add_option("--plan", plan_path)->required();
  replay->add_option("--controller-url", replay_url);

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  try {
    if (*generate) return Generate(gen);
    if (*simulate) {
      return Simulate(scenario_path, port, disable_faults, constant_seed);
    }
    if (*replay) return Replay(plan_path, replay_url);
  } catch (const restevo::Error& e) {
    EmitError(e.what());
    return kExitError;
  } catch (const std::exception& e) {
    EmitError(e.what());
    return kExitError;
  }
  return kExitError;
}
