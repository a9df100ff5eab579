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

#ifndef RESTEVO_SIMULATOR_H_
#define RESTEVO_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "restevo/driver.h"
#include "restevo/error.h"
#include "restevo/http.h"
#include "restevo/swagger.h"
#include "restevo/targets.h"

namespace restevo {

// A fake REST service described declaratively. See docs/scenario-format.md.

struct ResponseSpec {
  int status = 200;
  // Null means an empty body. The strings "$record" and "$body" expand to the
  // looked-up store record and the request body.
  nlohmann::json body;
};

struct Operand {
  ParamLocation location = ParamLocation::kPath;
  // For body operands a dot-separated field path; empty means the whole body.
  std::string name;
};

enum class PredicateKind {
  kAuth,       // a configured credential is present; d in {0, 1}
  kEq,         // numeric a == b; d = |a - b|
  kLt,         // numeric a < b; d = max(0, a - b + 1)
  kRange,      // numeric lo <= a <= hi; d = distance to the interval
  kStrEq,      // string equality; d = edit distance
  kPresent,    // operand supplied; d in {0, 1}
  kExists,     // operand is a key of the store; d in {0, 1}
  kValidDate,  // operand is a valid YYYY-MM-DDThh:mm:ss; d = DateTimeDefects
};

std::string_view PredicateKindName(PredicateKind kind);

// An unchecked store lookup: when the key is missing the endpoint fails with
// `status` (and an empty body) instead of the declared not-found response.
struct FaultSpec {
  bool enabled = true;
  // Marks a 5xx that is the correct behaviour, e.g. a failing downstream
  // service. Such faults are unaffected by disabling faults.
  bool non_fault = false;
  int status = 500;
};

struct Predicate {
  PredicateKind kind = PredicateKind::kEq;
  Operand operand;
  nlohmann::json value;
  double lo = 0;
  double hi = 0;
  // Response when the predicate is false; absent means fall through.
  std::optional<ResponseSpec> on_false;
  std::optional<FaultSpec> fault;
};

struct Effect {
  enum class Kind { kNone, kDelete, kUpsert };
  Kind kind = Kind::kNone;
  Operand key;
};

// Targets of an endpoint with unit `u` and n steps: LINE:u:i and
// BRANCH:u:i:{TRUE,FALSE} for each step i, plus LINE:u:n on success.
struct EndpointLogic {
  HttpVerb verb = HttpVerb::kGet;
  std::string path;
  std::string unit;
  std::vector<Predicate> steps;
  ResponseSpec on_success;
  Effect effect;
};

struct Scenario {
  std::string name;
  nlohmann::ordered_json swagger;
  SwaggerDoc doc;
  std::vector<EndpointLogic> endpoints;
  std::map<std::string, nlohmann::json> initial_store;
  std::vector<AuthCredential> auth;
};

struct ScenarioOptions {
  // Overrides the scenario's "constantSeed" used to draw "$random" values.
  std::optional<uint64_t> constant_seed;
  // Turns every fault that is not flagged nonFault into its declared
  // not-found response.
  bool disable_faults = false;
};

class SimulatorError : public Error {
 public:
  enum class Kind { kInvalidScenario, kPortBindFailure, kSutNotRunning };
  SimulatorError(Kind kind, const std::string& what)
      : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Throws SimulatorError(kInvalidScenario) on schema violations, including an
// endpoint that has no matching action in the embedded swagger document.
Scenario LoadScenario(std::string_view json_text,
                      const ScenarioOptions& options = {});
Scenario LoadScenarioFile(const std::string& path,
                          const ScenarioOptions& options = {});

// Every LINE and BRANCH target the scenario can report.
std::set<TargetId> DeclaredTargets(const Scenario& scenario);

// Levenshtein distance.
size_t EditDistance(std::string_view a, std::string_view b);

bool IsValidDateTime(std::string_view text);

// 0 for a valid YYYY-MM-DDThh:mm:ss. Otherwise the number of out-of-range
// components when the text has the shape Y-M-DTh:m:s with signed integer
// fields, and 7 when it does not.
int DateTimeDefects(std::string_view text);

struct SimRequest {
  std::string verb;
  // Raw path and query as sent on the request line.
  std::string target;
  std::vector<Header> headers;
  std::string body;
};

// The simulated SUT and its controller state. All members are safe to call
// concurrently; a single mutex serializes them.
class Simulator {
 public:
  explicit Simulator(Scenario scenario, std::string base_url = "");

  SutInfo Info() const;
  // run && !reset: start (a fresh start clears the store and all coverage
  // history; starting a running SUT is a no-op). run && reset: restore the
  // initial store. !run: stop.
  SutInfo Run(const RunSutRequest& request);
  void NewTestWindow();
  // Requested ids get their value in the current window (0 if untouched).
  // With `new_discoveries`, also every target whose window value beats the
  // best value of all earlier windows since start.
  std::vector<TargetInfoDto> ReportTargets(std::span<const TargetId> ids,
                                           bool new_discoveries) const;
  std::vector<AuthCredential> AuthInfo() const;
  HttpResponse Handle(const SimRequest& request);

  const Scenario& scenario() const { return scenario_; }
  bool running() const;
  void set_base_url(std::string base_url);

 private:
  void Touch(const TargetId& id, double value);
  void RequireRunning() const;

  Scenario scenario_;
  mutable std::mutex mu_;
  std::string base_url_;
  bool running_ = false;
  std::map<std::string, nlohmann::json> store_;
  std::map<TargetId, double> window_;
  std::map<TargetId, double> best_before_window_;
};

// Serves the scenario's API and the controller routes on one port.
class SimulatorServer {
 public:
  // Binds before returning; port 0 picks an ephemeral port.
  static std::unique_ptr<SimulatorServer> Start(
      Scenario scenario, const std::string& host = "127.0.0.1", int port = 0);
  ~SimulatorServer();
  SimulatorServer(const SimulatorServer&) = delete;
  SimulatorServer& operator=(const SimulatorServer&) = delete;

  int port() const { return port_; }
  // http://host:port; this is the controller URL and the SUT base URL.
  std::string url() const;
  Simulator& simulator() { return *simulator_; }
  void Stop();

 private:
  SimulatorServer() = default;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::unique_ptr<Simulator> simulator_;
  std::string host_;
  int port_ = 0;
};

}  // namespace restevo

#endif  // RESTEVO_SIMULATOR_H_
