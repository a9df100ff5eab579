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

#include "restevo/simulator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <array>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>
#include <utility>

#include "httplib.h"
#include "restevo/rng.h"

namespace restevo {

namespace {

// Distance charged when a numeric or string operand is missing or has the
// wrong type. Large, but finite so that the heuristic stays positive.
constexpr double kMissingOperandDistance = 1e300;

[[noreturn]] void Invalid(const std::string& what) {
  throw SimulatorError(SimulatorError::Kind::kInvalidScenario, what);
}

Operand ParseOperand(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string()) Invalid(where + ": operand must be a string");
  std::string text = j.get<std::string>();
  size_t sep = text.find(':');
  std::string location = text.substr(0, sep);
  Operand op;
  op.name = sep == std::string::npos ? "" : text.substr(sep + 1);
  if (location == "path") {
    op.location = ParamLocation::kPath;
  } else if (location == "query") {
    op.location = ParamLocation::kQuery;
  } else if (location == "header") {
    op.location = ParamLocation::kHeader;
  } else if (location == "body") {
    op.location = ParamLocation::kBody;
  } else {
    Invalid(where + ": unknown operand location '" + location + "'");
  }
  if (op.location != ParamLocation::kBody && op.name.empty()) {
    Invalid(where + ": operand needs a name");
  }
  return op;
}

ResponseSpec ParseResponse(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("status") || !j["status"].is_number()) {
    Invalid(where + ": response needs a numeric status");
  }
  ResponseSpec r;
  r.status = j["status"].get<int>();
  if (r.status < 100 || r.status > 599) Invalid(where + ": bad status");
  r.body = j.value("body", nlohmann::json());
  return r;
}

std::optional<PredicateKind> ParsePredicateKind(const std::string& name) {
  for (PredicateKind kind :
       {PredicateKind::kAuth, PredicateKind::kEq, PredicateKind::kLt,
        PredicateKind::kRange, PredicateKind::kStrEq, PredicateKind::kPresent,
        PredicateKind::kExists, PredicateKind::kValidDate}) {
    if (PredicateKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

nlohmann::json ResolveConstant(const nlohmann::json& value, Rng& rng) {
  if (value.is_string() && value.get<std::string>() == "$random") {
    return rng.UniformInt(INT32_MIN, INT32_MAX);
  }
  return value;
}

Predicate ParsePredicate(const nlohmann::json& j, const std::string& where,
                         const ScenarioOptions& options, Rng& constants) {
  if (!j.is_object()) Invalid(where + ": step must be an object");
  auto kind = ParsePredicateKind(j.value("kind", ""));
  if (!kind) Invalid(where + ": unknown step kind " + j.value("kind", ""));
  Predicate p;
  p.kind = *kind;
  if (p.kind != PredicateKind::kAuth) {
    if (!j.contains("operand")) Invalid(where + ": missing operand");
    p.operand = ParseOperand(j["operand"], where);
  }
  switch (p.kind) {
    case PredicateKind::kEq:
    case PredicateKind::kLt:
      p.value = ResolveConstant(j.value("value", nlohmann::json()), constants);
      if (!p.value.is_number()) Invalid(where + ": value must be numeric");
      break;
    case PredicateKind::kStrEq:
      p.value = j.value("value", nlohmann::json());
      if (!p.value.is_string()) Invalid(where + ": value must be a string");
      break;
    case PredicateKind::kRange:
      if (!j.contains("min") || !j.contains("max") || !j["min"].is_number() ||
          !j["max"].is_number()) {
        Invalid(where + ": range needs numeric min and max");
      }
      p.lo = j["min"].get<double>();
      p.hi = j["max"].get<double>();
      if (p.lo > p.hi) Invalid(where + ": min exceeds max");
      break;
    default:
      break;
  }
  if (j.contains("onFalse")) {
    p.on_false = ParseResponse(j["onFalse"], where + ".onFalse");
  } else if (p.kind == PredicateKind::kAuth) {
    p.on_false = ResponseSpec{401, {{"error", "unauthorized"}}};
  } else if (p.kind == PredicateKind::kExists) {
    p.on_false = ResponseSpec{404, {{"error", "not found"}}};
  }
  if (j.contains("fault")) {
    if (p.kind != PredicateKind::kExists) {
      Invalid(where + ": faults attach to exists steps only");
    }
    const auto& f = j["fault"];
    FaultSpec fault;
    fault.enabled = f.value("enabled", true);
    fault.non_fault = f.value("nonFault", false);
    fault.status = f.value("status", 500);
    if (options.disable_faults && !fault.non_fault) fault.enabled = false;
    p.fault = fault;
  }
  return p;
}

bool MatchesAction(const SwaggerDoc& doc, HttpVerb verb,
                   const std::string& path) {
  auto it = doc.paths.find(path);
  return it != doc.paths.end() && it->second.contains(verb);
}

std::vector<std::string> SplitPath(std::string_view path) {
  std::vector<std::string> out;
  size_t start = 0;
  while (start <= path.size()) {
    size_t end = path.find('/', start);
    if (end == std::string_view::npos) end = path.size();
    out.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<long double> ParseNumber(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string s(text);
  char* end = nullptr;
  long double value = std::strtold(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::map<std::string, std::string> ParseQuery(std::string_view query) {
  std::map<std::string, std::string> out;
  size_t start = 0;
  while (start < query.size()) {
    size_t end = query.find('&', start);
    if (end == std::string_view::npos) end = query.size();
    std::string_view pair = query.substr(start, end - start);
    size_t eq = pair.find('=');
    std::string key = PercentDecode(pair.substr(0, eq), true);
    std::string value =
        eq == std::string_view::npos ? "" : PercentDecode(pair.substr(eq + 1), true);
    out.emplace(std::move(key), std::move(value));
    start = end + 1;
  }
  return out;
}

// The view of one request that predicates read from.
struct RequestView {
  std::map<std::string, std::string> path;
  std::map<std::string, std::string> query;
  const std::vector<Header>* headers = nullptr;
  std::optional<nlohmann::json> body;

  // Text form of the operand, or nullopt when absent. JSON strings yield
  // their content; other JSON values yield their serialization.
  std::optional<std::string> Text(const Operand& op) const {
    switch (op.location) {
      case ParamLocation::kPath: {
        auto it = path.find(op.name);
        if (it == path.end()) return std::nullopt;
        return it->second;
      }
      case ParamLocation::kQuery: {
        auto it = query.find(op.name);
        if (it == query.end()) return std::nullopt;
        return it->second;
      }
      case ParamLocation::kHeader:
        for (const auto& h : *headers) {
          if (EqualsIgnoreCase(h.name, op.name)) return h.value;
        }
        return std::nullopt;
      case ParamLocation::kBody: {
        const nlohmann::json* node = Json(op);
        if (node == nullptr) return std::nullopt;
        if (node->is_string()) return node->get<std::string>();
        return node->dump();
      }
    }
    return std::nullopt;
  }

  const nlohmann::json* Json(const Operand& op) const {
    if (!body) return nullptr;
    const nlohmann::json* node = &*body;
    std::string_view rest = op.name;
    while (!rest.empty()) {
      size_t dot = rest.find('.');
      std::string key(rest.substr(0, dot));
      if (!node->is_object()) return nullptr;
      auto it = node->find(key);
      if (it == node->end()) return nullptr;
      node = &*it;
      rest = dot == std::string_view::npos ? "" : rest.substr(dot + 1);
    }
    if (node->is_null()) return nullptr;
    return node;
  }

  std::optional<long double> Number(const Operand& op) const {
    if (op.location == ParamLocation::kBody) {
      const nlohmann::json* node = Json(op);
      if (node == nullptr) return std::nullopt;
      if (node->is_number()) return node->get<long double>();
      if (node->is_string()) return ParseNumber(node->get<std::string>());
      return std::nullopt;
    }
    auto text = Text(op);
    if (!text) return std::nullopt;
    return ParseNumber(*text);
  }
};

struct Distances {
  double to_true;
  double to_false;
  bool outcome() const { return to_true == 0; }
};

Distances Binary(bool holds) {
  return holds ? Distances{0, 1} : Distances{1, 0};
}

double AsDistance(long double d) {
  return static_cast<double>(std::min<long double>(d, kMissingOperandDistance));
}

std::string StoreKey(const RequestView& view, const Operand& op) {
  auto text = view.Text(op);
  return text.value_or("");
}

}  // namespace

std::string_view PredicateKindName(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::kAuth:
      return "auth";
    case PredicateKind::kEq:
      return "eq";
    case PredicateKind::kLt:
      return "lt";
    case PredicateKind::kRange:
      return "range";
    case PredicateKind::kStrEq:
      return "streq";
    case PredicateKind::kPresent:
      return "present";
    case PredicateKind::kExists:
      return "exists";
    case PredicateKind::kValidDate:
      return "validDate";
  }
  return "eq";
}

size_t EditDistance(std::string_view a, std::string_view b) {
  std::vector<size_t> row(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diagonal = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t above = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

int DateTimeDefects(std::string_view text) {
  static const std::regex kShape(
      R"(^(-?\d{1,9})-(-?\d{1,9})-(-?\d{1,9})T(-?\d{1,9}):(-?\d{1,9}):(-?\d{1,9})$)");
  constexpr int kMalformed = 7;
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, kShape)) return kMalformed;
  std::array<long, 6> f{};
  for (size_t i = 0; i < f.size(); ++i) f[i] = std::stol(m[i + 1].str());
  long year = f[0], month = f[1], day = f[2];
  int defects = 0;
  if (year < 0 || year > 9999) ++defects;
  bool month_ok = month >= 1 && month <= 12;
  if (!month_ok) ++defects;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30,
                                  31, 31, 30, 31, 30, 31};
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  long days = month_ok ? kDays[month - 1] + (month == 2 && leap ? 1 : 0) : 31;
  if (day < 1 || day > days) ++defects;
  if (f[3] < 0 || f[3] > 23) ++defects;
  if (f[4] < 0 || f[4] > 59) ++defects;
  if (f[5] < 0 || f[5] > 59) ++defects;
  // Unpadded fields are malformed even when in range.
  if (defects == 0 && text.size() != 19) return 1;
  return defects;
}

bool IsValidDateTime(std::string_view text) {
  return DateTimeDefects(text) == 0;
}

Scenario LoadScenario(std::string_view json_text,
                      const ScenarioOptions& options) {
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    Invalid(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) Invalid("scenario must be an object");

  Scenario s;
  s.name = root.value("name", "");
  if (s.name.empty()) Invalid("scenario needs a name");
  if (!root.contains("swagger")) Invalid("scenario needs a swagger document");
  s.swagger = root["swagger"];
  try {
    s.doc = ParseSwagger(s.swagger.dump());
  } catch (const SwaggerError& e) {
    Invalid(std::string("embedded swagger: ") + e.what());
  }

  if (auto it = root.find("auth"); it != root.end()) {
    try {
      s.auth = nlohmann::json::parse(it->dump()).get<std::vector<AuthCredential>>();
    } catch (const nlohmann::json::exception& e) {
      Invalid(std::string("auth: ") + e.what());
    }
  }
  if (auto it = root.find("store"); it != root.end()) {
    if (!it->is_object()) Invalid("store must be an object");
    for (const auto& [key, record] : it->items()) {
      s.initial_store[key] = nlohmann::json::parse(record.dump());
    }
  }

  uint64_t seed = options.constant_seed.value_or(root.value("constantSeed", 0ULL));
  Rng constants(seed);
  std::set<std::string> units;
  auto endpoints = root.find("endpoints");
  if (endpoints == root.end() || !endpoints->is_array()) {
    Invalid("scenario needs an endpoints array");
  }
  for (const auto& oj : *endpoints) {
    nlohmann::json j = nlohmann::json::parse(oj.dump());
    EndpointLogic e;
    auto verb = ParseVerb(j.value("verb", ""));
    if (!verb) Invalid("endpoint with unknown verb " + j.value("verb", ""));
    e.verb = *verb;
    e.path = j.value("path", "");
    e.unit = j.value("unit", "");
    std::string where = "endpoint " + std::string(VerbName(e.verb)) + " " + e.path;
    if (e.unit.empty() || e.unit.find(':') != std::string::npos) {
      Invalid(where + ": unit must be non-empty and free of ':'");
    }
    if (!units.insert(e.unit).second) Invalid(where + ": duplicate unit");
    if (!MatchesAction(s.doc, e.verb, e.path)) {
      Invalid(where + ": no matching action in swagger document");
    }
    if (auto steps = j.find("steps"); steps != j.end()) {
      if (!steps->is_array()) Invalid(where + ": steps must be an array");
      for (size_t i = 0; i < steps->size(); ++i) {
        e.steps.push_back(ParsePredicate((*steps)[i],
                                         where + " step " + std::to_string(i),
                                         options, constants));
      }
    }
    e.on_success = j.contains("onSuccess")
                       ? ParseResponse(j["onSuccess"], where + ".onSuccess")
                       : ResponseSpec{200, nullptr};
    if (auto effect = j.find("effect"); effect != j.end()) {
      std::string kind = effect->value("kind", "none");
      if (kind == "delete") {
        e.effect.kind = Effect::Kind::kDelete;
      } else if (kind == "upsert") {
        e.effect.kind = Effect::Kind::kUpsert;
      } else if (kind != "none") {
        Invalid(where + ": unknown effect " + kind);
      }
      if (e.effect.kind != Effect::Kind::kNone) {
        e.effect.key = ParseOperand(effect->value("key", nlohmann::json()),
                                    where + ".effect");
      }
    }
    s.endpoints.push_back(std::move(e));
  }
  return s;
}

Scenario LoadScenarioFile(const std::string& path,
                          const ScenarioOptions& options) {
  std::ifstream in(path);
  if (!in) Invalid("cannot read scenario file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return LoadScenario(buffer.str(), options);
}

std::set<TargetId> DeclaredTargets(const Scenario& scenario) {
  std::set<TargetId> out;
  for (const auto& e : scenario.endpoints) {
    for (size_t i = 0; i < e.steps.size(); ++i) {
      out.insert(LineTargetId(e.unit, static_cast<int64_t>(i)));
      out.insert(BranchTargetId(e.unit, static_cast<int64_t>(i), true));
      out.insert(BranchTargetId(e.unit, static_cast<int64_t>(i), false));
    }
    out.insert(LineTargetId(e.unit, static_cast<int64_t>(e.steps.size())));
  }
  return out;
}

Simulator::Simulator(Scenario scenario, std::string base_url)
    : scenario_(std::move(scenario)),
      base_url_(std::move(base_url)),
      store_(scenario_.initial_store) {}

void Simulator::set_base_url(std::string base_url) {
  std::lock_guard lock(mu_);
  base_url_ = std::move(base_url);
}

bool Simulator::running() const {
  std::lock_guard lock(mu_);
  return running_;
}

SutInfo Simulator::Info() const {
  std::lock_guard lock(mu_);
  if (!running_) return SutInfo{"", "", false};
  return SutInfo{base_url_, base_url_ + kSwaggerRoute, true};
}

SutInfo Simulator::Run(const RunSutRequest& request) {
  {
    std::lock_guard lock(mu_);
    if (!request.run) {
      running_ = false;
    } else if (request.reset) {
      if (!running_) {
        throw SimulatorError(SimulatorError::Kind::kSutNotRunning,
                             "cannot reset a stopped SUT");
      }
      store_ = scenario_.initial_store;
    } else if (!running_) {
      running_ = true;
      store_ = scenario_.initial_store;
      window_.clear();
      best_before_window_.clear();
    }
  }
  return Info();
}

void Simulator::RequireRunning() const {
  if (!running_) {
    throw SimulatorError(SimulatorError::Kind::kSutNotRunning,
                         "SUT is not running");
  }
}

void Simulator::NewTestWindow() {
  std::lock_guard lock(mu_);
  RequireRunning();
  for (const auto& [id, value] : window_) {
    double& best = best_before_window_[id];
    best = std::max(best, value);
  }
  window_.clear();
}

std::vector<TargetInfoDto> Simulator::ReportTargets(
    std::span<const TargetId> ids, bool new_discoveries) const {
  std::lock_guard lock(mu_);
  RequireRunning();
  std::map<TargetId, double> out;
  for (const auto& id : ids) {
    auto it = window_.find(id);
    out[id] = it == window_.end() ? 0.0 : it->second;
  }
  if (new_discoveries) {
    for (const auto& [id, value] : window_) {
      auto best = best_before_window_.find(id);
      if (best == best_before_window_.end() || value > best->second) {
        out[id] = value;
      }
    }
  }
  std::vector<TargetInfoDto> result;
  result.reserve(out.size());
  for (const auto& [id, value] : out) result.push_back({id, value, {}});
  return result;
}

std::vector<AuthCredential> Simulator::AuthInfo() const {
  return scenario_.auth;
}

void Simulator::Touch(const TargetId& id, double value) {
  double& slot = window_[id];
  slot = std::max(slot, value);
}

HttpResponse Simulator::Handle(const SimRequest& request) {
  std::lock_guard lock(mu_);
  auto respond = [](int status, const nlohmann::json& body) {
    return HttpResponse{status, body.is_null() ? "" : body.dump()};
  };
  if (!running_) return respond(503, {{"error", "SUT is not running"}});

  std::string_view target = request.target;
  size_t qmark = target.find('?');
  std::string_view raw_path = target.substr(0, qmark);
  std::string_view raw_query =
      qmark == std::string_view::npos ? "" : target.substr(qmark + 1);

  const std::string& base = scenario_.doc.base_path;
  if (!raw_path.starts_with(base)) return respond(404, {{"error", "no route"}});
  std::vector<std::string> segments = SplitPath(raw_path.substr(base.size()));

  const EndpointLogic* endpoint = nullptr;
  bool path_matched = false;
  RequestView view;
  for (const auto& e : scenario_.endpoints) {
    std::vector<std::string> pattern = SplitPath(e.path);
    if (pattern.size() != segments.size()) continue;
    std::map<std::string, std::string> captured;
    bool ok = true;
    for (size_t i = 0; i < pattern.size() && ok; ++i) {
      const std::string& p = pattern[i];
      if (p.size() > 2 && p.front() == '{' && p.back() == '}') {
        captured[p.substr(1, p.size() - 2)] = PercentDecode(segments[i]);
      } else {
        ok = p == PercentDecode(segments[i]);
      }
    }
    if (!ok) continue;
    path_matched = true;
    if (VerbName(e.verb) == request.verb ||
        (request.verb == "HEAD" && e.verb == HttpVerb::kGet)) {
      endpoint = &e;
      view.path = std::move(captured);
      break;
    }
  }
  if (endpoint == nullptr) {
    return path_matched ? respond(405, {{"error", "method not allowed"}})
                        : respond(404, {{"error", "no route"}});
  }

  view.query = ParseQuery(raw_query);
  view.headers = &request.headers;
  if (!request.body.empty()) {
    try {
      view.body = nlohmann::json::parse(request.body);
    } catch (const nlohmann::json::parse_error&) {
      return respond(400, {{"error", "malformed JSON body"}});
    }
  }

  const std::string& unit = endpoint->unit;
  std::optional<std::string> record_key;
  for (size_t i = 0; i < endpoint->steps.size(); ++i) {
    const Predicate& p = endpoint->steps[i];
    auto index = static_cast<int64_t>(i);
    Touch(LineTargetId(unit, index), 1.0);

    Distances d{0, 1};
    switch (p.kind) {
      case PredicateKind::kAuth: {
        bool ok = std::any_of(
            scenario_.auth.begin(), scenario_.auth.end(),
            [&](const AuthCredential& c) {
              return std::all_of(
                  c.headers.begin(), c.headers.end(), [&](const Header& want) {
                    return std::any_of(request.headers.begin(),
                                       request.headers.end(),
                                       [&](const Header& have) {
                                         return EqualsIgnoreCase(have.name,
                                                                 want.name) &&
                                                have.value == want.value;
                                       });
                  });
            });
        d = Binary(ok);
        break;
      }
      case PredicateKind::kEq:
      case PredicateKind::kLt:
      case PredicateKind::kRange: {
        auto a = view.Number(p.operand);
        if (!a) {
          d = {kMissingOperandDistance, 0};
          break;
        }
        if (p.kind == PredicateKind::kEq) {
          long double b = p.value.get<long double>();
          d = {AsDistance(std::fabs(*a - b)), *a == b ? 1.0 : 0.0};
        } else if (p.kind == PredicateKind::kLt) {
          long double b = p.value.get<long double>();
          d = {AsDistance(std::max<long double>(0, *a - b + 1)),
               AsDistance(std::max<long double>(0, b - *a))};
        } else {
          long double lo = p.lo, hi = p.hi;
          if (*a < lo) {
            d = {AsDistance(lo - *a), 0};
          } else if (*a > hi) {
            d = {AsDistance(*a - hi), 0};
          } else {
            d = {0, AsDistance(std::min(*a - lo + 1, hi - *a + 1))};
          }
        }
        break;
      }
      case PredicateKind::kStrEq: {
        auto a = view.Text(p.operand);
        if (!a) {
          d = {kMissingOperandDistance, 0};
          break;
        }
        std::string expected = p.value.get<std::string>();
        auto distance = static_cast<double>(EditDistance(*a, expected));
        d = {distance, distance == 0 ? 1.0 : 0.0};
        break;
      }
      case PredicateKind::kPresent:
        d = Binary(view.Text(p.operand).has_value());
        break;
      case PredicateKind::kExists: {
        std::string key = StoreKey(view, p.operand);
        d = Binary(store_.contains(key));
        if (d.outcome()) record_key = key;
        break;
      }
      case PredicateKind::kValidDate: {
        auto a = view.Text(p.operand);
        if (!a) {
          d = {kMissingOperandDistance, 0};
          break;
        }
        int defects = DateTimeDefects(*a);
        d = {static_cast<double>(defects), defects == 0 ? 1.0 : 0.0};
        break;
      }
    }
    Touch(BranchTargetId(unit, index, true), BranchDistanceHeuristic(d.to_true));
    Touch(BranchTargetId(unit, index, false),
          BranchDistanceHeuristic(d.to_false));
    if (d.outcome()) continue;
    if (p.fault && p.fault->enabled) return HttpResponse{p.fault->status, ""};
    if (p.on_false) return respond(p.on_false->status, p.on_false->body);
  }
  Touch(LineTargetId(unit, static_cast<int64_t>(endpoint->steps.size())), 1.0);

  nlohmann::json body = endpoint->on_success.body;
  if (body.is_string() && body.get<std::string>() == "$record") {
    auto it = record_key ? store_.find(*record_key) : store_.end();
    body = it == store_.end() ? nlohmann::json() : it->second;
  } else if (body.is_string() && body.get<std::string>() == "$body") {
    body = view.body.value_or(nlohmann::json());
  }
  switch (endpoint->effect.kind) {
    case Effect::Kind::kNone:
      break;
    case Effect::Kind::kDelete:
      store_.erase(StoreKey(view, endpoint->effect.key));
      break;
    case Effect::Kind::kUpsert:
      store_[StoreKey(view, endpoint->effect.key)] =
          view.body.value_or(nlohmann::json::object());
      break;
  }
  return respond(endpoint->on_success.status, body);
}

struct SimulatorServer::Impl {
  httplib::Server server;
  std::thread thread;
};

namespace {

void SendJson(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, const std::string& error,
               const std::string& message) {
  SendJson(res, status, ControllerErrorDto{error, message});
}

std::string RawQuery(const httplib::Request& req) {
  size_t qmark = req.target.find('?');
  return qmark == std::string::npos ? "" : req.target.substr(qmark + 1);
}

template <typename Fn>
void GuardRunning(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const SimulatorError& e) {
    if (e.kind() != SimulatorError::Kind::kSutNotRunning) throw;
    SendError(res, 409, "SutNotRunning", e.what());
  }
}

}  // namespace

std::unique_ptr<SimulatorServer> SimulatorServer::Start(Scenario scenario,
                                                        const std::string& host,
                                                        int port) {
  std::unique_ptr<SimulatorServer> self(new SimulatorServer());
  self->impl_ = std::make_unique<Impl>();
  self->simulator_ = std::make_unique<Simulator>(std::move(scenario));
  self->host_ = host;
  Simulator* sim = self->simulator_.get();
  httplib::Server& server = self->impl_->server;
  server.set_keep_alive_max_count(1u << 30);
  // No SO_REUSEPORT: a port that is already taken must fail to bind.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
               reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  server.Get(kInfoSutRoute, [sim](const httplib::Request&, httplib::Response& res) {
    SendJson(res, 200, sim->Info());
  });
  server.Post(kRunSutRoute, [sim](const httplib::Request& req,
                                  httplib::Response& res) {
    RunSutRequest run;
    try {
      run = nlohmann::json::parse(req.body).get<RunSutRequest>();
    } catch (const nlohmann::json::exception& e) {
      SendError(res, 400, "BadRequest", e.what());
      return;
    }
    GuardRunning(res, [&] { SendJson(res, 200, sim->Run(run)); });
  });
  server.Get(kTargetsRoute, [sim](const httplib::Request& req,
                                  httplib::Response& res) {
    std::vector<TargetId> ids;
    bool new_discoveries = false;
    std::string query = RawQuery(req);
    size_t start = 0;
    while (start < query.size()) {
      size_t end = query.find('&', start);
      if (end == std::string::npos) end = query.size();
      std::string pair = query.substr(start, end - start);
      size_t eq = pair.find('=');
      std::string key = pair.substr(0, eq);
      std::string value = eq == std::string::npos ? "" : pair.substr(eq + 1);
      if (key == "ids") {
        size_t pos = 0;
        while (pos < value.size()) {
          size_t comma = value.find(',', pos);
          if (comma == std::string::npos) comma = value.size();
          if (comma > pos) {
            ids.push_back(PercentDecode(value.substr(pos, comma - pos)));
          }
          pos = comma + 1;
        }
      } else if (key == "newDiscoveries") {
        new_discoveries = value == "true";
      }
      start = end + 1;
    }
    GuardRunning(res, [&] {
      SendJson(res, 200,
               nlohmann::json{{"targets", sim->ReportTargets(ids, new_discoveries)}});
    });
  });
  server.Post(kNewTestRoute, [sim](const httplib::Request&,
                                   httplib::Response& res) {
    GuardRunning(res, [&] {
      sim->NewTestWindow();
      SendJson(res, 200, nlohmann::json{{"ok", true}});
    });
  });
  server.Get(kAuthInfoRoute, [sim](const httplib::Request&,
                                   httplib::Response& res) {
    SendJson(res, 200, nlohmann::json{{"credentials", sim->AuthInfo()}});
  });
  server.Get(kSwaggerRoute, [sim](const httplib::Request&,
                                  httplib::Response& res) {
    res.status = 200;
    res.set_content(sim->scenario().swagger.dump(), "application/json");
  });
  // Everything else is the API. Controller routes were registered first and
  // take precedence; HEAD requests are served by the GET handler.
  auto api = [sim](const httplib::Request& req, httplib::Response& res) {
    SimRequest sim_req;
    sim_req.verb = req.method;
    sim_req.target = req.target;
    for (const auto& [name, value] : req.headers) {
      sim_req.headers.push_back({name, value});
    }
    sim_req.body = req.body;
    HttpResponse out = sim->Handle(sim_req);
    res.status = out.status;
    if (!out.body.empty()) res.set_content(out.body, "application/json");
  };
  const std::string any = ".*";
  server.Get(any, api);
  server.Post(any, api);
  server.Put(any, api);
  server.Patch(any, api);
  server.Delete(any, api);
  server.Options(any, api);

  int bound = port == 0 ? server.bind_to_any_port(host)
                        : (server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw SimulatorError(SimulatorError::Kind::kPortBindFailure,
                         "cannot bind " + host + ":" + std::to_string(port));
  }
  self->port_ = bound;
  sim->set_base_url(self->url());
  self->impl_->thread = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return self;
}

std::string SimulatorServer::url() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void SimulatorServer::Stop() {
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

SimulatorServer::~SimulatorServer() { Stop(); }

}  // namespace restevo
