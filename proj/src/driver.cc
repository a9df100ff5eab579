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

#include "restevo/driver.h"

#include <regex>
#include <utility>

#include "httplib.h"

namespace restevo {

void to_json(nlohmann::json& j, const SutInfo& info) {
  j = nlohmann::json{{"baseUrl", info.base_url},
                     {"isRunning", info.is_running},
                     {"swaggerJsonUrl", info.swagger_json_url}};
}

void from_json(const nlohmann::json& j, SutInfo& info) {
  j.at("baseUrl").get_to(info.base_url);
  j.at("isRunning").get_to(info.is_running);
  j.at("swaggerJsonUrl").get_to(info.swagger_json_url);
}

void to_json(nlohmann::json& j, const RunSutRequest& r) {
  j = nlohmann::json{{"reset", r.reset}, {"run", r.run}};
}

void from_json(const nlohmann::json& j, RunSutRequest& r) {
  j.at("run").get_to(r.run);
  r.reset = j.value("reset", false);
}

void to_json(nlohmann::json& j, const TargetInfoDto& t) {
  j = nlohmann::json{{"id", t.id}, {"value", t.value}};
  if (t.description) j["description"] = *t.description;
}

void from_json(const nlohmann::json& j, TargetInfoDto& t) {
  j.at("id").get_to(t.id);
  j.at("value").get_to(t.value);
  if (auto it = j.find("description"); it != j.end() && it->is_string()) {
    t.description = it->get<std::string>();
  } else {
    t.description.reset();
  }
}

void to_json(nlohmann::json& j, const ControllerErrorDto& e) {
  j = nlohmann::json{{"error", e.error}, {"message", e.message}};
}

void from_json(const nlohmann::json& j, ControllerErrorDto& e) {
  j.at("error").get_to(e.error);
  e.message = j.value("message", "");
}

UrlParts SplitUrl(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/?#]+)([^#]*)$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw DriverError(DriverError::Kind::kProtocolError,
                      "not an absolute http URL: " + url);
  }
  UrlParts parts{m[1].str(), m[2].str()};
  if (parts.target.empty()) parts.target = "/";
  return parts;
}

namespace {

std::unique_ptr<httplib::Client> MakeClient(const std::string& origin,
                                            std::chrono::milliseconds timeout) {
  auto client = std::make_unique<httplib::Client>(origin);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  client->set_keep_alive(true);
  client->set_url_encode(false);
  return client;
}

std::string ErrorName(httplib::Error e) { return httplib::to_string(e); }

}  // namespace

DriverClient::DriverClient(const std::string& controller_url,
                           std::chrono::milliseconds timeout)
    : controller_url_(SplitUrl(controller_url).origin),
      client_(MakeClient(controller_url_, timeout)) {}

DriverClient::DriverClient(DriverClient&&) noexcept = default;
DriverClient& DriverClient::operator=(DriverClient&&) noexcept = default;
DriverClient::~DriverClient() = default;

nlohmann::json DriverClient::Call(const std::string& method,
                                  const std::string& target,
                                  const std::optional<nlohmann::json>& body) {
  httplib::Result result =
      method == "GET"
          ? client_->Get(target)
          : client_->Post(target, body ? body->dump() : std::string("{}"),
                          "application/json");
  if (!result) {
    throw DriverError(DriverError::Kind::kControllerUnreachable,
                      "controller " + controller_url_ + target + ": " +
                          ErrorName(result.error()));
  }
  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw DriverError(DriverError::Kind::kProtocolError,
                      "controller returned non-JSON body for " + target);
  }
  if (result->status / 100 == 2) return payload;

  ControllerErrorDto error;
  try {
    error = payload.get<ControllerErrorDto>();
  } catch (const nlohmann::json::exception&) {
    error.error = "Unknown";
  }
  std::string what = target + " -> " + std::to_string(result->status) + " " +
                     error.error + ": " + error.message;
  if (error.error == "SutNotRunning") {
    throw DriverError(DriverError::Kind::kSutNotRunning, what);
  }
  if (error.error == "SutFailedToStart") {
    throw DriverError(DriverError::Kind::kSutFailedToStart, what);
  }
  throw DriverError(DriverError::Kind::kProtocolError, what);
}

SutInfo DriverClient::RunSut(bool run, bool reset) {
  nlohmann::json body = RunSutRequest{run, reset};
  try {
    return Call("POST", kRunSutRoute, body).get<SutInfo>();
  } catch (const nlohmann::json::exception& e) {
    throw DriverError(DriverError::Kind::kProtocolError, e.what());
  }
}

SutInfo DriverClient::StartSut() {
  try {
    return RunSut(true, false);
  } catch (const DriverError& e) {
    if (e.kind() != DriverError::Kind::kControllerUnreachable) throw;
  }
  return RunSut(true, false);
}

void DriverClient::StopSut() { RunSut(false, false); }

void DriverClient::ResetState() { RunSut(true, true); }

SutInfo DriverClient::GetSutInfo() {
  try {
    return Call("GET", kInfoSutRoute, std::nullopt).get<SutInfo>();
  } catch (const nlohmann::json::exception& e) {
    throw DriverError(DriverError::Kind::kProtocolError, e.what());
  }
}

std::vector<AuthCredential> DriverClient::GetAuthInfo() {
  try {
    return Call("GET", kAuthInfoRoute, std::nullopt)
        .at("credentials")
        .get<std::vector<AuthCredential>>();
  } catch (const nlohmann::json::exception& e) {
    throw DriverError(DriverError::Kind::kProtocolError, e.what());
  }
}

void DriverClient::NewTestWindow() {
  Call("POST", kNewTestRoute, nlohmann::json::object());
}

std::vector<TargetInfoDto> DriverClient::FetchTargetInfos(
    std::span<const TargetId> ids, bool new_discoveries) {
  std::vector<TargetInfoDto> out;
  if (ids.empty() && !new_discoveries) return out;
  size_t offset = 0;
  bool first = true;
  while (first || offset < ids.size()) {
    size_t end = std::min(ids.size(), offset + kMaxTargetIdsPerQuery);
    std::string query = std::string(kTargetsRoute) + "?ids=";
    for (size_t i = offset; i < end; ++i) {
      if (i > offset) query.push_back(',');
      query += PercentEncode(ids[i]);
    }
    // Discoveries are window-scoped, so asking once is enough.
    query += "&newDiscoveries=";
    query += first && new_discoveries ? "true" : "false";
    try {
      auto chunk = Call("GET", query, std::nullopt)
                       .at("targets")
                       .get<std::vector<TargetInfoDto>>();
      out.insert(out.end(), chunk.begin(), chunk.end());
    } catch (const nlohmann::json::exception& e) {
      throw DriverError(DriverError::Kind::kProtocolError, e.what());
    }
    offset = end;
    first = false;
  }
  return out;
}

HttpCaller::HttpCaller(const std::string& base_url,
                       std::chrono::milliseconds timeout)
    : client_(MakeClient(SplitUrl(base_url).origin, timeout)) {}

HttpCaller::HttpCaller(HttpCaller&&) noexcept = default;
HttpCaller& HttpCaller::operator=(HttpCaller&&) noexcept = default;
HttpCaller::~HttpCaller() = default;

HttpResponse HttpCaller::Send(const HttpRequestPlan& request) {
  httplib::Request req;
  req.method = request.verb;
  req.path = request.target;
  for (const auto& h : request.headers) {
    req.headers.emplace(h.name, h.value);
  }
  if (request.body) req.body = *request.body;
  if (!req.has_header("Accept")) req.headers.emplace("Accept", "*/*");
  httplib::Result result = client_->send(req);
  if (!result) {
    throw DriverError(DriverError::Kind::kHttpTransport,
                      request.verb + " " + request.target + ": " +
                          ErrorName(result.error()));
  }
  return HttpResponse{result->status, result->body};
}

std::string FetchUrl(const std::string& url,
                     std::chrono::milliseconds timeout) {
  UrlParts parts = SplitUrl(url);
  auto client = MakeClient(parts.origin, timeout);
  httplib::Result result = client->Get(parts.target);
  if (!result) {
    throw DriverError(DriverError::Kind::kControllerUnreachable,
                      "GET " + url + ": " + ErrorName(result.error()));
  }
  if (result->status / 100 != 2) {
    throw DriverError(DriverError::Kind::kProtocolError,
                      "GET " + url + " -> " + std::to_string(result->status));
  }
  return result->body;
}

}  // namespace restevo
