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

#ifndef RESTEVO_DRIVER_H_
#define RESTEVO_DRIVER_H_

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "restevo/error.h"
#include "restevo/http.h"
#include "restevo/targets.h"

namespace httplib {
class Client;
}  // namespace httplib

namespace restevo {

// Controller routes. Request and response bodies are JSON objects whose keys
// are serialized in sorted order.
inline constexpr char kInfoSutRoute[] = "/controller/infoSUT";
inline constexpr char kRunSutRoute[] = "/controller/runSUT";
inline constexpr char kTargetsRoute[] = "/controller/targets";
inline constexpr char kNewTestRoute[] = "/controller/newTest";
inline constexpr char kAuthInfoRoute[] = "/controller/authInfo";
inline constexpr char kSwaggerRoute[] = "/swagger.json";

inline constexpr std::chrono::milliseconds kDefaultCallTimeout{10000};
inline constexpr size_t kMaxTargetIdsPerQuery = 1000;

struct SutInfo {
  std::string base_url;
  std::string swagger_json_url;
  bool is_running = false;
  friend bool operator==(const SutInfo&, const SutInfo&) = default;
};

struct RunSutRequest {
  bool run = false;
  bool reset = false;
  friend bool operator==(const RunSutRequest&, const RunSutRequest&) = default;
};

struct TargetInfoDto {
  TargetId id;
  double value = 0;
  std::optional<std::string> description;
  friend bool operator==(const TargetInfoDto&, const TargetInfoDto&) = default;
};

// Error payload of a non-2xx controller response: {"error": kind, "message"}.
struct ControllerErrorDto {
  std::string error;
  std::string message;
};

void to_json(nlohmann::json& j, const SutInfo& info);
void from_json(const nlohmann::json& j, SutInfo& info);
void to_json(nlohmann::json& j, const RunSutRequest& r);
void from_json(const nlohmann::json& j, RunSutRequest& r);
void to_json(nlohmann::json& j, const TargetInfoDto& t);
void from_json(const nlohmann::json& j, TargetInfoDto& t);
void to_json(nlohmann::json& j, const ControllerErrorDto& e);
void from_json(const nlohmann::json& j, ControllerErrorDto& e);

class DriverError : public Error {
 public:
  enum class Kind {
    kControllerUnreachable,
    kSutFailedToStart,
    kSutNotRunning,
    kProtocolError,
    kHttpTransport,
  };
  DriverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct UrlParts {
  std::string origin;  // scheme://host:port
  std::string target;  // path and query, "/" when empty
};

// Splits an absolute http(s) URL. Throws DriverError(kProtocolError).
UrlParts SplitUrl(const std::string& url);

// Client for the SUT controller. One call in flight at a time; every call is
// bounded by the timeout and only StartSut retries (once).
class DriverClient {
 public:
  explicit DriverClient(const std::string& controller_url,
                        std::chrono::milliseconds timeout = kDefaultCallTimeout);
  DriverClient(DriverClient&&) noexcept;
  DriverClient& operator=(DriverClient&&) noexcept;
  ~DriverClient();

  // Idempotent while the SUT is running.
  SutInfo StartSut();
  void StopSut();
  void ResetState();
  SutInfo GetSutInfo();
  std::vector<AuthCredential> GetAuthInfo();
  void NewTestWindow();

  // Values for `ids` (chunked into queries of kMaxTargetIdsPerQuery) plus,
  // when `new_discoveries` is set, targets that improved in the current
  // window. Returns an empty list without a call when there is nothing to
  // ask for.
  std::vector<TargetInfoDto> FetchTargetInfos(std::span<const TargetId> ids,
                                              bool new_discoveries);

  const std::string& controller_url() const { return controller_url_; }

 private:
  nlohmann::json Call(const std::string& method, const std::string& target,
                      const std::optional<nlohmann::json>& body);
  SutInfo RunSut(bool run, bool reset);

  std::string controller_url_;
  std::unique_ptr<httplib::Client> client_;
};

// Sends rendered requests to the SUT over a keep-alive connection.
class HttpCaller {
 public:
  explicit HttpCaller(const std::string& base_url,
                      std::chrono::milliseconds timeout = kDefaultCallTimeout);
  HttpCaller(HttpCaller&&) noexcept;
  HttpCaller& operator=(HttpCaller&&) noexcept;
  ~HttpCaller();

  // Throws DriverError(kHttpTransport) when no response arrives.
  HttpResponse Send(const HttpRequestPlan& request);

 private:
  std::unique_ptr<httplib::Client> client_;
};

// GET of an absolute URL, e.g. the swagger document location.
std::string FetchUrl(const std::string& url,
                     std::chrono::milliseconds timeout = kDefaultCallTimeout);

}  // namespace restevo

#endif  // RESTEVO_DRIVER_H_
