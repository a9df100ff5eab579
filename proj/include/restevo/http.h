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

#ifndef RESTEVO_HTTP_H_
#define RESTEVO_HTTP_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace restevo {

struct Header {
  std::string name;
  std::string value;
  friend bool operator==(const Header&, const Header&) = default;
};

// A concrete HTTP call, independent of any base URL. `target` is the path
// (including the API base path) plus the query string.
struct HttpRequestPlan {
  std::string verb;
  std::string target;
  std::vector<Header> headers;
  std::optional<std::string> body;
  friend bool operator==(const HttpRequestPlan&,
                         const HttpRequestPlan&) = default;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

struct AuthCredential {
  std::string name;
  std::vector<Header> headers;
  friend bool operator==(const AuthCredential&,
                         const AuthCredential&) = default;
};

void to_json(nlohmann::json& j, const Header& h);
void from_json(const nlohmann::json& j, Header& h);
void to_json(nlohmann::json& j, const AuthCredential& c);
void from_json(const nlohmann::json& j, AuthCredential& c);

// RFC 3986: every byte outside the unreserved set is %XX-encoded.
std::string PercentEncode(std::string_view text);
// Decodes %XX escapes; with `plus_as_space`, '+' becomes ' '.
std::string PercentDecode(std::string_view text, bool plus_as_space = false);

// Status family as used in target ids: 2 -> "2xx". Requires 100..599.
std::string StatusClass(int status);

}  // namespace restevo

#endif  // RESTEVO_HTTP_H_
