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

#ifndef RESTEVO_SWAGGER_H_
#define RESTEVO_SWAGGER_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "restevo/error.h"

namespace restevo {

// Declaration order doubles as the deterministic ordering of actions that
// share a path.
enum class HttpVerb { kGet, kPost, kPut, kPatch, kDelete, kHead, kOptions };

inline constexpr HttpVerb kAllVerbs[] = {
    HttpVerb::kGet,    HttpVerb::kPost, HttpVerb::kPut,    HttpVerb::kPatch,
    HttpVerb::kDelete, HttpVerb::kHead, HttpVerb::kOptions};

std::string_view VerbName(HttpVerb verb);
// Case-insensitive.
std::optional<HttpVerb> ParseVerb(std::string_view name);

enum class SchemaKind {
  kInteger,
  kNumber,
  kString,
  kBoolean,
  kArray,
  kObject,
  kRef,
  // A cyclic reference cut off during inlining. Always rendered as absent.
  kAbsent,
};

std::string_view SchemaKindName(SchemaKind kind);

struct SchemaNode;

struct NamedSchema {
  std::string name;
  std::shared_ptr<const SchemaNode> schema;
};

struct SchemaNode {
  SchemaKind kind = SchemaKind::kObject;
  std::string format;
  std::optional<int64_t> min_length;
  std::optional<int64_t> max_length;
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<int64_t> max_items;
  std::optional<nlohmann::json> default_value;
  std::shared_ptr<const SchemaNode> items;
  // Document order is preserved; it is also the JSON rendering order.
  std::vector<NamedSchema> properties;
  std::set<std::string> required;
  std::string ref_name;

  const SchemaNode* Property(std::string_view name) const;
};

// Deep structural comparison.
bool operator==(const SchemaNode& a, const SchemaNode& b);

enum class ParamLocation { kPath, kQuery, kHeader, kBody };

std::string_view LocationName(ParamLocation location);

struct ParamSpec {
  std::string name;
  ParamLocation location = ParamLocation::kQuery;
  bool required = false;
  SchemaNode schema;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct RestAction {
  HttpVerb verb = HttpVerb::kGet;
  std::string path_template;
  std::vector<ParamSpec> params;
  std::string operation_id;

  friend bool operator==(const RestAction&, const RestAction&) = default;
};

struct SwaggerOperation {
  std::string operation_id;
  // Schemas may still contain kRef nodes.
  std::vector<ParamSpec> params;
};

struct SwaggerDoc {
  std::string base_path;
  std::map<std::string, std::map<HttpVerb, SwaggerOperation>> paths;
  std::map<std::string, SchemaNode> definitions;
  std::vector<std::string> warnings;
};

class SwaggerError : public Error {
 public:
  enum class Kind { kMalformedJson, kUnresolvableRef, kUnsupportedVersion };

  SwaggerError(Kind kind, std::string detail);

  Kind kind() const { return kind_; }
  // The offending reference name for kUnresolvableRef, otherwise the message.
  const std::string& detail() const { return detail_; }

 private:
  Kind kind_;
  std::string detail_;
};

// Parses a Swagger 2.x document. A document without a "swagger" field is
// accepted as a bare fragment; one declaring any other version, or an
// OpenAPI 3 "openapi" field, is rejected.
SwaggerDoc ParseSwagger(std::string_view json_text);

// Cyclic references are inlined while a definition appears fewer than this
// many times on the expansion path; deeper occurrences become kAbsent.
inline constexpr int kMaxRefInlineDepth = 2;

// One action per (path, verb), ordered by path then by HttpVerb order, with
// every schema reference inlined. Cycle truncations are appended to warnings.
std::vector<RestAction> ExtractActions(const SwaggerDoc& doc,
                                       std::vector<std::string>* warnings =
                                           nullptr);

// The `{name}` placeholders of a path template, in order of appearance.
std::vector<std::string> PathPlaceholders(std::string_view path_template);

}  // namespace restevo

#endif  // RESTEVO_SWAGGER_H_
