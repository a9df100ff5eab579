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

#include "restevo/swagger.h"

#include <algorithm>
#include <cctype>
#include <utility>

namespace restevo {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::string_view kDefinitionsPrefix = "#/definitions/";
constexpr std::string_view kParametersPrefix = "#/parameters/";

bool SharedSchemaEqual(const std::shared_ptr<const SchemaNode>& a,
                       const std::shared_ptr<const SchemaNode>& b) {
  if (a == nullptr || b == nullptr) return a == b;
  return *a == *b;
}

std::optional<double> OptionalNumber(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nullopt;
  return it->get<double>();
}

std::optional<int64_t> OptionalCount(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::nullopt;
  double value = it->get<double>();
  if (value < 0) return std::nullopt;
  return static_cast<int64_t>(value);
}

std::string StringOr(const Json& j, const char* key, std::string fallback) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return fallback;
  return it->get<std::string>();
}

class SchemaParser {
 public:
  explicit SchemaParser(std::vector<std::string>& warnings)
      : warnings_(warnings) {}

  // Returns nullopt when the schema uses a feature that is not supported; the
  // reason has been recorded as a warning.
  std::optional<SchemaNode> Parse(const Json& j, const std::string& where) {
    if (!j.is_object()) {
      Warn(where, "schema is not an object");
      return std::nullopt;
    }
    SchemaNode node;
    if (auto ref = j.find("$ref"); ref != j.end()) {
      if (!ref->is_string()) {
        Warn(where, "$ref is not a string");
        return std::nullopt;
      }
      std::string target = ref->get<std::string>();
      if (!target.starts_with(kDefinitionsPrefix)) {
        throw SwaggerError(SwaggerError::Kind::kUnresolvableRef, target);
      }
      node.kind = SchemaKind::kRef;
      node.ref_name = target.substr(kDefinitionsPrefix.size());
      return node;
    }
    for (const char* combinator : {"allOf", "anyOf", "oneOf", "not"}) {
      if (j.contains(combinator)) {
        Warn(where, std::string("unsupported schema combinator ") +
                        combinator);
        return std::nullopt;
      }
    }

    std::string type = StringOr(j, "type", "");
    if (type.empty()) {
      type = j.contains("items") ? "array" : "object";
    }
    node.format = StringOr(j, "format", "");
    if (auto it = j.find("default"); it != j.end()) {
      node.default_value = nlohmann::json::parse(it->dump());
    }

    if (type == "integer") {
      node.kind = SchemaKind::kInteger;
    } else if (type == "number") {
      node.kind = SchemaKind::kNumber;
    } else if (type == "string") {
      node.kind = SchemaKind::kString;
    } else if (type == "boolean") {
      node.kind = SchemaKind::kBoolean;
    } else if (type == "array") {
      node.kind = SchemaKind::kArray;
      auto items = j.find("items");
      if (items == j.end()) {
        Warn(where, "array without items");
        return std::nullopt;
      }
      auto item_node = Parse(*items, where + "[]");
      if (!item_node) return std::nullopt;
      node.items = std::make_shared<const SchemaNode>(std::move(*item_node));
      node.max_items = OptionalCount(j, "maxItems");
    } else if (type == "object") {
      node.kind = SchemaKind::kObject;
      if (auto props = j.find("properties");
          props != j.end() && props->is_object()) {
        for (const auto& [name, value] : props->items()) {
          auto child = Parse(value, where + "." + name);
          if (!child) continue;
          node.properties.push_back(
              {name, std::make_shared<const SchemaNode>(std::move(*child))});
        }
      }
      if (auto req = j.find("required"); req != j.end() && req->is_array()) {
        for (const auto& name : *req) {
          if (name.is_string()) node.required.insert(name.get<std::string>());
        }
      }
    } else {
      Warn(where, "unsupported type '" + type + "'");
      return std::nullopt;
    }

    if (node.kind == SchemaKind::kString) {
      node.min_length = OptionalCount(j, "minLength");
      node.max_length = OptionalCount(j, "maxLength");
      if (node.min_length && node.max_length &&
          *node.min_length > *node.max_length) {
        Warn(where, "minLength exceeds maxLength");
        return std::nullopt;
      }
    }
    if (node.kind == SchemaKind::kInteger || node.kind == SchemaKind::kNumber) {
      node.minimum = OptionalNumber(j, "minimum");
      node.maximum = OptionalNumber(j, "maximum");
      if (node.minimum && node.maximum && *node.minimum > *node.maximum) {
        Warn(where, "minimum exceeds maximum");
        return std::nullopt;
      }
    }
    return node;
  }

  void Warn(const std::string& where, const std::string& what) {
    warnings_.push_back(where + ": " + what + " (skipped)");
  }

 private:
  std::vector<std::string>& warnings_;
};

void CollectRefs(const SchemaNode& node, std::vector<std::string>& out) {
  if (node.kind == SchemaKind::kRef) out.push_back(node.ref_name);
  if (node.items) CollectRefs(*node.items, out);
  for (const auto& prop : node.properties) CollectRefs(*prop.schema, out);
}

class DocumentParser {
 public:
  DocumentParser(const Json& root, SwaggerDoc& doc)
      : root_(root), doc_(doc), schemas_(doc.warnings) {}

  void Run() {
    doc_.base_path = StringOr(root_, "basePath", "");
    while (!doc_.base_path.empty() && doc_.base_path.back() == '/') {
      doc_.base_path.pop_back();
    }

    if (auto defs = root_.find("definitions");
        defs != root_.end() && defs->is_object()) {
      for (const auto& [name, value] : defs->items()) {
        auto node = schemas_.Parse(value, "definitions." + name);
        if (node) doc_.definitions.emplace(name, std::move(*node));
      }
    }

    if (auto paths = root_.find("paths");
        paths != root_.end() && paths->is_object()) {
      for (const auto& [path, item] : paths->items()) {
        if (!item.is_object()) continue;
        ParsePathItem(path, item);
      }
    }

    std::vector<std::string> refs;
    for (const auto& [name, node] : doc_.definitions) CollectRefs(node, refs);
    for (const auto& [path, ops] : doc_.paths) {
      for (const auto& [verb, op] : ops) {
        for (const auto& param : op.params) CollectRefs(param.schema, refs);
      }
    }
    for (const auto& ref : refs) {
      if (!doc_.definitions.contains(ref)) {
        throw SwaggerError(SwaggerError::Kind::kUnresolvableRef, ref);
      }
    }
  }

 private:
  void ParsePathItem(const std::string& path, const Json& item) {
    std::vector<ParamSpec> shared;
    if (auto params = item.find("parameters"); params != item.end()) {
      shared = ParseParams(*params, path);
    }
    for (const auto& [key, value] : item.items()) {
      auto verb = ParseVerb(key);
      if (!verb) continue;
      if (!value.is_object()) continue;
      SwaggerOperation op;
      op.operation_id = StringOr(value, "operationId", "");
      if (op.operation_id.empty()) {
        op.operation_id = SynthesizeOperationId(*verb, path);
      }
      std::vector<ParamSpec> own;
      std::string where = std::string(VerbName(*verb)) + " " + path;
      if (auto params = value.find("parameters"); params != value.end()) {
        own = ParseParams(*params, where);
      }
      op.params = MergeParams(shared, std::move(own));
      BindPathParams(path, where, op.params);
      doc_.paths[path][*verb] = std::move(op);
    }
  }

  std::vector<ParamSpec> ParseParams(const Json& params,
                                     const std::string& where) {
    std::vector<ParamSpec> out;
    if (!params.is_array()) return out;
    bool have_body = false;
    for (const auto& raw : params) {
      const Json* param = &raw;
      if (auto ref = raw.find("$ref"); ref != raw.end() && ref->is_string()) {
        param = &ResolveParameterRef(ref->get<std::string>());
      }
      std::string name = StringOr(*param, "name", "");
      std::string in = StringOr(*param, "in", "");
      std::string here = where + " param '" + name + "'";
      if (name.empty()) {
        schemas_.Warn(here, "parameter without name");
        continue;
      }
      ParamSpec spec;
      spec.name = name;
      spec.required = param->value("required", false);
      if (in == "path") {
        spec.location = ParamLocation::kPath;
      } else if (in == "query") {
        spec.location = ParamLocation::kQuery;
      } else if (in == "header") {
        spec.location = ParamLocation::kHeader;
      } else if (in == "body") {
        spec.location = ParamLocation::kBody;
      } else {
        schemas_.Warn(here, "unsupported location '" + in + "'");
        continue;
      }
      std::optional<SchemaNode> schema;
      if (spec.location == ParamLocation::kBody) {
        if (have_body) {
          schemas_.Warn(here, "second body parameter");
          continue;
        }
        auto s = param->find("schema");
        if (s == param->end()) {
          schemas_.Warn(here, "body parameter without schema");
          continue;
        }
        schema = schemas_.Parse(*s, here);
      } else {
        schema = schemas_.Parse(*param, here);
      }
      if (!schema) continue;
      if (spec.location == ParamLocation::kBody) have_body = true;
      spec.schema = std::move(*schema);
      out.push_back(std::move(spec));
    }
    return out;
  }

  const Json& ResolveParameterRef(const std::string& ref) {
    if (ref.starts_with(kParametersPrefix)) {
      std::string name = ref.substr(kParametersPrefix.size());
      if (auto params = root_.find("parameters"); params != root_.end()) {
        if (auto it = params->find(name); it != params->end()) return *it;
      }
    }
    throw SwaggerError(SwaggerError::Kind::kUnresolvableRef, ref);
  }

  // Operation-level parameters override path-level ones with the same
  // (name, location).
  static std::vector<ParamSpec> MergeParams(const std::vector<ParamSpec>& shared,
                                            std::vector<ParamSpec> own) {
    std::vector<ParamSpec> merged;
    for (const auto& p : shared) {
      bool overridden = std::any_of(own.begin(), own.end(), [&](const auto& o) {
        return o.name == p.name && o.location == p.location;
      });
      if (!overridden) merged.push_back(p);
    }
    bool own_body = std::any_of(own.begin(), own.end(), [](const auto& o) {
      return o.location == ParamLocation::kBody;
    });
    if (own_body) {
      std::erase_if(merged, [](const ParamSpec& p) {
        return p.location == ParamLocation::kBody;
      });
    }
    for (auto& p : own) merged.push_back(std::move(p));
    return merged;
  }

  // Enforces a one-to-one binding between template placeholders and path
  // parameters.
  void BindPathParams(const std::string& path, const std::string& where,
                      std::vector<ParamSpec>& params) {
    std::vector<std::string> holes = PathPlaceholders(path);
    std::erase_if(params, [&](const ParamSpec& p) {
      if (p.location != ParamLocation::kPath) return false;
      if (std::find(holes.begin(), holes.end(), p.name) != holes.end()) {
        return false;
      }
      schemas_.Warn(where + " param '" + p.name + "'",
                    "path parameter without placeholder");
      return true;
    });
    for (const auto& hole : holes) {
      auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) {
        return p.location == ParamLocation::kPath && p.name == hole;
      });
      if (it == params.end()) {
        doc_.warnings.push_back(where + ": placeholder {" + hole +
                                "} has no declared parameter; using string");
        ParamSpec spec;
        spec.name = hole;
        spec.location = ParamLocation::kPath;
        spec.required = true;
        spec.schema.kind = SchemaKind::kString;
        params.push_back(std::move(spec));
      } else if (!it->required) {
        doc_.warnings.push_back(where + ": path parameter '" + hole +
                                "' forced to required");
        it->required = true;
      }
    }
  }

  static std::string SynthesizeOperationId(HttpVerb verb,
                                           const std::string& path) {
    std::string id(VerbName(verb));
    std::transform(id.begin(), id.end(), id.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    for (char c : path) {
      if (std::isalnum(static_cast<unsigned char>(c))) {
        id.push_back(c);
      } else if (c == '/' && id.back() != '_') {
        id.push_back('_');
      }
    }
    return id;
  }

  const Json& root_;
  SwaggerDoc& doc_;
  SchemaParser schemas_;
};

class RefInliner {
 public:
  RefInliner(const SwaggerDoc& doc, std::vector<std::string>* warnings)
      : doc_(doc), warnings_(warnings) {}

  SchemaNode Inline(const SchemaNode& node) {
    if (node.kind == SchemaKind::kRef) {
      int depth = static_cast<int>(
          std::count(stack_.begin(), stack_.end(), node.ref_name));
      if (depth >= kMaxRefInlineDepth) {
        if (warnings_ != nullptr) {
          warnings_->push_back("cyclic reference '" + node.ref_name +
                               "' truncated at depth " +
                               std::to_string(depth));
        }
        SchemaNode absent;
        absent.kind = SchemaKind::kAbsent;
        absent.ref_name = node.ref_name;
        return absent;
      }
      // Reference closure was checked at parse time.
      const SchemaNode& target = doc_.definitions.at(node.ref_name);
      stack_.push_back(node.ref_name);
      SchemaNode out = Inline(target);
      stack_.pop_back();
      return out;
    }
    SchemaNode out = node;
    if (node.items) {
      out.items = std::make_shared<const SchemaNode>(Inline(*node.items));
    }
    for (auto& prop : out.properties) {
      prop.schema = std::make_shared<const SchemaNode>(Inline(*prop.schema));
    }
    return out;
  }

 private:
  const SwaggerDoc& doc_;
  std::vector<std::string>* warnings_;
  std::vector<std::string> stack_;
};

}  // namespace

std::string_view VerbName(HttpVerb verb) {
  switch (verb) {
    case HttpVerb::kGet:
      return "GET";
    case HttpVerb::kPost:
      return "POST";
    case HttpVerb::kPut:
      return "PUT";
    case HttpVerb::kPatch:
      return "PATCH";
    case HttpVerb::kDelete:
      return "DELETE";
    case HttpVerb::kHead:
      return "HEAD";
    case HttpVerb::kOptions:
      return "OPTIONS";
  }
  return "GET";
}

std::optional<HttpVerb> ParseVerb(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  for (HttpVerb verb : kAllVerbs) {
    if (VerbName(verb) == upper) return verb;
  }
  return std::nullopt;
}

std::string_view SchemaKindName(SchemaKind kind) {
  switch (kind) {
    case SchemaKind::kInteger:
      return "integer";
    case SchemaKind::kNumber:
      return "number";
    case SchemaKind::kString:
      return "string";
    case SchemaKind::kBoolean:
      return "boolean";
    case SchemaKind::kArray:
      return "array";
    case SchemaKind::kObject:
      return "object";
    case SchemaKind::kRef:
      return "ref";
    case SchemaKind::kAbsent:
      return "absent";
  }
  return "object";
}

std::string_view LocationName(ParamLocation location) {
  switch (location) {
    case ParamLocation::kPath:
      return "path";
    case ParamLocation::kQuery:
      return "query";
    case ParamLocation::kHeader:
      return "header";
    case ParamLocation::kBody:
      return "body";
  }
  return "query";
}

const SchemaNode* SchemaNode::Property(std::string_view name) const {
  for (const auto& prop : properties) {
    if (prop.name == name) return prop.schema.get();
  }
  return nullptr;
}

bool operator==(const SchemaNode& a, const SchemaNode& b) {
  if (a.kind != b.kind || a.format != b.format ||
      a.min_length != b.min_length || a.max_length != b.max_length ||
      a.minimum != b.minimum || a.maximum != b.maximum ||
      a.max_items != b.max_items || a.default_value != b.default_value ||
      a.required != b.required || a.ref_name != b.ref_name ||
      !SharedSchemaEqual(a.items, b.items) ||
      a.properties.size() != b.properties.size()) {
    return false;
  }
  for (size_t i = 0; i < a.properties.size(); ++i) {
    if (a.properties[i].name != b.properties[i].name ||
        !SharedSchemaEqual(a.properties[i].schema, b.properties[i].schema)) {
      return false;
    }
  }
  return true;
}

SwaggerError::SwaggerError(Kind kind, std::string detail)
    : Error([&] {
        switch (kind) {
          case Kind::kMalformedJson:
            return "malformed JSON: " + detail;
          case Kind::kUnresolvableRef:
            return "unresolvable reference: " + detail;
          case Kind::kUnsupportedVersion:
            return "unsupported document version: " + detail;
        }
        return detail;
      }()),
      kind_(kind),
      detail_(std::move(detail)) {}

SwaggerDoc ParseSwagger(std::string_view json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SwaggerError(SwaggerError::Kind::kMalformedJson, e.what());
  }
  if (!root.is_object()) {
    throw SwaggerError(SwaggerError::Kind::kMalformedJson,
                       "document root is not an object");
  }
  if (auto openapi = root.find("openapi"); openapi != root.end()) {
    throw SwaggerError(SwaggerError::Kind::kUnsupportedVersion,
                       "openapi " + openapi->dump());
  }
  if (auto version = root.find("swagger"); version != root.end()) {
    if (!version->is_string() ||
        !version->get<std::string>().starts_with("2.")) {
      throw SwaggerError(SwaggerError::Kind::kUnsupportedVersion,
                         "swagger " + version->dump());
    }
  }
  SwaggerDoc doc;
  DocumentParser(root, doc).Run();
  return doc;
}

std::vector<RestAction> ExtractActions(const SwaggerDoc& doc,
                                       std::vector<std::string>* warnings) {
  std::vector<RestAction> actions;
  RefInliner inliner(doc, warnings);
  for (const auto& [path, ops] : doc.paths) {
    for (const auto& [verb, op] : ops) {
      RestAction action;
      action.verb = verb;
      action.path_template = path;
      action.operation_id = op.operation_id;
      for (const auto& param : op.params) {
        ParamSpec resolved = param;
        resolved.schema = inliner.Inline(param.schema);
        action.params.push_back(std::move(resolved));
      }
      actions.push_back(std::move(action));
    }
  }
  return actions;
}

std::vector<std::string> PathPlaceholders(std::string_view path_template) {
  std::vector<std::string> out;
  size_t pos = 0;
  while ((pos = path_template.find('{', pos)) != std::string_view::npos) {
    size_t end = path_template.find('}', pos);
    if (end == std::string_view::npos) break;
    out.emplace_back(path_template.substr(pos + 1, end - pos - 1));
    pos = end + 1;
  }
  return out;
}

}  // namespace restevo
