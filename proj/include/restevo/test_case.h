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

#ifndef RESTEVO_TEST_CASE_H_
#define RESTEVO_TEST_CASE_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "restevo/gene.h"
#include "restevo/http.h"
#include "restevo/rng.h"
#include "restevo/swagger.h"

namespace restevo {

struct ParamBinding {
  std::string name;
  Gene gene;
  friend bool operator==(const ParamBinding&, const ParamBinding&) = default;
};

// One resolved HTTP call of a test: an action, one gene per parameter in the
// action's declaration order, and the credential set to send (if any).
struct ActionCall {
  std::shared_ptr<const RestAction> action;
  std::vector<ParamBinding> bindings;
  std::optional<size_t> auth;
  // Number of credential sets the auth choice ranges over.
  size_t auth_options = 0;

  friend bool operator==(const ActionCall& a, const ActionCall& b) {
    return *a.action == *b.action && a.bindings == b.bindings &&
           a.auth == b.auth && a.auth_options == b.auth_options;
  }
};

struct TestCase {
  std::vector<ActionCall> calls;
  friend bool operator==(const TestCase&, const TestCase&) = default;
};

ActionCall RandomCall(std::shared_ptr<const RestAction> action,
                      size_t auth_options, Rng& rng);

// Total mutable leaves: the genes of every call plus one auth choice per call
// when credentials exist.
size_t LeafCount(const TestCase& test);

// Applies one atomic change to leaf `index` of the test.
void MutateLeaf(TestCase& test, size_t index, Rng& rng);

// One request per call. Path parameters are percent-encoded into the
// template, present query parameters are appended in declaration order, a
// present body is serialized as JSON, and credential headers follow
// parameter headers. Throws GeneError(kRenderError) when a path parameter
// renders empty.
std::vector<HttpRequestPlan> Render(const TestCase& test,
                                    std::string_view base_path,
                                    std::span<const AuthCredential> credentials);

HttpRequestPlan RenderCall(const ActionCall& call, std::string_view base_path,
                           std::span<const AuthCredential> credentials);

}  // namespace restevo

#endif  // RESTEVO_TEST_CASE_H_
