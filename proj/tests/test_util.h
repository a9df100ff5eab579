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


#ifndef RESTEVO_TESTS_TEST_UTIL_H_
#define RESTEVO_TESTS_TEST_UTIL_H_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace restevo::testing {

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::string FixturePath(const std::string& name) {
  return std::string(RESTEVO_FIXTURE_DIR) + "/" + name;
}

inline std::string Fixture(const std::string& name) {
  return ReadFile(FixturePath(name));
}

// The "swagger" member of a scenario fixture.
inline std::string FixtureSwagger(const std::string& name) {
  return nlohmann::ordered_json::parse(Fixture(name))["swagger"].dump();
}

}  // namespace restevo::testing

#endif  // RESTEVO_TESTS_TEST_UTIL_H_
