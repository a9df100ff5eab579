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

#ifndef RESTEVO_GENE_H_
#define RESTEVO_GENE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "restevo/error.h"
#include "restevo/rng.h"
#include "restevo/swagger.h"

namespace restevo {

// Owning pointer with deep-copy semantics, used to make the recursive gene
// types regular values.
template <typename T>
class Box {
 public:
  Box() = default;
  explicit Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other)
      : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) {
      ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    }
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  explicit operator bool() const { return ptr_ != nullptr; }

  friend bool operator==(const Box& a, const Box& b) {
    if (!a.ptr_ || !b.ptr_) return !a.ptr_ && !b.ptr_;
    return *a.ptr_ == *b.ptr_;
  }

 private:
  std::unique_ptr<T> ptr_;
};

class Gene;

struct IntegerGene {
  int64_t value = 0;
  int64_t min = 0;
  int64_t max = 0;
  // Exponent of the last mutation step, -1 before the first. Inherited by
  // offspring so that successful step sizes are reused (not rendered).
  int step = -1;
  friend bool operator==(const IntegerGene&, const IntegerGene&) = default;
};

struct FloatGene {
  double value = 0;
  double min = 0;
  double max = 0;
  friend bool operator==(const FloatGene&, const FloatGene&) = default;
};

struct BooleanGene {
  bool value = false;
  friend bool operator==(const BooleanGene&, const BooleanGene&) = default;
};

inline constexpr int64_t kDefaultStringMaxLength = 16;
// Random lengths are drawn from [min_len, min(max_len, min_len + this)] so
// that schemas with huge maxLength values do not produce huge payloads.
inline constexpr int64_t kRandomStringLengthSpan = 16;

std::string DefaultAlphabet();

struct StringGene {
  std::string value;
  int64_t min_len = 0;
  int64_t max_len = kDefaultStringMaxLength;
  std::string alphabet = DefaultAlphabet();
  friend bool operator==(const StringGene&, const StringGene&) = default;
};

// Year, month, day, hour, minute, second. The bounds deliberately admit a
// few invalid values on each side so malformed timestamps get exercised.
struct DateTimeGene {
  static constexpr std::array<int64_t, 6> kMin = {1900, 0, 0, -1, -1, -1};
  static constexpr std::array<int64_t, 6> kMax = {2100, 13, 32, 25, 60, 60};

  std::array<int64_t, 6> fields = {2000, 1, 1, 0, 0, 0};
  friend bool operator==(const DateTimeGene&, const DateTimeGene&) = default;
};

inline constexpr size_t kDefaultMaxArrayElements = 5;

struct ArrayGene {
  std::vector<Gene> elements;
  size_t max_elements = kDefaultMaxArrayElements;
  Box<Gene> element_template;
  friend bool operator==(const ArrayGene&, const ArrayGene&);
};

struct ObjectGene {
  std::vector<std::string> names;
  std::vector<Gene> fields;
  friend bool operator==(const ObjectGene&, const ObjectGene&);
};

inline constexpr double kOptionalActivationProbability = 0.5;

struct OptionalGene {
  bool active = false;
  // Set for truncated cyclic references: never active, contributes no leaves.
  bool locked_absent = false;
  Box<Gene> inner;
  friend bool operator==(const OptionalGene&, const OptionalGene&);
};

class Gene {
 public:
  using Variant = std::variant<IntegerGene, FloatGene, BooleanGene, StringGene,
                               DateTimeGene, ArrayGene, ObjectGene,
                               OptionalGene>;

  Gene() : value_(BooleanGene{}) {}
  template <typename T>
    requires std::is_constructible_v<Variant, T>
  Gene(T value) : value_(std::move(value)) {}  // NOLINT: implicit by design

  Variant& value() { return value_; }
  const Variant& value() const { return value_; }

  template <typename T>
  T* As() {
    return std::get_if<T>(&value_);
  }
  template <typename T>
  const T* As() const {
    return std::get_if<T>(&value_);
  }

  friend bool operator==(const Gene& a, const Gene& b) {
    return a.value_ == b.value_;
  }

 private:
  Variant value_;
};

class GeneError : public Error {
 public:
  enum class Kind { kUnsupportedSchema, kRenderError };
  GeneError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Builds the genotype for a resolved schema. Object properties that are not
// listed as required are wrapped in OptionalGene.
Gene GeneFromSchema(const SchemaNode& schema);

// As GeneFromSchema, wrapping non-required parameters in OptionalGene. Path
// strings get a minimum length of one.
Gene GeneForParam(const ParamSpec& param);

void Randomize(Gene& gene, Rng& rng);

// Number of expressed atomic components: one per scalar, six per date-time,
// one for an array's length, one for an optional's activation flag. The
// inner leaves of an inactive optional are not counted.
size_t LeafCount(const Gene& gene);

// Applies one atomic change to leaf `index` (in [0, LeafCount)).
void MutateLeaf(Gene& gene, size_t index, Rng& rng);

// Applies one atomic change to a uniformly chosen leaf. No-op on leafless
// genes.
void Mutate(Gene& gene, Rng& rng);

// False only for an inactive OptionalGene.
bool IsPresent(const Gene& gene);

nlohmann::ordered_json ToJson(const Gene& gene);

// Textual phenotype for path, query and header slots.
std::string ToText(const Gene& gene);

// `YYYY-MM-DDThh:mm:ss`; negative components are printed unpadded.
std::string FormatDateTime(const DateTimeGene& gene);

// Every genotype leaf value, including those under inactive optionals, in
// a fixed order. For inspecting mutation effects.
std::vector<std::string> LeafSnapshot(const Gene& gene);

// Checks every bound invariant recursively.
bool WithinBounds(const Gene& gene);

}  // namespace restevo

#endif  // RESTEVO_GENE_H_
