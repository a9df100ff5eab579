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

#include "restevo/gene.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

namespace restevo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kDefaultFloatBound = 9007199254740992.0;  // 2^53

int64_t SaturateToInt64(double value) {
  if (value >= 9.2233720368547758e18) return std::numeric_limits<int64_t>::max();
  if (value <= -9.2233720368547758e18) return std::numeric_limits<int64_t>::min();
  return static_cast<int64_t>(value);
}

// Largest k such that 2^k does not exceed the width of [min, max].
int MaxStepExponent(long double width) {
  if (width < 2) return 0;
  return std::min(62, static_cast<int>(std::floor(std::log2(width))));
}

int ChooseSign(bool at_min, bool at_max, Rng& rng) {
  if (at_max && !at_min) return -1;
  if (at_min && !at_max) return 1;
  return rng.Bernoulli(0.5) ? 1 : -1;
}

// Probability of drawing the step exponent near the inherited one instead
// of uniformly over the range.
constexpr double kInheritedStepProbability = 0.5;

// Moves `value` by +-2^k, clamping to the bounds. k is either uniform over
// the exponents that fit the range or drawn from [step - 3, step + 1].
void StepInteger(IntegerGene& g, Rng& rng) {
  if (g.min == g.max) {
    g.value = g.min;
    return;
  }
  __int128 width = static_cast<__int128>(g.max) - g.min;
  int max_k = MaxStepExponent(static_cast<long double>(width));
  int k;
  if (g.step >= 0 && rng.Bernoulli(kInheritedStepProbability)) {
    k = std::clamp(static_cast<int>(rng.UniformInt(g.step - 3, g.step + 1)), 0,
                   max_k);
  } else {
    k = static_cast<int>(rng.UniformInt(0, max_k));
  }
  __int128 delta = static_cast<__int128>(1) << k;
  int sign = ChooseSign(g.value == g.min, g.value == g.max, rng);
  __int128 next = static_cast<__int128>(g.value) + sign * delta;
  g.value = static_cast<int64_t>(std::clamp<__int128>(next, g.min, g.max));
  g.step = k;
}

double StepFloat(double value, double min, double max, Rng& rng) {
  if (min == max) return min;
  int k = static_cast<int>(rng.UniformInt(
      0, MaxStepExponent(static_cast<long double>(max) - min)));
  int sign = ChooseSign(value <= min, value >= max, rng);
  return std::clamp(value + sign * std::ldexp(1.0, k), min, max);
}

char RandomChar(const std::string& alphabet, Rng& rng) {
  return alphabet[rng.Index(alphabet.size())];
}

void RandomizeString(StringGene& g, Rng& rng) {
  int64_t hi = std::min(g.max_len, g.min_len + kRandomStringLengthSpan);
  int64_t len = rng.UniformInt(g.min_len, hi);
  g.value.clear();
  for (int64_t i = 0; i < len; ++i) g.value.push_back(RandomChar(g.alphabet, rng));
}

void MutateString(StringGene& g, Rng& rng) {
  enum Op { kReplace, kInsert, kErase };
  std::vector<Op> ops;
  int64_t len = static_cast<int64_t>(g.value.size());
  if (len > 0 && g.alphabet.size() > 1) ops.push_back(kReplace);
  if (len < g.max_len) ops.push_back(kInsert);
  if (len > g.min_len) ops.push_back(kErase);
  if (ops.empty()) return;
  switch (ops[rng.Index(ops.size())]) {
    case kReplace: {
      size_t pos = rng.Index(g.value.size());
      char c;
      do {
        c = RandomChar(g.alphabet, rng);
      } while (c == g.value[pos]);
      g.value[pos] = c;
      break;
    }
    case kInsert:
      g.value.insert(g.value.begin() + rng.Index(g.value.size() + 1),
                     RandomChar(g.alphabet, rng));
      break;
    case kErase:
      g.value.erase(g.value.begin() + rng.Index(g.value.size()));
      break;
  }
}

IntegerGene IntegerFromSchema(const SchemaNode& s) {
  IntegerGene g;
  if (s.format == "int64") {
    g.min = std::numeric_limits<int64_t>::min();
    g.max = std::numeric_limits<int64_t>::max();
  } else {
    g.min = std::numeric_limits<int32_t>::min();
    g.max = std::numeric_limits<int32_t>::max();
  }
  if (s.minimum) g.min = std::max(g.min, SaturateToInt64(std::ceil(*s.minimum)));
  if (s.maximum) g.max = std::min(g.max, SaturateToInt64(std::floor(*s.maximum)));
  if (g.min > g.max) g.max = g.min;
  int64_t initial = 0;
  if (s.default_value && s.default_value->is_number()) {
    initial = SaturateToInt64(s.default_value->get<double>());
  }
  g.value = std::clamp(initial, g.min, g.max);
  return g;
}

FloatGene FloatFromSchema(const SchemaNode& s) {
  FloatGene g;
  double bound = kDefaultFloatBound;
  if (s.format == "float") bound = 16777216.0;  // 2^24
  g.min = s.minimum.value_or(-bound);
  g.max = s.maximum.value_or(bound);
  if (g.min > g.max) g.max = g.min;
  double initial = 0;
  if (s.default_value && s.default_value->is_number()) {
    initial = s.default_value->get<double>();
  }
  g.value = std::clamp(initial, g.min, g.max);
  return g;
}

StringGene StringFromSchema(const SchemaNode& s) {
  StringGene g;
  g.min_len = s.min_length.value_or(0);
  g.max_len = s.max_length.value_or(std::max(kDefaultStringMaxLength, g.min_len));
  if (s.default_value && s.default_value->is_string()) {
    std::string v = s.default_value->get<std::string>();
    if (static_cast<int64_t>(v.size()) >= g.min_len &&
        static_cast<int64_t>(v.size()) <= g.max_len) {
      g.value = v;
    }
  }
  while (static_cast<int64_t>(g.value.size()) < g.min_len) {
    g.value.push_back(g.alphabet.front());
  }
  return g;
}

Gene Wrap(Gene inner, bool active) {
  OptionalGene opt;
  opt.active = active;
  opt.inner = Box<Gene>(std::move(inner));
  return opt;
}

void AppendNumber(std::string& out, int64_t value, int width) {
  if (value < 0) {
    out += std::to_string(value);
    return;
  }
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) {
    out.append(width - digits.size(), '0');
  }
  out += digits;
}

std::string FormatDouble(double value) {
  return nlohmann::json(value).dump();
}

}  // namespace

std::string DefaultAlphabet() {
  std::string out;
  for (char c = 32; c < 127; ++c) out.push_back(c);
  return out;
}

bool operator==(const ArrayGene& a, const ArrayGene& b) {
  return a.elements == b.elements && a.max_elements == b.max_elements &&
         a.element_template == b.element_template;
}

bool operator==(const ObjectGene& a, const ObjectGene& b) {
  return a.names == b.names && a.fields == b.fields;
}

bool operator==(const OptionalGene& a, const OptionalGene& b) {
  return a.active == b.active && a.locked_absent == b.locked_absent &&
         a.inner == b.inner;
}

Gene GeneFromSchema(const SchemaNode& s) {
  switch (s.kind) {
    case SchemaKind::kInteger:
      return IntegerFromSchema(s);
    case SchemaKind::kNumber:
      return FloatFromSchema(s);
    case SchemaKind::kBoolean: {
      BooleanGene g;
      if (s.default_value && s.default_value->is_boolean()) {
        g.value = s.default_value->get<bool>();
      }
      return g;
    }
    case SchemaKind::kString:
      if (s.format == "date-time") return DateTimeGene{};
      return StringFromSchema(s);
    case SchemaKind::kArray: {
      if (!s.items) {
        throw GeneError(GeneError::Kind::kUnsupportedSchema,
                        "array schema without items");
      }
      ArrayGene g;
      g.max_elements = s.max_items
                           ? static_cast<size_t>(*s.max_items)
                           : kDefaultMaxArrayElements;
      g.element_template = Box<Gene>(GeneFromSchema(*s.items));
      return g;
    }
    case SchemaKind::kObject: {
      ObjectGene g;
      for (const auto& prop : s.properties) {
        Gene field = GeneFromSchema(*prop.schema);
        if (!s.required.contains(prop.name) && !field.As<OptionalGene>()) {
          field = Wrap(std::move(field), false);
        }
        g.names.push_back(prop.name);
        g.fields.push_back(std::move(field));
      }
      return g;
    }
    case SchemaKind::kAbsent: {
      OptionalGene g;
      g.locked_absent = true;
      g.inner = Box<Gene>(Gene(ObjectGene{}));
      return g;
    }
    case SchemaKind::kRef:
      break;
  }
  throw GeneError(GeneError::Kind::kUnsupportedSchema,
                  "unsupported schema kind: " +
                      std::string(SchemaKindName(s.kind)) +
                      (s.ref_name.empty() ? "" : " " + s.ref_name));
}

Gene GeneForParam(const ParamSpec& param) {
  Gene gene = GeneFromSchema(param.schema);
  if (param.location == ParamLocation::kPath) {
    if (auto* s = gene.As<StringGene>(); s != nullptr && s->min_len == 0) {
      s->min_len = 1;
      s->max_len = std::max<int64_t>(s->max_len, 1);
      if (s->value.empty()) s->value.push_back(s->alphabet.front());
    }
  }
  if (!param.required && !gene.As<OptionalGene>()) {
    gene = Wrap(std::move(gene), false);
  }
  return gene;
}

void Randomize(Gene& gene, Rng& rng) {
  std::visit(
      Overloaded{
          [&](IntegerGene& g) { g.value = rng.UniformInt(g.min, g.max); },
          [&](FloatGene& g) {
            g.value = g.min == g.max ? g.min : rng.UniformReal(g.min, g.max);
          },
          [&](BooleanGene& g) { g.value = rng.Bernoulli(0.5); },
          [&](StringGene& g) { RandomizeString(g, rng); },
          [&](DateTimeGene& g) {
            for (size_t i = 0; i < g.fields.size(); ++i) {
              g.fields[i] = rng.UniformInt(DateTimeGene::kMin[i],
                                           DateTimeGene::kMax[i]);
            }
          },
          [&](ArrayGene& g) {
            size_t len = static_cast<size_t>(
                rng.UniformInt(0, static_cast<int64_t>(g.max_elements)));
            g.elements.clear();
            for (size_t i = 0; i < len; ++i) {
              Gene element = *g.element_template;
              Randomize(element, rng);
              g.elements.push_back(std::move(element));
            }
          },
          [&](ObjectGene& g) {
            for (auto& field : g.fields) Randomize(field, rng);
          },
          [&](OptionalGene& g) {
            if (g.locked_absent) return;
            g.active = rng.Bernoulli(kOptionalActivationProbability);
            Randomize(*g.inner, rng);
          },
      },
      gene.value());
}

size_t LeafCount(const Gene& gene) {
  return std::visit(
      Overloaded{
          [](const DateTimeGene&) -> size_t { return 6; },
          [](const ArrayGene& g) -> size_t {
            size_t n = 1;
            for (const auto& e : g.elements) n += LeafCount(e);
            return n;
          },
          [](const ObjectGene& g) -> size_t {
            size_t n = 0;
            for (const auto& f : g.fields) n += LeafCount(f);
            return n;
          },
          [](const OptionalGene& g) -> size_t {
            if (g.locked_absent) return 0;
            // An inactive inner gene is not expressed; only the flag counts.
            return g.active ? 1 + LeafCount(*g.inner) : 1;
          },
          [](const auto&) -> size_t { return 1; },
      },
      gene.value());
}

void MutateLeaf(Gene& gene, size_t index, Rng& rng) {
  std::visit(
      Overloaded{
          [&](IntegerGene& g) { StepInteger(g, rng); },
          [&](FloatGene& g) { g.value = StepFloat(g.value, g.min, g.max, rng); },
          [&](BooleanGene& g) { g.value = !g.value; },
          [&](StringGene& g) { MutateString(g, rng); },
          [&](DateTimeGene& g) {
            size_t i = std::min<size_t>(index, 5);
            int64_t lo = DateTimeGene::kMin[i];
            int64_t hi = DateTimeGene::kMax[i];
            int sign = ChooseSign(g.fields[i] == lo, g.fields[i] == hi, rng);
            g.fields[i] = std::clamp(g.fields[i] + sign, lo, hi);
          },
          [&](ArrayGene& g) {
            if (index == 0) {
              bool can_add = g.elements.size() < g.max_elements;
              bool can_remove = !g.elements.empty();
              if (!can_add && !can_remove) return;
              if (can_add && (!can_remove || rng.Bernoulli(0.5))) {
                Gene element = *g.element_template;
                Randomize(element, rng);
                g.elements.push_back(std::move(element));
              } else {
                g.elements.erase(g.elements.begin() +
                                 rng.Index(g.elements.size()));
              }
              return;
            }
            size_t offset = index - 1;
            for (auto& e : g.elements) {
              size_t n = LeafCount(e);
              if (offset < n) {
                MutateLeaf(e, offset, rng);
                return;
              }
              offset -= n;
            }
          },
          [&](ObjectGene& g) {
            size_t offset = index;
            for (auto& f : g.fields) {
              size_t n = LeafCount(f);
              if (offset < n) {
                MutateLeaf(f, offset, rng);
                return;
              }
              offset -= n;
            }
          },
          [&](OptionalGene& g) {
            if (g.locked_absent) return;
            if (index == 0) {
              g.active = !g.active;
            } else {
              MutateLeaf(*g.inner, index - 1, rng);
            }
          },
      },
      gene.value());
}

void Mutate(Gene& gene, Rng& rng) {
  size_t n = LeafCount(gene);
  if (n == 0) return;
  MutateLeaf(gene, rng.Index(n), rng);
}

bool IsPresent(const Gene& gene) {
  const auto* opt = gene.As<OptionalGene>();
  return opt == nullptr || (opt->active && !opt->locked_absent);
}

std::string FormatDateTime(const DateTimeGene& g) {
  std::string out;
  AppendNumber(out, g.fields[0], 4);
  out.push_back('-');
  AppendNumber(out, g.fields[1], 2);
  out.push_back('-');
  AppendNumber(out, g.fields[2], 2);
  out.push_back('T');
  AppendNumber(out, g.fields[3], 2);
  out.push_back(':');
  AppendNumber(out, g.fields[4], 2);
  out.push_back(':');
  AppendNumber(out, g.fields[5], 2);
  return out;
}

nlohmann::ordered_json ToJson(const Gene& gene) {
  return std::visit(
      Overloaded{
          [](const IntegerGene& g) { return nlohmann::ordered_json(g.value); },
          [](const FloatGene& g) { return nlohmann::ordered_json(g.value); },
          [](const BooleanGene& g) { return nlohmann::ordered_json(g.value); },
          [](const StringGene& g) { return nlohmann::ordered_json(g.value); },
          [](const DateTimeGene& g) {
            return nlohmann::ordered_json(FormatDateTime(g));
          },
          [](const ArrayGene& g) {
            auto out = nlohmann::ordered_json::array();
            for (const auto& e : g.elements) {
              if (IsPresent(e)) out.push_back(ToJson(e));
            }
            return out;
          },
          [](const ObjectGene& g) {
            auto out = nlohmann::ordered_json::object();
            for (size_t i = 0; i < g.fields.size(); ++i) {
              if (IsPresent(g.fields[i])) out[g.names[i]] = ToJson(g.fields[i]);
            }
            return out;
          },
          [](const OptionalGene& g) {
            if (!g.active || g.locked_absent) return nlohmann::ordered_json();
            return ToJson(*g.inner);
          },
      },
      gene.value());
}

std::string ToText(const Gene& gene) {
  return std::visit(
      Overloaded{
          [](const IntegerGene& g) { return std::to_string(g.value); },
          [](const FloatGene& g) { return FormatDouble(g.value); },
          [](const BooleanGene& g) {
            return std::string(g.value ? "true" : "false");
          },
          [](const StringGene& g) { return g.value; },
          [](const DateTimeGene& g) { return FormatDateTime(g); },
          [](const ArrayGene& g) {
            // Swagger's default collectionFormat is csv.
            std::string out;
            for (const auto& e : g.elements) {
              if (!IsPresent(e)) continue;
              if (!out.empty()) out.push_back(',');
              out += ToText(e);
            }
            return out;
          },
          [](const ObjectGene& g) { return ToJson(Gene(g)).dump(); },
          [](const OptionalGene& g) {
            if (!g.active || g.locked_absent) return std::string();
            return ToText(*g.inner);
          },
      },
      gene.value());
}

std::vector<std::string> LeafSnapshot(const Gene& gene) {
  std::vector<std::string> out;
  std::visit(
      Overloaded{
          [&](const DateTimeGene& g) {
            for (int64_t f : g.fields) out.push_back(std::to_string(f));
          },
          [&](const ArrayGene& g) {
            out.push_back("len=" + std::to_string(g.elements.size()));
            for (const auto& e : g.elements) {
              auto sub = LeafSnapshot(e);
              out.insert(out.end(), sub.begin(), sub.end());
            }
          },
          [&](const ObjectGene& g) {
            for (const auto& f : g.fields) {
              auto sub = LeafSnapshot(f);
              out.insert(out.end(), sub.begin(), sub.end());
            }
          },
          [&](const OptionalGene& g) {
            if (g.locked_absent) return;
            out.push_back(g.active ? "on" : "off");
            auto sub = LeafSnapshot(*g.inner);
            out.insert(out.end(), sub.begin(), sub.end());
          },
          [&](const StringGene& g) { out.push_back("\"" + g.value + "\""); },
          [&](const auto&) { out.push_back(ToText(gene)); },
      },
      gene.value());
  return out;
}

bool WithinBounds(const Gene& gene) {
  return std::visit(
      Overloaded{
          [](const IntegerGene& g) {
            return g.min <= g.value && g.value <= g.max;
          },
          [](const FloatGene& g) {
            return g.min <= g.value && g.value <= g.max;
          },
          [](const BooleanGene&) { return true; },
          [](const StringGene& g) {
            auto len = static_cast<int64_t>(g.value.size());
            return g.min_len <= len && len <= g.max_len &&
                   g.value.find_first_not_of(g.alphabet) == std::string::npos;
          },
          [](const DateTimeGene& g) {
            for (size_t i = 0; i < g.fields.size(); ++i) {
              if (g.fields[i] < DateTimeGene::kMin[i] ||
                  g.fields[i] > DateTimeGene::kMax[i]) {
                return false;
              }
            }
            return true;
          },
          [](const ArrayGene& g) {
            if (g.elements.size() > g.max_elements) return false;
            return std::all_of(g.elements.begin(), g.elements.end(),
                               [](const Gene& e) { return WithinBounds(e); });
          },
          [](const ObjectGene& g) {
            return g.names.size() == g.fields.size() &&
                   std::all_of(g.fields.begin(), g.fields.end(),
                               [](const Gene& f) { return WithinBounds(f); });
          },
          [](const OptionalGene& g) {
            if (g.locked_absent && g.active) return false;
            return WithinBounds(*g.inner);
          },
      },
      gene.value());
}

}  // namespace restevo
