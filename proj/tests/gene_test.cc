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

#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "restevo/swagger.h"
#include "test_util.h"

namespace restevo {
namespace {

using testing::FixtureSwagger;

std::vector<RestAction> ActivityActions() {
  return ExtractActions(ParseSwagger(FixtureSwagger("activities.json")));
}

// The PUT body, unwrapped from its optional.
Gene ActivityBody() {
  auto actions = ActivityActions();
  for (const auto& p : actions[1].params) {
    if (p.location == ParamLocation::kBody) return GeneFromSchema(p.schema);
  }
  ADD_FAILURE() << "no body";
  return Gene();
}

const Gene* Field(const ObjectGene& obj, const std::string& name) {
  for (size_t i = 0; i < obj.names.size(); ++i) {
    if (obj.names[i] == name) return &obj.fields[i];
  }
  return nullptr;
}

const Gene& Unwrap(const Gene& g) {
  if (const auto* opt = g.As<OptionalGene>()) return *opt->inner;
  return g;
}

size_t DifferingLeaves(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  size_t n = 0;
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) n += a[i] != b[i];
  return n;
}

TEST(GeneFromSchema, AgeMinHasMaximum100) {
  Gene body = ActivityBody();
  const auto* obj = body.As<ObjectGene>();
  ASSERT_NE(obj, nullptr);
  const Gene* age = Field(*obj, "age_min");
  ASSERT_NE(age, nullptr);
  const auto* g = Unwrap(*age).As<IntegerGene>();
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->max, 100);
  EXPECT_EQ(g->min, INT32_MIN);
}

TEST(GeneFromSchema, FeaturedDefaultsToFalse) {
  Gene body = ActivityBody();
  const Gene* featured = Field(*body.As<ObjectGene>(), "featured");
  ASSERT_NE(featured, nullptr);
  const auto* g = Unwrap(*featured).As<BooleanGene>();
  ASSERT_NE(g, nullptr);
  EXPECT_FALSE(g->value);

  SchemaNode s;
  s.kind = SchemaKind::kBoolean;
  s.default_value = true;
  EXPECT_TRUE(GeneFromSchema(s).As<BooleanGene>()->value);
}

TEST(GeneFromSchema, KindsAndFormats) {
  Gene body = ActivityBody();
  const auto& obj = *body.As<ObjectGene>();
  EXPECT_NE(Unwrap(*Field(obj, "date_published")).As<DateTimeGene>(), nullptr);
  EXPECT_NE(Unwrap(*Field(obj, "tags")).As<ArrayGene>(), nullptr);
  EXPECT_NE(Unwrap(*Field(obj, "author")).As<ObjectGene>(), nullptr);
  const auto* id = Unwrap(*Field(obj, "id")).As<IntegerGene>();
  ASSERT_NE(id, nullptr);
  EXPECT_EQ(id->min, INT64_MIN);
  EXPECT_EQ(id->max, INT64_MAX);
  const auto* name = Unwrap(*Field(obj, "name")).As<StringGene>();
  ASSERT_NE(name, nullptr);
  EXPECT_EQ(name->min_len, 0);
  EXPECT_EQ(name->max_len, 100);

  SchemaNode plain_int;
  plain_int.kind = SchemaKind::kInteger;
  const auto* i32 = GeneFromSchema(plain_int).As<IntegerGene>();
  EXPECT_EQ(i32->min, INT32_MIN);
  EXPECT_EQ(i32->max, INT32_MAX);

  SchemaNode number;
  number.kind = SchemaKind::kNumber;
  EXPECT_NE(GeneFromSchema(number).As<FloatGene>(), nullptr);

  SchemaNode str;
  str.kind = SchemaKind::kString;
  EXPECT_EQ(GeneFromSchema(str).As<StringGene>()->max_len,
            kDefaultStringMaxLength);

  SchemaNode ref;
  ref.kind = SchemaKind::kRef;
  ref.ref_name = "X";
  try {
    GeneFromSchema(ref);
    FAIL();
  } catch (const GeneError& e) {
    EXPECT_EQ(e.kind(), GeneError::Kind::kUnsupportedSchema);
  }
}

TEST(GeneFromSchema, NonRequiredParamsAreOptional) {
  auto actions = ActivityActions();
  Gene id = GeneForParam(actions[0].params[0]);
  Gene attrs = GeneForParam(actions[0].params[1]);
  EXPECT_NE(id.As<IntegerGene>(), nullptr);
  ASSERT_NE(attrs.As<OptionalGene>(), nullptr);
  EXPECT_NE(attrs.As<OptionalGene>()->inner->As<StringGene>(), nullptr);
}

TEST(GeneFromSchema, ForcedEmptyString) {
  SchemaNode s;
  s.kind = SchemaKind::kString;
  s.min_length = 0;
  s.max_length = 0;
  Gene g = GeneFromSchema(s);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    Randomize(g, rng);
    EXPECT_EQ(ToText(g), "");
    Mutate(g, rng);
    EXPECT_EQ(ToText(g), "");
  }
}

TEST(Randomize, DegenerateIntegerRange) {
  Gene g = IntegerGene{7, 0, 0};
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    Randomize(g, rng);
    EXPECT_EQ(g.As<IntegerGene>()->value, 0);
  }
}

TEST(Randomize, DateTimeComponentsCoverTheirBounds) {
  Gene g = DateTimeGene{};
  Rng rng(3);
  std::array<std::set<int64_t>, 6> seen;
  for (int i = 0; i < 20000; ++i) {
    Randomize(g, rng);
    const auto& f = g.As<DateTimeGene>()->fields;
    for (size_t c = 0; c < 6; ++c) {
      ASSERT_GE(f[c], DateTimeGene::kMin[c]);
      ASSERT_LE(f[c], DateTimeGene::kMax[c]);
      seen[c].insert(f[c]);
    }
  }
  // Components 1..5 have small ranges; every value shows up.
  for (size_t c = 1; c < 6; ++c) {
    EXPECT_EQ(seen[c].size(),
              static_cast<size_t>(DateTimeGene::kMax[c] - DateTimeGene::kMin[c] +
                                  1));
  }
  EXPECT_TRUE(seen[5].contains(-1));
  EXPECT_TRUE(seen[5].contains(60));
}

TEST(Randomize, ShortStringsOverTwoLetters) {
  // Oracle: every string of length 2..4 over {a, b}, enumerated directly.
  std::set<std::string> legal;
  for (int len = 2; len <= 4; ++len) {
    for (int bits = 0; bits < (1 << len); ++bits) {
      std::string s;
      for (int i = 0; i < len; ++i) s.push_back((bits >> i) & 1 ? 'b' : 'a');
      legal.insert(s);
    }
  }
  ASSERT_EQ(legal.size(), 28u);

  StringGene sg;
  sg.min_len = 2;
  sg.max_len = 4;
  sg.alphabet = "ab";
  Gene g = sg;
  Rng rng(4);
  std::set<std::string> seen;
  for (int i = 0; i < 5000; ++i) {
    Randomize(g, rng);
    ASSERT_TRUE(legal.contains(ToText(g))) << ToText(g);
    seen.insert(ToText(g));
    Mutate(g, rng);
    ASSERT_TRUE(legal.contains(ToText(g))) << ToText(g);
  }
  EXPECT_EQ(seen, legal);
}

TEST(Randomize, OptionalActivationIsAboutHalf) {
  OptionalGene opt;
  opt.inner = Box<Gene>(Gene(BooleanGene{}));
  Gene g = opt;
  Rng rng(5);
  int active = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Randomize(g, rng);
    active += IsPresent(g);
  }
  EXPECT_NEAR(active / static_cast<double>(n), kOptionalActivationProbability,
              0.02);
}

TEST(Mutate, IntegerUnitStepsGoToNeighbours) {
  Rng rng(6);
  int unit_steps = 0;
  for (int i = 0; i < 2000; ++i) {
    Gene g = IntegerGene{5, 0, 10};
    Mutate(g, rng);
    int64_t v = g.As<IntegerGene>()->value;
    int64_t d = v > 5 ? v - 5 : 5 - v;
    ASSERT_GE(v, 0);
    ASSERT_LE(v, 10);
    // A step of 2^k, possibly clamped at 0 or 10.
    EXPECT_TRUE(d == 1 || d == 2 || d == 4 || d == 5 || v == 0 || v == 10)
        << v;
    if (d == 1) {
      EXPECT_TRUE(v == 4 || v == 6);
      ++unit_steps;
    }
  }
  EXPECT_GT(unit_steps, 0);
}

TEST(Mutate, IntegerStepsSpanInt64) {
  Rng rng(7);
  Gene g = IntegerGene{0, INT64_MIN, INT64_MAX};
  const int64_t far = int64_t{1} << 40;
  bool reached = false;
  for (int i = 0; i < 5000; ++i) {
    Mutate(g, rng);
    int64_t v = g.As<IntegerGene>()->value;
    reached = reached || v > far || v < -far;
  }
  EXPECT_TRUE(reached);
}

TEST(Mutate, BooleanFlips) {
  Rng rng(8);
  Gene g = BooleanGene{true};
  Mutate(g, rng);
  EXPECT_FALSE(g.As<BooleanGene>()->value);
}

TEST(Mutate, DateTimeSecondMovesByOne) {
  Rng rng(9);
  std::set<int64_t> seen;
  for (int i = 0; i < 200; ++i) {
    Gene g = DateTimeGene{};
    MutateLeaf(g, 5, rng);
    const auto& f = g.As<DateTimeGene>()->fields;
    seen.insert(f[5]);
    for (size_t c = 0; c < 5; ++c) EXPECT_EQ(f[c], DateTimeGene{}.fields[c]);
  }
  EXPECT_EQ(seen, (std::set<int64_t>{-1, 1}));
}

TEST(Mutate, ArrayLengthChangesByOne) {
  ArrayGene a;
  a.max_elements = 3;
  a.element_template = Box<Gene>(Gene(IntegerGene{0, 0, 9}));
  Gene g = a;
  Rng rng(10);
  for (int i = 0; i < 500; ++i) {
    size_t before = g.As<ArrayGene>()->elements.size();
    MutateLeaf(g, 0, rng);
    size_t after = g.As<ArrayGene>()->elements.size();
    EXPECT_EQ(std::max(before, after) - std::min(before, after), 1u);
    EXPECT_LE(after, 3u);
  }
}

TEST(Render, DateTimeKeepsInvalidComponents) {
  DateTimeGene d;
  EXPECT_EQ(FormatDateTime(d), "2000-01-01T00:00:00");
  d.fields[5] = -1;
  EXPECT_EQ(FormatDateTime(d), "2000-01-01T00:00:-1");
  d.fields = {1999, 13, 0, 25, 60, 60};
  EXPECT_EQ(FormatDateTime(d), "1999-13-00T25:60:60");
  d.fields = {2024, 2, 29, -1, 5, 7};
  EXPECT_EQ(FormatDateTime(d), "2024-02-29T-1:05:07");
}

TEST(Render, ObjectFieldOrderFollowsTheSchema) {
  ObjectGene o;
  o.names = {"id", "featured"};
  o.fields = {Gene(IntegerGene{7, 0, 100}), Gene(BooleanGene{false})};
  Gene g = o;
  std::string text = ToJson(g).dump();
  EXPECT_EQ(text, R"({"id":7,"featured":false})");
  EXPECT_EQ(nlohmann::json::parse(text),
            (nlohmann::json{{"featured", false}, {"id", 7}}));
}

TEST(Render, InactiveOptionalsAreOmitted) {
  OptionalGene opt;
  opt.inner = Box<Gene>(Gene(IntegerGene{3, 0, 9}));
  ObjectGene o;
  o.names = {"a", "b"};
  o.fields = {Gene(opt), Gene(BooleanGene{true})};
  EXPECT_EQ(ToJson(Gene(o)).dump(), R"({"b":true})");
  o.fields[0].As<OptionalGene>()->active = true;
  EXPECT_EQ(ToJson(Gene(o)).dump(), R"({"a":3,"b":true})");
}

TEST(LeafCount, InactiveOptionalCountsOnlyItsFlag) {
  OptionalGene opt;
  opt.inner = Box<Gene>(Gene(DateTimeGene{}));
  Gene g = opt;
  EXPECT_EQ(LeafCount(g), 1u);
  g.As<OptionalGene>()->active = true;
  EXPECT_EQ(LeafCount(g), 7u);
  OptionalGene locked;
  locked.locked_absent = true;
  locked.inner = Box<Gene>(Gene(ObjectGene{}));
  EXPECT_EQ(LeafCount(Gene(locked)), 0u);
}

// Property tests over the widest genotype in the fixtures.

TEST(GeneProperties, BoundsHoldUnderRandomOperationSequences) {
  Gene base = ActivityBody();
  Rng rng(11);
  for (int seq = 0; seq < 10000; ++seq) {
    Gene g = base;
    Randomize(g, rng);
    int steps = static_cast<int>(rng.UniformInt(1, 8));
    for (int s = 0; s < steps; ++s) {
      if (rng.Bernoulli(0.2)) {
        Randomize(g, rng);
      } else {
        Mutate(g, rng);
      }
    }
    ASSERT_TRUE(WithinBounds(g)) << "sequence " << seq;
    ASSERT_NO_THROW(nlohmann::json::parse(ToJson(g).dump()));
  }
}

TEST(GeneProperties, MutationIsLocal) {
  Gene base = ActivityBody();
  Rng rng(12);
  for (int trial = 0; trial < 10000; ++trial) {
    Gene g = base;
    Randomize(g, rng);
    size_t n = LeafCount(g);
    size_t index = rng.Index(n);
    Gene before = g;
    MutateLeaf(g, index, rng);
    auto a = LeafSnapshot(before);
    auto b = LeafSnapshot(g);
    if (a.size() == b.size()) {
      // Either one component changed or a clamped/bounded no-op happened.
      ASSERT_LE(DifferingLeaves(a, b), 1u) << "trial " << trial;
    } else {
      // Array add/remove: the snapshot grows or shrinks by whole elements and
      // the flattened length count changes by exactly one.
      ASSERT_NE(LeafCount(before), LeafCount(g));
    }
  }
}

TEST(GeneProperties, ArrayAddRemoveChangesLengthByOne) {
  Gene base = ActivityBody();
  Rng rng(13);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    Gene g = base;
    Randomize(g, rng);
    auto& obj = *g.As<ObjectGene>();
    Gene* tags = nullptr;
    for (size_t i = 0; i < obj.names.size(); ++i) {
      if (obj.names[i] == "tags") tags = &obj.fields[i];
    }
    ASSERT_NE(tags, nullptr);
    auto* opt = tags->As<OptionalGene>();
    if (!opt->active) continue;
    auto& arr = *opt->inner->As<ArrayGene>();
    size_t before = arr.elements.size();
    MutateLeaf(*tags, 1, rng);  // the array's length leaf
    size_t after = arr.elements.size();
    ASSERT_EQ(std::max(before, after) - std::min(before, after), 1u);
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(GeneProperties, CopiesAreIndependent) {
  Gene base = ActivityBody();
  Rng rng(14);
  for (int trial = 0; trial < 2000; ++trial) {
    Gene original = base;
    Randomize(original, rng);
    Gene frozen = original;
    Gene copy = original;
    for (int i = 0; i < 5; ++i) Mutate(copy, rng);
    ASSERT_EQ(original, frozen);
    ASSERT_EQ(ToJson(original).dump(), ToJson(frozen).dump());
  }
}

TEST(GeneProperties, SameSeedSameGenotype) {
  Gene base = ActivityBody();
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Gene a = base, b = base;
    Rng ra(seed), rb(seed);
    Randomize(a, ra);
    Randomize(b, rb);
    for (int i = 0; i < 10; ++i) {
      Mutate(a, ra);
      Mutate(b, rb);
    }
    ASSERT_EQ(a, b);
    ASSERT_EQ(ToJson(a).dump(), ToJson(b).dump());
  }
}

}  // namespace
}  // namespace restevo
