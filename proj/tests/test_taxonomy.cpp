// Copyright 2026 The tlr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "tlr/errors.hpp"
#include "tlr/taxonomy.hpp"

using namespace tlr;

TEST_CASE("parse_tl_class handles the pictogram-free class")
{
  const TLClass off = parse_tl_class("off");
  CHECK(off.state == State::kOff);
  CHECK_FALSE(off.pictogram.has_value());
}

TEST_CASE("parse_tl_class maps state and pictogram tokens")
{
  CHECK(parse_tl_class("green_left") == TLClass{State::kGreen, Pictogram::kLeft});
  CHECK(parse_tl_class("red_circle") == TLClass{State::kRed, Pictogram::kCircle});
  CHECK(
    parse_tl_class("red_yellow_straight") == TLClass{State::kRedYellow, Pictogram::kStraight});
  CHECK(
    parse_tl_class("yellow_straight_left") == TLClass{State::kYellow, Pictogram::kStraightLeft});
  CHECK(
    parse_tl_class("green_straight_right") ==
    TLClass{State::kGreen, Pictogram::kStraightRight});
}

TEST_CASE("parse_tl_class rejects junk with the offending token")
{
  CHECK_THROWS_WITH_AS(
    parse_tl_class("blue_circle"), doctest::Contains("blue_circle"), ValidationError);
  CHECK_THROWS_AS(parse_tl_class("red"), ValidationError);       // missing pictogram
  CHECK_THROWS_AS(parse_tl_class("off_circle"), ValidationError);
  CHECK_THROWS_AS(parse_tl_class("red_blueish"), ValidationError);
  CHECK_THROWS_AS(parse_tl_class(""), ValidationError);
}

TEST_CASE("dtld excludes red_yellow + straight_left")
{
  const DatasetSchema & dtld = builtin_schema("dtld");
  CHECK_THROWS_AS(parse_tl_class("red_yellow_straight_left", dtld), ValidationError);
  // Syntactically fine outside the schema check.
  CHECK(
    parse_tl_class("red_yellow_straight_left") ==
    TLClass{State::kRedYellow, Pictogram::kStraightLeft});
}

TEST_CASE("dtld class set is the documented 20")
{
  const auto classes = dtld_class_set();
  CHECK(classes.size() == 20);
  CHECK(classes.count(TLClass{State::kRedYellow, Pictogram::kCircle}) == 1);
  CHECK(classes.count(TLClass{State::kRedYellow, Pictogram::kStraightLeft}) == 0);

  std::size_t without_pictogram = 0;
  for (const TLClass & cls : classes) {
    if (!cls.pictogram) {
      ++without_pictogram;
      CHECK(cls.state == State::kOff);
    }
  }
  CHECK(without_pictogram == 1);
}

TEST_CASE("project_to_state drops the pictogram")
{
  CHECK(project_to_state(TLClass{State::kRed, Pictogram::kLeft}) == State::kRed);
  CHECK(project_to_state(TLClass{State::kOff, std::nullopt}) == State::kOff);
  CHECK(project_to_state(TLClass{State::kGreen, Pictogram::kStraightLeft}) == State::kGreen);
}

TEST_CASE("project_to_state covers every state over the dtld set")
{
  std::set<State> seen;
  for (const TLClass & cls : dtld_class_set()) {
    seen.insert(project_to_state(cls));
  }
  CHECK(seen == std::set<State>{State::kRed, State::kYellow, State::kRedYellow, State::kGreen,
                                State::kOff});
}

TEST_CASE("labels round-trip for every class of every builtin schema")
{
  for (const char * name : {"bstld", "lisa", "hdtlr", "dtld"}) {
    const DatasetSchema & schema = builtin_schema(name);
    for (const TLClass & cls : schema.classes) {
      CAPTURE(to_label(cls));
      CHECK(parse_tl_class(to_label(cls)) == cls);
      CHECK(parse_tl_class(to_label(cls), schema) == cls);
    }
  }
  for (ArrowClass cls : kAllArrowClasses) {
    CHECK(parse_arrow_class(to_label(cls)) == cls);
  }
}

TEST_CASE("builtin schemas match the published class inventories")
{
  CHECK(builtin_schema("bstld").classes.size() == 4);
  CHECK(builtin_schema("lisa").classes.size() == 7);
  CHECK(builtin_schema("hdtlr").classes.size() == 16);
  CHECK(builtin_schema("dtld").classes.size() == 20);

  const std::set<TLClass> bstld_expected = {
    {State::kGreen, Pictogram::kCircle},
    {State::kRed, Pictogram::kCircle},
    {State::kYellow, Pictogram::kCircle},
    {State::kOff, std::nullopt},
  };
  CHECK(builtin_schema("bstld").classes == bstld_expected);

  const std::set<TLClass> lisa_expected = {
    {State::kGreen, Pictogram::kCircle}, {State::kRed, Pictogram::kCircle},
    {State::kYellow, Pictogram::kCircle}, {State::kGreen, Pictogram::kStraight},
    {State::kGreen, Pictogram::kLeft},   {State::kRed, Pictogram::kLeft},
    {State::kYellow, Pictogram::kLeft},
  };
  CHECK(builtin_schema("lisa").classes == lisa_expected);

  // hdtlr: four vehicle states x circle/straight/left/right, no off.
  const DatasetSchema & hdtlr = builtin_schema("hdtlr");
  for (const TLClass & cls : hdtlr.classes) {
    CHECK(cls.pictogram.has_value());
    CHECK(cls.state != State::kOff);
    CHECK(*cls.pictogram != Pictogram::kStraightLeft);
    CHECK(*cls.pictogram != Pictogram::kStraightRight);
  }

  CHECK(builtin_schema("bstld").image_width == 1280.0);
  CHECK(builtin_schema("bstld").image_height == 720.0);
  CHECK(builtin_schema("lisa").image_height == 960.0);
  CHECK(builtin_schema("dtld").image_width == 2048.0);
  CHECK(builtin_schema("dtld").image_height == 1024.0);

  CHECK_THROWS_AS(builtin_schema("nope"), ValidationError);
}

TEST_CASE("schema JSON round-trips and rejects defects")
{
  const DatasetSchema & dtld = builtin_schema("dtld");
  const DatasetSchema back = schema_from_json(schema_to_json(dtld));
  CHECK(back.name == dtld.name);
  CHECK(back.classes == dtld.classes);
  CHECK(back.image_width == dtld.image_width);
  CHECK(back.image_height == dtld.image_height);

  nlohmann::json bad = schema_to_json(dtld);
  bad.erase("image_width");
  CHECK_THROWS_AS(schema_from_json(bad), ValidationError);

  nlohmann::json bad_class = schema_to_json(dtld);
  bad_class["classes"].push_back("purple_circle");
  CHECK_THROWS_AS(schema_from_json(bad_class), ValidationError);
}

TEST_CASE("load_schema resolves builtin names and file paths")
{
  CHECK(load_schema("lisa").classes.size() == 7);

  testutil::TempDir dir("schema");
  const auto path = dir.path() / "custom.json";
  {
    std::ofstream out(path);
    out << schema_to_json(builtin_schema("hdtlr")).dump();
  }
  const DatasetSchema loaded = load_schema(path.string());
  CHECK(loaded.name == "hdtlr");
  CHECK(loaded.classes == builtin_schema("hdtlr").classes);

  CHECK_THROWS_AS(load_schema((dir.path() / "missing.json").string()), ValidationError);
  {
    std::ofstream out(dir.path() / "broken.json");
    out << "{not json";
  }
  CHECK_THROWS_AS(load_schema((dir.path() / "broken.json").string()), ValidationError);
}
