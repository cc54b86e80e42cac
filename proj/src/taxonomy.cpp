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

#include "tlr/taxonomy.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tlr/errors.hpp"

namespace tlr
{

namespace
{

// Ordered so that longer tokens are tried first ("red_yellow" before "red").
constexpr std::array<std::pair<std::string_view, State>, 5> kStateTokens = {{
  {"red_yellow", State::kRedYellow},
  {"red", State::kRed},
  {"yellow", State::kYellow},
  {"green", State::kGreen},
  {"off", State::kOff},
}};

constexpr std::array<std::pair<std::string_view, Pictogram>, 6> kPictogramTokens = {{
  {"circle", Pictogram::kCircle},
  {"straight_left", Pictogram::kStraightLeft},
  {"straight_right", Pictogram::kStraightRight},
  {"straight", Pictogram::kStraight},
  {"left", Pictogram::kLeft},
  {"right", Pictogram::kRight},
}};

std::set<TLClass> make_class_set(
  std::initializer_list<State> states, std::initializer_list<Pictogram> pictograms,
  bool with_off = false)
{
  std::set<TLClass> out;
  for (State s : states) {
    for (Pictogram p : pictograms) {
      out.insert(TLClass{s, p});
    }
  }
  if (with_off) {
    out.insert(TLClass{State::kOff, std::nullopt});
  }
  return out;
}

}  // namespace

std::string to_label(State state)
{
  switch (state) {
    case State::kRed:
      return "red";
    case State::kYellow:
      return "yellow";
    case State::kRedYellow:
      return "red_yellow";
    case State::kGreen:
      return "green";
    case State::kOff:
      return "off";
  }
  throw std::logic_error("unreachable state value");
}

std::string to_label(Pictogram pictogram)
{
  switch (pictogram) {
    case Pictogram::kCircle:
      return "circle";
    case Pictogram::kStraight:
      return "straight";
    case Pictogram::kLeft:
      return "left";
    case Pictogram::kRight:
      return "right";
    case Pictogram::kStraightLeft:
      return "straight_left";
    case Pictogram::kStraightRight:
      return "straight_right";
  }
  throw std::logic_error("unreachable pictogram value");
}

std::string to_label(ArrowClass cls)
{
  switch (cls) {
    case ArrowClass::kStraight:
      return "straight";
    case ArrowClass::kLeft:
      return "left";
    case ArrowClass::kRight:
      return "right";
    case ArrowClass::kStraightLeft:
      return "straight_left";
    case ArrowClass::kStraightRight:
      return "straight_right";
  }
  throw std::logic_error("unreachable arrow class value");
}

State parse_state(std::string_view label)
{
  for (const auto & [token, state] : kStateTokens) {
    if (label == token) {
      return state;
    }
  }
  throw ValidationError("unknown state label: '" + std::string(label) + "'");
}

Pictogram parse_pictogram(std::string_view label)
{
  for (const auto & [token, pictogram] : kPictogramTokens) {
    if (label == token) {
      return pictogram;
    }
  }
  throw ValidationError("unknown pictogram label: '" + std::string(label) + "'");
}

ArrowClass parse_arrow_class(std::string_view label)
{
  for (ArrowClass cls : kAllArrowClasses) {
    if (label == to_label(cls)) {
      return cls;
    }
  }
  throw ValidationError("unknown arrow class label: '" + std::string(label) + "'");
}

std::string to_label(const TLClass & cls)
{
  if (!cls.pictogram) {
    return to_label(cls.state);
  }
  return to_label(cls.state) + "_" + to_label(*cls.pictogram);
}

TLClass parse_tl_class(std::string_view label)
{
  for (const auto & [token, state] : kStateTokens) {
    if (label == token) {
      if (state != State::kOff) {
        throw ValidationError(
          "traffic-light class '" + std::string(label) + "' is missing a pictogram");
      }
      return TLClass{State::kOff, std::nullopt};
    }
    if (label.size() > token.size() + 1 && label.substr(0, token.size()) == token &&
        label[token.size()] == '_') {
      if (state == State::kOff) {
        throw ValidationError("class 'off' carries no pictogram: '" + std::string(label) + "'");
      }
      return TLClass{state, parse_pictogram(label.substr(token.size() + 1))};
    }
  }
  throw ValidationError("unknown traffic-light class label: '" + std::string(label) + "'");
}

TLClass parse_tl_class(std::string_view label, const DatasetSchema & schema)
{
  TLClass cls = parse_tl_class(label);
  if (!schema.contains(cls)) {
    throw ValidationError(
      "class '" + std::string(label) + "' is not a valid combination in schema '" + schema.name +
      "'");
  }
  return cls;
}

State project_to_state(const TLClass & cls)
{
  return cls.state;
}

std::set<TLClass> dtld_class_set()
{
  auto classes = make_class_set(
    {State::kRed, State::kYellow, State::kRedYellow, State::kGreen},
    {Pictogram::kCircle, Pictogram::kStraight, Pictogram::kLeft, Pictogram::kRight,
     Pictogram::kStraightLeft},
    true);
  classes.erase(TLClass{State::kRedYellow, Pictogram::kStraightLeft});
  return classes;
}

const DatasetSchema & builtin_schema(std::string_view name)
{
  static const std::map<std::string, DatasetSchema, std::less<>> schemas = [] {
    std::map<std::string, DatasetSchema, std::less<>> m;
    m["bstld"] = DatasetSchema{
      "bstld",
      make_class_set(
        {State::kRed, State::kYellow, State::kGreen}, {Pictogram::kCircle}, true),
      1280.0, 720.0};
    {
      auto lisa = make_class_set(
        {State::kRed, State::kYellow, State::kGreen}, {Pictogram::kCircle, Pictogram::kLeft});
      lisa.insert(TLClass{State::kGreen, Pictogram::kStraight});
      m["lisa"] = DatasetSchema{"lisa", std::move(lisa), 1280.0, 960.0};
    }
    m["hdtlr"] = DatasetSchema{
      "hdtlr",
      make_class_set(
        {State::kRed, State::kYellow, State::kRedYellow, State::kGreen},
        {Pictogram::kCircle, Pictogram::kStraight, Pictogram::kLeft, Pictogram::kRight}),
      1280.0, 960.0};
    m["dtld"] = DatasetSchema{"dtld", dtld_class_set(), 2048.0, 1024.0};
    return m;
  }();
  auto it = schemas.find(name);
  if (it == schemas.end()) {
    throw ValidationError("unknown builtin schema: '" + std::string(name) + "'");
  }
  return it->second;
}

DatasetSchema schema_from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw ValidationError("schema JSON must be an object");
  }
  for (const auto & key : {"name", "classes", "image_width", "image_height"}) {
    if (!j.contains(key)) {
      throw ValidationError(std::string("schema JSON is missing field '") + key + "'");
    }
  }
  DatasetSchema schema;
  schema.name = j.at("name").get<std::string>();
  schema.image_width = j.at("image_width").get<double>();
  schema.image_height = j.at("image_height").get<double>();
  if (schema.image_width <= 0.0 || schema.image_height <= 0.0) {
    throw ValidationError("schema image dimensions must be positive");
  }
  for (const auto & entry : j.at("classes")) {
    schema.classes.insert(parse_tl_class(entry.get<std::string>()));
  }
  if (schema.classes.empty()) {
    throw ValidationError("schema class set is empty");
  }
  return schema;
}

nlohmann::json schema_to_json(const DatasetSchema & schema)
{
  nlohmann::json classes = nlohmann::json::array();
  for (const TLClass & cls : schema.classes) {
    classes.push_back(to_label(cls));
  }
  return nlohmann::json{
    {"name", schema.name},
    {"classes", classes},
    {"image_width", schema.image_width},
    {"image_height", schema.image_height},
  };
}

DatasetSchema load_schema(const std::string & name_or_path)
{
  for (const char * builtin : {"bstld", "lisa", "hdtlr", "dtld"}) {
    if (name_or_path == builtin) {
      return builtin_schema(name_or_path);
    }
  }
  std::ifstream in(name_or_path);
  if (!in) {
    throw ValidationError("cannot open schema file: " + name_or_path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError("invalid schema JSON in " + name_or_path + ": " + e.what());
  }
  return schema_from_json(j);
}

}  // namespace tlr
