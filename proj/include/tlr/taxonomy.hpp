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

#ifndef TLR__TAXONOMY_HPP_
#define TLR__TAXONOMY_HPP_

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace tlr
{

/// Signal state of a traffic light. `kOff` is the only state that carries
/// no pictogram.
enum class State : std::uint8_t
{
  kRed,
  kYellow,
  kRedYellow,
  kGreen,
  kOff,
};

/// Symbol inside the traffic-light lens.
enum class Pictogram : std::uint8_t
{
  kCircle,
  kStraight,
  kLeft,
  kRight,
  kStraightLeft,
  kStraightRight,
};

/// Class of a directional arrow marking painted on the road surface.
enum class ArrowClass : std::uint8_t
{
  kStraight,
  kLeft,
  kRight,
  kStraightLeft,
  kStraightRight,
};

inline constexpr std::array<State, 5> kAllStates = {
  State::kRed, State::kYellow, State::kRedYellow, State::kGreen, State::kOff};

inline constexpr std::array<Pictogram, 6> kAllPictograms = {
  Pictogram::kCircle,       Pictogram::kStraight,     Pictogram::kLeft,
  Pictogram::kRight,        Pictogram::kStraightLeft, Pictogram::kStraightRight};

// Canonical order; one-hot feature encoding follows it.
inline constexpr std::array<ArrowClass, 5> kAllArrowClasses = {
  ArrowClass::kStraight, ArrowClass::kLeft, ArrowClass::kRight,
  ArrowClass::kStraightLeft, ArrowClass::kStraightRight};

std::string to_label(State state);
std::string to_label(Pictogram pictogram);
std::string to_label(ArrowClass cls);

State parse_state(std::string_view label);
Pictogram parse_pictogram(std::string_view label);
ArrowClass parse_arrow_class(std::string_view label);

/// A traffic-light class: state plus pictogram. The pictogram is absent
/// exactly when the state is off.
struct TLClass
{
  State state;
  std::optional<Pictogram> pictogram;

  bool operator==(const TLClass &) const = default;
  auto operator<=>(const TLClass &) const = default;
};

/// Canonical snake_case identifier, state first: "red_yellow_straight", "off".
std::string to_label(const TLClass & cls);

/// Parses a canonical identifier. Throws ValidationError naming the
/// offending token for anything that is not a valid state/pictogram pair.
TLClass parse_tl_class(std::string_view label);

/// Drops the pictogram; used by the state-projected evaluation.
State project_to_state(const TLClass & cls);

/// Class inventory and image geometry of one dataset.
struct DatasetSchema
{
  std::string name;
  std::set<TLClass> classes;
  double image_width = 0.0;
  double image_height = 0.0;

  bool contains(const TLClass & cls) const { return classes.count(cls) > 0; }
};

/// As parse_tl_class, but additionally rejects classes outside `schema`
/// (e.g. red_yellow + straight_left under the dtld schema).
TLClass parse_tl_class(std::string_view label, const DatasetSchema & schema);

/// The 20-class set: 4 states x 5 pictograms, minus (red_yellow,
/// straight_left), plus off.
std::set<TLClass> dtld_class_set();

/// Built-in schemas: "bstld", "lisa", "hdtlr", "dtld".
const DatasetSchema & builtin_schema(std::string_view name);

DatasetSchema schema_from_json(const nlohmann::json & j);
nlohmann::json schema_to_json(const DatasetSchema & schema);

/// Resolves a --schema argument: a built-in name or a path to a schema
/// JSON file.
DatasetSchema load_schema(const std::string & name_or_path);

}  // namespace tlr

#endif  // TLR__TAXONOMY_HPP_
