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

#ifndef TLR__GEOMETRY_HPP_
#define TLR__GEOMETRY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tlr/taxonomy.hpp"

namespace tlr
{

/// Axis-aligned box in center-size convention, sub-pixel continuous.
/// Width and height are strictly positive; all fields finite.
struct BBox
{
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  static BBox from_center_size(double cx, double cy, double w, double h);
  static BBox from_corners(double x_min, double y_min, double x_max, double y_max);

  double x_min() const { return cx - w / 2.0; }
  double x_max() const { return cx + w / 2.0; }
  double y_min() const { return cy - h / 2.0; }
  double y_max() const { return cy + h / 2.0; }
  double area() const { return w * h; }

  /// Intersects the box with [0,width]x[0,height]. Throws ValidationError
  /// if nothing with positive area remains.
  BBox clamped_to(double width, double height) const;

  bool operator==(const BBox &) const = default;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox & a, const BBox & b);

/// Signed horizontal offset of the box center from the image center,
/// as a fraction of the image width: cx/width - 0.5.
double center_deviation(const BBox & box, double image_width);

/// Class carried by a detection record: a traffic-light class, a
/// directional-arrow class, or a bare state (the projected form used by
/// the 3-state evaluation).
using ObjectClass = std::variant<TLClass, ArrowClass, State>;

std::string class_label(const ObjectClass & cls);

inline bool is_traffic_light(const ObjectClass & cls)
{
  return std::holds_alternative<TLClass>(cls);
}
inline bool is_arrow(const ObjectClass & cls)
{
  return std::holds_alternative<ArrowClass>(cls);
}

/// Detector output: box, class, confidence in [0,1].
struct Detection
{
  BBox bbox;
  ObjectClass cls;
  double confidence = 0.0;

  bool operator==(const Detection &) const = default;
};

/// Annotation record. `relevant` is set only on arrow labels.
struct GroundTruth
{
  BBox bbox;
  ObjectClass cls;
  std::optional<bool> relevant;

  bool operator==(const GroundTruth &) const = default;
};

/// One image worth of records. Boxes are clamped to the image bounds at
/// ingestion, so every stored box lies within [0,width]x[0,height].
struct Frame
{
  std::string id;
  double width = 0.0;
  double height = 0.0;
  std::optional<std::int64_t> timestamp_ms;
  std::vector<Detection> detections;
  std::vector<GroundTruth> ground_truths;

  bool operator==(const Frame &) const = default;
};

}  // namespace tlr

#endif  // TLR__GEOMETRY_HPP_
