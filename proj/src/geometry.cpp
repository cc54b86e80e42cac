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

#include "tlr/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "tlr/errors.hpp"

namespace tlr
{

BBox BBox::from_center_size(double cx, double cy, double w, double h)
{
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) || !std::isfinite(h)) {
    throw ValidationError("bbox fields must be finite");
  }
  if (w <= 0.0 || h <= 0.0) {
    throw ValidationError("bbox width and height must be positive");
  }
  return BBox{cx, cy, w, h};
}

BBox BBox::from_corners(double x_min, double y_min, double x_max, double y_max)
{
  return from_center_size(
    (x_min + x_max) / 2.0, (y_min + y_max) / 2.0, x_max - x_min, y_max - y_min);
}

BBox BBox::clamped_to(double width, double height) const
{
  // Boxes already inside pass through untouched, keeping parse/write
  // round trips bit-exact; the tolerance absorbs corner/center conversion
  // noise of boxes clamped on an earlier pass.
  const double eps = 1e-9 * std::max({width, height, 1.0});
  if (x_min() >= -eps && y_min() >= -eps && x_max() <= width + eps && y_max() <= height + eps) {
    return *this;
  }
  const double x0 = std::max(x_min(), 0.0);
  const double y0 = std::max(y_min(), 0.0);
  const double x1 = std::min(x_max(), width);
  const double y1 = std::min(y_max(), height);
  if (x1 - x0 <= 0.0 || y1 - y0 <= 0.0) {
    throw ValidationError("bbox lies outside the image bounds");
  }
  return from_corners(x0, y0, x1, y1);
}

double iou(const BBox & a, const BBox & b)
{
  const double ix = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double iy = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (ix <= 0.0 || iy <= 0.0) {
    return 0.0;
  }
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

double center_deviation(const BBox & box, double image_width)
{
  if (image_width <= 0.0) {
    throw ValidationError("image width must be positive");
  }
  return box.cx / image_width - 0.5;
}

std::string class_label(const ObjectClass & cls)
{
  return std::visit([](const auto & c) { return to_label(c); }, cls);
}

}  // namespace tlr
