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

#include "tlr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tlr/errors.hpp"

namespace tlr
{

namespace
{

double next_unit(std::mt19937_64 & rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string frame_name(const char * prefix, int index)
{
  std::ostringstream out;
  out << prefix << '_';
  out.width(6);
  out.fill('0');
  out << index;
  return out.str();
}

BBox boxed_into(
  double cx, double cy, double w, double h, double width, double height)
{
  cx = std::clamp(cx, w / 2.0, width - w / 2.0);
  cy = std::clamp(cy, h / 2.0, height - h / 2.0);
  return BBox::from_center_size(cx, cy, w, h);
}

}  // namespace

double synth_class_offset(ArrowClass cls)
{
  switch (cls) {
    case ArrowClass::kStraight:
      return 0.0;
    case ArrowClass::kLeft:
      return -0.05;
    case ArrowClass::kRight:
      return 0.05;
    case ArrowClass::kStraightLeft:
      return -0.025;
    case ArrowClass::kStraightRight:
      return 0.025;
  }
  throw std::logic_error("unreachable arrow class");
}

bool synth_relevance_rule(double dev_signed, ArrowClass cls)
{
  return std::abs(dev_signed - synth_class_offset(cls)) < kSynthBand;
}

bool synth_near_boundary(double dev_signed, ArrowClass cls)
{
  return std::abs(std::abs(dev_signed - synth_class_offset(cls)) - kSynthBand) <
         kSynthBoundaryMargin;
}

std::vector<Frame> synth_arrow_frames(const SynthArrowParams & params)
{
  if (params.rows < 1 || params.width <= 0.0 || params.height <= 0.0) {
    throw ValidationError("invalid synthetic arrow parameters");
  }
  std::mt19937_64 rng(params.seed);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(params.rows));
  int i = 0;
  while (i < params.rows) {
    const double cx = next_unit(rng) * params.width;
    const double cy = params.height * (0.55 + 0.4 * next_unit(rng));
    const double w = params.width * (0.02 + 0.03 * next_unit(rng));
    const double h = params.height * (0.06 + 0.06 * next_unit(rng));
    const ArrowClass cls = kAllArrowClasses[rng() % kAllArrowClasses.size()];

    const BBox box = boxed_into(cx, cy, w, h, params.width, params.height);
    const double dev = box.cx / params.width - 0.5;
    if (synth_near_boundary(dev, cls)) {
      continue;
    }

    Frame frame;
    frame.id = frame_name("synth", i);
    frame.width = params.width;
    frame.height = params.height;
    frame.timestamp_ms = static_cast<std::int64_t>(i) * 25;
    frame.ground_truths.push_back(GroundTruth{box, cls, synth_relevance_rule(dev, cls)});
    frames.push_back(std::move(frame));
    ++i;
  }
  return frames;
}

std::vector<Frame> synth_stream(const SynthStreamParams & params)
{
  if (params.frames < 1 || params.arrows_per_frame < 0 || params.lights_per_frame < 0 ||
      params.width <= 0.0 || params.height <= 0.0) {
    throw ValidationError("invalid synthetic stream parameters");
  }
  const std::vector<TLClass> classes = [] {
    const auto set = dtld_class_set();
    return std::vector<TLClass>(set.begin(), set.end());
  }();

  std::mt19937_64 rng(params.seed);
  std::vector<Frame> frames;
  frames.reserve(static_cast<std::size_t>(params.frames));
  for (int i = 0; i < params.frames; ++i) {
    Frame frame;
    frame.id = frame_name("stream", i);
    frame.width = params.width;
    frame.height = params.height;
    frame.timestamp_ms = static_cast<std::int64_t>(i) * 25;

    for (int l = 0; l < params.lights_per_frame; ++l) {
      const double cx = next_unit(rng) * params.width;
      const double cy = params.height * (0.05 + 0.35 * next_unit(rng));
      const double w = params.width * (0.004 + 0.006 * next_unit(rng));
      const double h = 2.5 * w;
      const TLClass cls = classes[rng() % classes.size()];
      frame.detections.push_back(Detection{
        boxed_into(cx, cy, w, h, params.width, params.height), cls,
        0.3 + 0.7 * next_unit(rng)});
    }
    for (int a = 0; a < params.arrows_per_frame; ++a) {
      const double cx = next_unit(rng) * params.width;
      const double cy = params.height * (0.55 + 0.4 * next_unit(rng));
      const double w = params.width * (0.02 + 0.03 * next_unit(rng));
      const double h = params.height * (0.06 + 0.06 * next_unit(rng));
      const ArrowClass cls = kAllArrowClasses[rng() % kAllArrowClasses.size()];
      frame.detections.push_back(Detection{
        boxed_into(cx, cy, w, h, params.width, params.height), cls,
        0.3 + 0.7 * next_unit(rng)});
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace tlr
