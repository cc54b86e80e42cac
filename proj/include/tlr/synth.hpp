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

#ifndef TLR__SYNTH_HPP_
#define TLR__SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "tlr/geometry.hpp"
#include "tlr/taxonomy.hpp"

namespace tlr
{

// Seeded generators for training data and replay streams. Both are
// bit-deterministic for a fixed seed: the raw engine output is mapped to
// doubles directly instead of going through distribution adaptors.

/// Ground truth the synthetic arrow labels follow: an arrow is relevant
/// iff its signed center deviation lies within +/- kSynthBand of its
/// class-dependent lane offset. Arrows closer than kSynthBoundaryMargin
/// to a band edge are not generated (their relevance is ambiguous even to
/// a human labeler).
inline constexpr double kSynthBand = 0.12;
inline constexpr double kSynthBoundaryMargin = 0.025;

double synth_class_offset(ArrowClass cls);
bool synth_relevance_rule(double dev_signed, ArrowClass cls);
bool synth_near_boundary(double dev_signed, ArrowClass cls);

struct SynthArrowParams
{
  int rows = 2000;
  std::uint64_t seed = 7;
  double width = 2048.0;
  double height = 1024.0;
};

/// Labeled arrow ground truths, one frame per row, for classifier training.
std::vector<Frame> synth_arrow_frames(const SynthArrowParams & params);

struct SynthStreamParams
{
  int frames = 1200;
  int arrows_per_frame = 20;
  int lights_per_frame = 20;
  std::uint64_t seed = 7;
  double width = 2048.0;
  double height = 1024.0;
};

/// Detection stream (confidences included) replaying a drive: lights in
/// the upper image half, arrows in the lower half, 25 ms frame spacing.
std::vector<Frame> synth_stream(const SynthStreamParams & params);

}  // namespace tlr

#endif  // TLR__SYNTH_HPP_
