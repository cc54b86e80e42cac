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

#ifndef TLR__RELEVANCE_HPP_
#define TLR__RELEVANCE_HPP_

#include <cstddef>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tlr/gbm.hpp"
#include "tlr/geometry.hpp"
#include "tlr/taxonomy.hpp"

namespace tlr
{

/// Why a traffic light ended up relevant or not.
enum class RelevanceSource
{
  kClassified,          // propagated from a classified arrow
  kHistory,             // propagated from the sliding-window history
  kSinglePictogramRule, // all lights share one pictogram
  kUniformStateRule,    // all lights share one state
  kUnmatched,           // nothing vouched for this light
};

std::string to_label(RelevanceSource source);

/// One classified arrow detection.
struct ArrowObservation
{
  std::size_t detection_index = 0;  // index into frame.detections
  ArrowClass cls = ArrowClass::kStraight;
  ArrowFeatures features;
  double prob_relevant = 0.0;
  bool relevant = false;
};

struct LightAssignment
{
  std::size_t detection_index = 0;  // index into frame.detections
  bool relevant = false;
  RelevanceSource source = RelevanceSource::kUnmatched;
};

/// Per-frame verdict: every traffic-light detection of the frame appears
/// exactly once in `lights`.
struct RelevanceAssignment
{
  std::string frame_id;
  std::vector<LightAssignment> lights;
  std::vector<ArrowObservation> arrows;
  int rule_fired = 0;  // 1..5, the rule that decided the frame
};

/// Tiered pictogram fallback per arrow class; a tier is the set of
/// pictograms it accepts and the first tier with any matching light wins:
///   straight       -> [straight] [straight_left straight_right] [circle]
///   left           -> [left] [straight_left] [circle]
///   right          -> [right] [straight_right] [circle]
///   straight_left  -> [straight_left] [straight left] [circle]
///   straight_right -> [straight_right] [straight right] [circle]
const std::vector<std::vector<Pictogram>> & cascade_tiers(ArrowClass cls);

/// Maps each arrow to the lights it governs. `light_pictograms` holds one
/// entry per light; off lights (no pictogram) are never matched. Returns,
/// per arrow, the indices of matched lights in ascending order.
std::vector<std::vector<std::size_t>> match_pictograms_to_arrows(
  std::span<const ArrowClass> arrows,
  std::span<const std::optional<Pictogram>> light_pictograms);

/// Sliding window of the most recent frames' relevant arrow classes.
/// Lookup returns the newest non-empty entry.
class HistoryBuffer
{
public:
  explicit HistoryBuffer(std::size_t window = 30);

  void push(std::set<ArrowClass> relevant_classes);
  std::optional<std::set<ArrowClass>> lookup() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t window() const { return window_; }
  void clear() { entries_.clear(); }

private:
  std::size_t window_;
  std::deque<std::set<ArrowClass>> entries_;
};

/// Stateful per-sequence consumer applying the relevance rules in order:
///   (1) all lights share one state            -> all relevant
///   (2) all lights share one pictogram        -> all relevant
///   (3) arrows present                        -> classify, match, propagate
///   (4) no arrows, history available          -> match against history
///   (5) no arrows, no history                 -> all not relevant
/// Rules (1)/(2) consider non-off lights only; off lights always pass
/// through as not relevant. History is updated only by rule (3).
class RelevanceEngine
{
public:
  RelevanceEngine(const GBMModel & model, std::size_t window = 30, double threshold = 0.5);

  RelevanceAssignment process(const Frame & frame);

  const HistoryBuffer & history() const { return history_; }
  void reset() { history_.clear(); }

private:
  const GBMModel & model_;
  HistoryBuffer history_;
  double threshold_;
};

std::vector<RelevanceAssignment> run_sequence(
  const GBMModel & model, const std::vector<Frame> & frames, std::size_t window = 30,
  double threshold = 0.5);

}  // namespace tlr

#endif  // TLR__RELEVANCE_HPP_
