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

#include "tlr/relevance.hpp"

#include <algorithm>

#include "tlr/errors.hpp"

namespace tlr
{

std::string to_label(RelevanceSource source)
{
  switch (source) {
    case RelevanceSource::kClassified:
      return "classified";
    case RelevanceSource::kHistory:
      return "history";
    case RelevanceSource::kSinglePictogramRule:
      return "single_pictogram_rule";
    case RelevanceSource::kUniformStateRule:
      return "uniform_state_rule";
    case RelevanceSource::kUnmatched:
      return "unmatched";
  }
  throw std::logic_error("unreachable relevance source");
}

const std::vector<std::vector<Pictogram>> & cascade_tiers(ArrowClass cls)
{
  using P = Pictogram;
  static const std::vector<std::vector<Pictogram>> straight = {
    {P::kStraight}, {P::kStraightLeft, P::kStraightRight}, {P::kCircle}};
  static const std::vector<std::vector<Pictogram>> left = {
    {P::kLeft}, {P::kStraightLeft}, {P::kCircle}};
  static const std::vector<std::vector<Pictogram>> right = {
    {P::kRight}, {P::kStraightRight}, {P::kCircle}};
  static const std::vector<std::vector<Pictogram>> straight_left = {
    {P::kStraightLeft}, {P::kStraight, P::kLeft}, {P::kCircle}};
  static const std::vector<std::vector<Pictogram>> straight_right = {
    {P::kStraightRight}, {P::kStraight, P::kRight}, {P::kCircle}};
  switch (cls) {
    case ArrowClass::kStraight:
      return straight;
    case ArrowClass::kLeft:
      return left;
    case ArrowClass::kRight:
      return right;
    case ArrowClass::kStraightLeft:
      return straight_left;
    case ArrowClass::kStraightRight:
      return straight_right;
  }
  throw std::logic_error("unreachable arrow class");
}

std::vector<std::vector<std::size_t>> match_pictograms_to_arrows(
  std::span<const ArrowClass> arrows, std::span<const std::optional<Pictogram>> light_pictograms)
{
  std::vector<std::vector<std::size_t>> matched(arrows.size());
  for (std::size_t a = 0; a < arrows.size(); ++a) {
    for (const std::vector<Pictogram> & tier : cascade_tiers(arrows[a])) {
      for (std::size_t l = 0; l < light_pictograms.size(); ++l) {
        const auto & pict = light_pictograms[l];
        if (pict && std::find(tier.begin(), tier.end(), *pict) != tier.end()) {
          matched[a].push_back(l);
        }
      }
      if (!matched[a].empty()) {
        break;
      }
    }
  }
  return matched;
}

HistoryBuffer::HistoryBuffer(std::size_t window) : window_(window)
{
  if (window_ == 0) {
    throw ValidationError("history window must be at least 1");
  }
}

void HistoryBuffer::push(std::set<ArrowClass> relevant_classes)
{
  entries_.push_back(std::move(relevant_classes));
  while (entries_.size() > window_) {
    entries_.pop_front();
  }
}

std::optional<std::set<ArrowClass>> HistoryBuffer::lookup() const
{
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (!it->empty()) {
      return *it;
    }
  }
  return std::nullopt;
}

RelevanceEngine::RelevanceEngine(const GBMModel & model, std::size_t window, double threshold)
: model_(model), history_(window), threshold_(threshold)
{
  if (!(threshold_ >= 0.0 && threshold_ <= 1.0)) {
    throw ValidationError("relevance threshold must lie in [0, 1]");
  }
}

namespace
{

// Marks lights governed by a set of arrow classes. A light is relevant if
// any matched arrow is; `relevant` runs parallel to `arrows`.
void propagate(
  std::span<const ArrowClass> arrows, const std::vector<bool> & relevant,
  std::span<const std::optional<Pictogram>> pictograms, RelevanceSource source,
  std::vector<LightAssignment> & lights)
{
  const auto matched = match_pictograms_to_arrows(arrows, pictograms);
  for (std::size_t a = 0; a < arrows.size(); ++a) {
    for (std::size_t l : matched[a]) {
      LightAssignment & light = lights[l];
      if (light.source == RelevanceSource::kUnmatched) {
        light.source = source;
      }
      light.relevant = light.relevant || relevant[a];
    }
  }
}

}  // namespace

RelevanceAssignment RelevanceEngine::process(const Frame & frame)
{
  RelevanceAssignment out;
  out.frame_id = frame.id;

  std::vector<std::size_t> light_indices;
  std::vector<std::optional<Pictogram>> pictograms;  // parallel to light_indices
  std::vector<const TLClass *> light_classes;
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    const Detection & det = frame.detections[i];
    if (const TLClass * cls = std::get_if<TLClass>(&det.cls)) {
      light_indices.push_back(i);
      pictograms.push_back(cls->pictogram);
      light_classes.push_back(cls);
    } else if (const ArrowClass * arrow = std::get_if<ArrowClass>(&det.cls)) {
      ArrowObservation obs;
      obs.detection_index = i;
      obs.cls = *arrow;
      obs.features = extract_features(det.bbox, *arrow, frame.width, frame.height);
      obs.prob_relevant = model_.predict_proba(obs.features.to_vector());
      obs.relevant = obs.prob_relevant >= threshold_;
      out.arrows.push_back(std::move(obs));
    }
  }

  out.lights.resize(light_indices.size());
  for (std::size_t l = 0; l < light_indices.size(); ++l) {
    out.lights[l].detection_index = light_indices[l];
  }

  std::vector<std::size_t> non_off;
  for (std::size_t l = 0; l < light_classes.size(); ++l) {
    if (light_classes[l]->state != State::kOff) {
      non_off.push_back(l);
    }
  }

  // Rule 1: one shared state means every (non-off) light applies to us.
  if (!non_off.empty()) {
    const State first = light_classes[non_off.front()]->state;
    const bool uniform_state = std::all_of(non_off.begin(), non_off.end(), [&](std::size_t l) {
      return light_classes[l]->state == first;
    });
    if (uniform_state) {
      for (std::size_t l : non_off) {
        out.lights[l].relevant = true;
        out.lights[l].source = RelevanceSource::kUniformStateRule;
      }
      out.rule_fired = 1;
      return out;
    }
  }

  // Rule 2: one shared pictogram (single lane).
  if (!non_off.empty()) {
    const Pictogram first = *pictograms[non_off.front()];
    const bool uniform_pict = std::all_of(non_off.begin(), non_off.end(), [&](std::size_t l) {
      return *pictograms[l] == first;
    });
    if (uniform_pict) {
      for (std::size_t l : non_off) {
        out.lights[l].relevant = true;
        out.lights[l].source = RelevanceSource::kSinglePictogramRule;
      }
      out.rule_fired = 2;
      return out;
    }
  }

  if (!out.arrows.empty()) {
    // Rule 3: classify arrows and propagate their relevance.
    std::vector<ArrowClass> classes;
    std::vector<bool> relevant;
    std::set<ArrowClass> relevant_classes;
    for (const ArrowObservation & obs : out.arrows) {
      classes.push_back(obs.cls);
      relevant.push_back(obs.relevant);
      if (obs.relevant) {
        relevant_classes.insert(obs.cls);
      }
    }
    propagate(classes, relevant, pictograms, RelevanceSource::kClassified, out.lights);
    history_.push(std::move(relevant_classes));
    out.rule_fired = 3;
  } else if (const auto recalled = history_.lookup()) {
    // Rule 4: no arrows visible (e.g. at the stop line); reuse the most
    // recent relevant arrow classes.
    const std::vector<ArrowClass> classes(recalled->begin(), recalled->end());
    const std::vector<bool> relevant(classes.size(), true);
    propagate(classes, relevant, pictograms, RelevanceSource::kHistory, out.lights);
    out.rule_fired = 4;
  } else {
    // Rule 5: nothing to go on.
    out.rule_fired = 5;
  }
  return out;
}

std::vector<RelevanceAssignment> run_sequence(
  const GBMModel & model, const std::vector<Frame> & frames, std::size_t window, double threshold)
{
  RelevanceEngine engine(model, window, threshold);
  std::vector<RelevanceAssignment> out;
  out.reserve(frames.size());
  for (const Frame & frame : frames) {
    out.push_back(engine.process(frame));
  }
  return out;
}

}  // namespace tlr
