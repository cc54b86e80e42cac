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

#ifndef TLR__EVALUATION_HPP_
#define TLR__EVALUATION_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlr/geometry.hpp"
#include "tlr/taxonomy.hpp"

namespace tlr
{

inline constexpr int kReportSchemaVersion = 1;

struct EvalConfig
{
  enum class ApMode
  {
    kCoco101,    // interpolated AP averaged over a fixed recall grid
    kAllPoints,  // exact area under the monotone precision envelope
  };

  double iou_threshold = 0.5;
  double conf_threshold = 0.001;
  // Cap on detections per image, applied across classes by descending
  // confidence before per-class matching.
  int max_detections_per_image = 300;
  int interpolation_points = 101;
  // Operating point for the scalar precision/recall columns.
  double pr_conf = 0.25;
  ApMode ap_mode = ApMode::kCoco101;
};

/// Outcome of one prediction after greedy matching, in match order
/// (descending confidence, ties by input record index).
struct MatchedPred
{
  std::size_t pred_index = 0;  // index into the input span
  double confidence = 0.0;
  bool tp = false;
};

struct MatchResult
{
  std::vector<MatchedPred> preds;
  std::size_t unmatched_gts = 0;
};

/// Greedy per-class matching within one frame. All records must share one
/// class; predictions are expected to be pre-filtered by conf_threshold and
/// truncated to max_detections_per_image. Each prediction, visited in
/// descending confidence (ties by input order), matches the unmatched
/// ground truth of highest IoU >= iou_threshold; IoU ties resolve to the
/// lower ground-truth index.
MatchResult match_frame(
  std::span<const Detection> preds, std::span<const GroundTruth> gts, const EvalConfig & cfg);

/// Average precision from tp/fp flags ordered by descending confidence
/// across the whole split. Returns nullopt when total_gt == 0 (class
/// excluded from means rather than scored 0).
std::optional<double> average_precision(
  const std::vector<bool> & tp_ordered, std::size_t total_gt, const EvalConfig & cfg);

struct ClassMetrics
{
  std::size_t instances = 0;    // ground-truth count
  std::size_t predictions = 0;  // predictions surviving threshold + cap
  std::optional<double> ap;     // absent when instances == 0
  double precision = 0.0;       // at confidence >= pr_conf
  double recall = 0.0;

  bool operator==(const ClassMetrics &) const = default;
};

struct EvalReport
{
  int report_version = kReportSchemaVersion;
  EvalConfig config;
  std::map<std::string, ClassMetrics> per_class;
  double map50 = 0.0;  // mean AP over classes with instances >= 1
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  std::vector<std::string> classes_without_instances;
};

/// Full detection evaluation over a split. Frame id sets of both inputs
/// must be equal; ground truths are read from `gt_frames`, predictions from
/// `pred_frames`. When a schema is given, its classes absent from the
/// ground truth are listed in classes_without_instances.
EvalReport evaluate(
  const std::vector<Frame> & gt_frames, const std::vector<Frame> & pred_frames,
  const EvalConfig & cfg, const DatasetSchema * schema = nullptr);

/// Replaces every traffic-light class with its bare state; arrow records
/// are kept as they are.
std::vector<Frame> project_frames_to_state(const std::vector<Frame> & frames);

struct StateEval
{
  EvalReport report;  // evaluation over the projected state classes
  std::map<std::string, std::optional<double>> ap_by_state;
  double map_3states = 0.0;  // mean AP over red, yellow, green
  bool partial = false;      // true when fewer than all three states occur
};

/// Projects every class to its state, re-runs evaluation, and averages AP
/// over red/yellow/green. red_yellow and off are scored as their own state
/// classes but excluded from the mean.
StateEval evaluate_3states(
  const std::vector<Frame> & gt_frames, const std::vector<Frame> & pred_frames,
  const EvalConfig & cfg);

nlohmann::json report_to_json(const EvalReport & report, const StateEval * three = nullptr);
std::string report_to_table(const EvalReport & report, const StateEval * three = nullptr);

}  // namespace tlr

#endif  // TLR__EVALUATION_HPP_
