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

#include "tlr/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tlr/errors.hpp"

namespace tlr
{

MatchResult match_frame(
  std::span<const Detection> preds, std::span<const GroundTruth> gts, const EvalConfig & cfg)
{
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  MatchResult result;
  result.preds.reserve(preds.size());
  std::vector<bool> gt_taken(gts.size(), false);
  std::size_t matched = 0;

  for (std::size_t pi : order) {
    double best_iou = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (gt_taken[gi]) {
        continue;
      }
      const double overlap = iou(preds[pi].bbox, gts[gi].bbox);
      // Strict > keeps the lower ground-truth index on ties.
      if (overlap >= cfg.iou_threshold && overlap > best_iou) {
        best_iou = overlap;
        best_gt = gi;
      }
    }
    const bool tp = best_gt < gts.size();
    if (tp) {
      gt_taken[best_gt] = true;
      ++matched;
    }
    result.preds.push_back(MatchedPred{pi, preds[pi].confidence, tp});
  }
  result.unmatched_gts = gts.size() - matched;
  return result;
}

namespace
{

struct PrCurve
{
  std::vector<double> precision;  // cumulative, by rank
  std::vector<double> recall;
  std::vector<double> envelope;  // max precision at recall >= recall[k]
};

PrCurve pr_curve(const std::vector<bool> & tp_ordered, std::size_t total_gt)
{
  PrCurve curve;
  const std::size_t n = tp_ordered.size();
  curve.precision.resize(n);
  curve.recall.resize(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += tp_ordered[k] ? 1 : 0;
    curve.precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    curve.recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  curve.envelope.resize(n);
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    running = std::max(running, curve.precision[k]);
    curve.envelope[k] = running;
  }
  return curve;
}

double ap_coco(const PrCurve & curve, int points)
{
  const std::size_t n = curve.recall.size();
  double sum = 0.0;
  std::size_t k = 0;
  for (int j = 0; j < points; ++j) {
    const double r = static_cast<double>(j) / static_cast<double>(points - 1);
    while (k < n && curve.recall[k] < r) {
      ++k;
    }
    if (k < n) {
      sum += curve.envelope[k];
    }
  }
  return sum / static_cast<double>(points);
}

double ap_all_points(const PrCurve & curve)
{
  double sum = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.recall.size(); ++k) {
    sum += (curve.recall[k] - prev_recall) * curve.envelope[k];
    prev_recall = curve.recall[k];
  }
  return sum;
}

}  // namespace

std::optional<double> average_precision(
  const std::vector<bool> & tp_ordered, std::size_t total_gt, const EvalConfig & cfg)
{
  if (total_gt == 0) {
    return std::nullopt;
  }
  if (tp_ordered.empty()) {
    return 0.0;
  }
  const PrCurve curve = pr_curve(tp_ordered, total_gt);
  if (cfg.ap_mode == EvalConfig::ApMode::kAllPoints) {
    return ap_all_points(curve);
  }
  return ap_coco(curve, cfg.interpolation_points);
}

namespace
{

struct ClassPred
{
  double confidence;
  std::string_view frame_id;
  std::size_t order_in_frame;
  bool tp;
};

// Predictions of one frame surviving the confidence threshold and the
// per-image cap, as indices into frame.detections in original order.
std::vector<std::size_t> surviving_predictions(const Frame & frame, const EvalConfig & cfg)
{
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < frame.detections.size(); ++i) {
    if (frame.detections[i].confidence >= cfg.conf_threshold) {
      kept.push_back(i);
    }
  }
  if (kept.size() > static_cast<std::size_t>(cfg.max_detections_per_image)) {
    std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
      return frame.detections[a].confidence > frame.detections[b].confidence;
    });
    kept.resize(static_cast<std::size_t>(cfg.max_detections_per_image));
    std::sort(kept.begin(), kept.end());
  }
  return kept;
}

}  // namespace

EvalReport evaluate(
  const std::vector<Frame> & gt_frames, const std::vector<Frame> & pred_frames,
  const EvalConfig & cfg, const DatasetSchema * schema)
{
  if (cfg.max_detections_per_image < 1 || cfg.iou_threshold <= 0.0 || cfg.iou_threshold > 1.0 ||
      cfg.conf_threshold < 0.0 || cfg.conf_threshold > 1.0 || cfg.interpolation_points < 2) {
    throw ValidationError("invalid evaluation configuration");
  }

  std::map<std::string_view, const Frame *> gt_by_id;
  std::map<std::string_view, const Frame *> pred_by_id;
  for (const Frame & f : gt_frames) {
    gt_by_id.emplace(f.id, &f);
  }
  for (const Frame & f : pred_frames) {
    pred_by_id.emplace(f.id, &f);
  }
  {
    std::string missing;
    for (const auto & [id, f] : gt_by_id) {
      if (!pred_by_id.count(id)) {
        missing += " " + std::string(id);
      }
    }
    if (!missing.empty()) {
      throw ValidationError("frame ids missing from predictions:" + missing);
    }
    missing.clear();
    for (const auto & [id, f] : pred_by_id) {
      if (!gt_by_id.count(id)) {
        missing += " " + std::string(id);
      }
    }
    if (!missing.empty()) {
      throw ValidationError("frame ids missing from ground truth:" + missing);
    }
  }

  // Per class: matched predictions across the split plus the gt count.
  std::map<std::string, std::vector<ClassPred>> preds_by_class;
  std::map<std::string, std::size_t> gt_count;

  for (const auto & [id, gt_frame] : gt_by_id) {
    const Frame & pred_frame = *pred_by_id.at(id);
    const std::vector<std::size_t> kept = surviving_predictions(pred_frame, cfg);

    std::map<std::string, std::vector<Detection>> frame_preds;
    for (std::size_t i : kept) {
      frame_preds[class_label(pred_frame.detections[i].cls)].push_back(pred_frame.detections[i]);
    }
    std::map<std::string, std::vector<GroundTruth>> frame_gts;
    for (const GroundTruth & gt : gt_frame->ground_truths) {
      frame_gts[class_label(gt.cls)].push_back(gt);
    }

    for (auto & [label, gts] : frame_gts) {
      gt_count[label] += gts.size();
    }
    for (auto & [label, preds] : frame_preds) {
      auto git = frame_gts.find(label);
      const std::span<const GroundTruth> gts =
        git != frame_gts.end() ? std::span<const GroundTruth>(git->second)
                               : std::span<const GroundTruth>();
      const MatchResult matched = match_frame(preds, gts, cfg);
      auto & sink = preds_by_class[label];
      for (const MatchedPred & mp : matched.preds) {
        sink.push_back(ClassPred{mp.confidence, id, mp.pred_index, mp.tp});
      }
    }
  }

  EvalReport report;
  report.config = cfg;

  std::set<std::string> labels;
  for (const auto & [label, n] : gt_count) {
    labels.insert(label);
  }
  for (const auto & [label, preds] : preds_by_class) {
    labels.insert(label);
  }

  double ap_sum = 0.0;
  double prec_sum = 0.0;
  double rec_sum = 0.0;
  std::size_t scored = 0;

  for (const std::string & label : labels) {
    ClassMetrics m;
    auto git = gt_count.find(label);
    m.instances = git != gt_count.end() ? git->second : 0;

    auto pit = preds_by_class.find(label);
    if (pit != preds_by_class.end()) {
      auto & preds = pit->second;
      std::sort(preds.begin(), preds.end(), [](const ClassPred & a, const ClassPred & b) {
        if (a.confidence != b.confidence) {
          return a.confidence > b.confidence;
        }
        return std::tie(a.frame_id, a.order_in_frame) < std::tie(b.frame_id, b.order_in_frame);
      });
      m.predictions = preds.size();

      std::vector<bool> tp_flags;
      tp_flags.reserve(preds.size());
      std::size_t op_tp = 0;
      std::size_t op_fp = 0;
      for (const ClassPred & p : preds) {
        tp_flags.push_back(p.tp);
        if (p.confidence >= cfg.pr_conf) {
          (p.tp ? op_tp : op_fp) += 1;
        }
      }
      m.ap = average_precision(tp_flags, m.instances, cfg);
      if (op_tp + op_fp > 0) {
        m.precision = static_cast<double>(op_tp) / static_cast<double>(op_tp + op_fp);
      }
      if (m.instances > 0) {
        m.recall = static_cast<double>(op_tp) / static_cast<double>(m.instances);
      }
    } else {
      m.ap = average_precision({}, m.instances, cfg);
    }

    if (m.instances > 0) {
      ap_sum += *m.ap;
      prec_sum += m.precision;
      rec_sum += m.recall;
      ++scored;
    } else {
      report.classes_without_instances.push_back(label);
    }
    report.per_class.emplace(label, m);
  }

  if (schema != nullptr) {
    for (const TLClass & cls : schema->classes) {
      const std::string label = to_label(cls);
      if (!labels.count(label)) {
        report.classes_without_instances.push_back(label);
      }
    }
    std::sort(
      report.classes_without_instances.begin(), report.classes_without_instances.end());
  }

  if (scored > 0) {
    report.map50 = ap_sum / static_cast<double>(scored);
    report.mean_precision = prec_sum / static_cast<double>(scored);
    report.mean_recall = rec_sum / static_cast<double>(scored);
  }
  return report;
}

std::vector<Frame> project_frames_to_state(const std::vector<Frame> & frames)
{
  std::vector<Frame> out = frames;
  for (Frame & frame : out) {
    for (Detection & det : frame.detections) {
      if (const TLClass * cls = std::get_if<TLClass>(&det.cls)) {
        det.cls = project_to_state(*cls);
      }
    }
    for (GroundTruth & gt : frame.ground_truths) {
      if (const TLClass * cls = std::get_if<TLClass>(&gt.cls)) {
        gt.cls = project_to_state(*cls);
      }
    }
  }
  return out;
}

StateEval evaluate_3states(
  const std::vector<Frame> & gt_frames, const std::vector<Frame> & pred_frames,
  const EvalConfig & cfg)
{
  StateEval out;
  out.report = evaluate(
    project_frames_to_state(gt_frames), project_frames_to_state(pred_frames), cfg, nullptr);

  const std::array<State, 3> mean_states = {State::kRed, State::kYellow, State::kGreen};
  double sum = 0.0;
  std::size_t present = 0;
  for (State s : kAllStates) {
    const std::string label = to_label(s);
    auto it = out.report.per_class.find(label);
    const bool scored = it != out.report.per_class.end() && it->second.ap.has_value();
    if (scored) {
      out.ap_by_state[label] = it->second.ap;
    } else if (s != State::kRedYellow && s != State::kOff) {
      out.ap_by_state[label] = std::nullopt;
    }
    if (scored &&
        std::find(mean_states.begin(), mean_states.end(), s) != mean_states.end()) {
      sum += *it->second.ap;
      ++present;
    }
  }
  out.partial = present < mean_states.size();
  out.map_3states = present > 0 ? sum / static_cast<double>(present) : 0.0;
  return out;
}

nlohmann::json report_to_json(const EvalReport & report, const StateEval * three)
{
  nlohmann::json classes = nlohmann::json::object();
  for (const auto & [label, m] : report.per_class) {
    nlohmann::json entry{
      {"instances", m.instances},
      {"predictions", m.predictions},
      {"precision", m.precision},
      {"recall", m.recall},
    };
    entry["ap"] = m.ap ? nlohmann::json(*m.ap) : nlohmann::json(nullptr);
    classes[label] = std::move(entry);
  }
  nlohmann::json j{
    {"report_version", report.report_version},
    {"config",
     {{"iou_threshold", report.config.iou_threshold},
      {"conf_threshold", report.config.conf_threshold},
      {"max_detections_per_image", report.config.max_detections_per_image},
      {"interpolation_points", report.config.interpolation_points},
      {"pr_conf", report.config.pr_conf},
      {"ap_mode",
       report.config.ap_mode == EvalConfig::ApMode::kCoco101 ? "coco101" : "allpoints"}}},
    {"classes", std::move(classes)},
    {"map50", report.map50},
    {"precision", report.mean_precision},
    {"recall", report.mean_recall},
    {"classes_without_instances", report.classes_without_instances},
  };
  if (three != nullptr) {
    nlohmann::json ap = nlohmann::json::object();
    for (const auto & [label, value] : three->ap_by_state) {
      ap[label] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
    }
    j["three_states"] = nlohmann::json{
      {"ap_by_state", std::move(ap)},
      {"map_3states", three->map_3states},
      {"partial", three->partial},
    };
  }
  return j;
}

std::string report_to_table(const EvalReport & report, const StateEval * three)
{
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  std::size_t width = 5;
  for (const auto & [label, m] : report.per_class) {
    width = std::max(width, label.size());
  }
  out << std::left << std::setw(static_cast<int>(width + 2)) << "class"
      << std::right << std::setw(10) << "instances" << std::setw(12) << "predictions"
      << std::setw(10) << "ap" << std::setw(11) << "precision" << std::setw(9) << "recall"
      << '\n';
  for (const auto & [label, m] : report.per_class) {
    out << std::left << std::setw(static_cast<int>(width + 2)) << label << std::right
        << std::setw(10) << m.instances << std::setw(12) << m.predictions;
    if (m.ap) {
      out << std::setw(10) << *m.ap;
    } else {
      out << std::setw(10) << "-";
    }
    out << std::setw(11) << m.precision << std::setw(9) << m.recall << '\n';
  }
  out << "mAP50 " << report.map50 << "  precision " << report.mean_precision << "  recall "
      << report.mean_recall << "  (P/R at conf >= " << report.config.pr_conf << ")\n";
  if (!report.classes_without_instances.empty()) {
    out << "classes without ground-truth instances:";
    for (const auto & label : report.classes_without_instances) {
      out << ' ' << label;
    }
    out << '\n';
  }
  if (three != nullptr) {
    out << "mAP_3states " << three->map_3states << (three->partial ? "  (partial)" : "") << "  [";
    bool first = true;
    for (const auto & [label, value] : three->ap_by_state) {
      if (!first) {
        out << ", ";
      }
      first = false;
      out << label << '=';
      if (value) {
        out << *value;
      } else {
        out << '-';
      }
    }
    out << "]\n";
  }
  return out.str();
}

}  // namespace tlr
