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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace oracle
{

double box_iou(const tlr::BBox & a, const tlr::BBox & b)
{
  const double ax0 = a.cx - a.w / 2.0;
  const double ax1 = a.cx + a.w / 2.0;
  const double ay0 = a.cy - a.h / 2.0;
  const double ay1 = a.cy + a.h / 2.0;
  const double bx0 = b.cx - b.w / 2.0;
  const double bx1 = b.cx + b.w / 2.0;
  const double by0 = b.cy - b.h / 2.0;
  const double by1 = b.cy + b.h / 2.0;

  const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
  const double ih = std::min(ay1, by1) - std::max(ay0, by0);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return inter / uni;
}

MatchOutcome greedy_match(
  const std::vector<tlr::Detection> & preds, const std::vector<tlr::GroundTruth> & gts,
  double iou_threshold)
{
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].confidence > preds[b].confidence;
  });

  MatchOutcome out;
  out.tp.assign(preds.size(), false);
  out.matched_gt.assign(preds.size(), -1);
  std::vector<bool> used(gts.size(), false);

  for (std::size_t p : order) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g]) {
        continue;
      }
      const double overlap = box_iou(preds[p].bbox, gts[g].bbox);
      if (overlap >= iou_threshold && overlap > best_iou) {
        best_iou = overlap;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      out.tp[p] = true;
      out.matched_gt[p] = best;
    }
  }
  return out;
}

double ap_interpolated(const std::vector<bool> & tp_ordered, std::size_t total_gt, int points)
{
  if (total_gt == 0) {
    return 0.0;
  }
  const std::size_t n = tp_ordered.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += tp_ordered[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }

  double sum = 0.0;
  for (int j = 0; j < points; ++j) {
    const double r = static_cast<double>(j) / static_cast<double>(points - 1);
    double best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (recall[k] >= r) {
        best = std::max(best, precision[k]);
      }
    }
    sum += best;
  }
  return sum / static_cast<double>(points);
}

double ap_all_points(const std::vector<bool> & tp_ordered, std::size_t total_gt)
{
  if (total_gt == 0) {
    return 0.0;
  }
  const std::size_t n = tp_ordered.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += tp_ordered[k] ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  double sum = 0.0;
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double best = 0.0;
    for (std::size_t j = k; j < n; ++j) {
      best = std::max(best, precision[j]);
    }
    sum += (recall[k] - prev) * best;
    prev = recall[k];
  }
  return sum;
}

EvalResult evaluate(
  const std::vector<tlr::Frame> & gt_frames, const std::vector<tlr::Frame> & pred_frames,
  const tlr::EvalConfig & cfg)
{
  std::map<std::string, const tlr::Frame *> preds_by_id;
  for (const tlr::Frame & f : pred_frames) {
    preds_by_id[f.id] = &f;
  }
  std::map<std::string, const tlr::Frame *> gts_by_id;
  for (const tlr::Frame & f : gt_frames) {
    gts_by_id[f.id] = &f;
  }

  struct Scored
  {
    double confidence;
    std::string frame_id;
    std::size_t order;
    bool tp;
  };
  std::map<std::string, std::vector<Scored>> scored_by_class;
  std::map<std::string, std::size_t> gt_count;

  for (const auto & [id, gt_frame] : gts_by_id) {
    const tlr::Frame & pred_frame = *preds_by_id.at(id);

    // Per-image cap across classes, by descending confidence.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < pred_frame.detections.size(); ++i) {
      if (pred_frame.detections[i].confidence >= cfg.conf_threshold) {
        kept.push_back(i);
      }
    }
    std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
      return pred_frame.detections[a].confidence > pred_frame.detections[b].confidence;
    });
    if (kept.size() > static_cast<std::size_t>(cfg.max_detections_per_image)) {
      kept.resize(static_cast<std::size_t>(cfg.max_detections_per_image));
    }
    std::sort(kept.begin(), kept.end());

    std::set<std::string> labels;
    for (std::size_t i : kept) {
      labels.insert(tlr::class_label(pred_frame.detections[i].cls));
    }
    for (const tlr::GroundTruth & gt : gt_frame->ground_truths) {
      labels.insert(tlr::class_label(gt.cls));
      ++gt_count[tlr::class_label(gt.cls)];
    }

    for (const std::string & label : labels) {
      std::vector<tlr::Detection> preds;
      for (std::size_t i : kept) {
        if (tlr::class_label(pred_frame.detections[i].cls) == label) {
          preds.push_back(pred_frame.detections[i]);
        }
      }
      std::vector<tlr::GroundTruth> gts;
      for (const tlr::GroundTruth & gt : gt_frame->ground_truths) {
        if (tlr::class_label(gt.cls) == label) {
          gts.push_back(gt);
        }
      }
      if (preds.empty()) {
        continue;
      }
      const MatchOutcome matched = greedy_match(preds, gts, cfg.iou_threshold);
      for (std::size_t k = 0; k < preds.size(); ++k) {
        scored_by_class[label].push_back(Scored{preds[k].confidence, id, k, matched.tp[k]});
      }
    }
  }

  EvalResult result;
  std::set<std::string> labels;
  for (const auto & [label, count] : gt_count) {
    labels.insert(label);
  }
  for (const auto & [label, scored] : scored_by_class) {
    labels.insert(label);
  }

  double ap_sum = 0.0;
  double prec_sum = 0.0;
  double rec_sum = 0.0;
  std::size_t scored_classes = 0;
  for (const std::string & label : labels) {
    ClassResult c;
    c.instances = gt_count.count(label) ? gt_count[label] : 0;

    auto it = scored_by_class.find(label);
    if (it != scored_by_class.end()) {
      auto & scored = it->second;
      std::sort(scored.begin(), scored.end(), [](const Scored & a, const Scored & b) {
        if (a.confidence != b.confidence) {
          return a.confidence > b.confidence;
        }
        if (a.frame_id != b.frame_id) {
          return a.frame_id < b.frame_id;
        }
        return a.order < b.order;
      });
      std::vector<bool> tps;
      std::size_t op_tp = 0;
      std::size_t op_all = 0;
      for (const Scored & s : scored) {
        tps.push_back(s.tp);
        if (s.confidence >= cfg.pr_conf) {
          ++op_all;
          op_tp += s.tp ? 1 : 0;
        }
      }
      if (c.instances > 0) {
        c.ap = cfg.ap_mode == tlr::EvalConfig::ApMode::kAllPoints
                 ? ap_all_points(tps, c.instances)
                 : ap_interpolated(tps, c.instances, cfg.interpolation_points);
      }
      if (op_all > 0) {
        c.precision = static_cast<double>(op_tp) / static_cast<double>(op_all);
      }
      if (c.instances > 0) {
        c.recall = static_cast<double>(op_tp) / static_cast<double>(c.instances);
      }
    } else if (c.instances > 0) {
      c.ap = 0.0;
    }

    if (c.instances > 0) {
      ap_sum += *c.ap;
      prec_sum += c.precision;
      rec_sum += c.recall;
      ++scored_classes;
    }
    result.per_class[label] = c;
  }
  if (scored_classes > 0) {
    result.map50 = ap_sum / static_cast<double>(scored_classes);
    result.mean_precision = prec_sum / static_cast<double>(scored_classes);
    result.mean_recall = rec_sum / static_cast<double>(scored_classes);
  }
  return result;
}

namespace
{

double sigmoid_clamped(double z)
{
  const double p = 1.0 / (1.0 + std::exp(-z));
  return std::min(1.0 - 1e-15, std::max(1e-15, p));
}

}  // namespace

void NaiveBoost::train(const std::vector<std::vector<double>> & x, const std::vector<int> & y)
{
  const int n = static_cast<int>(x.size());
  double mean = 0.0;
  for (int label : y) {
    mean += label;
  }
  mean /= static_cast<double>(n);
  const double rate = std::min(1.0 - 1e-6, std::max(1e-6, mean));
  base_ = std::log(rate / (1.0 - rate));
  trees_.clear();
  if (mean == 0.0 || mean == 1.0) {
    degenerate_ = true;
    return;
  }

  std::vector<double> score(static_cast<std::size_t>(n), base_);
  std::vector<double> proba(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    proba[static_cast<std::size_t>(i)] = sigmoid_clamped(score[static_cast<std::size_t>(i)]);
  }

  for (int stage = 0; stage < stages_; ++stage) {
    std::vector<double> residual(static_cast<std::size_t>(n));
    std::vector<double> hessian(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      residual[k] = y[k] - proba[k];
      hessian[k] = proba[k] * (1.0 - proba[k]);
    }
    std::vector<int> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);

    Tree tree;
    grow(tree, x, residual, hessian, rows, 0);
    trees_.push_back(tree);

    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      int node = 0;
      while (tree[static_cast<std::size_t>(node)].feature >= 0) {
        const Node & nd = tree[static_cast<std::size_t>(node)];
        node = x[k][static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
      }
      score[k] += lr_ * tree[static_cast<std::size_t>(node)].value;
      proba[k] = sigmoid_clamped(score[k]);
    }
  }
}

int NaiveBoost::grow(
  Tree & tree, const std::vector<std::vector<double>> & x, const std::vector<double> & residual,
  const std::vector<double> & hessian, const std::vector<int> & rows, int depth)
{
  const int index = static_cast<int>(tree.size());
  tree.emplace_back();

  const int n = static_cast<int>(rows.size());
  int best_feature = -1;
  double best_threshold = 0.0;
  if (depth < max_depth_ && n >= 2 * msl_ && n >= 2) {
    double total = 0.0;
    for (int i : rows) {
      total += residual[static_cast<std::size_t>(i)];
    }
    double best_score = total * total / static_cast<double>(n);

    const std::size_t features = x.front().size();
    for (std::size_t f = 0; f < features; ++f) {
      std::vector<int> sorted = rows;
      std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        return x[static_cast<std::size_t>(a)][f] < x[static_cast<std::size_t>(b)][f];
      });
      double left = 0.0;
      for (int k = 0; k + 1 < n; ++k) {
        const int i = sorted[static_cast<std::size_t>(k)];
        left += residual[static_cast<std::size_t>(i)];
        const double value = x[static_cast<std::size_t>(i)][f];
        const double next = x[static_cast<std::size_t>(sorted[static_cast<std::size_t>(k + 1)])][f];
        if (value == next) {
          continue;
        }
        const int n_left = k + 1;
        if (n_left < msl_ || n - n_left < msl_) {
          continue;
        }
        const double mid = (value + next) * 0.5;
        if (!(mid < next)) {
          continue;
        }
        const double right = total - left;
        const double score = left * left / static_cast<double>(n_left) +
                             right * right / static_cast<double>(n - n_left);
        if (score > best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = mid;
        }
      }
    }
  }

  if (best_feature < 0) {
    double sum_r = 0.0;
    double sum_h = 0.0;
    for (int i : rows) {
      sum_r += residual[static_cast<std::size_t>(i)];
      sum_h += hessian[static_cast<std::size_t>(i)];
    }
    tree[static_cast<std::size_t>(index)].value = sum_r / std::max(sum_h, 1e-12);
    return index;
  }

  std::vector<int> left_rows;
  std::vector<int> right_rows;
  for (int i : rows) {
    if (x[static_cast<std::size_t>(i)][static_cast<std::size_t>(best_feature)] <= best_threshold) {
      left_rows.push_back(i);
    } else {
      right_rows.push_back(i);
    }
  }
  const int left = grow(tree, x, residual, hessian, left_rows, depth + 1);
  const int right = grow(tree, x, residual, hessian, right_rows, depth + 1);
  tree[static_cast<std::size_t>(index)].feature = best_feature;
  tree[static_cast<std::size_t>(index)].threshold = best_threshold;
  tree[static_cast<std::size_t>(index)].left = left;
  tree[static_cast<std::size_t>(index)].right = right;
  return index;
}

double NaiveBoost::predict_proba(const std::vector<double> & x) const
{
  double score = base_;
  for (const Tree & tree : trees_) {
    int node = 0;
    while (tree[static_cast<std::size_t>(node)].feature >= 0) {
      const Node & nd = tree[static_cast<std::size_t>(node)];
      node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    score += lr_ * tree[static_cast<std::size_t>(node)].value;
  }
  return sigmoid_clamped(score);
}

std::optional<Stump> best_stump(
  const std::vector<std::vector<double>> & x, const std::vector<double> & residual,
  int min_samples_leaf)
{
  const int n = static_cast<int>(x.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += residual[static_cast<std::size_t>(i)];
  }
  double best_score = total * total / static_cast<double>(n);
  std::optional<Stump> best;

  const std::size_t features = x.front().size();
  for (std::size_t f = 0; f < features; ++f) {
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      values.push_back(x[static_cast<std::size_t>(i)][f]);
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double mid = (values[v] + values[v + 1]) * 0.5;
      if (!(mid < values[v + 1])) {
        continue;
      }
      double left_sum = 0.0;
      int left_count = 0;
      for (int i = 0; i < n; ++i) {
        if (x[static_cast<std::size_t>(i)][f] <= mid) {
          left_sum += residual[static_cast<std::size_t>(i)];
          ++left_count;
        }
      }
      if (left_count < min_samples_leaf || n - left_count < min_samples_leaf) {
        continue;
      }
      const double right_sum = total - left_sum;
      const double score = left_sum * left_sum / static_cast<double>(left_count) +
                           right_sum * right_sum / static_cast<double>(n - left_count);
      if (score > best_score) {
        best_score = score;
        best = Stump{static_cast<int>(f), mid};
      }
    }
  }
  return best;
}

}  // namespace oracle
