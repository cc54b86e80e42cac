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

#include "tlr/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tlr/dataio.hpp"
#include "tlr/errors.hpp"

namespace tlr
{

namespace
{

constexpr double kProbFloor = 1e-15;
constexpr double kBaseRateFloor = 1e-6;
constexpr double kHessianFloor = 1e-12;

double sigmoid(double z)
{
  const double p = 1.0 / (1.0 + std::exp(-z));
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

}  // namespace

Eigen::VectorXd ArrowFeatures::to_vector() const
{
  Eigen::VectorXd v(kArrowFeatureCount);
  v << cx_norm, cy_norm, w_norm, h_norm, class_onehot[0], class_onehot[1], class_onehot[2],
    class_onehot[3], class_onehot[4], dev_signed, dev_abs;
  return v;
}

const std::vector<std::string> & arrow_feature_names()
{
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"cx_norm", "cy_norm", "w_norm", "h_norm"};
    for (ArrowClass cls : kAllArrowClasses) {
      n.push_back("class_" + to_label(cls));
    }
    n.push_back("dev_signed");
    n.push_back("dev_abs");
    return n;
  }();
  return names;
}

ArrowFeatures extract_features(
  const BBox & box, ArrowClass cls, double frame_width, double frame_height)
{
  if (frame_width <= 0.0 || frame_height <= 0.0) {
    throw ValidationError("frame dimensions must be positive");
  }
  // Ingestion clamps boxes to the frame; tolerate rounding at the border.
  const double margin = 1e-9 * std::max(frame_width, frame_height);
  if (box.x_min() < -margin || box.x_max() > frame_width + margin || box.y_min() < -margin ||
      box.y_max() > frame_height + margin) {
    throw ValidationError("arrow box lies outside the frame");
  }

  ArrowFeatures f;
  f.cx_norm = std::clamp(box.cx / frame_width, 0.0, 1.0);
  f.cy_norm = std::clamp(box.cy / frame_height, 0.0, 1.0);
  f.w_norm = std::clamp(box.w / frame_width, 0.0, 1.0);
  f.h_norm = std::clamp(box.h / frame_height, 0.0, 1.0);
  const auto it = std::find(kAllArrowClasses.begin(), kAllArrowClasses.end(), cls);
  f.class_onehot[static_cast<std::size_t>(it - kAllArrowClasses.begin())] = 1.0;
  f.dev_signed = center_deviation(box, frame_width);
  f.dev_abs = std::abs(f.dev_signed);
  return f;
}

double RegressionTree::predict(const Eigen::VectorXd & x) const
{
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode & n = nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

double RegressionTree::predict_row(const Eigen::MatrixXd & x, Eigen::Index row) const
{
  int node = 0;
  while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
    const TreeNode & n = nodes[static_cast<std::size_t>(node)];
    node = x(row, n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

double GBMModel::predict_raw(const Eigen::VectorXd & x) const
{
  if (x.size() != static_cast<Eigen::Index>(feature_names.size())) {
    throw ValidationError(
      "feature dimension mismatch: model expects " + std::to_string(feature_names.size()) +
      ", got " + std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const RegressionTree & tree : trees) {
    sum += tree.predict(x);
  }
  return base_score + config.learning_rate * sum;
}

double GBMModel::predict_proba(const Eigen::VectorXd & x) const
{
  return sigmoid(predict_raw(x));
}

Eigen::VectorXd GBMModel::predict_proba_batch(const Eigen::MatrixXd & x) const
{
  if (x.cols() != static_cast<Eigen::Index>(feature_names.size())) {
    throw ValidationError(
      "feature dimension mismatch: model expects " + std::to_string(feature_names.size()) +
      ", got " + std::to_string(x.cols()));
  }
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (const RegressionTree & tree : trees) {
      sum += tree.predict_row(x, i);
    }
    out[i] = sigmoid(base_score + config.learning_rate * sum);
  }
  return out;
}

namespace
{

// Grows one regression tree on the residuals by exact greedy search.
// Candidate thresholds are midpoints between consecutive distinct sorted
// feature values; the best split maximizes sum_L^2/n_L + sum_R^2/n_R with
// ties broken toward the lowest feature index, then the lowest threshold.
class TreeBuilder
{
public:
  TreeBuilder(
    const Eigen::MatrixXd & x, const Eigen::VectorXd & residual, const Eigen::VectorXd & hessian,
    const GBMConfig & cfg)
  : x_(x), residual_(residual), hessian_(hessian), cfg_(cfg)
  {
  }

  RegressionTree build(
    const std::vector<int> & rows, const std::vector<std::vector<int>> & sorted_by_feature)
  {
    tree_.nodes.clear();
    grow(rows, sorted_by_feature, 0);
    return std::move(tree_);
  }

private:
  struct Split
  {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;
  };

  int grow(const std::vector<int> & rows, const std::vector<std::vector<int>> & ord, int depth)
  {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const Split split =
      depth < cfg_.max_depth ? find_split(rows, ord) : Split{};
    if (split.feature < 0) {
      tree_.nodes[static_cast<std::size_t>(index)] = make_leaf(rows);
      return index;
    }

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    for (int i : rows) {
      (x_(i, split.feature) <= split.threshold ? left_rows : right_rows).push_back(i);
    }
    const std::size_t features = ord.size();
    std::vector<std::vector<int>> left_ord(features);
    std::vector<std::vector<int>> right_ord(features);
    for (std::size_t f = 0; f < features; ++f) {
      for (int i : ord[f]) {
        (x_(i, split.feature) <= split.threshold ? left_ord[f] : right_ord[f]).push_back(i);
      }
    }

    const int left = grow(left_rows, left_ord, depth + 1);
    const int right = grow(right_rows, right_ord, depth + 1);
    TreeNode & node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return index;
  }

  Split find_split(const std::vector<int> & rows, const std::vector<std::vector<int>> & ord) const
  {
    const int n = static_cast<int>(rows.size());
    const int msl = cfg_.min_samples_leaf;
    if (n < 2 * msl || n < 2) {
      return Split{};
    }
    double sum_r = 0.0;
    for (int i : rows) {
      sum_r += residual_[i];
    }
    const double parent_score = sum_r * sum_r / static_cast<double>(n);

    Split best;
    best.score = parent_score;
    for (std::size_t f = 0; f < ord.size(); ++f) {
      const std::vector<int> & idx = ord[f];
      double left_sum = 0.0;
      for (int k = 0; k + 1 < n; ++k) {
        const int i = idx[static_cast<std::size_t>(k)];
        left_sum += residual_[i];
        const double value = x_(i, static_cast<int>(f));
        const double next = x_(idx[static_cast<std::size_t>(k + 1)], static_cast<int>(f));
        if (value == next) {
          continue;
        }
        const int n_left = k + 1;
        if (n_left < msl || n - n_left < msl) {
          continue;
        }
        const double mid = (value + next) * 0.5;
        if (!(mid < next)) {
          continue;  // adjacent doubles: no representable threshold between them
        }
        const double right_sum = sum_r - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(n_left) +
                             right_sum * right_sum / static_cast<double>(n - n_left);
        if (score > best.score) {
          best.feature = static_cast<int>(f);
          best.threshold = mid;
          best.score = score;
        }
      }
    }
    return best;
  }

  TreeNode make_leaf(const std::vector<int> & rows) const
  {
    double sum_r = 0.0;
    double sum_h = 0.0;
    for (int i : rows) {
      sum_r += residual_[i];
      sum_h += hessian_[i];
    }
    TreeNode leaf;
    leaf.value = sum_r / std::max(sum_h, kHessianFloor);
    return leaf;
  }

  const Eigen::MatrixXd & x_;
  const Eigen::VectorXd & residual_;
  const Eigen::VectorXd & hessian_;
  const GBMConfig & cfg_;
  RegressionTree tree_;
};

void validate_fit_inputs(
  const Eigen::MatrixXd & x, const Eigen::VectorXd & y, const GBMConfig & cfg,
  const std::vector<std::string> & feature_names)
{
  if (cfg.stages < 1 || cfg.max_depth < 1 || cfg.learning_rate <= 0.0 ||
      cfg.learning_rate > 1.0 || cfg.subsample <= 0.0 || cfg.subsample > 1.0 ||
      cfg.min_samples_leaf < 1) {
    throw ValidationError("invalid boosting configuration");
  }
  if (x.rows() < 2) {
    throw ValidationError("training requires at least 2 rows");
  }
  if (y.size() != x.rows()) {
    throw ValidationError("label count does not match row count");
  }
  if (feature_names.size() != static_cast<std::size_t>(x.cols())) {
    throw ValidationError("feature name count does not match column count");
  }
  if (!x.allFinite()) {
    throw ValidationError("features contain NaN or infinite values");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw ValidationError("labels must be 0 or 1");
    }
  }
}

// Deterministic across platforms, unlike std::shuffle/std::sample.
std::vector<int> draw_subsample(int n, double fraction, std::mt19937_64 & rng)
{
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  const int m = std::clamp(static_cast<int>(std::llround(fraction * n)), 1, n);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }
  rows.resize(static_cast<std::size_t>(m));
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

GBMModel fit(
  const Eigen::MatrixXd & features, const Eigen::VectorXd & labels, const GBMConfig & cfg,
  std::vector<std::string> feature_names, std::vector<double> * stage_losses)
{
  validate_fit_inputs(features, labels, cfg, feature_names);
  const int n = static_cast<int>(features.rows());
  const int num_features = static_cast<int>(features.cols());

  GBMModel model;
  model.config = cfg;
  model.feature_names = std::move(feature_names);

  double mean = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    mean += labels[i];
  }
  mean /= static_cast<double>(n);
  const double base_rate = std::clamp(mean, kBaseRateFloor, 1.0 - kBaseRateFloor);
  model.base_score = std::log(base_rate / (1.0 - base_rate));

  if (mean == 0.0 || mean == 1.0) {
    model.degenerate = true;
    return model;
  }

  // The feature order never changes across stages: presort once and filter
  // per stage / per node.
  std::vector<std::vector<int>> presorted(static_cast<std::size_t>(num_features));
  for (int f = 0; f < num_features; ++f) {
    auto & idx = presorted[static_cast<std::size_t>(f)];
    idx.resize(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(
      idx.begin(), idx.end(), [&](int a, int b) { return features(a, f) < features(b, f); });
  }

  Eigen::VectorXd scores = Eigen::VectorXd::Constant(n, model.base_score);
  Eigen::VectorXd proba(n);
  for (int i = 0; i < n; ++i) {
    proba[i] = sigmoid(scores[i]);
  }

  std::mt19937_64 rng(cfg.seed);
  Eigen::VectorXd residual(n);
  Eigen::VectorXd hessian(n);
  model.trees.reserve(static_cast<std::size_t>(cfg.stages));

  for (int stage = 0; stage < cfg.stages; ++stage) {
    for (int i = 0; i < n; ++i) {
      residual[i] = labels[i] - proba[i];
      hessian[i] = proba[i] * (1.0 - proba[i]);
    }

    std::vector<int> rows;
    std::vector<std::vector<int>> ord;
    if (cfg.subsample < 1.0) {
      rows = draw_subsample(n, cfg.subsample, rng);
      std::vector<char> in_sample(static_cast<std::size_t>(n), 0);
      for (int i : rows) {
        in_sample[static_cast<std::size_t>(i)] = 1;
      }
      ord.resize(static_cast<std::size_t>(num_features));
      for (int f = 0; f < num_features; ++f) {
        for (int i : presorted[static_cast<std::size_t>(f)]) {
          if (in_sample[static_cast<std::size_t>(i)]) {
            ord[static_cast<std::size_t>(f)].push_back(i);
          }
        }
      }
    } else {
      rows.resize(static_cast<std::size_t>(n));
      std::iota(rows.begin(), rows.end(), 0);
      ord = presorted;
    }

    TreeBuilder builder(features, residual, hessian, cfg);
    model.trees.push_back(builder.build(rows, ord));
    const RegressionTree & tree = model.trees.back();

    for (int i = 0; i < n; ++i) {
      scores[i] += cfg.learning_rate * tree.predict_row(features, i);
      proba[i] = sigmoid(scores[i]);
    }

    if (stage_losses != nullptr) {
      double loss = 0.0;
      for (int i = 0; i < n; ++i) {
        loss -= labels[i] * std::log(proba[i]) + (1.0 - labels[i]) * std::log(1.0 - proba[i]);
      }
      stage_losses->push_back(loss / static_cast<double>(n));
    }
  }
  return model;
}

namespace
{

constexpr int kModelVersion = 1;
constexpr const char * kModelFormat = "tlr.gbm";

nlohmann::json node_to_json(const TreeNode & node)
{
  if (node.is_leaf()) {
    return nlohmann::json{{"value", node.value}};
  }
  return nlohmann::json{
    {"feature", node.feature},
    {"threshold", node.threshold},
    {"left", node.left},
    {"right", node.right},
  };
}

TreeNode node_from_json(const nlohmann::json & j)
{
  TreeNode node;
  if (j.contains("value")) {
    node.value = j.at("value").get<double>();
    return node;
  }
  node.feature = j.at("feature").get<int>();
  node.threshold = j.at("threshold").get<double>();
  node.left = j.at("left").get<int>();
  node.right = j.at("right").get<int>();
  if (node.feature < 0 || node.left < 0 || node.right < 0) {
    throw ValidationError("model file contains an invalid tree node");
  }
  return node;
}

}  // namespace

std::string save_model(const GBMModel & model)
{
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree & tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode & node : tree.nodes) {
      nodes.push_back(node_to_json(node));
    }
    trees.push_back(nlohmann::json{{"nodes", std::move(nodes)}});
  }
  const nlohmann::json j{
    {"format", kModelFormat},
    {"version", kModelVersion},
    {"config",
     {{"stages", model.config.stages},
      {"max_depth", model.config.max_depth},
      {"learning_rate", model.config.learning_rate},
      {"subsample", model.config.subsample},
      {"min_samples_leaf", model.config.min_samples_leaf},
      {"seed", model.config.seed}}},
    {"feature_names", model.feature_names},
    {"base_score", model.base_score},
    {"degenerate", model.degenerate},
    {"trees", std::move(trees)},
  };
  return j.dump();
}

GBMModel load_model(const std::string & text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("model file is truncated or not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kModelFormat) {
    throw ValidationError("not a gbm model file");
  }
  if (j.value("version", -1) != kModelVersion) {
    throw ValidationError(
      "unsupported model version: " + j.value("version", nlohmann::json()).dump());
  }
  try {
    GBMModel model;
    const auto & cfg = j.at("config");
    model.config.stages = cfg.at("stages").get<int>();
    model.config.max_depth = cfg.at("max_depth").get<int>();
    model.config.learning_rate = cfg.at("learning_rate").get<double>();
    model.config.subsample = cfg.at("subsample").get<double>();
    model.config.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
    model.config.seed = cfg.at("seed").get<std::uint64_t>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.base_score = j.at("base_score").get<double>();
    model.degenerate = j.at("degenerate").get<bool>();
    for (const auto & tree_json : j.at("trees")) {
      RegressionTree tree;
      for (const auto & node_json : tree_json.at("nodes")) {
        tree.nodes.push_back(node_from_json(node_json));
      }
      if (tree.nodes.empty()) {
        throw ValidationError("model file contains an empty tree");
      }
      model.trees.push_back(std::move(tree));
    }
    return model;
  } catch (const nlohmann::json::exception & e) {
    throw ValidationError(std::string("model file is missing required fields: ") + e.what());
  }
}

void save_model_file(const GBMModel & model, const std::filesystem::path & path)
{
  write_text_atomic(path, save_model(model));
}

GBMModel load_model_file(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open model file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

ArrowDataset build_arrow_dataset(const std::vector<Frame> & frames)
{
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> labels;
  std::size_t skipped = 0;
  for (const Frame & frame : frames) {
    for (const GroundTruth & gt : frame.ground_truths) {
      const ArrowClass * cls = std::get_if<ArrowClass>(&gt.cls);
      if (cls == nullptr) {
        continue;
      }
      if (!gt.relevant) {
        ++skipped;
        continue;
      }
      rows.push_back(extract_features(gt.bbox, *cls, frame.width, frame.height).to_vector());
      labels.push_back(*gt.relevant ? 1.0 : 0.0);
    }
  }
  if (rows.empty()) {
    throw ValidationError("no labeled arrow ground truths in the input");
  }
  ArrowDataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()), kArrowFeatureCount);
  data.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    data.labels[static_cast<Eigen::Index>(i)] = labels[i];
  }
  data.skipped_unlabeled = skipped;
  return data;
}

}  // namespace tlr
