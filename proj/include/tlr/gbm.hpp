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

#ifndef TLR__GBM_HPP_
#define TLR__GBM_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "tlr/geometry.hpp"
#include "tlr/taxonomy.hpp"

namespace tlr
{

inline constexpr int kArrowFeatureCount = 11;

/// Classifier input derived from one detected arrow: normalized box
/// geometry, one-hot arrow class in canonical order, and the signed and
/// absolute center deviation.
struct ArrowFeatures
{
  double cx_norm = 0.0;
  double cy_norm = 0.0;
  double w_norm = 0.0;
  double h_norm = 0.0;
  std::array<double, 5> class_onehot = {0, 0, 0, 0, 0};
  double dev_signed = 0.0;
  double dev_abs = 0.0;

  Eigen::VectorXd to_vector() const;
};

const std::vector<std::string> & arrow_feature_names();

/// Normalizes one arrow box against the frame dimensions. Throws
/// ValidationError when the box does not fit the frame.
ArrowFeatures extract_features(
  const BBox & box, ArrowClass cls, double frame_width, double frame_height);

struct GBMConfig
{
  int stages = 300;
  int max_depth = 3;
  double learning_rate = 0.1;
  double subsample = 1.0;
  int min_samples_leaf = 1;
  std::uint64_t seed = 7;
};

/// Binary regression tree over x[feature] <= threshold splits. Leaves hold
/// unscaled Newton log-odds increments; the learning rate is applied at
/// accumulation time.
struct TreeNode
{
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree
{
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(const Eigen::VectorXd & x) const;
  double predict_row(const Eigen::MatrixXd & x, Eigen::Index row) const;
};

/// Additive logistic-loss ensemble: p(x) = sigmoid(base_score +
/// learning_rate * sum of tree outputs).
struct GBMModel
{
  double base_score = 0.0;
  std::vector<RegressionTree> trees;
  GBMConfig config;
  std::vector<std::string> feature_names;
  // Set when training saw a single label value; such a model carries the
  // clamped base rate and no trees.
  bool degenerate = false;

  double predict_raw(const Eigen::VectorXd & x) const;
  double predict_proba(const Eigen::VectorXd & x) const;
  Eigen::VectorXd predict_proba_batch(const Eigen::MatrixXd & x) const;
};

/// Logistic-loss gradient boosting with exact greedy variance-reduction
/// splits and Newton leaf values. Deterministic for fixed rows, config and
/// seed. `stage_losses`, when given, receives the mean training logistic
/// loss after each stage.
GBMModel fit(
  const Eigen::MatrixXd & features, const Eigen::VectorXd & labels, const GBMConfig & cfg,
  std::vector<std::string> feature_names, std::vector<double> * stage_losses = nullptr);

std::string save_model(const GBMModel & model);
GBMModel load_model(const std::string & text);
void save_model_file(const GBMModel & model, const std::filesystem::path & path);
GBMModel load_model_file(const std::filesystem::path & path);

/// Training rows harvested from labeled arrow ground truths.
struct ArrowDataset
{
  Eigen::MatrixXd features;  // one row per labeled arrow
  Eigen::VectorXd labels;    // 1.0 relevant, 0.0 not
  std::size_t skipped_unlabeled = 0;
};

ArrowDataset build_arrow_dataset(const std::vector<Frame> & frames);

}  // namespace tlr

#endif  // TLR__GBM_HPP_
