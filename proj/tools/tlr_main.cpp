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

#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tlr/bench.hpp"
#include "tlr/dataio.hpp"
#include "tlr/errors.hpp"
#include "tlr/evaluation.hpp"
#include "tlr/gbm.hpp"
#include "tlr/relevance.hpp"
#include "tlr/synth.hpp"
#include "tlr/taxonomy.hpp"

namespace
{

constexpr const char * kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

void emit(const std::string & content, const std::string & out_path)
{
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') {
      std::cout << '\n';
    }
  } else {
    tlr::write_text_atomic(out_path, content);
  }
}

struct EvalArgs
{
  std::string gt_path;
  std::string pred_path;
  std::string schema = "dtld";
  double iou = 0.5;
  double conf_threshold = 0.001;
  int max_det = 300;
  double pr_conf = 0.25;
  bool three_states = false;
  std::string ap_mode = "coco101";
  std::string report = "table";
  std::string out_path;
};

int cmd_eval(const EvalArgs & args)
{
  tlr::EvalConfig cfg;
  cfg.iou_threshold = args.iou;
  cfg.conf_threshold = args.conf_threshold;
  cfg.max_detections_per_image = args.max_det;
  cfg.pr_conf = args.pr_conf;
  cfg.ap_mode = args.ap_mode == "allpoints" ? tlr::EvalConfig::ApMode::kAllPoints
                                            : tlr::EvalConfig::ApMode::kCoco101;

  const tlr::DatasetSchema schema = tlr::load_schema(args.schema);
  const auto gt_frames = tlr::parse_records_file(args.gt_path, schema);
  const auto pred_frames = tlr::parse_records_file(args.pred_path, schema);

  const tlr::EvalReport report = tlr::evaluate(gt_frames, pred_frames, cfg, &schema);
  std::optional<tlr::StateEval> three;
  if (args.three_states) {
    three = tlr::evaluate_3states(gt_frames, pred_frames, cfg);
  }

  if (args.report == "json") {
    emit(tlr::report_to_json(report, three ? &*three : nullptr).dump(2) + "\n", args.out_path);
  } else {
    emit(tlr::report_to_table(report, three ? &*three : nullptr), args.out_path);
  }
  return kExitOk;
}

struct TrainArgs
{
  std::string data_path;
  std::string schema = "dtld";
  tlr::GBMConfig cfg;
  std::string out_path;
};

int cmd_train(const TrainArgs & args)
{
  const tlr::DatasetSchema schema = tlr::load_schema(args.schema);
  const auto frames = tlr::parse_records_file(args.data_path, schema);
  const tlr::ArrowDataset data = tlr::build_arrow_dataset(frames);

  std::vector<double> losses;
  const tlr::GBMModel model =
    tlr::fit(data.features, data.labels, args.cfg, tlr::arrow_feature_names(), &losses);
  tlr::save_model_file(model, args.out_path);

  const auto positives = static_cast<std::size_t>(data.labels.sum());
  std::cout << "trained on " << data.labels.size() << " arrows (" << positives << " relevant";
  if (data.skipped_unlabeled > 0) {
    std::cout << ", " << data.skipped_unlabeled << " unlabeled skipped";
  }
  std::cout << ")\n";
  if (model.degenerate) {
    std::cout << "warning: single-class labels; wrote a degenerate base-rate model\n";
  } else {
    std::cout << "stages " << model.trees.size() << ", final training loss "
              << (losses.empty() ? 0.0 : losses.back()) << '\n';
  }
  std::cout << "model written to " << args.out_path << '\n';
  return kExitOk;
}

struct RunArgs
{
  std::string model_path;
  std::string stream_path;
  std::string schema = "dtld";
  std::size_t window = 30;
  double threshold = 0.5;
  std::string out_path;
};

int cmd_run(const RunArgs & args)
{
  const tlr::DatasetSchema schema = tlr::load_schema(args.schema);
  const tlr::GBMModel model = tlr::load_model_file(args.model_path);
  const auto frames = tlr::parse_records_file(args.stream_path, schema);

  std::ostringstream out;
  tlr::RelevanceEngine engine(model, args.window, args.threshold);
  for (const tlr::Frame & frame : frames) {
    const tlr::RelevanceAssignment assignment = engine.process(frame);
    nlohmann::json manifest{
      {"frame_id", frame.id}, {"width", frame.width}, {"height", frame.height}};
    if (frame.timestamp_ms) {
      manifest["timestamp_ms"] = *frame.timestamp_ms;
    }
    out << manifest.dump() << '\n';
    for (const tlr::LightAssignment & light : assignment.lights) {
      const tlr::Detection & det = frame.detections[light.detection_index];
      const nlohmann::json record{
        {"frame_id", frame.id},
        {"kind", "tl"},
        {"bbox", {det.bbox.cx, det.bbox.cy, det.bbox.w, det.bbox.h}},
        {"cls", tlr::class_label(det.cls)},
        {"confidence", det.confidence},
        {"relevant", light.relevant},
        {"source", tlr::to_label(light.source)},
      };
      out << record.dump() << '\n';
    }
  }
  emit(out.str(), args.out_path);
  return kExitOk;
}

struct BenchArgs
{
  std::string model_path;
  std::string stream_path;
  std::string schema = "dtld";
  tlr::BenchParams params;
  std::string report = "table";
  std::string out_path;
};

int cmd_bench(const BenchArgs & args)
{
  const tlr::DatasetSchema schema = tlr::load_schema(args.schema);
  const tlr::GBMModel model = tlr::load_model_file(args.model_path);
  const auto frames = tlr::parse_records_file(args.stream_path, schema);
  const tlr::BenchReport report = tlr::run_bench(model, frames, args.params);
  if (args.report == "json") {
    emit(tlr::bench_to_json(report).dump(2) + "\n", args.out_path);
  } else {
    emit(tlr::bench_to_table(report), args.out_path);
  }
  return kExitOk;
}

struct ValidateArgs
{
  std::string input_path;
  std::string schema = "dtld";
};

int cmd_validate(const ValidateArgs & args)
{
  const tlr::DatasetSchema schema = tlr::load_schema(args.schema);
  tlr::ParseStats stats;
  const auto frames = tlr::parse_records_file(args.input_path, schema, &stats);

  std::size_t detections = 0;
  std::size_t labels = 0;
  std::map<std::string, std::size_t> per_class;
  for (const tlr::Frame & frame : frames) {
    detections += frame.detections.size();
    labels += frame.ground_truths.size();
    for (const tlr::Detection & det : frame.detections) {
      ++per_class[tlr::class_label(det.cls)];
    }
    for (const tlr::GroundTruth & gt : frame.ground_truths) {
      ++per_class[tlr::class_label(gt.cls)];
    }
  }

  std::cout << "frames: " << frames.size() << ", predictions: " << detections
            << ", labels: " << labels << '\n';
  for (const auto & [label, count] : per_class) {
    std::cout << "  " << label << ": " << count << '\n';
  }
  if (stats.unknown_fields > 0) {
    std::cout << "warning: " << stats.unknown_fields << " unknown fields ignored\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"traffic-light relevance estimation and detection evaluation"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.set_version_flag("--version", std::string("tlr ") + kVersion);

  EvalArgs eval_args;
  CLI::App * eval = app.add_subcommand("eval", "evaluate detections against ground truth");
  eval->add_option("--gt", eval_args.gt_path, "ground-truth records (jsonl)")->required();
  eval->add_option("--pred", eval_args.pred_path, "prediction records (jsonl)")->required();
  eval->add_option("--schema", eval_args.schema, "builtin schema name or schema JSON path");
  eval->add_option("--iou", eval_args.iou, "IoU match threshold");
  eval->add_option("--conf-threshold", eval_args.conf_threshold, "confidence cutoff");
  eval->add_option("--max-det", eval_args.max_det, "max detections per image");
  eval->add_option("--pr-conf", eval_args.pr_conf, "operating point for precision/recall");
  eval->add_flag("--three-states", eval_args.three_states, "also report state-projected AP");
  eval->add_option("--ap-mode", eval_args.ap_mode, "coco101 or allpoints")
    ->check(CLI::IsMember({"coco101", "allpoints"}));
  eval->add_option("--report", eval_args.report, "json or table")
    ->check(CLI::IsMember({"json", "table"}));
  eval->add_option("--out", eval_args.out_path, "write report here instead of stdout");

  CLI::App * relevance =
    app.add_subcommand("relevance", "arrow-based relevance estimation");
  relevance->require_subcommand(1);

  TrainArgs train_args;
  CLI::App * train = relevance->add_subcommand("train", "fit the relevance classifier");
  train->add_option("--data", train_args.data_path, "labeled arrow records (jsonl)")->required();
  train->add_option("--schema", train_args.schema, "schema for frame dimensions");
  train->add_option("--stages", train_args.cfg.stages, "boosting stages");
  train->add_option("--depth", train_args.cfg.max_depth, "max tree depth");
  train->add_option("--lr", train_args.cfg.learning_rate, "learning rate");
  train->add_option("--subsample", train_args.cfg.subsample, "per-stage row fraction");
  train->add_option("--min-samples-leaf", train_args.cfg.min_samples_leaf, "min rows per leaf");
  train->add_option("--seed", train_args.cfg.seed, "subsampling seed");
  train->add_option("--out", train_args.out_path, "model output path")->required();

  RunArgs run_args;
  CLI::App * run = relevance->add_subcommand("run", "assign relevance over a stream");
  run->add_option("--model", run_args.model_path, "trained model (json)")->required();
  run->add_option("--stream", run_args.stream_path, "detection stream (jsonl)")->required();
  run->add_option("--schema", run_args.schema, "schema for class validation");
  run->add_option("--window", run_args.window, "history window in frames");
  run->add_option("--threshold", run_args.threshold, "relevance probability threshold");
  run->add_option("--out", run_args.out_path, "assignments output path");

  BenchArgs bench_args;
  CLI::App * bench = app.add_subcommand("bench", "per-frame latency benchmark");
  bench->add_option("--model", bench_args.model_path, "trained model (json)")->required();
  bench->add_option("--stream", bench_args.stream_path, "detection stream (jsonl)")->required();
  bench->add_option("--schema", bench_args.schema, "schema for class validation");
  bench->add_option("--budget-ms", bench_args.params.budget_ms, "p99 budget in milliseconds");
  bench->add_option("--warmup", bench_args.params.warmup_frames, "warm-up frames");
  bench->add_option("--min-frames", bench_args.params.min_measured_frames,
                    "minimum measured frames");
  bench->add_option("--window", bench_args.params.window, "history window in frames");
  bench->add_option("--threshold", bench_args.params.threshold, "relevance threshold");
  bench->add_option("--report", bench_args.report, "json or table")
    ->check(CLI::IsMember({"json", "table"}));
  bench->add_option("--out", bench_args.out_path, "write report here instead of stdout");

  ValidateArgs validate_args;
  CLI::App * validate = app.add_subcommand("validate", "parse inputs and print statistics");
  validate->add_option("--input", validate_args.input_path, "records file (jsonl)")->required();
  validate->add_option("--schema", validate_args.schema, "builtin schema name or JSON path");

  CLI::App * synth = app.add_subcommand("synth", "generate seeded synthetic data");
  synth->require_subcommand(1);

  tlr::SynthArrowParams arrow_params;
  std::string synth_arrows_out;
  CLI::App * synth_arrows = synth->add_subcommand("arrows", "labeled arrow training data");
  synth_arrows->add_option("--rows", arrow_params.rows, "labeled arrows to generate");
  synth_arrows->add_option("--seed", arrow_params.seed, "generator seed");
  synth_arrows->add_option("--width", arrow_params.width, "image width");
  synth_arrows->add_option("--height", arrow_params.height, "image height");
  synth_arrows->add_option("--out", synth_arrows_out, "output path")->required();

  tlr::SynthStreamParams stream_params;
  std::string synth_stream_out;
  CLI::App * synth_stream_cmd = synth->add_subcommand("stream", "detection replay stream");
  synth_stream_cmd->add_option("--frames", stream_params.frames, "frames to generate");
  synth_stream_cmd->add_option("--arrows", stream_params.arrows_per_frame, "arrows per frame");
  synth_stream_cmd->add_option("--lights", stream_params.lights_per_frame, "lights per frame");
  synth_stream_cmd->add_option("--seed", stream_params.seed, "generator seed");
  synth_stream_cmd->add_option("--width", stream_params.width, "image width");
  synth_stream_cmd->add_option("--height", stream_params.height, "image height");
  synth_stream_cmd->add_option("--out", synth_stream_out, "output path")->required();

  CLI::App * version = app.add_subcommand("version", "print version information");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (version->parsed()) {
      std::cout << "tlr " << kVersion << " (report schema 1, model format tlr.gbm v1)\n";
      return kExitOk;
    }
    if (eval->parsed()) {
      return cmd_eval(eval_args);
    }
    if (train->parsed()) {
      return cmd_train(train_args);
    }
    if (run->parsed()) {
      return cmd_run(run_args);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_args);
    }
    if (validate->parsed()) {
      return cmd_validate(validate_args);
    }
    if (synth_arrows->parsed()) {
      tlr::write_records_file(tlr::synth_arrow_frames(arrow_params), synth_arrows_out);
      std::cout << "wrote " << arrow_params.rows << " labeled arrows to " << synth_arrows_out
                << '\n';
      return kExitOk;
    }
    if (synth_stream_cmd->parsed()) {
      tlr::write_records_file(tlr::synth_stream(stream_params), synth_stream_out);
      std::cout << "wrote " << stream_params.frames << " frames to " << synth_stream_out << '\n';
      return kExitOk;
    }
    std::cerr << "error: no command given\n";
    return kExitValidation;
  } catch (const tlr::ValidationError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception & e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
