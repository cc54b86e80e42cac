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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "test_util.hpp"
#include "tlr/bench.hpp"
#include "tlr/dataio.hpp"
#include "tlr/errors.hpp"
#include "tlr/synth.hpp"

using namespace tlr;

namespace
{

const GBMModel & tiny_model()
{
  static const GBMModel model = [] {
    const auto frames = synth_arrow_frames(SynthArrowParams{.rows = 400, .seed = 11});
    const ArrowDataset data = build_arrow_dataset(frames);
    GBMConfig cfg;
    cfg.stages = 40;
    return fit(data.features, data.labels, cfg, arrow_feature_names());
  }();
  return model;
}

}  // namespace

TEST_CASE("nearest-rank percentiles")
{
  const std::vector<double> values = {5.0, 1.0, 4.0, 2.0, 3.0};
  CHECK(percentile(values, 0.5) == 3.0);
  CHECK(percentile(values, 1.0) == 5.0);
  CHECK(percentile(values, 0.2) == 1.0);
  CHECK(percentile(values, 0.21) == 2.0);
  CHECK(percentile({7.0}, 0.99) == 7.0);
  CHECK_THROWS_AS(percentile({}, 0.5), ValidationError);
  CHECK_THROWS_AS(percentile({1.0}, 0.0), ValidationError);
}

TEST_CASE("synthetic generators are seed-deterministic")
{
  const auto a = synth_arrow_frames(SynthArrowParams{.rows = 100, .seed = 21});
  const auto b = synth_arrow_frames(SynthArrowParams{.rows = 100, .seed = 21});
  const auto c = synth_arrow_frames(SynthArrowParams{.rows = 100, .seed = 22});
  CHECK(write_records_text(a) == write_records_text(b));
  CHECK(write_records_text(a) != write_records_text(c));

  const auto sa = synth_stream(SynthStreamParams{.frames = 10, .seed = 21});
  const auto sb = synth_stream(SynthStreamParams{.frames = 10, .seed = 21});
  CHECK(write_records_text(sa) == write_records_text(sb));
}

TEST_CASE("synthetic labels follow the deviation-band rule")
{
  const auto frames = synth_arrow_frames(SynthArrowParams{.rows = 500, .seed = 23});
  std::size_t relevant = 0;
  for (const Frame & frame : frames) {
    REQUIRE(frame.ground_truths.size() == 1);
    const GroundTruth & gt = frame.ground_truths[0];
    const double dev = gt.bbox.cx / frame.width - 0.5;
    const ArrowClass cls = std::get<ArrowClass>(gt.cls);
    CHECK(*gt.relevant == synth_relevance_rule(dev, cls));
    // Ambiguous boundary arrows are never emitted.
    CHECK_FALSE(synth_near_boundary(dev, cls));
    relevant += *gt.relevant ? 1 : 0;
  }
  // Both labels occur in quantity.
  CHECK(relevant > 50);
  CHECK(relevant < 450);
}

TEST_CASE("stream parses back through the canonical format")
{
  const auto frames = synth_stream(SynthStreamParams{.frames = 5, .seed = 24});
  const auto back = parse_records_text(write_records_text(frames), builtin_schema("dtld"));
  CHECK(back == frames);
}

TEST_CASE("bench measures after warm-up and applies the budget")
{
  const auto frames =
    synth_stream(SynthStreamParams{.frames = 60, .arrows_per_frame = 5, .lights_per_frame = 5,
                                   .seed = 25});
  BenchParams params;
  params.warmup_frames = 10;
  params.min_measured_frames = 50;
  params.budget_ms = 1000.0;  // generous: only the accounting is under test here
  const BenchReport report = run_bench(tiny_model(), frames, params);
  CHECK(report.frames_measured == 50);
  CHECK(report.p50_us <= report.p95_us);
  CHECK(report.p95_us <= report.p99_us);
  CHECK(report.p99_us <= report.max_us);
  CHECK(report.pass);
  CHECK(report.relevant_lights > 0);

  BenchParams strangled = params;
  strangled.budget_ms = 1e-9;
  CHECK_FALSE(run_bench(tiny_model(), frames, strangled).pass);
}

TEST_CASE("bench rejects streams that cannot fill the protocol")
{
  const auto frames = synth_stream(SynthStreamParams{.frames = 20, .seed = 26});
  BenchParams params;  // warmup 100
  CHECK_THROWS_WITH_AS(
    run_bench(tiny_model(), frames, params), doctest::Contains("warm-up"), ValidationError);

  BenchParams short_measure;
  short_measure.warmup_frames = 10;
  short_measure.min_measured_frames = 1000;
  CHECK_THROWS_AS(run_bench(tiny_model(), frames, short_measure), ValidationError);
}

TEST_CASE("bench report serializes")
{
  const auto frames =
    synth_stream(SynthStreamParams{.frames = 30, .arrows_per_frame = 2, .lights_per_frame = 2,
                                   .seed = 27});
  BenchParams params;
  params.warmup_frames = 5;
  params.min_measured_frames = 25;
  const BenchReport report = run_bench(tiny_model(), frames, params);
  const nlohmann::json j = bench_to_json(report);
  CHECK(j.at("frames").get<std::size_t>() == 25);
  CHECK(j.at("latency_us").contains("p99"));
  CHECK(bench_to_table(report).find("latency") != std::string::npos);
}
