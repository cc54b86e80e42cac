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

#ifndef TLR__BENCH_HPP_
#define TLR__BENCH_HPP_

#include <cstddef>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tlr/gbm.hpp"
#include "tlr/geometry.hpp"

namespace tlr
{

struct BenchReport
{
  std::size_t frames_measured = 0;
  std::size_t warmup_frames = 0;
  // Nearest-rank percentiles of per-frame wall time, in microseconds.
  double p50_us = 0.0;
  double p95_us = 0.0;
  double p99_us = 0.0;
  double max_us = 0.0;
  double budget_ms = 0.0;
  bool pass = false;  // p99 within budget
  std::size_t relevant_lights = 0;
};

struct BenchParams
{
  std::size_t warmup_frames = 100;
  std::size_t min_measured_frames = 1000;
  double budget_ms = 2.0;
  std::size_t window = 30;
  double threshold = 0.5;
};

/// Nearest-rank percentile of an unsorted sample; q in (0, 1].
double percentile(std::vector<double> values, double q);

/// Replays the stream through a relevance engine and times each frame.
/// Throws ValidationError when the stream is shorter than the warm-up or
/// leaves fewer than min_measured_frames to measure.
BenchReport run_bench(
  const GBMModel & model, const std::vector<Frame> & frames, const BenchParams & params);

nlohmann::json bench_to_json(const BenchReport & report);
std::string bench_to_table(const BenchReport & report);

}  // namespace tlr

#endif  // TLR__BENCH_HPP_
