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

#include "tlr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tlr/errors.hpp"
#include "tlr/relevance.hpp"

namespace tlr
{

double percentile(std::vector<double> values, double q)
{
  if (values.empty() || !(q > 0.0 && q <= 1.0)) {
    throw ValidationError("percentile requires a non-empty sample and q in (0, 1]");
  }
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
    std::ceil(q * static_cast<double>(values.size())));
  return values[std::min(rank, values.size()) - 1];
}

BenchReport run_bench(
  const GBMModel & model, const std::vector<Frame> & frames, const BenchParams & params)
{
  if (frames.size() <= params.warmup_frames) {
    throw ValidationError(
      "stream has " + std::to_string(frames.size()) + " frames, shorter than the " +
      std::to_string(params.warmup_frames) + "-frame warm-up");
  }
  const std::size_t measured = frames.size() - params.warmup_frames;
  if (measured < params.min_measured_frames) {
    throw ValidationError(
      "stream leaves only " + std::to_string(measured) + " frames to measure; need at least " +
      std::to_string(params.min_measured_frames));
  }

  using clock = std::chrono::steady_clock;
  RelevanceEngine engine(model, params.window, params.threshold);

  BenchReport report;
  report.warmup_frames = params.warmup_frames;
  report.budget_ms = params.budget_ms;

  std::vector<double> latencies_us;
  latencies_us.reserve(measured);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto start = clock::now();
    const RelevanceAssignment assignment = engine.process(frames[i]);
    const auto stop = clock::now();

    std::size_t relevant = 0;
    for (const LightAssignment & light : assignment.lights) {
      relevant += light.relevant ? 1 : 0;
    }
    if (i >= params.warmup_frames) {
      latencies_us.push_back(
        std::chrono::duration<double, std::micro>(stop - start).count());
      report.relevant_lights += relevant;
    }
  }

  report.frames_measured = latencies_us.size();
  report.p50_us = percentile(latencies_us, 0.50);
  report.p95_us = percentile(latencies_us, 0.95);
  report.p99_us = percentile(latencies_us, 0.99);
  report.max_us = *std::max_element(latencies_us.begin(), latencies_us.end());
  report.pass = report.p99_us <= params.budget_ms * 1000.0;
  return report;
}

nlohmann::json bench_to_json(const BenchReport & report)
{
  return nlohmann::json{
    {"report_version", 1},
    {"frames", report.frames_measured},
    {"warmup_frames", report.warmup_frames},
    {"latency_us", {{"p50", report.p50_us},
                    {"p95", report.p95_us},
                    {"p99", report.p99_us},
                    {"max", report.max_us}}},
    {"budget_ms", report.budget_ms},
    {"pass", report.pass},
    {"relevant_lights", report.relevant_lights},
  };
}

std::string bench_to_table(const BenchReport & report)
{
  std::ostringstream out;
  out << "frames measured: " << report.frames_measured << " (after " << report.warmup_frames
      << " warm-up)\n";
  out << "latency p50 " << report.p50_us << " us, p95 " << report.p95_us << " us, p99 "
      << report.p99_us << " us, max " << report.max_us << " us\n";
  out << "budget " << report.budget_ms << " ms: " << (report.pass ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace tlr
