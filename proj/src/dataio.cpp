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

#include "tlr/dataio.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tlr/errors.hpp"

namespace tlr
{

namespace
{

using nlohmann::json;

struct RawRecord
{
  std::size_t line_no = 0;
  bool is_arrow = false;
  BBox bbox;
  ObjectClass cls{TLClass{}};
  std::optional<double> confidence;
  std::optional<bool> relevant;
  std::optional<std::int64_t> timestamp_ms;
};

struct PendingFrame
{
  std::string id;
  std::optional<double> width;
  std::optional<double> height;
  std::optional<std::int64_t> timestamp_ms;
  std::size_t first_line = 0;
  std::vector<RawRecord> records;
};

[[noreturn]] void fail(std::size_t line_no, const std::string & message)
{
  throw ValidationError("line " + std::to_string(line_no) + ": " + message);
}

double require_number(const json & j, const char * field, std::size_t line_no)
{
  if (!j.contains(field) || !j.at(field).is_number()) {
    fail(line_no, std::string("field '") + field + "' must be a number");
  }
  return j.at(field).get<double>();
}

std::string require_string(const json & j, const char * field, std::size_t line_no)
{
  if (!j.contains(field) || !j.at(field).is_string()) {
    fail(line_no, std::string("field '") + field + "' must be a string");
  }
  return j.at(field).get<std::string>();
}

std::optional<std::int64_t> optional_timestamp(const json & j, std::size_t line_no)
{
  if (!j.contains("timestamp_ms")) {
    return std::nullopt;
  }
  if (!j.at("timestamp_ms").is_number_integer()) {
    fail(line_no, "field 'timestamp_ms' must be an integer");
  }
  return j.at("timestamp_ms").get<std::int64_t>();
}

void count_unknown_fields(
  const json & j, std::initializer_list<const char *> known, ParseStats & stats)
{
  for (const auto & item : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char * k) { return item.key() == k; })) {
      ++stats.unknown_fields;
    }
  }
}

BBox parse_bbox(const json & j, std::size_t line_no)
{
  if (!j.contains("bbox") || !j.at("bbox").is_array() || j.at("bbox").size() != 4) {
    fail(line_no, "field 'bbox' must be an array [cx, cy, w, h]");
  }
  const auto & arr = j.at("bbox");
  for (const auto & v : arr) {
    if (!v.is_number()) {
      fail(line_no, "bbox entries must be numbers");
    }
  }
  try {
    return BBox::from_center_size(
      arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(), arr[3].get<double>());
  } catch (const ValidationError & e) {
    fail(line_no, e.what());
  }
}

}  // namespace

std::vector<Frame> parse_records(std::istream & in, const DatasetSchema & schema, ParseStats * stats)
{
  ParseStats local;
  ParseStats & st = stats != nullptr ? *stats : local;
  st = ParseStats{};

  std::map<std::string, PendingFrame> pending;
  auto frame_for = [&](const std::string & id, std::size_t line_no) -> PendingFrame & {
    auto [it, inserted] = pending.try_emplace(id);
    if (inserted) {
      it->second.id = id;
      it->second.first_line = line_no;
    }
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    ++st.lines;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception & e) {
      fail(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) {
      fail(line_no, "each line must be a JSON object");
    }

    const std::string frame_id = require_string(j, "frame_id", line_no);

    if (!j.contains("kind")) {
      // Manifest line: declares the frame and its image dimensions.
      count_unknown_fields(j, {"frame_id", "width", "height", "timestamp_ms"}, st);
      ++st.manifests;
      const double width = require_number(j, "width", line_no);
      const double height = require_number(j, "height", line_no);
      if (width <= 0.0 || height <= 0.0) {
        fail(line_no, "frame dimensions must be positive");
      }
      PendingFrame & frame = frame_for(frame_id, line_no);
      if (frame.width && (*frame.width != width || *frame.height != height)) {
        fail(line_no, "conflicting manifest for frame '" + frame_id + "'");
      }
      frame.width = width;
      frame.height = height;
      if (auto ts = optional_timestamp(j, line_no)) {
        frame.timestamp_ms = ts;
      }
      continue;
    }

    count_unknown_fields(
      j, {"frame_id", "kind", "bbox", "cls", "confidence", "relevant", "timestamp_ms"}, st);
    ++st.records;

    RawRecord rec;
    rec.line_no = line_no;
    const std::string kind = require_string(j, "kind", line_no);
    if (kind == "tl") {
      rec.is_arrow = false;
    } else if (kind == "arrow") {
      rec.is_arrow = true;
    } else {
      fail(line_no, "field 'kind' must be \"tl\" or \"arrow\", got \"" + kind + "\"");
    }

    rec.bbox = parse_bbox(j, line_no);

    const std::string cls = require_string(j, "cls", line_no);
    try {
      if (rec.is_arrow) {
        rec.cls = parse_arrow_class(cls);
      } else {
        rec.cls = parse_tl_class(cls, schema);
      }
    } catch (const ValidationError & e) {
      fail(line_no, e.what());
    }

    if (j.contains("confidence")) {
      if (!j.at("confidence").is_number()) {
        fail(line_no, "field 'confidence' must be a number");
      }
      const double conf = j.at("confidence").get<double>();
      if (!(conf >= 0.0 && conf <= 1.0)) {
        fail(line_no, "confidence must lie in [0, 1]");
      }
      rec.confidence = conf;
    }

    if (j.contains("relevant")) {
      if (!j.at("relevant").is_boolean()) {
        fail(line_no, "field 'relevant' must be a boolean");
      }
      if (!rec.is_arrow) {
        fail(line_no, "'relevant' is permitted only on arrow records");
      }
      if (rec.confidence) {
        fail(line_no, "'relevant' is a label field and cannot appear on a prediction");
      }
      rec.relevant = j.at("relevant").get<bool>();
    }

    rec.timestamp_ms = optional_timestamp(j, line_no);
    frame_for(frame_id, line_no).records.push_back(std::move(rec));
  }

  // Assemble frames: resolve dimensions, clamp boxes, split into
  // detections and ground truths preserving input order.
  std::vector<Frame> frames;
  frames.reserve(pending.size());
  for (auto & [id, p] : pending) {
    Frame frame;
    frame.id = id;
    frame.width = p.width.value_or(schema.image_width);
    frame.height = p.height.value_or(schema.image_height);
    if (frame.width <= 0.0 || frame.height <= 0.0) {
      fail(p.first_line, "frame '" + id + "' has no usable image dimensions");
    }
    frame.timestamp_ms = p.timestamp_ms;
    for (RawRecord & rec : p.records) {
      if (!frame.timestamp_ms && rec.timestamp_ms) {
        frame.timestamp_ms = rec.timestamp_ms;
      }
      BBox clamped;
      try {
        clamped = rec.bbox.clamped_to(frame.width, frame.height);
      } catch (const ValidationError & e) {
        fail(rec.line_no, e.what());
      }
      if (rec.confidence) {
        frame.detections.push_back(Detection{clamped, rec.cls, *rec.confidence});
      } else {
        frame.ground_truths.push_back(GroundTruth{clamped, rec.cls, rec.relevant});
      }
    }
    frames.push_back(std::move(frame));
  }

  std::sort(frames.begin(), frames.end(), [](const Frame & a, const Frame & b) {
    const auto ka = a.timestamp_ms.value_or(std::numeric_limits<std::int64_t>::min());
    const auto kb = b.timestamp_ms.value_or(std::numeric_limits<std::int64_t>::min());
    return std::tie(ka, a.id) < std::tie(kb, b.id);
  });
  return frames;
}

std::vector<Frame> parse_records_text(
  const std::string & text, const DatasetSchema & schema, ParseStats * stats)
{
  std::istringstream in(text);
  return parse_records(in, schema, stats);
}

std::vector<Frame> parse_records_file(
  const std::filesystem::path & path, const DatasetSchema & schema, ParseStats * stats)
{
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open input file: " + path.string());
  }
  return parse_records(in, schema, stats);
}

namespace
{

json record_to_json(
  const std::string & frame_id, const BBox & box, const ObjectClass & cls,
  std::optional<double> confidence, std::optional<bool> relevant)
{
  json j{
    {"frame_id", frame_id},
    {"kind", is_arrow(cls) ? "arrow" : "tl"},
    {"bbox", {box.cx, box.cy, box.w, box.h}},
    {"cls", class_label(cls)},
  };
  if (confidence) {
    j["confidence"] = *confidence;
  }
  if (relevant) {
    j["relevant"] = *relevant;
  }
  return j;
}

}  // namespace

void write_records(const std::vector<Frame> & frames, std::ostream & out)
{
  for (const Frame & frame : frames) {
    json manifest{{"frame_id", frame.id}, {"width", frame.width}, {"height", frame.height}};
    if (frame.timestamp_ms) {
      manifest["timestamp_ms"] = *frame.timestamp_ms;
    }
    out << manifest.dump() << '\n';
    for (const Detection & det : frame.detections) {
      out << record_to_json(frame.id, det.bbox, det.cls, det.confidence, std::nullopt).dump()
          << '\n';
    }
    for (const GroundTruth & gt : frame.ground_truths) {
      out << record_to_json(frame.id, gt.bbox, gt.cls, std::nullopt, gt.relevant).dump() << '\n';
    }
  }
}

std::string write_records_text(const std::vector<Frame> & frames)
{
  std::ostringstream out;
  write_records(frames, out);
  return out.str();
}

void write_text_atomic(const std::filesystem::path & path, const std::string & content)
{
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const auto tmp = dir / (path.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ValidationError("cannot open output file: " + tmp.string());
    }
    out << content;
    if (!out) {
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

void write_records_file(const std::vector<Frame> & frames, const std::filesystem::path & path)
{
  write_text_atomic(path, write_records_text(frames));
}

}  // namespace tlr
