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

#ifndef TLR__DATAIO_HPP_
#define TLR__DATAIO_HPP_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tlr/geometry.hpp"
#include "tlr/taxonomy.hpp"

namespace tlr
{

// JSON Lines interchange format, one object per line, UTF-8.
//
// Frame manifest line (declares a frame and its image dimensions):
//   {"frame_id": "f1", "width": 2048, "height": 1024, "timestamp_ms": 120}
// Record line (a prediction when "confidence" is present, a label otherwise):
//   {"frame_id": "f1", "kind": "tl", "bbox": [cx, cy, w, h],
//    "cls": "green_circle", "confidence": 0.9}
//   {"frame_id": "f1", "kind": "arrow", "bbox": [...], "cls": "straight",
//    "relevant": true}
//
// "relevant" is permitted only on arrow labels. Frames without a manifest
// line take their dimensions from the schema. Unknown fields are skipped
// and counted in ParseStats.

struct ParseStats
{
  std::size_t lines = 0;
  std::size_t records = 0;
  std::size_t manifests = 0;
  std::size_t unknown_fields = 0;
};

/// Parses a record stream into frames ordered by (timestamp_ms, frame_id).
/// Records are grouped by frame_id, classes validated against `schema`, and
/// boxes clamped to the image bounds. Throws ValidationError with the
/// offending line number on malformed input.
std::vector<Frame> parse_records(
  std::istream & in, const DatasetSchema & schema, ParseStats * stats = nullptr);

std::vector<Frame> parse_records_text(
  const std::string & text, const DatasetSchema & schema, ParseStats * stats = nullptr);

std::vector<Frame> parse_records_file(
  const std::filesystem::path & path, const DatasetSchema & schema, ParseStats * stats = nullptr);

/// Inverse of parse_records: one manifest line per frame, then one line per
/// record (detections first, labels after, input order kept). parse of the
/// output reproduces the input frames field-for-field.
void write_records(const std::vector<Frame> & frames, std::ostream & out);

std::string write_records_text(const std::vector<Frame> & frames);

/// Writes via a temp file in the target directory plus rename, so readers
/// never observe a partial file.
void write_text_atomic(const std::filesystem::path & path, const std::string & content);

void write_records_file(const std::vector<Frame> & frames, const std::filesystem::path & path);

}  // namespace tlr

#endif  // TLR__DATAIO_HPP_
