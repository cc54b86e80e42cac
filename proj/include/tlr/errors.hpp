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

#ifndef TLR__ERRORS_HPP_
#define TLR__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tlr
{

/// Raised for any defect in user-supplied input: malformed lines, unknown
/// class labels, invalid geometry, incompatible files. Maps to exit code 2
/// at the CLI boundary; everything else maps to exit code 1.
class ValidationError : public std::runtime_error
{
public:
  explicit ValidationError(const std::string & what) : std::runtime_error(what) {}
};

}  // namespace tlr

#endif  // TLR__ERRORS_HPP_
