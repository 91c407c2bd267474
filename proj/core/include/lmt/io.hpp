// Copyright 2026 The LMT Docking Authors.
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

#pragma once

#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lmt/common.hpp"

namespace lmt {

/// Whitespace-tokenized line reader for the text formats. Any error is
/// reported as kMalformedFile with the line number.
class LineReader {
 public:
  LineReader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}

  /// Next non-empty line split on whitespace; throws at end of input.
  std::vector<std::string> tokens();
  /// Reads a "key <integer>" line.
  long long keyed_int(std::string_view key);
  bool at_end();

  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::istream& is_;
  std::string what_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> split(std::string_view line, char sep);

/// Writes through a temporary sibling file and renames it into place, so a
/// failed write never leaves a partial file behind.
void write_text_file_atomic(const std::filesystem::path& path,
                            const std::function<void(std::ostream&)>& body);

}  // namespace lmt
