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

#include "lmt/common.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace lmt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kMalformedFile: return "malformed file";
    case ErrorKind::kVersionMismatch: return "version mismatch";
    case ErrorKind::kUnsupportedActivation: return "unsupported activation";
    case ErrorKind::kNonFinite: return "non-finite value";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kEpisodeTerminated: return "episode terminated";
    case ErrorKind::kStartInContact: return "start in contact";
  }
  return "unknown";
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double value = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(ErrorKind::kMalformedFile, "cannot parse number '" + std::string(token) + "'");
  }
  return value;
}

long long parse_int(std::string_view token) {
  long long value = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(ErrorKind::kMalformedFile, "cannot parse integer '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace lmt
