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

#include "lmt/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace lmt {

std::vector<std::string> LineReader::tokens() {
  std::string line;
  while (std::getline(is_, line)) {
    ++line_no_;
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(std::move(tok));
    if (!out.empty()) return out;
  }
  fail("unexpected end of file");
}

long long LineReader::keyed_int(std::string_view key) {
  auto t = tokens();
  if (t.size() != 2 || t[0] != key) fail("expected '" + std::string(key) + " <integer>'");
  return parse_int(t[1]);
}

bool LineReader::at_end() {
  is_ >> std::ws;
  return is_.eof();
}

void LineReader::fail(const std::string& message) const {
  throw Error(ErrorKind::kMalformedFile,
              what_ + " file, line " + std::to_string(line_no_) + ": " + message);
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                       : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

void write_text_file_atomic(const std::filesystem::path& path,
                            const std::function<void(std::ostream&)>& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw Error(ErrorKind::kIo, "cannot open " + tmp.string() + " for writing");
    try {
      body(os);
    } catch (...) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw;
    }
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error(ErrorKind::kIo, "write to " + tmp.string() + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot move " + tmp.string() + " to " + path.string());
  }
}

}  // namespace lmt
