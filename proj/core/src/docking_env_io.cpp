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

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <algorithm>
#include <string>

#include <json.hpp>

#include "lmt/docking_env.hpp"
#include "lmt/io.hpp"

namespace lmt {

namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorKind::kMalformedFile, std::string("env config: '") + key + "' must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

void write_env_config(const EnvConfig& c, std::ostream& os) {
  json j;
  j["format"] = "lmt-env";
  j["version"] = 1;
  j["berth"] = {{"north", c.berth.north}, {"east", c.berth.east},
                {"heading_deg", c.berth.heading / kDeg}};
  j["quay"] = json::array();
  for (const Segment& s : c.quay) j["quay"].push_back({s.a.x, s.a.y, s.b.x, s.b.y});
  j["footprint"] = json::array();
  for (const Vec2& p : c.footprint) j["footprint"].push_back(vec_json(p));
  j["timestep"] = c.timestep;
  j["mass_surge"] = c.mass_surge;
  j["mass_sway"] = c.mass_sway;
  j["inertia_yaw"] = c.inertia_yaw;
  j["damping_surge"] = c.damping_surge;
  j["damping_sway"] = c.damping_sway;
  j["damping_yaw"] = c.damping_yaw;
  j["azimuth1"] = vec_json(c.azimuth1);
  j["azimuth2"] = vec_json(c.azimuth2);
  j["tunnel"] = vec_json(c.tunnel);
  j["success_position_tol"] = c.success_position_tol;
  j["success_heading_tol_deg"] = c.success_heading_tol_deg;
  j["success_speed_tol"] = c.success_speed_tol;
  j["start_min_radius"] = c.start_min_radius;
  j["start_max_radius"] = c.start_max_radius;
  j["start_sector_min_deg"] = c.start_sector_min_deg;
  j["start_sector_max_deg"] = c.start_sector_max_deg;
  j["start_heading_spread_deg"] = c.start_heading_spread_deg;
  j["start_max_surge"] = c.start_max_surge;
  j["start_max_quay_distance"] = c.start_max_quay_distance;
  os << j.dump(2) << '\n';
}

EnvConfig read_env_config(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedFile, std::string("env config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kMalformedFile, "env config: top level must be an object");
  if (j.contains("version") && j["version"] != 1) {
    throw Error(ErrorKind::kVersionMismatch, "env config: unsupported version");
  }

  EnvConfig c = EnvConfig::defaults();
  double* scalar_fields[] = {
      &c.timestep, &c.mass_surge, &c.mass_sway, &c.inertia_yaw, &c.damping_surge,
      &c.damping_sway, &c.damping_yaw, &c.success_position_tol, &c.success_heading_tol_deg,
      &c.success_speed_tol, &c.start_min_radius, &c.start_max_radius, &c.start_sector_min_deg,
      &c.start_sector_max_deg, &c.start_heading_spread_deg, &c.start_max_surge,
      &c.start_max_quay_distance};
  const char* scalar_names[] = {
      "timestep", "mass_surge", "mass_sway", "inertia_yaw", "damping_surge", "damping_sway",
      "damping_yaw", "success_position_tol", "success_heading_tol_deg", "success_speed_tol",
      "start_min_radius", "start_max_radius", "start_sector_min_deg", "start_sector_max_deg",
      "start_heading_spread_deg", "start_max_surge", "start_max_quay_distance"};

  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "format" || key == "version") continue;
      if (key == "berth") {
        const json& b = it.value();
        c.berth.north = b.at("north").get<double>();
        c.berth.east = b.at("east").get<double>();
        c.berth.heading = wrap_to_pi(b.at("heading_deg").get<double>() * kDeg);
      } else if (key == "quay") {
        c.quay.clear();
        for (const json& s : it.value()) {
          if (!s.is_array() || s.size() != 4) {
            throw Error(ErrorKind::kMalformedFile, "env config: quay segment must be [n1, e1, n2, e2]");
          }
          c.quay.push_back({{s[0].get<double>(), s[1].get<double>()},
                            {s[2].get<double>(), s[3].get<double>()}});
        }
      } else if (key == "footprint") {
        c.footprint.clear();
        for (const json& p : it.value()) c.footprint.push_back(vec_from(p, "footprint"));
      } else if (key == "azimuth1") {
        c.azimuth1 = vec_from(it.value(), "azimuth1");
      } else if (key == "azimuth2") {
        c.azimuth2 = vec_from(it.value(), "azimuth2");
      } else if (key == "tunnel") {
        c.tunnel = vec_from(it.value(), "tunnel");
      } else {
        bool known = false;
        for (std::size_t i = 0; i < std::size(scalar_names); ++i) {
          if (key == scalar_names[i]) {
            *scalar_fields[i] = it.value().get<double>();
            known = true;
          }
        }
        if (!known) throw Error(ErrorKind::kMalformedFile, "env config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedFile, std::string("env config: ") + e.what());
  }
  c.validate();
  return c;
}

EnvConfig load_env_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::kIo, "cannot open env config " + path.string());
  return read_env_config(is);
}

void save_env_config(const EnvConfig& config, const std::filesystem::path& path) {
  write_text_file_atomic(path, [&](std::ostream& os) { write_env_config(config, os); });
}

// ---------------------------------------------------------------------------
// Trajectory CSV

std::vector<std::string> trajectory_csv_header(bool with_attributions) {
  std::vector<std::string> h = {"step", "north", "east", "heading"};
  for (auto n : kFeatureNames) h.emplace_back(n);
  for (auto n : kActionNames) h.push_back(std::string(n) + "_norm");
  h.insert(h.end(), {"f1_kN", "f2_kN", "f3_kN", "alpha1_deg", "alpha2_deg"});
  h.insert(h.end(), {"contact_event", "success_event"});
  if (with_attributions) {
    h.emplace_back("leaf_id");
    for (auto out : kActionNames) {
      for (auto feat : kFeatureNames) h.push_back("I_" + std::string(out) + "_" + std::string(feat));
    }
  }
  return h;
}

void write_trajectory_csv(const Trajectory& t, std::ostream& os, bool with_attributions) {
  const auto header = trajectory_csv_header(with_attributions);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const TrajectoryStep& s : t.steps) {
    os << s.step << ',' << format_double(s.pose.north) << ',' << format_double(s.pose.east) << ','
       << format_double(s.pose.heading);
    for (double v : s.state.values) os << ',' << format_double(v);
    for (double v : s.action) os << ',' << format_double(v);
    for (double v : s.physical.as_array()) os << ',' << format_double(v);
    os << ',' << (s.contact ? 1 : 0) << ',' << (s.success ? 1 : 0);
    if (with_attributions) {
      if (!s.explanation) {
        throw Error(ErrorKind::kInvalidArgument, "trajectory step has no attribution to export");
      }
      os << ',' << s.explanation->leaf_id;
      const Matrix& I = s.explanation->attribution.relative_importance;
      for (Eigen::Index o = 0; o < I.rows(); ++o) {
        for (Eigen::Index f = 0; f < I.cols(); ++f) os << ',' << format_double(I(o, f));
      }
    }
    os << '\n';
  }
}

std::vector<StateVector> read_trajectory_states(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::kMalformedFile, "trajectory: empty file");
  const auto header = split(line, ',');
  std::array<std::size_t, kNumFeatures> cols{};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    auto it = std::find(header.begin(), header.end(), kFeatureNames[f]);
    if (it == header.end()) {
      throw Error(ErrorKind::kMalformedFile,
                  "trajectory: missing column '" + std::string(kFeatureNames[f]) + "'");
    }
    cols[f] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<StateVector> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::kMalformedFile,
                  "trajectory: line " + std::to_string(line_no) + " has wrong column count");
    }
    StateVector s;
    for (std::size_t f = 0; f < kNumFeatures; ++f) s.values[f] = parse_double(fields[cols[f]]);
    out.push_back(s);
  }
  return out;
}

}  // namespace lmt
