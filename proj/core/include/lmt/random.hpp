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

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lmt {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes a seed together with a sequence of counters. Used to give every
/// (node, feature, threshold) or (round, episode) its own independent value
/// so results do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t c : counters) h = splitmix64(h ^ splitmix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

/// Maps 64 random bits to [0, 1) with 53-bit resolution.
inline constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Uniform draw in [-amplitude, +amplitude] addressed by counters.
inline double counter_uniform(std::uint64_t seed, std::initializer_list<std::uint64_t> counters,
                              double amplitude) {
  if (amplitude == 0.0) return 0.0;
  return (2.0 * to_unit(derive_seed(seed, counters)) - 1.0) * amplitude;
}

/// Sequential stream for sampling. The distribution code is ours rather than
/// std::uniform_real_distribution so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  double uniform() { return to_unit(engine_()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lmt
