// Copyright 2026 The llmroute Authors.
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

#include <cmath>
#include <cstdint>
#include <random>

namespace llmroute {

// Seeded random stream with a fixed draw count per primitive. The standard
// distributions are avoided on purpose: normal_distribution caches a second
// variate and uniform_real_distribution's draw count is unspecified, which
// would break byte-exact replay of a session from its seed.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // One engine draw. Result in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller, always exactly two engine draws.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Uniform index in [0, n). One engine draw.
  std::size_t uniform_index(std::size_t n) {
    const auto idx = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return idx < n ? idx : n - 1;
  }

  bool operator==(const RngStream& other) const { return gen_ == other.gen_; }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  std::mt19937_64 gen_;
};

}  // namespace llmroute
