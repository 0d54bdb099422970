// Copyright 2026 The mchain Authors
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

#include "mchain/noise.hpp"

#include <cmath>
#include <numbers>

namespace mchain {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept {
    return splitmix64(master + (k + 1) * 0x9E3779B97F4A7C15ULL);
}

double NoiseStream::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    // u1 in (0, 1] keeps the log finite
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * scale;
    const double u2 = static_cast<double>(engine_() >> 11) * scale;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(phi);
    has_cached_ = true;
    return r * std::cos(phi);
}

}  // namespace mchain
