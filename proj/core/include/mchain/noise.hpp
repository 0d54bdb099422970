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

#pragma once

#include <cstdint>
#include <random>

namespace mchain {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of trajectory k in an ensemble; a pure function of (master, k) so any
// partition of the trajectory range reproduces the same streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept;

// Standard normals from mt19937_64 via Box-Muller. std::normal_distribution is
// implementation-defined, so the transform is spelled out here: u = (x >> 11) * 2^-53,
// both variates of a pair are used, first the cosine branch.
// Output is bit-identical wherever the libm log/sin/cos/sqrt agree.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : engine_(seed) {}

    double normal();
    // Wiener increment with variance dt
    double increment(double sqrt_dt) { return sqrt_dt * normal(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace mchain
