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

#include "mchain/oracles.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "mchain/error.hpp"
#include "mchain/lindblad.hpp"

namespace mchain {

namespace {
constexpr double kCriticalBand = 1e-8;
constexpr int kMaxPropagateLength = 8;
}  // namespace

std::string to_string(TwoSiteRegime r) {
    switch (r) {
        case TwoSiteRegime::underdamped: return "underdamped";
        case TwoSiteRegime::critical: return "critical";
        case TwoSiteRegime::overdamped: return "overdamped";
    }
    return "underdamped";
}

TwoSiteRegime twosite_regime(double gamma) {
    if (std::abs(gamma - 2.0) < kCriticalBand) return TwoSiteRegime::critical;
    return gamma < 2.0 ? TwoSiteRegime::underdamped : TwoSiteRegime::overdamped;
}

double twosite_cn(double gamma, double t) {
    if (t < 0.0) throw ParameterError("time must be non-negative");
    if (gamma < 0.0) throw ParameterError("gamma must be non-negative");
    const double decay = std::exp(-gamma * t);
    switch (twosite_regime(gamma)) {
        case TwoSiteRegime::critical: return t * t * std::exp(-2.0 * t) / 2.0;
        case TwoSiteRegime::underdamped: {
            const double w2 = 1.0 - 0.25 * gamma * gamma;
            const double s = std::sin(std::sqrt(w2) * t);
            return decay * s * s / (2.0 * w2);
        }
        case TwoSiteRegime::overdamped: {
            const double w2 = 0.25 * gamma * gamma - 1.0;
            const double s = std::sinh(std::sqrt(w2) * t);
            return decay * s * s / (2.0 * w2);
        }
    }
    return 0.0;
}

DensityMatrix exact_propagate(const DensityMatrix& rho0, const ChainSpec& spec, double t) {
    if (!rho0.basis) throw ParameterError("density matrix has no basis");
    if (rho0.basis->particles() != 1) throw UnsupportedError("exact propagation is single-particle only");
    if (spec.length > kMaxPropagateLength) throw UnsupportedError("exact propagation limited to L <= 8");
    if (rho0.basis->length() != spec.length) throw ParameterError("basis length does not match chain");
    if (t < 0.0) throw ParameterError("time must be non-negative");
    const ComplexMatrix l = build_liouvillian(spec, 1);
    // Eigen's matrix exponential: scaling and squaring with degree-13 Pade
    const ComplexMatrix prop = (l * t).exp();
    return {rho0.basis, unvectorize(prop * vectorize(rho0.elements), spec.length)};
}

}  // namespace mchain
