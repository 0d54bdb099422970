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

#include <string>

#include "mchain/model.hpp"

namespace mchain {

enum class TwoSiteRegime { underdamped, critical, overdamped };

std::string to_string(TwoSiteRegime r);

// |γ - 2| < 1e-8 is treated as critical.
TwoSiteRegime twosite_regime(double gamma);

// Closed-form coherence of one particle on two sites (J = 1), started on site 1.
double twosite_cn(double gamma, double t);

// exp(t L) vec(rho0) with the dense single-particle superoperator, L <= 8.
DensityMatrix exact_propagate(const DensityMatrix& rho0, const ChainSpec& spec, double t);

}  // namespace mchain
