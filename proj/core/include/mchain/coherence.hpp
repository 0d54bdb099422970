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

#include <span>

#include "mchain/model.hpp"

namespace mchain {

// Configuration coherence across bond b (cut between sites b and b+1):
// the squared weight of density-matrix elements that connect configurations with
// different particle numbers on the left of the cut. Profiles are indexed b-1.

double coherence_single(const DensityMatrix& rho, int bond);
// All bonds of a single-particle density matrix in O(L^2).
RealVector coherence_single_profile(const ComplexMatrix& rho);

double coherence_fock(const DensityMatrix& rho, int bond);
RealVector coherence_fock_profile(const DensityMatrix& rho);

double coherence_pure(const PureState& psi, int bond);
// 1 - sum_n P_n^2 with P_n the probability of n particles left of the cut.
RealVector coherence_pure_profile(const PureState& psi);
// Single-particle shortcut on raw amplitudes: 2 P_A (1 - P_A).
void coherence_pure_profile_single(const ComplexVector& amplitudes, Eigen::Ref<RealVector> out);

// (||rho^{T_B}||_1 - 1) / 2 after embedding the single-particle state into
// {vac_A, sites <= b} x {vac_B, sites > b}.
double negativity_bruteforce(const DensityMatrix& rho, int bond);

struct GaussianStateMatrix {
    ComplexMatrix u;  // N x L, row j = orbital of particle j

    void validate(double tol = 1e-8) const;
};

// Amplitude of the configuration with occupied sites S is det U[:, S] (ascending S).
PureState gaussian_expand(const GaussianStateMatrix& u);

// Coherence of the ensemble average of the expanded states, built only from
// averaged det U[:,S] det U[:,S']^* products between different left-count blocks.
double coherence_gaussian_mixture(std::span<const GaussianStateMatrix> ensemble, int bond);

}  // namespace mchain
