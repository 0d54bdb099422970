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

#include <complex>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mchain {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SparseReal = Eigen::SparseMatrix<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;
using Index = Eigen::Index;

struct ChainSpec {
    int length = 2;
    double hopping = 1.0;
    double gamma = 0.0;

    void validate() const;
};

// Fixed-particle-number sector. Sites are 1-based everywhere in the interface.
// Configurations are kept as ascending site tuples and ordered lexicographically,
// which is the same as reading the occupation string |n_1 n_2 ... n_L> as a
// binary number and sorting descending: L=4, N=2 gives 1100, 1010, 1001, 0110, ...
class SectorBasis {
public:
    SectorBasis(int length, int particles);

    int length() const noexcept { return length_; }
    int particles() const noexcept { return particles_; }
    Index dim() const noexcept { return dim_; }

    std::span<const int> sites(Index i) const {
        return {sites_.data() + i * particles_, static_cast<std::size_t>(particles_)};
    }
    bool occupied(Index i, int site) const;
    // particles on sites 1..bond
    int left_count(Index i, int bond) const;
    // number of shared occupied sites of two configurations
    int overlap(Index i, Index j) const;

    // Inverse of sites(); throws ParameterError for malformed tuples.
    Index index_of(std::span<const int> sorted_sites) const;
    std::string bitstring(Index i) const;

private:
    int length_;
    int particles_;
    Index dim_;
    std::vector<int> sites_;
    std::vector<std::vector<double>> binom_;
};

using BasisPtr = std::shared_ptr<const SectorBasis>;

BasisPtr make_basis(int length, int particles);

struct PureState {
    BasisPtr basis;
    ComplexVector amplitudes;

    void validate(double tol = 1e-10) const;
};

struct DensityMatrix {
    BasisPtr basis;
    ComplexMatrix elements;

    static DensityMatrix from_pure(const PureState& psi);
    void validate(double herm_tol = 1e-10, double trace_tol = 1e-9, double psd_tol = 1e-8) const;
};

struct EigenmodeSet {
    RealVector energies;    // ascending
    RealMatrix modes;       // columns match energies
    RealVector velocities;  // v_m = sin(pi m / (L+1)), m = 1..L
};

// Nearest-neighbour hopping with open ends; off-diagonal elements J/2 with the
// Jordan-Wigner sign of the particles strictly between the hop endpoints.
SparseReal build_hamiltonian(const ChainSpec& spec, const SectorBasis& basis);

// Diagonal of n_site.
RealVector number_operator(const SectorBasis& basis, int site);

// dim x L table of occupations, row = configuration.
RealMatrix occupation_table(const SectorBasis& basis);

EigenmodeSet eigenmodes(const ChainSpec& spec);

PureState localized_state(const BasisPtr& basis, std::span<const int> sites);

// Middle site used when no injection point is given.
int center_site(int length);

}  // namespace mchain
