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

#include "mchain/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mchain/error.hpp"

namespace mchain {

void ChainSpec::validate() const {
    if (length < 2) throw ParameterError("chain length must be >= 2, got " + std::to_string(length));
    if (!(hopping > 0.0)) throw ParameterError("hopping must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be finite and >= 0");
}

namespace {
constexpr double kMaxDim = 1u << 26;
}

SectorBasis::SectorBasis(int length, int particles) : length_(length), particles_(particles) {
    if (length < 1) throw ParameterError("sector length must be positive");
    if (particles < 1 || particles > length)
        throw ParameterError("particle number " + std::to_string(particles) + " outside 1.." + std::to_string(length));

    binom_.assign(length + 1, std::vector<double>(particles + 1, 0.0));
    for (int n = 0; n <= length; ++n) {
        binom_[n][0] = 1.0;
        for (int k = 1; k <= std::min(n, particles); ++k)
            binom_[n][k] = binom_[n - 1][k - 1] + (k <= n - 1 ? binom_[n - 1][k] : 0.0);
    }
    const double d = binom_[length][particles];
    if (d > kMaxDim) throw ParameterError("sector dimension too large");
    dim_ = static_cast<Index>(d);

    sites_.reserve(static_cast<std::size_t>(dim_) * particles);
    std::vector<int> c(particles);
    for (int k = 0; k < particles; ++k) c[k] = k + 1;
    for (;;) {
        sites_.insert(sites_.end(), c.begin(), c.end());
        int k = particles - 1;
        while (k >= 0 && c[k] == length - particles + k + 1) --k;
        if (k < 0) break;
        ++c[k];
        for (int m = k + 1; m < particles; ++m) c[m] = c[m - 1] + 1;
    }
}

bool SectorBasis::occupied(Index i, int site) const {
    auto s = sites(i);
    return std::binary_search(s.begin(), s.end(), site);
}

int SectorBasis::left_count(Index i, int bond) const {
    auto s = sites(i);
    return static_cast<int>(std::upper_bound(s.begin(), s.end(), bond) - s.begin());
}

int SectorBasis::overlap(Index i, Index j) const {
    auto a = sites(i);
    auto b = sites(j);
    int n = 0;
    for (auto p = a.begin(), q = b.begin(); p != a.end() && q != b.end();) {
        if (*p == *q) {
            ++n;
            ++p;
            ++q;
        } else if (*p < *q) {
            ++p;
        } else {
            ++q;
        }
    }
    return n;
}

// Lexicographic rank in the combinatorial number system.
Index SectorBasis::index_of(std::span<const int> s) const {
    if (static_cast<int>(s.size()) != particles_) throw ParameterError("configuration has wrong particle count");
    double rank = 0.0;
    int prev = 0;
    for (int k = 0; k < particles_; ++k) {
        if (s[k] <= prev || s[k] > length_) throw ParameterError("configuration sites must be ascending in 1..L");
        for (int j = prev + 1; j < s[k]; ++j) rank += binom_[length_ - j][particles_ - k - 1];
        prev = s[k];
    }
    return static_cast<Index>(rank);
}

std::string SectorBasis::bitstring(Index i) const {
    std::string out(length_, '0');
    for (int s : sites(i)) out[s - 1] = '1';
    return out;
}

BasisPtr make_basis(int length, int particles) { return std::make_shared<const SectorBasis>(length, particles); }

void PureState::validate(double tol) const {
    if (!basis) throw ParameterError("state has no basis");
    if (amplitudes.size() != basis->dim()) throw ParameterError("amplitude vector does not match basis dimension");
    if (std::abs(amplitudes.norm() - 1.0) > tol) throw ParameterError("state is not normalized");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
    return {psi.basis, psi.amplitudes * psi.amplitudes.adjoint()};
}

void DensityMatrix::validate(double herm_tol, double trace_tol, double psd_tol) const {
    if (!basis) throw ParameterError("density matrix has no basis");
    const Index d = basis->dim();
    if (elements.rows() != d || elements.cols() != d) throw ParameterError("density matrix does not match basis dimension");
    if ((elements - elements.adjoint()).cwiseAbs().maxCoeff() > herm_tol) throw ParameterError("density matrix not Hermitian");
    if (std::abs(elements.trace() - Complex(1.0)) > trace_tol) throw ParameterError("density matrix trace != 1");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(elements, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -psd_tol) throw ParameterError("density matrix not positive semidefinite");
}

SparseReal build_hamiltonian(const ChainSpec& spec, const SectorBasis& basis) {
    spec.validate();
    if (basis.length() != spec.length) throw ParameterError("basis length does not match chain");
    const int L = spec.length;
    const int N = basis.particles();
    const double t = 0.5 * spec.hopping;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(basis.dim()) * 2 * N);
    std::vector<int> moved(N);
    for (Index i = 0; i < basis.dim(); ++i) {
        auto s = basis.sites(i);
        for (int k = 0; k < N; ++k) {
            // only rightward hops; the Hermitian partner is added explicitly
            const int from = s[k];
            const int to = from + 1;
            if (to > L || (k + 1 < N && s[k + 1] == to)) continue;
            std::copy(s.begin(), s.end(), moved.begin());
            moved[k] = to;
            const Index j = basis.index_of(moved);
            // particles strictly between from and to: none for nearest neighbours,
            // kept general so the sign rule is explicit
            int between = 0;
            for (int m = 0; m < N; ++m) between += (s[m] > from && s[m] < to);
            const double v = (between % 2 ? -t : t);
            trip.emplace_back(j, i, v);
            trip.emplace_back(i, j, v);
        }
    }
    SparseReal h(basis.dim(), basis.dim());
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

RealVector number_operator(const SectorBasis& basis, int site) {
    if (site < 1 || site > basis.length()) throw ParameterError("site " + std::to_string(site) + " out of range");
    RealVector d(basis.dim());
    for (Index i = 0; i < basis.dim(); ++i) d[i] = basis.occupied(i, site) ? 1.0 : 0.0;
    return d;
}

RealMatrix occupation_table(const SectorBasis& basis) {
    RealMatrix occ = RealMatrix::Zero(basis.dim(), basis.length());
    for (Index i = 0; i < basis.dim(); ++i)
        for (int s : basis.sites(i)) occ(i, s - 1) = 1.0;
    return occ;
}

EigenmodeSet eigenmodes(const ChainSpec& spec) {
    SectorBasis basis(spec.length, 1);
    RealMatrix h = RealMatrix(build_hamiltonian(spec, basis));
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    EigenmodeSet out;
    out.energies = es.eigenvalues();
    out.modes = es.eigenvectors();
    out.velocities.resize(spec.length);
    for (int m = 1; m <= spec.length; ++m)
        out.velocities[m - 1] = std::sin(std::numbers::pi * m / (spec.length + 1));
    return out;
}

PureState localized_state(const BasisPtr& basis, std::span<const int> sites) {
    if (static_cast<int>(sites.size()) != basis->particles())
        throw ParameterError("number of injection sites must equal the particle number");
    std::vector<int> s(sites.begin(), sites.end());
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw ParameterError("injection sites must be distinct");
    if (s.front() < 1 || s.back() > basis->length()) throw ParameterError("injection site out of range");
    PureState psi{basis, ComplexVector::Zero(basis->dim())};
    psi.amplitudes[basis->index_of(s)] = 1.0;
    return psi;
}

int center_site(int length) { return length % 2 == 0 ? length / 2 : (length + 1) / 2; }

}  // namespace mchain
