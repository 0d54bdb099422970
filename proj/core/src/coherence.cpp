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

#include "mchain/coherence.hpp"

#include <cmath>

#include "mchain/error.hpp"

namespace mchain {

namespace {

void check_bond(const SectorBasis& basis, int bond) {
    if (bond < 1 || bond > basis.length() - 1)
        throw ParameterError("bond " + std::to_string(bond) + " outside 1.." + std::to_string(basis.length() - 1));
}

void check_rho(const DensityMatrix& rho) {
    if (!rho.basis) throw ParameterError("density matrix has no basis");
    if (rho.elements.rows() != rho.basis->dim() || rho.elements.cols() != rho.basis->dim())
        throw ParameterError("density matrix does not match basis dimension");
}

}  // namespace

RealVector coherence_single_profile(const ComplexMatrix& rho) {
    const Index L = rho.rows();
    RealVector out(std::max<Index>(L - 1, 0));
    // S(b) = sum_{i<=b<j} |rho_ij|^2 ; moving the cut past site b removes the
    // column-b terms above and adds the row-b terms to the right.
    double s = 0.0;
    for (Index b = 0; b + 1 < L; ++b) {
        for (Index i = 0; i < b; ++i) s -= std::norm(rho(i, b));
        for (Index j = b + 1; j < L; ++j) s += std::norm(rho(b, j));
        out[b] = 2.0 * s;
    }
    return out;
}

double coherence_single(const DensityMatrix& rho, int bond) {
    check_rho(rho);
    if (rho.basis->particles() != 1) throw ParameterError("coherence_single needs the single-particle sector");
    check_bond(*rho.basis, bond);
    double s = 0.0;
    for (int i = 0; i < bond; ++i)
        for (int j = bond; j < rho.basis->length(); ++j) s += std::norm(rho.elements(i, j));
    return 2.0 * s;
}

double coherence_fock(const DensityMatrix& rho, int bond) {
    check_rho(rho);
    const SectorBasis& basis = *rho.basis;
    check_bond(basis, bond);
    const Index d = basis.dim();
    std::vector<int> block(d);
    for (Index i = 0; i < d; ++i) block[i] = basis.left_count(i, bond);
    double s = 0.0;
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i)
            if (block[i] != block[j]) s += std::norm(rho.elements(i, j));
    return s;
}

RealVector coherence_fock_profile(const DensityMatrix& rho) {
    check_rho(rho);
    const SectorBasis& basis = *rho.basis;
    if (basis.particles() == 1) return coherence_single_profile(rho.elements);
    const int L = basis.length();
    const Index d = basis.dim();
    // left counts per configuration and bond
    Eigen::MatrixXi nl(L - 1, d);
    for (Index i = 0; i < d; ++i)
        for (int b = 1; b < L; ++b) nl(b - 1, i) = basis.left_count(i, b);
    RealVector out = RealVector::Zero(L - 1);
    for (Index j = 0; j < d; ++j) {
        for (Index i = j + 1; i < d; ++i) {
            const double w = std::norm(rho.elements(i, j)) + std::norm(rho.elements(j, i));
            if (w == 0.0) continue;
            for (int b = 0; b < L - 1; ++b)
                if (nl(b, i) != nl(b, j)) out[b] += w;
        }
    }
    return out;
}

void coherence_pure_profile_single(const ComplexVector& a, Eigen::Ref<RealVector> out) {
    double pa = 0.0;
    for (Index b = 0; b + 1 < a.size(); ++b) {
        pa += std::norm(a[b]);
        out[b] = 2.0 * pa * (1.0 - pa);
    }
}

RealVector coherence_pure_profile(const PureState& psi) {
    const SectorBasis& basis = *psi.basis;
    const int L = basis.length();
    const int N = basis.particles();
    RealVector out(L - 1);
    if (N == 1) {
        coherence_pure_profile_single(psi.amplitudes, out);
        return out;
    }
    RealMatrix p = RealMatrix::Zero(N + 1, L - 1);
    for (Index i = 0; i < basis.dim(); ++i) {
        const double w = std::norm(psi.amplitudes[i]);
        if (w == 0.0) continue;
        for (int b = 1; b < L; ++b) p(basis.left_count(i, b), b - 1) += w;
    }
    for (int b = 0; b < L - 1; ++b) out[b] = 1.0 - p.col(b).squaredNorm();
    return out;
}

double coherence_pure(const PureState& psi, int bond) {
    psi.validate(1e-8);
    check_bond(*psi.basis, bond);
    return coherence_pure_profile(psi)[bond - 1];
}

double negativity_bruteforce(const DensityMatrix& rho, int bond) {
    check_rho(rho);
    if (rho.basis->particles() != 1) throw ParameterError("negativity is defined here for one particle only");
    check_bond(*rho.basis, bond);
    const int L = rho.basis->length();
    const int da = bond + 1;      // vac_A, sites 1..b
    const int db = L - bond + 1;  // vac_B, sites b+1..L
    // site i <= b  ->  |i>_A |vac>_B ; site j > b  ->  |vac>_A |j>_B
    auto embed = [&](int site0) -> std::pair<int, int> {
        if (site0 < bond) return {site0 + 1, 0};
        return {0, site0 - bond + 1};
    };
    ComplexMatrix big = ComplexMatrix::Zero(da * db, da * db);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            auto [ai, bi] = embed(i);
            auto [aj, bj] = embed(j);
            // partial transpose on B swaps the B indices of row and column
            big(ai * db + bj, aj * db + bi) += rho.elements(i, j);
        }
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(big, Eigen::EigenvaluesOnly);
    return 0.5 * (es.eigenvalues().cwiseAbs().sum() - 1.0);
}

void GaussianStateMatrix::validate(double tol) const {
    if (u.rows() < 1 || u.rows() > u.cols()) throw ParameterError("Gaussian state matrix must be N x L with 1 <= N <= L");
    const ComplexMatrix g = u * u.adjoint();
    if ((g - ComplexMatrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff() > tol)
        throw ParameterError("Gaussian state orbitals are not orthonormal");
}

namespace {

ComplexVector expand_amplitudes(const ComplexMatrix& u, const SectorBasis& basis) {
    const int n = static_cast<int>(u.rows());
    ComplexVector amp(basis.dim());
    ComplexMatrix sub(n, n);
    for (Index i = 0; i < basis.dim(); ++i) {
        auto s = basis.sites(i);
        for (int k = 0; k < n; ++k) sub.col(k) = u.col(s[k] - 1);
        amp[i] = n == 1 ? sub(0, 0) : sub.partialPivLu().determinant();
    }
    return amp;
}

}  // namespace

PureState gaussian_expand(const GaussianStateMatrix& g) {
    if (g.u.rows() < 1 || g.u.rows() > g.u.cols()) throw ParameterError("Gaussian state matrix must be N x L with 1 <= N <= L");
    auto basis = make_basis(static_cast<int>(g.u.cols()), static_cast<int>(g.u.rows()));
    return {basis, expand_amplitudes(g.u, *basis)};
}

double coherence_gaussian_mixture(std::span<const GaussianStateMatrix> ensemble, int bond) {
    if (ensemble.empty()) throw ParameterError("empty Gaussian ensemble");
    const Index n = ensemble.front().u.rows();
    const Index l = ensemble.front().u.cols();
    for (const auto& g : ensemble)
        if (g.u.rows() != n || g.u.cols() != l) throw ParameterError("Gaussian ensemble members differ in shape");
    auto basis = make_basis(static_cast<int>(l), static_cast<int>(n));
    check_bond(*basis, bond);

    // group configurations by particle count left of the cut
    std::vector<std::vector<Index>> blocks(n + 1);
    for (Index i = 0; i < basis->dim(); ++i) blocks[basis->left_count(i, bond)].push_back(i);

    const double inv_m = 1.0 / static_cast<double>(ensemble.size());
    std::vector<ComplexVector> amps;
    amps.reserve(ensemble.size());
    for (const auto& g : ensemble) amps.push_back(expand_amplitudes(g.u, *basis));

    double total = 0.0;
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        for (std::size_t k = 0; k < m; ++k) {
            if (blocks[m].empty() || blocks[k].empty()) continue;
            ComplexMatrix avg = ComplexMatrix::Zero(blocks[m].size(), blocks[k].size());
            for (const auto& a : amps)
                for (std::size_t i = 0; i < blocks[m].size(); ++i)
                    for (std::size_t j = 0; j < blocks[k].size(); ++j)
                        avg(i, j) += a[blocks[m][i]] * std::conj(a[blocks[k][j]]);
            total += (avg * inv_m).squaredNorm();
        }
    }
    return 2.0 * total;
}

}  // namespace mchain
