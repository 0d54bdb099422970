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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fock.hpp"
#include "mchain/coherence.hpp"
#include "mchain/error.hpp"

namespace mchain {
namespace {

DensityMatrix density(const BasisPtr& b, const ComplexMatrix& m) { return DensityMatrix{b, m}; }

TEST(Coherence, TwoSiteSuperposition) {
    auto b = make_basis(2, 1);
    PureState psi{b, ComplexVector::Constant(2, 1.0 / std::sqrt(2.0))};
    EXPECT_NEAR(coherence_single(DensityMatrix::from_pure(psi), 1), 0.5, 1e-15);
    EXPECT_NEAR(coherence_pure(psi, 1), 0.5, 1e-15);
    EXPECT_NEAR(negativity_bruteforce(DensityMatrix::from_pure(psi), 1), 0.5, 1e-12);
}

TEST(Coherence, DiagonalStatesVanish) {
    auto b = make_basis(7, 1);
    const RealVector prof = coherence_single_profile(ComplexMatrix::Identity(7, 7) / 7.0);
    EXPECT_EQ(prof.cwiseAbs().maxCoeff(), 0.0);
    const int s[] = {3};
    PureState loc = localized_state(b, s);
    for (int bond = 1; bond < 7; ++bond) {
        EXPECT_EQ(coherence_pure(loc, bond), 0.0);
        EXPECT_NEAR(negativity_bruteforce(DensityMatrix::from_pure(loc), bond), 0.0, 1e-12);
    }
    auto b2 = make_basis(4, 2);
    const int prod[] = {1, 3};
    EXPECT_EQ(coherence_fock(DensityMatrix::from_pure(localized_state(b2, prod)), 2), 0.0);
}

TEST(Coherence, TwoParticleHandExpansion) {
    auto b = make_basis(4, 2);
    PureState psi{b, ComplexVector::Zero(b->dim())};
    const int a[] = {1, 2}, c[] = {2, 3};
    psi.amplitudes[b->index_of(a)] = 1.0 / std::sqrt(2.0);
    psi.amplitudes[b->index_of(c)] = -1.0 / std::sqrt(2.0);
    EXPECT_NEAR(coherence_pure(psi, 2), 0.5, 1e-15);
    EXPECT_NEAR(coherence_fock(DensityMatrix::from_pure(psi), 2), 0.5, 1e-15);
}

TEST(Coherence, SingleMatchesDefinitionAndFock) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int l = 2 + trial % 7;
        auto b = make_basis(l, 1);
        const ComplexMatrix rho = testing::random_density(l, 1 + trial % 3, rng);
        const auto masks = testing::sector_masks(l, 1);
        const RealVector prof = coherence_single_profile(rho);
        const RealVector fock = coherence_fock_profile(density(b, rho));
        for (int bond = 1; bond < l; ++bond) {
            const double ref = testing::coherence_by_masks(rho, masks, bond);
            EXPECT_NEAR(coherence_single(density(b, rho), bond), ref, 1e-13);
            EXPECT_NEAR(coherence_fock(density(b, rho), bond), ref, 1e-13);
            EXPECT_NEAR(prof[bond - 1], ref, 1e-13);
            EXPECT_NEAR(fock[bond - 1], ref, 1e-13);
        }
    }
}

TEST(Coherence, FockMatchesDefinitionManyParticles) {
    std::mt19937_64 rng(12);
    for (int n = 2; n <= 3; ++n) {
        const int l = 7;
        auto b = make_basis(l, n);
        const auto masks = testing::sector_masks(l, n);
        const ComplexMatrix rho = testing::random_density(static_cast<int>(b->dim()), 3, rng);
        const RealVector prof = coherence_fock_profile(density(b, rho));
        for (int bond = 1; bond < l; ++bond) {
            const double ref = testing::coherence_by_masks(rho, masks, bond);
            EXPECT_NEAR(coherence_fock(density(b, rho), bond), ref, 1e-13);
            EXPECT_NEAR(prof[bond - 1], ref, 1e-13);
        }
    }
}

TEST(Coherence, PureProfilesAgreeWithDensityPath) {
    std::mt19937_64 rng(13);
    for (int n = 1; n <= 3; ++n) {
        auto b = make_basis(8, n);
        const ComplexMatrix v = testing::random_density(static_cast<int>(b->dim()), 1, rng);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(v);
        PureState psi{b, es.eigenvectors().col(b->dim() - 1)};
        const RealVector pure = coherence_pure_profile(psi);
        const RealVector mixed = coherence_fock_profile(DensityMatrix::from_pure(psi));
        EXPECT_LT((pure - mixed).cwiseAbs().maxCoeff(), 1e-13);
        if (n == 1) {
            RealVector fast(7);
            coherence_pure_profile_single(psi.amplitudes, fast);
            EXPECT_LT((fast - mixed).cwiseAbs().maxCoeff(), 1e-13);
        }
    }
}

TEST(Coherence, NegativityIdentity) {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const int l = 2 + trial % 7;
        auto b = make_basis(l, 1);
        const DensityMatrix rho = density(b, testing::random_density(l, 1 + trial % l, rng));
        for (int bond = 1; bond < l; ++bond)
            ASSERT_NEAR(std::sqrt(coherence_single(rho, bond) / 2.0), negativity_bruteforce(rho, bond), 1e-10);
    }
}

TEST(Coherence, NonNegativeAndConvex) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int l = 6;
        const ComplexMatrix r1 = testing::random_density(l, 2, rng), r2 = testing::random_density(l, 1, rng);
        const double lam = u(rng);
        const RealVector mix = coherence_single_profile(lam * r1 + (1.0 - lam) * r2);
        const RealVector bound = lam * coherence_single_profile(r1) + (1.0 - lam) * coherence_single_profile(r2);
        EXPECT_GE(mix.minCoeff(), -1e-12);
        EXPECT_LE((mix - bound).maxCoeff(), 1e-12);
    }
}

TEST(Coherence, WrongSectorRejected) {
    auto b = make_basis(4, 2);
    DensityMatrix rho{b, ComplexMatrix::Identity(6, 6) / 6.0};
    EXPECT_THROW(coherence_single(rho, 1), ParameterError);
    EXPECT_THROW(negativity_bruteforce(rho, 1), ParameterError);
    EXPECT_THROW(coherence_fock(rho, 4), ParameterError);
}

TEST(Gaussian, HandExamples) {
    GaussianStateMatrix u{ComplexMatrix::Zero(2, 4)};
    u.u(0, 0) = 1.0;
    u.u(1, 2) = 1.0;
    PureState p = gaussian_expand(u);
    const int s13[] = {1, 3};
    EXPECT_NEAR(std::abs(p.amplitudes[p.basis->index_of(s13)] - Complex(1.0)), 0.0, 1e-15);
    EXPECT_NEAR(p.amplitudes.squaredNorm(), 1.0, 1e-15);

    GaussianStateMatrix v{ComplexMatrix::Zero(2, 4)};
    v.u(0, 0) = v.u(0, 2) = 1.0 / std::sqrt(2.0);
    v.u(1, 1) = 1.0;
    PureState q = gaussian_expand(v);
    const int s12[] = {1, 2}, s23[] = {2, 3};
    EXPECT_NEAR(q.amplitudes[q.basis->index_of(s12)].real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(q.amplitudes[q.basis->index_of(s23)].real(), -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(q.amplitudes.squaredNorm(), 1.0, 1e-15);
}

TEST(Gaussian, ExpansionMatchesFockSlaterState) {
    std::mt19937_64 rng(16);
    for (int n = 1; n <= 3; ++n)
        for (int l = n; l <= 8; ++l) {
            GaussianStateMatrix g{testing::random_orbitals(n, l, rng)};
            const PureState p = gaussian_expand(g);
            const testing::Cvec ref = testing::restrict_to(testing::slater_state(g.u), testing::sector_masks(l, n));
            ASSERT_LT((p.amplitudes - ref).cwiseAbs().maxCoeff(), 1e-12) << "N=" << n << " L=" << l;
        }
}

TEST(Gaussian, CauchyBinetNormalization) {
    std::mt19937_64 rng(17);
    for (int n = 1; n <= 3; ++n)
        for (int l = n; l <= 10; ++l) {
            const PureState p = gaussian_expand(GaussianStateMatrix{testing::random_orbitals(n, l, rng)});
            EXPECT_NEAR(p.amplitudes.squaredNorm(), 1.0, 1e-10);
        }
}

TEST(Gaussian, MixtureEqualsExplicitFockAverage) {
    std::mt19937_64 rng(18);
    for (int n = 1; n <= 3; ++n) {
        const int l = 8;
        std::vector<GaussianStateMatrix> ens;
        for (int m = 0; m < 50; ++m) ens.push_back({testing::random_orbitals(n, l, rng)});
        const auto masks = testing::sector_masks(l, n);
        testing::Cmat avg = testing::Cmat::Zero(static_cast<Index>(masks.size()), static_cast<Index>(masks.size()));
        for (const auto& g : ens) {
            const testing::Cvec psi = testing::restrict_to(testing::slater_state(g.u), masks);
            avg += psi * psi.adjoint() / static_cast<double>(ens.size());
        }
        for (int bond = 1; bond < l; ++bond)
            EXPECT_NEAR(coherence_gaussian_mixture(ens, bond), testing::coherence_by_masks(avg, masks, bond), 1e-10);
    }
}

TEST(Gaussian, SingletonAndDiagonalMixtures) {
    std::mt19937_64 rng(19);
    GaussianStateMatrix g{testing::random_orbitals(2, 6, rng)};
    std::vector<GaussianStateMatrix> one{g};
    const PureState p = gaussian_expand(g);
    for (int bond = 1; bond < 6; ++bond) EXPECT_NEAR(coherence_gaussian_mixture(one, bond), coherence_pure(p, bond), 1e-12);

    std::vector<GaussianStateMatrix> loc(2, GaussianStateMatrix{ComplexMatrix::Zero(1, 4)});
    loc[0].u(0, 0) = 1.0;
    loc[1].u(0, 3) = 1.0;
    for (int bond = 1; bond < 4; ++bond) EXPECT_EQ(coherence_gaussian_mixture(loc, bond), 0.0);

    std::vector<GaussianStateMatrix> mixed{g, GaussianStateMatrix{testing::random_orbitals(1, 6, rng)}};
    EXPECT_THROW(coherence_gaussian_mixture(mixed, 1), ParameterError);
}

}  // namespace
}  // namespace mchain
