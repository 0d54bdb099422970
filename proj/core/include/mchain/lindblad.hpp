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
#include <vector>

#include "mchain/model.hpp"

namespace mchain {

// dt = min(0.05, 0.05 / gamma), t_max = max(2L, 10 / gamma)
double default_dt(double gamma);
double default_t_max(int length, double gamma);

struct LindbladConfig {
    ChainSpec spec;
    int particles = 1;
    std::vector<int> initial_sites;  // empty: centre (one particle only)
    double dt = 0.0;                 // 0: default
    double t_max = 0.0;              // 0: default
    int record_stride = 1;
    std::vector<double> snapshot_times;
    bool record_densities = true;
    bool record_coherence = true;
    int positivity_checks = 10;

    // Fills defaults and validates; returns the resolved copy.
    LindbladConfig resolved() const;
};

// Precomputed pieces of the right-hand side for one sector.
class LindbladGenerator {
public:
    LindbladGenerator(const ChainSpec& spec, BasisPtr basis);

    const BasisPtr& basis() const noexcept { return basis_; }
    const SparseComplex& hamiltonian() const noexcept { return h_; }
    double gamma() const noexcept { return gamma_; }

    // General right-hand side; rho need not be Hermitian.
    ComplexMatrix apply(const ComplexMatrix& rho) const;
    // Uses rho H = (H rho)^dagger; valid for Hermitian rho only.
    void apply_hermitian(const ComplexMatrix& rho, ComplexMatrix& out) const;

private:
    BasisPtr basis_;
    SparseComplex h_;
    double gamma_;
    RealMatrix dissipator_;  // gamma * (overlap(c, c') - N), elementwise
};

// -i[H, rho] + gamma sum_i (n_i rho n_i - {n_i, rho}/2)
ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const SparseReal& hamiltonian, double gamma);

struct LindbladRun {
    RealVector times;
    RealMatrix densities;  // time x site
    RealMatrix coherence;  // time x bond
    std::vector<double> snapshot_times;
    std::vector<ComplexMatrix> snapshots;
    DensityMatrix final_state;
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;  // over the sampled positivity checks
};

LindbladRun evolve_lindblad(const LindbladConfig& config);

// Row-stacked vectorization, vec(rho)[i*d + j] = rho(i, j), so that
// (A kron B) vec(rho) = vec(A rho B^T) and the superoperator is
//   -i (H kron 1 - 1 kron H^T) + gamma sum_i (n_i kron n_i^T - (n_i kron 1 + 1 kron n_i^T)/2).
ComplexMatrix build_liouvillian(const ChainSpec& spec, int particles = 1);
ComplexVector vectorize(const ComplexMatrix& rho);
ComplexMatrix unvectorize(const ComplexVector& v, Index dim);

enum class EigenClass { steady, overdamped, bulk };
std::string to_string(EigenClass c);

struct SpectrumRecord {
    double gamma = 0.0;
    std::vector<Complex> eigenvalues;  // sorted by real part, then imaginary part
    std::vector<EigenClass> classes;
    int overdamped_count = 0;
    int steady_count = 0;
    double gap = 0.0;
    double scale = 1.0;  // tolerances are relative to this
};

// Steady: |ξ| < tol_im * scale. Overdamped: real (|Im ξ| < tol_im * scale), not steady,
// and in the right-hand cluster of a two-cluster split of the real axis: the real
// eigenvalues right of the oscillating bulk are cut at their widest gap (the bulk's
// right edge counts as the first point). Bulk: the rest. The gap is the distance on
// the real axis between the overdamped cluster and the nearest bulk real part.
SpectrumRecord liouvillian_spectrum(const ComplexMatrix& liouvillian, double gamma, double tol_im = 1e-9);

}  // namespace mchain
