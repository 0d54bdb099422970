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
#include <string>
#include <vector>

#include "mchain/model.hpp"
#include "mchain/noise.hpp"

namespace mchain {

// exponential: exact e^{-iH dt}, then the measurement back-action as the
//   exponential ψ_c <- ψ_c exp(sum_{i in c} (sqrt(γ) dW_i + 2γ<n_i>dt - γ dt)),
//   which has the same Itô increment as the diffusive equation to O(dt), then renormalize.
// euler_maruyama: the plain explicit step on the full right-hand side, then renormalize.
enum class SseScheme { exponential, euler_maruyama };

std::string to_string(SseScheme s);
SseScheme parse_scheme(const std::string& s);

struct SseConfig {
    ChainSpec spec;
    int particles = 1;
    std::vector<int> initial_sites;  // empty: centre (one particle only)
    double dt = 0.0;                 // 0: min(0.05, 0.05/γ)
    double t_max = 0.0;              // 0: max(2L, 10/γ)
    int record_stride = 1;
    std::uint64_t seed = 0;
    SseScheme scheme = SseScheme::exponential;
    bool record_densities = true;
    bool record_coherence = true;

    SseConfig resolved() const;
    std::int64_t steps() const;
    Index records() const;
};

// Literal Euler-Maruyama step of the normalized diffusive equation with
// <n_i> taken at the start of the step.
PureState sse_step(const PureState& state, const SparseReal& hamiltonian, double gamma, double dt, NoiseStream& noise);

// Reusable per-configuration stepping machinery.
class SseStepper {
public:
    explicit SseStepper(const SseConfig& resolved_config);

    const BasisPtr& basis() const noexcept { return basis_; }
    // Advances psi by one step; throws IntegrationError on norm underflow.
    void step(ComplexVector& psi, NoiseStream& noise, std::int64_t step_index);
    void densities(const ComplexVector& psi, Eigen::Ref<RealVector> out) const;
    void coherence(const ComplexVector& psi, Eigen::Ref<RealVector> out) const;

private:
    SseConfig cfg_;
    BasisPtr basis_;
    SparseComplex h_;
    SparseComplex propagator_;
    RealMatrix occ_;  // dim x L, empty for one particle
    double sqrt_gamma_, sqrt_dt_;
    RealVector dens_, x_, prob_;
    ComplexVector work_;
};

struct TrajectoryRecord {
    RealVector times;
    RealMatrix densities;  // time x site
    RealMatrix coherence;  // time x bond
    PureState final_state;
};

TrajectoryRecord run_trajectory(const SseConfig& config);

struct EnsembleOptions {
    int workers = 1;
    std::size_t chunk = 64;  // trajectories per reduction unit; fixed so results do not depend on workers
    std::vector<double> snapshot_times;
};

struct EnsembleRecord {
    std::size_t trajectories = 0;
    RealVector times;
    RealMatrix mean_densities, se_densities;
    RealMatrix mean_coherence, se_coherence;
    std::vector<double> snapshot_times;
    std::vector<ComplexMatrix> mean_rho;  // (1/M) sum |ψ><ψ| at snapshot_times
    std::vector<std::uint64_t> seeds;
};

// Seeds are derive_seed(config.seed, k) for k = 0..M-1.
EnsembleRecord run_ensemble(const SseConfig& config, std::size_t trajectories, const EnsembleOptions& options = {});

}  // namespace mchain
