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


#include <benchmark/benchmark.h>

#include <vector>

#include "mchain/coherence.hpp"
#include "mchain/lindblad.hpp"
#include "mchain/model.hpp"
#include "mchain/noise.hpp"
#include "mchain/sse.hpp"

namespace {

using namespace mchain;

DensityMatrix spread_density(int length, int particles) {
    auto basis = make_basis(length, particles);
    ComplexVector amp = ComplexVector::Constant(basis->dim(), Complex(1.0, 0.5));
    amp.normalize();
    return DensityMatrix::from_pure({basis, amp});
}

void BM_LindbladRhs(benchmark::State& state) {
    const int length = static_cast<int>(state.range(0));
    const int particles = static_cast<int>(state.range(1));
    const ChainSpec spec{length, 1.0, 1.0};
    const DensityMatrix rho = spread_density(length, particles);
    const SparseReal h = build_hamiltonian(spec, *rho.basis);
    for (auto _ : state) benchmark::DoNotOptimize(lindblad_rhs(rho, h, spec.gamma));
}
BENCHMARK(BM_LindbladRhs)->Args({50, 1})->Args({100, 1})->Args({20, 2});

void BM_SseStep(benchmark::State& state) {
    SseConfig cfg;
    cfg.spec = {static_cast<int>(state.range(0)), 1.0, 1.0};
    cfg.particles = static_cast<int>(state.range(1));
    if (cfg.particles == 2) cfg.initial_sites = {5, 15};
    const SseConfig resolved = cfg.resolved();
    SseStepper stepper(resolved);
    ComplexVector psi = ComplexVector::Zero(stepper.basis()->dim());
    psi(0) = 1.0;
    NoiseStream noise(7);
    std::int64_t k = 0;
    for (auto _ : state) {
        stepper.step(psi, noise, k++);
        benchmark::DoNotOptimize(psi.data());
    }
}
BENCHMARK(BM_SseStep)->Args({100, 1})->Args({400, 1})->Args({20, 2});

void BM_CoherenceProfile(benchmark::State& state) {
    const DensityMatrix rho = spread_density(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) {
        if (rho.basis->particles() == 1) {
            benchmark::DoNotOptimize(coherence_single_profile(rho.elements));
        } else {
            benchmark::DoNotOptimize(coherence_fock_profile(rho));
        }
    }
}
BENCHMARK(BM_CoherenceProfile)->Args({100, 1})->Args({20, 2});

void BM_LiouvillianSpectrum(benchmark::State& state) {
    const ChainSpec spec{static_cast<int>(state.range(0)), 1.0, 1.0};
    const ComplexMatrix liouvillian = build_liouvillian(spec);
    for (auto _ : state) benchmark::DoNotOptimize(liouvillian_spectrum(liouvillian, spec.gamma));
}
BENCHMARK(BM_LiouvillianSpectrum)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
