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
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mchain/model.hpp"
#include "mchain/sse.hpp"

namespace mchain {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LinearFit {
    double slope = kNaN;
    double intercept = kNaN;
    double r2 = kNaN;
};

// Ordinary least squares y = intercept + slope x; r2 = 1 when y is constant and fitted exactly.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct BondMaxima {
    RealVector c_max;  // per bond, index b-1
    RealVector c_inf;  // mean over [late_fraction * t_max, t_max]
};

BondMaxima per_bond_maxima(const RealVector& times, const RealMatrix& coherence, double late_fraction = 0.8);

// Distance of bond b from the injection site, symmetric under reflection about
// that site: b = inject and b = inject - 1 (the two bonds touching it) are both 0.
int bond_distance(int bond, int inject);

struct FitOptions {
    double eligibility = 1e-9;    // C_max must exceed max(C_inf, eligibility)
    int initial_distance = 2;     // first window is d <= initial_distance
    double extension_ratio = 0.7; // extend while the next log-decrement >= ratio / length
    int min_bonds = 3;
    int min_distances = 2;
};

enum class FitStatus { ok, insufficient_decay, non_decaying };
std::string to_string(FitStatus s);

struct CoherenceLengthFit {
    FitStatus status = FitStatus::insufficient_decay;
    double length = kNaN;
    double prefactor = kNaN;
    double r2 = kNaN;
    std::vector<int> bonds;  // bonds used in the final fit
    std::vector<int> eligible;
    int max_distance = 0;
    std::string side = "pooled";
};

// ln C_max = ln A - d / length over eligible bonds of both sides. The distance
// window starts at d <= initial_distance and grows one unit at a time while the
// mean log-decrement to the next distance stays comparable to the current slope;
// the slow late-time tail far from the source is therefore left out.
CoherenceLengthFit fit_coherence_length(const BondMaxima& maxima, int inject, const FitOptions& options = {});

struct SaturationFit {
    double a = kNaN;  // l = a * γ^(-p) in the power-law window
    double p = kNaN;
    double l_inf = kNaN;
    double gamma_sat = kNaN;
};

// γ_sat = (a / l_inf)^(1/p)
double saturation_gamma(double a, double p, double l_inf);

SaturationFit fit_saturation(std::span<const double> gammas, std::span<const double> lengths,
                             std::pair<double, double> fit_window, std::pair<double, double> saturation_window);

struct SpreadOptions {
    double threshold = 1e-2;
    double early_factor = 0.5;  // early window t < early_factor / γ
    double late_factor = 2.0;   // late window t > late_factor / γ
};

struct SpreadDiagnostics {
    double velocity = kNaN;
    bool velocity_ok = false;
    int front_points = 0;
    double early_exponent = kNaN;
    double late_exponent = kNaN;
};

// Front: earliest record at which each site's density reaches the threshold,
// distance-vs-time slope inside the ballistic window. Exponents: log-log slope of
// sum_i (i - inject)^2 <n_i>(t) in the early and late windows.
SpreadDiagnostics spread_diagnostics(const RealVector& times, const RealMatrix& densities, int inject, double gamma,
                                     const SpreadOptions& options = {});

enum class Description { mixed, trajectory };
std::string to_string(Description d);
Description parse_description(const std::string& s);

struct PipelineOptions {
    std::size_t trajectories = 800;
    std::uint64_t seed = 1;
    int workers = 1;
    int record_stride = 1;
    double late_fraction = 0.8;
    SseScheme scheme = SseScheme::exponential;
    FitOptions fit;
};

struct PipelineResult {
    int inject = 0;
    BondMaxima maxima;
    CoherenceLengthFit fit;
};

// simulate -> per-bond maxima -> fit, at default dt / t_max for the chain.
PipelineResult coherence_length_pipeline(Description mode, const ChainSpec& spec, const PipelineOptions& options,
                                         int inject = 0);

// Per-point seed independent of the rest of the grid.
std::uint64_t point_seed(std::uint64_t master, int length, double gamma);

struct SweepPoint {
    int length = 0;
    double gamma = 0.0;
};

struct PhaseRow {
    int length = 0;
    double gamma = 0.0;
    Description mode = Description::mixed;
    double coherence_length = kNaN;
    double r2 = kNaN;
    std::string status;
};

struct SweepOptions {
    Description mode = Description::mixed;
    PipelineOptions pipeline;
    int workers = 1;
};

// Rows come back in grid order. `lookup` may supply a finished row (resume);
// `on_row` sees every newly computed row in grid order. A failing point yields a
// row with status "failed: <reason>" and the sweep continues.
std::vector<PhaseRow> sweep_phase_diagram(std::span<const SweepPoint> grid, const SweepOptions& options,
                                          const std::function<bool(const SweepPoint&, PhaseRow&)>& lookup = {},
                                          const std::function<void(const PhaseRow&)>& on_row = {});

struct CollapsePoint {
    double gamma_l = 0.0;
    double length_over_l = 0.0;
    int length = 0;
};

struct CollapseResult {
    std::vector<CollapsePoint> points;
    std::vector<std::pair<double, double>> bin_spread;  // (γL, (max-min)/mean) for bins with >= 2 lengths
    double max_spread = 0.0;                            // over bins with γL <= max_gamma_l
};

CollapseResult scaling_collapse(std::span<const PhaseRow> rows, double max_gamma_l = 10.0);

}  // namespace mchain
