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

#include "mchain/sse.hpp"

#include <cmath>

#include "mchain/coherence.hpp"
#include "mchain/error.hpp"
#include "mchain/lindblad.hpp"
#include "mchain/parallel.hpp"

namespace mchain {

namespace {
constexpr double kPropagatorCutoff = 1e-15;
constexpr double kNormFloor = 1e-12;
}  // namespace

std::string to_string(SseScheme s) { return s == SseScheme::exponential ? "exponential" : "euler-maruyama"; }

SseScheme parse_scheme(const std::string& s) {
    if (s == "exponential") return SseScheme::exponential;
    if (s == "euler-maruyama" || s == "euler_maruyama") return SseScheme::euler_maruyama;
    throw ParameterError("unknown integration scheme '" + s + "'");
}

SseConfig SseConfig::resolved() const {
    SseConfig c = *this;
    c.spec.validate();
    if (c.particles < 1 || c.particles > c.spec.length) throw ParameterError("invalid particle number");
    if (c.initial_sites.empty()) {
        if (c.particles != 1) throw ParameterError("initial sites are required for more than one particle");
        c.initial_sites = {center_site(c.spec.length)};
    }
    if (c.dt == 0.0) c.dt = default_dt(c.spec.gamma);
    if (c.t_max == 0.0) c.t_max = default_t_max(c.spec.length, c.spec.gamma);
    if (!(c.dt > 0.0)) throw ParameterError("dt must be positive");
    if (!(c.t_max >= c.dt)) throw ParameterError("t_max must be >= dt");
    if (c.record_stride < 1) throw ParameterError("record stride must be >= 1");
    return c;
}

std::int64_t SseConfig::steps() const { return std::llround(t_max / dt); }
Index SseConfig::records() const { return static_cast<Index>(steps() / record_stride + 1); }

PureState sse_step(const PureState& state, const SparseReal& hamiltonian, double gamma, double dt, NoiseStream& noise) {
    state.validate(1e-8);
    const SectorBasis& basis = *state.basis;
    const int L = basis.length();
    const ComplexVector& psi = state.amplitudes;
    const RealMatrix occ = occupation_table(basis);
    const RealVector prob = psi.cwiseAbs2();
    const RealVector m = occ.transpose() * prob;

    ComplexVector next = psi + Complex(0.0, -dt) * (hamiltonian.cast<Complex>() * psi);
    if (gamma > 0.0) {
        const double sg = std::sqrt(gamma);
        const double sdt = std::sqrt(dt);
        RealVector dw(L);
        for (int i = 0; i < L; ++i) dw[i] = noise.increment(sdt);
        for (Index c = 0; c < basis.dim(); ++c) {
            double f = 0.0;
            for (int i = 0; i < L; ++i) {
                const double dn = occ(c, i) - m[i];
                f += sg * dn * dw[i] - 0.5 * gamma * dn * dn * dt;
            }
            next[c] += f * psi[c];
        }
    }
    const double nrm = next.norm();
    if (!(nrm >= kNormFloor)) throw IntegrationError("state norm underflow", 0, 0.0);
    return {state.basis, next / nrm};
}

SseStepper::SseStepper(const SseConfig& c) : cfg_(c), basis_(make_basis(c.spec.length, c.particles)) {
    const int L = cfg_.spec.length;
    const SparseReal hr = build_hamiltonian(cfg_.spec, *basis_);
    h_ = hr.cast<Complex>();
    if (cfg_.particles > 1) occ_ = occupation_table(*basis_);
    sqrt_gamma_ = std::sqrt(cfg_.spec.gamma);
    sqrt_dt_ = std::sqrt(cfg_.dt);
    dens_.resize(L);
    x_.resize(L);
    prob_.resize(basis_->dim());
    work_.resize(basis_->dim());

    if (cfg_.scheme == SseScheme::exponential) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> es{RealMatrix(hr)};
        const RealMatrix& v = es.eigenvectors();
        ComplexVector phase(v.cols());
        for (Index k = 0; k < v.cols(); ++k) phase[k] = std::polar(1.0, -es.eigenvalues()[k] * cfg_.dt);
        const ComplexMatrix u = v.cast<Complex>() * phase.asDiagonal() * v.transpose().cast<Complex>();
        // the propagator is banded up to exponentially small tails
        propagator_ = u.sparseView(1.0, kPropagatorCutoff);
        propagator_.makeCompressed();
    }
}

void SseStepper::densities(const ComplexVector& psi, Eigen::Ref<RealVector> out) const {
    if (cfg_.particles == 1)
        out = psi.cwiseAbs2();
    else
        out.noalias() = occ_.transpose() * psi.cwiseAbs2();
}

void SseStepper::coherence(const ComplexVector& psi, Eigen::Ref<RealVector> out) const {
    if (cfg_.particles == 1)
        coherence_pure_profile_single(psi, out);
    else
        out = coherence_pure_profile(PureState{basis_, psi});
}

void SseStepper::step(ComplexVector& psi, NoiseStream& noise, std::int64_t k) {
    const int L = cfg_.spec.length;
    const double gamma = cfg_.spec.gamma;
    const double dt = cfg_.dt;

    if (cfg_.scheme == SseScheme::exponential) {
        work_.noalias() = propagator_ * psi;
        psi.swap(work_);
        if (gamma > 0.0) {
            densities(psi, dens_);
            for (int i = 0; i < L; ++i)
                x_[i] = sqrt_gamma_ * noise.increment(sqrt_dt_) + 2.0 * gamma * dens_[i] * dt - gamma * dt;
            if (cfg_.particles == 1) {
                for (int i = 0; i < L; ++i) psi[i] *= std::exp(x_[i]);
            } else {
                const RealVector e = x_.array().exp();
                for (Index c = 0; c < basis_->dim(); ++c) {
                    double f = 1.0;
                    for (int s : basis_->sites(c)) f *= e[s - 1];
                    psi[c] *= f;
                }
            }
        }
    } else {
        densities(psi, dens_);
        work_.noalias() = h_ * psi;
        work_ = psi + Complex(0.0, -dt) * work_;
        if (gamma > 0.0) {
            for (int i = 0; i < L; ++i) x_[i] = noise.increment(sqrt_dt_);
            for (Index c = 0; c < basis_->dim(); ++c) {
                double f = 0.0;
                for (int i = 0; i < L; ++i) {
                    const double occ = cfg_.particles == 1 ? (c == i ? 1.0 : 0.0) : occ_(c, i);
                    const double dn = occ - dens_[i];
                    f += sqrt_gamma_ * dn * x_[i] - 0.5 * gamma * dn * dn * dt;
                }
                work_[c] += f * psi[c];
            }
        }
        psi.swap(work_);
    }
    const double nrm = psi.norm();
    if (!(nrm >= kNormFloor) || !std::isfinite(nrm))
        throw IntegrationError("state norm underflow", k, static_cast<double>(k) * dt);
    psi /= nrm;
}

namespace {

struct SnapshotPlan {
    std::vector<std::int64_t> steps;
};

// One trajectory; fills rec (pre-sized) and optionally adds |ψ><ψ| at snapshot steps.
void integrate(SseStepper& stepper, const SseConfig& cfg, std::uint64_t seed, const SnapshotPlan& plan,
               TrajectoryRecord& rec, std::vector<ComplexMatrix>* rho_acc) {
    NoiseStream noise(seed);
    ComplexVector psi = localized_state(stepper.basis(), cfg.initial_sites).amplitudes;
    const std::int64_t steps = cfg.steps();
    auto observe = [&](std::int64_t k) {
        if (k % cfg.record_stride == 0) {
            const Index row = static_cast<Index>(k / cfg.record_stride);
            rec.times[row] = static_cast<double>(k) * cfg.dt;
            if (cfg.record_densities) {
                RealVector d(rec.densities.cols());
                stepper.densities(psi, d);
                rec.densities.row(row) = d.transpose();
            }
            if (cfg.record_coherence) {
                RealVector c(rec.coherence.cols());
                stepper.coherence(psi, c);
                rec.coherence.row(row) = c.transpose();
            }
        }
        if (rho_acc)
            for (std::size_t s = 0; s < plan.steps.size(); ++s)
                if (plan.steps[s] == k) (*rho_acc)[s].noalias() += psi * psi.adjoint();
    };
    observe(0);
    for (std::int64_t k = 1; k <= steps; ++k) {
        try {
            stepper.step(psi, noise, k);
        } catch (const IntegrationError& e) {
            throw IntegrationError(std::string(e.what()) + " [seed " + std::to_string(seed) + "]", k,
                                   static_cast<double>(k) * cfg.dt);
        }
        observe(k);
    }
    rec.final_state = PureState{stepper.basis(), psi};
}

TrajectoryRecord make_record(const SseConfig& cfg) {
    TrajectoryRecord rec;
    const Index r = cfg.records();
    rec.times.resize(r);
    if (cfg.record_densities) rec.densities.resize(r, cfg.spec.length);
    if (cfg.record_coherence) rec.coherence.resize(r, cfg.spec.length - 1);
    return rec;
}

// Welford accumulator over trajectories; merged with the pairwise (Chan) update.
struct Moments {
    double n = 0.0;
    RealMatrix mean, m2;

    void add(const RealMatrix& x) {
        if (n == 0.0) {
            mean = RealMatrix::Zero(x.rows(), x.cols());
            m2 = RealMatrix::Zero(x.rows(), x.cols());
        }
        n += 1.0;
        const RealMatrix delta = x - mean;
        mean += delta / n;
        m2.array() += delta.array() * (x - mean).array();
    }

    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double tot = n + o.n;
        const RealMatrix delta = o.mean - mean;
        mean += delta * (o.n / tot);
        m2 += o.m2 + delta.cwiseAbs2() * (n * o.n / tot);
        n = tot;
    }

    RealMatrix standard_error() const {
        if (n < 2.0) return RealMatrix::Zero(mean.rows(), mean.cols());
        return (m2 / (n - 1.0) / n).cwiseSqrt();
    }
};

struct Chunk {
    Moments dens, coh;
    std::vector<ComplexMatrix> rho;
};

}  // namespace

TrajectoryRecord run_trajectory(const SseConfig& config) {
    const SseConfig cfg = config.resolved();
    SseStepper stepper(cfg);
    TrajectoryRecord rec = make_record(cfg);
    integrate(stepper, cfg, cfg.seed, {}, rec, nullptr);
    return rec;
}

EnsembleRecord run_ensemble(const SseConfig& config, std::size_t m, const EnsembleOptions& opt) {
    if (m < 1) throw ParameterError("ensemble needs at least one trajectory");
    if (opt.chunk < 1) throw ParameterError("chunk size must be positive");
    const SseConfig cfg = config.resolved();
    for (double t : opt.snapshot_times)
        if (t < 0.0 || t > cfg.t_max) throw ParameterError("snapshot time outside [0, t_max]");

    SnapshotPlan plan;
    for (double t : opt.snapshot_times) plan.steps.push_back(std::llround(t / cfg.dt));
    const Index dim = make_basis(cfg.spec.length, cfg.particles)->dim();

    EnsembleRecord out;
    out.trajectories = m;
    out.snapshot_times = opt.snapshot_times;
    out.seeds.resize(m);
    for (std::size_t k = 0; k < m; ++k) out.seeds[k] = derive_seed(cfg.seed, k);

    const std::size_t chunks = (m + opt.chunk - 1) / opt.chunk;
    Chunk total;
    total.rho.assign(plan.steps.size(), ComplexMatrix::Zero(dim, dim));
    bool have_times = false;

    ordered_map_reduce(
        chunks, opt.workers,
        [&](std::size_t ci) {
            SseStepper stepper(cfg);
            Chunk c;
            c.rho.assign(plan.steps.size(), ComplexMatrix::Zero(dim, dim));
            TrajectoryRecord rec = make_record(cfg);
            const std::size_t lo = ci * opt.chunk, hi = std::min(m, lo + opt.chunk);
            for (std::size_t k = lo; k < hi; ++k) {
                integrate(stepper, cfg, out.seeds[k], plan, rec, plan.steps.empty() ? nullptr : &c.rho);
                if (cfg.record_densities) c.dens.add(rec.densities);
                if (cfg.record_coherence) c.coh.add(rec.coherence);
            }
            return std::make_pair(std::move(c), std::move(rec.times));
        },
        [&](std::pair<Chunk, RealVector>&& r) {
            if (!have_times) {
                out.times = r.second;
                have_times = true;
            }
            total.dens.merge(r.first.dens);
            total.coh.merge(r.first.coh);
            for (std::size_t s = 0; s < total.rho.size(); ++s) total.rho[s] += r.first.rho[s];
        });

    if (cfg.record_densities) {
        out.mean_densities = total.dens.mean;
        out.se_densities = total.dens.standard_error();
    }
    if (cfg.record_coherence) {
        out.mean_coherence = total.coh.mean;
        out.se_coherence = total.coh.standard_error();
    }
    out.mean_rho.reserve(total.rho.size());
    for (auto& r : total.rho) out.mean_rho.push_back(r / static_cast<double>(m));
    return out;
}

}  // namespace mchain
