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

#include "mchain/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "mchain/coherence.hpp"
#include "mchain/error.hpp"

namespace mchain {

double default_dt(double gamma) { return gamma > 0.0 ? std::min(0.05, 0.05 / gamma) : 0.05; }

double default_t_max(int length, double gamma) {
    return gamma > 0.0 ? std::max(2.0 * length, 10.0 / gamma) : 2.0 * length;
}

LindbladConfig LindbladConfig::resolved() const {
    LindbladConfig c = *this;
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
    for (double t : c.snapshot_times)
        if (t < 0.0 || t > c.t_max) throw ParameterError("snapshot time outside [0, t_max]");
    return c;
}

LindbladGenerator::LindbladGenerator(const ChainSpec& spec, BasisPtr basis)
    : basis_(std::move(basis)), gamma_(spec.gamma) {
    h_ = build_hamiltonian(spec, *basis_).cast<Complex>();
    const Index d = basis_->dim();
    const int n = basis_->particles();
    dissipator_.resize(d, d);
    // n_i rho n_i summed over sites counts shared particles; the anticommutator
    // contributes N on each side.
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i)
            dissipator_(i, j) = (n == 1) ? (i == j ? 0.0 : -gamma_) : gamma_ * (basis_->overlap(i, j) - n);
}

ComplexMatrix LindbladGenerator::apply(const ComplexMatrix& rho) const {
    const ComplexMatrix hr = h_ * rho;
    const ComplexMatrix rh = (h_ * rho.adjoint()).adjoint();
    ComplexMatrix out = Complex(0.0, -1.0) * (hr - rh);
    out.array() += dissipator_.array().cast<Complex>() * rho.array();
    return out;
}

void LindbladGenerator::apply_hermitian(const ComplexMatrix& rho, ComplexMatrix& out) const {
    out.noalias() = h_ * rho;
    // -i (X - X^dagger) with X = H rho
    const Index d = rho.rows();
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i <= j; ++i) {
            const Complex x = out(i, j);
            const Complex y = std::conj(out(j, i));
            const Complex v = Complex(0.0, -1.0) * (x - y);
            out(i, j) = v + dissipator_(i, j) * rho(i, j);
            if (i != j) out(j, i) = std::conj(v) + dissipator_(j, i) * rho(j, i);
        }
    }
}

ComplexMatrix lindblad_rhs(const DensityMatrix& rho, const SparseReal& hamiltonian, double gamma) {
    if (!rho.basis) throw ParameterError("density matrix has no basis");
    const Index d = rho.basis->dim();
    if (rho.elements.rows() != d || rho.elements.cols() != d || hamiltonian.rows() != d || hamiltonian.cols() != d)
        throw ParameterError("dimension mismatch between density matrix and Hamiltonian");
    const SparseComplex h = hamiltonian.cast<Complex>();
    ComplexMatrix out = Complex(0.0, -1.0) * (h * rho.elements - (h * rho.elements.adjoint()).adjoint());
    const SectorBasis& basis = *rho.basis;
    const int n = basis.particles();
    for (Index j = 0; j < d; ++j)
        for (Index i = 0; i < d; ++i) out(i, j) += gamma * (basis.overlap(i, j) - n) * rho.elements(i, j);
    return out;
}

namespace {

void record_observables(const ComplexMatrix& rho, const SectorBasis& basis, const RealMatrix& occ, bool densities,
                        bool coherence, Index row, LindbladRun& run) {
    const RealVector diag = rho.diagonal().real();
    if (densities) {
        if (basis.particles() == 1)
            run.densities.row(row) = diag.transpose();
        else
            run.densities.row(row) = (occ.transpose() * diag).transpose();
    }
    if (coherence) {
        if (basis.particles() == 1)
            run.coherence.row(row) = coherence_single_profile(rho).transpose();
        else
            run.coherence.row(row) = coherence_fock_profile(DensityMatrix{run.final_state.basis, rho}).transpose();
    }
}

}  // namespace

LindbladRun evolve_lindblad(const LindbladConfig& config_in) {
    const LindbladConfig cfg = config_in.resolved();
    const int L = cfg.spec.length;
    auto basis = make_basis(L, cfg.particles);
    LindbladGenerator gen(cfg.spec, basis);
    const Index d = basis->dim();

    const std::int64_t steps = std::llround(cfg.t_max / cfg.dt);
    const double dt = cfg.dt;
    const Index records = static_cast<Index>(steps / cfg.record_stride + 1);

    LindbladRun run;
    run.final_state.basis = basis;
    run.times.resize(records);
    if (cfg.record_densities) run.densities.resize(records, L);
    if (cfg.record_coherence) run.coherence.resize(records, L - 1);
    const RealMatrix occ = cfg.particles == 1 ? RealMatrix() : occupation_table(*basis);

    std::vector<std::int64_t> snap_steps;
    for (double t : cfg.snapshot_times) snap_steps.push_back(std::llround(t / dt));
    run.snapshot_times = cfg.snapshot_times;
    run.snapshots.resize(snap_steps.size());

    std::vector<std::int64_t> check_steps;
    for (int q = 0; q < cfg.positivity_checks; ++q)
        check_steps.push_back(steps * (q + 1) / cfg.positivity_checks);
    run.min_eigenvalue = 0.0;

    ComplexMatrix rho = DensityMatrix::from_pure(localized_state(basis, cfg.initial_sites)).elements;
    ComplexMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);

    auto observe = [&](std::int64_t k) {
        const double t = static_cast<double>(k) * dt;
        if (k % cfg.record_stride == 0) {
            const Index row = static_cast<Index>(k / cfg.record_stride);
            run.times[row] = t;
            record_observables(rho, *basis, occ, cfg.record_densities, cfg.record_coherence, row, run);
            const double drift = std::abs(rho.trace().real() - 1.0);
            run.max_trace_drift = std::max(run.max_trace_drift, drift);
            if (drift > 1e-8) throw IntegrationError("trace drift " + std::to_string(drift) + " exceeds 1e-8", k, t);
        }
        for (std::size_t s = 0; s < snap_steps.size(); ++s)
            if (snap_steps[s] == k) run.snapshots[s] = rho;
        if (std::find(check_steps.begin(), check_steps.end(), k) != check_steps.end()) {
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
            const double lo = es.eigenvalues().minCoeff();
            run.min_eigenvalue = std::min(run.min_eigenvalue, lo);
            if (lo < -1e-6) throw IntegrationError("density matrix lost positivity; reduce dt", k, t);
        }
    };

    observe(0);
    for (std::int64_t k = 1; k <= steps; ++k) {
        gen.apply_hermitian(rho, k1);
        tmp = rho + (0.5 * dt) * k1;
        gen.apply_hermitian(tmp, k2);
        tmp = rho + (0.5 * dt) * k2;
        gen.apply_hermitian(tmp, k3);
        tmp = rho + dt * k3;
        gen.apply_hermitian(tmp, k4);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (k % 100 == 0) rho = 0.5 * (rho + rho.adjoint()).eval();
        if (!rho.allFinite()) throw IntegrationError("non-finite density matrix", k, static_cast<double>(k) * dt);
        observe(k);
    }
    run.final_state.elements = std::move(rho);
    return run;
}

ComplexVector vectorize(const ComplexMatrix& rho) {
    ComplexVector v(rho.size());
    for (Index i = 0; i < rho.rows(); ++i)
        for (Index j = 0; j < rho.cols(); ++j) v[i * rho.cols() + j] = rho(i, j);
    return v;
}

ComplexMatrix unvectorize(const ComplexVector& v, Index dim) {
    if (v.size() != dim * dim) throw ParameterError("vector length is not dim^2");
    ComplexMatrix rho(dim, dim);
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) rho(i, j) = v[i * dim + j];
    return rho;
}

ComplexMatrix build_liouvillian(const ChainSpec& spec, int particles) {
    spec.validate();
    if (particles != 1) throw UnsupportedError("the superoperator is only built in the single-particle sector");
    const int d = spec.length;
    SectorBasis basis(d, 1);
    const ComplexMatrix h = RealMatrix(build_hamiltonian(spec, basis)).cast<Complex>();
    const ComplexMatrix id = ComplexMatrix::Identity(d, d);
    ComplexMatrix l = ComplexMatrix::Zero(d * d, d * d);
    const Complex mi(0.0, -1.0);
    // kron(A, B)(i*d + j, k*d + m) = A(i, k) B(j, m)
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            for (int j = 0; j < d; ++j)
                for (int m = 0; m < d; ++m) l(i * d + j, k * d + m) = mi * (h(i, k) * id(j, m) - id(i, k) * h(m, j));
    for (int s = 0; s < d; ++s) {
        // n_s kron n_s^T is a single diagonal entry; the anticommutator halves
        // touch every row/column index that equals s
        l(s * d + s, s * d + s) += spec.gamma;
        for (int j = 0; j < d; ++j) {
            l(s * d + j, s * d + j) -= 0.5 * spec.gamma;
            l(j * d + s, j * d + s) -= 0.5 * spec.gamma;
        }
    }
    return l;
}

std::string to_string(EigenClass c) {
    switch (c) {
        case EigenClass::steady: return "steady";
        case EigenClass::overdamped: return "overdamped";
        case EigenClass::bulk: return "bulk";
    }
    return "bulk";
}

namespace {

// Orthonormal Hermitian basis {E_ii, (E_ij + E_ji)/sqrt2, i(E_ij - E_ji)/sqrt2};
// in it a Hermiticity-preserving generator is a real matrix.
RealMatrix hermitian_representation(const ComplexMatrix& l, Index d, double& residual) {
    struct Col {
        Index a, b;
        Complex ca, cb;
    };
    std::vector<Col> cols;
    cols.reserve(d * d);
    const double r = std::numbers::sqrt2 / 2.0;
    for (Index i = 0; i < d; ++i) cols.push_back({i * d + i, -1, 1.0, 0.0});
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            cols.push_back({i * d + j, j * d + i, r, r});
            cols.push_back({i * d + j, j * d + i, Complex(0.0, r), Complex(0.0, -r)});
        }
    const Index n = d * d;
    ComplexMatrix lb(n, n);
    for (Index k = 0; k < n; ++k) {
        lb.col(k) = cols[k].ca * l.col(cols[k].a);
        if (cols[k].b >= 0) lb.col(k) += cols[k].cb * l.col(cols[k].b);
    }
    RealMatrix out(n, n);
    residual = 0.0;
    for (Index q = 0; q < n; ++q) {
        for (Index k = 0; k < n; ++k) {
            Complex v = std::conj(cols[q].ca) * lb(cols[q].a, k);
            if (cols[q].b >= 0) v += std::conj(cols[q].cb) * lb(cols[q].b, k);
            out(q, k) = v.real();
            residual = std::max(residual, std::abs(v.imag()));
        }
    }
    return out;
}

}  // namespace

SpectrumRecord liouvillian_spectrum(const ComplexMatrix& l, double gamma, double tol_im) {
    const Index n = l.rows();
    const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (l.cols() != n || d * d != n) throw ParameterError("superoperator must be square with dim^2 rows");

    std::vector<Complex> ev;
    ev.reserve(n);
    double residual = 0.0;
    const double lnorm = l.cwiseAbs().maxCoeff();
    const RealMatrix real_rep = hermitian_representation(l, d, residual);
    auto fail = [&] {
        throw NumericalError("eigensolver did not converge (dim " + std::to_string(n) + ", gamma " +
                             std::to_string(gamma) + ")");
    };
    if (residual <= 1e-12 * std::max(1.0, lnorm)) {
        // real Schur form: real eigenvalues come out with exactly zero imaginary part
        Eigen::EigenSolver<RealMatrix> es(real_rep, false);
        if (es.info() != Eigen::Success) fail();
        for (Index i = 0; i < n; ++i) ev.push_back(es.eigenvalues()[i]);
    } else {
        Eigen::ComplexEigenSolver<ComplexMatrix> es(l, false);
        if (es.info() != Eigen::Success) fail();
        for (Index i = 0; i < n; ++i) ev.push_back(es.eigenvalues()[i]);
    }
    std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });

    SpectrumRecord rec;
    rec.gamma = gamma;
    rec.eigenvalues = ev;
    rec.scale = 1.0;
    for (const auto& z : ev) rec.scale = std::max(rec.scale, std::abs(z));
    const double tol = tol_im * rec.scale;

    std::vector<bool> steady(n), real(n);
    double edge = -std::numeric_limits<double>::infinity();  // right edge of the oscillating bulk
    for (Index i = 0; i < n; ++i) {
        steady[i] = std::abs(ev[i]) < tol;
        real[i] = std::abs(ev[i].imag()) < tol;
        if (!real[i]) edge = std::max(edge, ev[i].real());
    }

    // Candidates are the real, non-steady eigenvalues; with an oscillating bulk only
    // those to its right. The sequence (edge, candidates ascending) is cut at its
    // widest gap and the part to the right of the cut is the overdamped cluster.
    std::vector<double> seq;
    if (std::isfinite(edge)) seq.push_back(edge);
    for (Index i = 0; i < n; ++i)
        if (real[i] && !steady[i] && ev[i].real() > edge) seq.push_back(ev[i].real());
    std::sort(seq.begin(), seq.end());
    double threshold = std::numeric_limits<double>::infinity();
    double widest = -1.0;
    for (std::size_t i = 1; i < seq.size(); ++i)
        if (seq[i] - seq[i - 1] > widest) {
            widest = seq[i] - seq[i - 1];
            threshold = seq[i - 1];
        }
    std::vector<bool> over(n, false);
    for (Index i = 0; i < n; ++i) over[i] = real[i] && !steady[i] && ev[i].real() > threshold;

    rec.classes.resize(n);
    double od_max_abs = -1.0, bulk_min_abs = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
        const double re = std::abs(ev[i].real());
        if (steady[i]) {
            rec.classes[i] = EigenClass::steady;
            ++rec.steady_count;
        } else if (over[i]) {
            rec.classes[i] = EigenClass::overdamped;
            ++rec.overdamped_count;
            od_max_abs = std::max(od_max_abs, re);
        } else {
            rec.classes[i] = EigenClass::bulk;
            bulk_min_abs = std::min(bulk_min_abs, re);
        }
    }
    if (rec.overdamped_count > 0 && std::isfinite(bulk_min_abs)) rec.gap = std::max(0.0, bulk_min_abs - od_max_abs);
    return rec;
}

}  // namespace mchain
