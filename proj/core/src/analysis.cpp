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

#include "mchain/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "mchain/error.hpp"
#include "mchain/lindblad.hpp"
#include "mchain/noise.hpp"
#include "mchain/parallel.hpp"

namespace mchain {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("linear fit needs at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ParameterError("linear fit needs at least two distinct abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += r * r;
    }
    f.r2 = syy > 0.0 ? std::max(0.0, 1.0 - ssr / syy) : 1.0;
    return f;
}

BondMaxima per_bond_maxima(const RealVector& times, const RealMatrix& coherence, double late_fraction) {
    if (times.size() == 0 || coherence.rows() != times.size() || coherence.cols() == 0)
        throw ParameterError("empty or mismatched coherence series");
    if (!(late_fraction >= 0.0 && late_fraction < 1.0)) throw ParameterError("late fraction must lie in [0, 1)");
    BondMaxima m;
    m.c_max = coherence.colwise().maxCoeff().transpose();
    const double t_end = times[times.size() - 1];
    const double t_lo = late_fraction * t_end;
    m.c_inf = RealVector::Zero(coherence.cols());
    int count = 0;
    for (Index r = 0; r < times.size(); ++r)
        if (times[r] >= t_lo) {
            m.c_inf += coherence.row(r).transpose();
            ++count;
        }
    m.c_inf /= static_cast<double>(count);
    return m;
}

int bond_distance(int bond, int inject) { return bond >= inject ? bond - inject : inject - 1 - bond; }

std::string to_string(FitStatus s) {
    switch (s) {
        case FitStatus::ok: return "ok";
        case FitStatus::insufficient_decay: return "insufficient_decay";
        case FitStatus::non_decaying: return "non_decaying";
    }
    return "insufficient_decay";
}

CoherenceLengthFit fit_coherence_length(const BondMaxima& mx, int inject, const FitOptions& opt) {
    const Index nb = mx.c_max.size();
    if (nb < 1 || mx.c_inf.size() != nb) throw ParameterError("maxima vectors are empty or mismatched");
    const int length = static_cast<int>(nb) + 1;
    if (inject < 1 || inject > length) throw ParameterError("injection site out of range");
    if (opt.initial_distance < 0 || opt.min_bonds < 2 || opt.min_distances < 2)
        throw ParameterError("invalid fit options");

    CoherenceLengthFit fit;
    std::map<int, std::vector<int>> by_distance;  // eligible bonds per distance
    for (int b = 1; b <= static_cast<int>(nb); ++b) {
        const double c = mx.c_max[b - 1];
        if (c > std::max(mx.c_inf[b - 1], opt.eligibility) && std::isfinite(c)) {
            fit.eligible.push_back(b);
            by_distance[bond_distance(b, inject)].push_back(b);
        }
    }

    auto logc = [&](int b) { return std::log(mx.c_max[b - 1]); };
    auto window = [&](int dmax) {
        std::vector<double> x, y;
        std::vector<int> bonds;
        for (const auto& [d, bs] : by_distance) {
            if (d > dmax) break;
            for (int b : bs) {
                x.push_back(d);
                y.push_back(logc(b));
                bonds.push_back(b);
            }
        }
        return std::make_tuple(x, y, bonds);
    };
    auto mean_log = [&](int d) {
        const auto& bs = by_distance.at(d);
        double s = 0.0;
        for (int b : bs) s += logc(b);
        return s / static_cast<double>(bs.size());
    };
    auto distinct = [&](int dmax) {
        int n = 0;
        for (const auto& kv : by_distance) n += kv.first <= dmax;
        return n;
    };
    const int last = by_distance.empty() ? 0 : by_distance.rbegin()->first;

    int dmax = opt.initial_distance;
    // a window too small to fit at all is widened unconditionally
    while (dmax < last && (static_cast<int>(std::get<2>(window(dmax)).size()) < opt.min_bonds ||
                           distinct(dmax) < opt.min_distances))
        ++dmax;

    auto [x, y, bonds] = window(dmax);
    if (static_cast<int>(bonds.size()) < opt.min_bonds || distinct(dmax) < opt.min_distances) {
        fit.bonds = bonds;
        fit.max_distance = dmax;
        return fit;
    }
    LinearFit lf = linear_fit(x, y);
    while (lf.slope < 0.0 && by_distance.count(dmax) && by_distance.count(dmax + 1)) {
        const double ell = -1.0 / lf.slope;
        const double decrement = mean_log(dmax) - mean_log(dmax + 1);
        if (decrement < opt.extension_ratio / ell) break;
        ++dmax;
        std::tie(x, y, bonds) = window(dmax);
        lf = linear_fit(x, y);
    }

    fit.bonds = bonds;
    fit.max_distance = dmax;
    fit.r2 = lf.r2;
    fit.prefactor = std::exp(lf.intercept);
    if (!(lf.slope < 0.0)) {
        fit.status = FitStatus::non_decaying;
        return fit;
    }
    fit.status = FitStatus::ok;
    fit.length = -1.0 / lf.slope;
    return fit;
}

double saturation_gamma(double a, double p, double l_inf) {
    if (!(a > 0.0 && p > 0.0 && l_inf > 0.0)) throw ParameterError("saturation parameters must be positive");
    return std::pow(a / l_inf, 1.0 / p);
}

SaturationFit fit_saturation(std::span<const double> gammas, std::span<const double> lengths,
                             std::pair<double, double> fit_window, std::pair<double, double> sat_window) {
    if (gammas.size() != lengths.size()) throw ParameterError("gamma and length lists differ in size");
    std::vector<double> lx, ly, sat;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const double g = gammas[i], l = lengths[i];
        if (!(l > 0.0) || !std::isfinite(l)) continue;
        if (g >= fit_window.first && g <= fit_window.second && g > 0.0) {
            lx.push_back(std::log(g));
            ly.push_back(std::log(l));
        }
        if (g >= sat_window.first && g <= sat_window.second) sat.push_back(l);
    }
    if (lx.size() < 3) throw ParameterError("power-law window holds fewer than 3 usable points");
    if (sat.size() < 3) throw ParameterError("saturation window holds fewer than 3 usable points");
    const LinearFit lf = linear_fit(lx, ly);
    SaturationFit s;
    s.p = -lf.slope;
    s.a = std::exp(lf.intercept);
    double m = 0.0;
    for (double v : sat) m += v;
    s.l_inf = m / static_cast<double>(sat.size());
    if (!(s.p > 0.0)) throw ParameterError("power-law window does not decrease with gamma");
    s.gamma_sat = saturation_gamma(s.a, s.p, s.l_inf);
    return s;
}

SpreadDiagnostics spread_diagnostics(const RealVector& times, const RealMatrix& dens, int inject, double gamma,
                                     const SpreadOptions& opt) {
    const Index nt = times.size();
    const int L = static_cast<int>(dens.cols());
    if (nt < 2 || dens.rows() != nt) throw ParameterError("density series too short or mismatched");
    if (inject < 1 || inject > L) throw ParameterError("injection site out of range");
    const double t_early = gamma > 0.0 ? opt.early_factor / gamma : std::numeric_limits<double>::infinity();
    const double t_late = gamma > 0.0 ? opt.late_factor / gamma : std::numeric_limits<double>::infinity();

    SpreadDiagnostics out;
    std::vector<double> ft, fd;
    for (int s = 1; s <= L; ++s) {
        if (s == inject) continue;
        for (Index r = 0; r < nt; ++r) {
            if (dens(r, s - 1) >= opt.threshold) {
                if (times[r] < t_early) {
                    ft.push_back(times[r]);
                    fd.push_back(std::abs(s - inject));
                }
                break;
            }
        }
    }
    out.front_points = static_cast<int>(ft.size());
    std::set<double> distinct_t(ft.begin(), ft.end());
    if (ft.size() >= 2 && distinct_t.size() >= 2) {
        const LinearFit lf = linear_fit(ft, fd);
        out.velocity = lf.slope;
        out.velocity_ok = lf.slope > 0.0;
    }

    std::vector<double> ex, ey, lx, ly;
    for (Index r = 0; r < nt; ++r) {
        const double t = times[r];
        if (!(t > 0.0)) continue;
        double msd = 0.0;
        for (int s = 1; s <= L; ++s) msd += double(s - inject) * double(s - inject) * dens(r, s - 1);
        if (!(msd > 0.0)) continue;
        if (t < t_early) {
            ex.push_back(std::log(t));
            ey.push_back(std::log(msd));
        }
        if (t > t_late) {
            lx.push_back(std::log(t));
            ly.push_back(std::log(msd));
        }
    }
    if (ex.size() < 2) throw ParameterError("early spreading window is empty");
    out.early_exponent = linear_fit(ex, ey).slope;
    if (gamma > 0.0) {
        if (lx.size() < 2) throw ParameterError("late spreading window is empty; increase t_max");
        out.late_exponent = linear_fit(lx, ly).slope;
    }
    return out;
}

std::string to_string(Description d) { return d == Description::mixed ? "mixed" : "trajectory"; }

Description parse_description(const std::string& s) {
    if (s == "mixed" || s == "lindblad") return Description::mixed;
    if (s == "trajectory") return Description::trajectory;
    throw ParameterError("unknown mode '" + s + "' (expected lindblad|mixed|trajectory)");
}

PipelineResult coherence_length_pipeline(Description mode, const ChainSpec& spec, const PipelineOptions& opt,
                                         int inject) {
    spec.validate();
    PipelineResult res;
    res.inject = inject == 0 ? center_site(spec.length) : inject;
    RealVector times;
    RealMatrix coh;
    if (mode == Description::mixed) {
        LindbladConfig cfg;
        cfg.spec = spec;
        cfg.initial_sites = {res.inject};
        cfg.record_stride = opt.record_stride;
        cfg.record_densities = false;
        LindbladRun run = evolve_lindblad(cfg);
        times = std::move(run.times);
        coh = std::move(run.coherence);
    } else {
        SseConfig cfg;
        cfg.spec = spec;
        cfg.initial_sites = {res.inject};
        cfg.record_stride = opt.record_stride;
        cfg.seed = opt.seed;
        cfg.scheme = opt.scheme;
        cfg.record_densities = false;
        EnsembleOptions eo;
        eo.workers = opt.workers;
        EnsembleRecord ens = run_ensemble(cfg, opt.trajectories, eo);
        times = std::move(ens.times);
        coh = std::move(ens.mean_coherence);
    }
    res.maxima = per_bond_maxima(times, coh, opt.late_fraction);
    res.fit = fit_coherence_length(res.maxima, res.inject, opt.fit);
    return res;
}

std::uint64_t point_seed(std::uint64_t master, int length, double gamma) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(length));
    return splitmix64(h ^ std::bit_cast<std::uint64_t>(gamma));
}

std::vector<PhaseRow> sweep_phase_diagram(std::span<const SweepPoint> grid, const SweepOptions& opt,
                                          const std::function<bool(const SweepPoint&, PhaseRow&)>& lookup,
                                          const std::function<void(const PhaseRow&)>& on_row) {
    if (grid.empty()) throw ParameterError("empty sweep grid");
    std::vector<PhaseRow> rows(grid.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (lookup && lookup(grid[i], rows[i])) continue;
        todo.push_back(i);
    }
    const int outer = std::max(1, std::min<int>(opt.workers, static_cast<int>(todo.size())));
    PipelineOptions po = opt.pipeline;
    po.workers = outer > 1 ? 1 : opt.workers;

    ordered_map_reduce(
        todo.size(), outer,
        [&](std::size_t k) {
            const SweepPoint& p = grid[todo[k]];
            PhaseRow row;
            row.length = p.length;
            row.gamma = p.gamma;
            row.mode = opt.mode;
            try {
                PipelineOptions local = po;
                local.seed = point_seed(po.seed, p.length, p.gamma);
                const PipelineResult r = coherence_length_pipeline(opt.mode, ChainSpec{p.length, 1.0, p.gamma}, local);
                row.coherence_length = r.fit.length;
                row.r2 = r.fit.r2;
                row.status = to_string(r.fit.status);
            } catch (const Error& e) {
                row.status = std::string("failed: ") + e.what();
            }
            return std::make_pair(todo[k], row);
        },
        [&](std::pair<std::size_t, PhaseRow>&& r) {
            rows[r.first] = r.second;
            if (on_row) on_row(r.second);
        });
    return rows;
}

CollapseResult scaling_collapse(std::span<const PhaseRow> rows, double max_gamma_l) {
    CollapseResult out;
    std::set<int> lengths;
    // bins keyed by γL rounded to 1e-9 so that γ = x / L grids line up exactly
    std::map<long long, std::vector<CollapsePoint>> bins;
    for (const auto& r : rows) {
        if (r.status != "ok" || !std::isfinite(r.coherence_length)) continue;
        CollapsePoint p{r.gamma * r.length, r.coherence_length / r.length, r.length};
        out.points.push_back(p);
        lengths.insert(r.length);
        bins[std::llround(p.gamma_l * 1e9)].push_back(p);
    }
    if (lengths.size() < 2) throw ParameterError("scaling collapse needs at least two chain lengths");
    for (const auto& [key, pts] : bins) {
        std::set<int> ls;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
        for (const auto& p : pts) {
            ls.insert(p.length);
            lo = std::min(lo, p.length_over_l);
            hi = std::max(hi, p.length_over_l);
            mean += p.length_over_l;
        }
        if (ls.size() < 2) continue;
        mean /= static_cast<double>(pts.size());
        const double spread = (hi - lo) / mean;
        const double gl = pts.front().gamma_l;
        out.bin_spread.emplace_back(gl, spread);
        if (gl <= max_gamma_l) out.max_spread = std::max(out.max_spread, spread);
    }
    return out;
}

}  // namespace mchain
