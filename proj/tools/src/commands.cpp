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

#include "commands.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "io.hpp"
#include "mchain/analysis.hpp"
#include "mchain/error.hpp"
#include "mchain/lindblad.hpp"
#include "mchain/oracles.hpp"
#include "mchain/parallel.hpp"
#include "mchain/sse.hpp"

namespace mchain::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

struct Common {
    std::uint64_t seed = 1;
    int workers = default_workers();
    std::string out;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    app->add_option("--workers", c.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    const char* env = std::getenv(kOutputEnv);
    c.out = env && *env ? env : "mchain-out";
    app->add_option("--out", c.out, std::string("Output directory (default from ") + kOutputEnv + ")")
        ->capture_default_str();
}

// Parameters, timing and output digests of one run.
class Manifest {
public:
    explicit Manifest(std::string subcommand) : started_(utc_now()) {
        doc_["subcommand"] = std::move(subcommand);
        doc_["tool_version"] = kToolVersion;
    }

    template <class T>
    void param(const std::string& key, const T& value) {
        params_["param." + key] = value;
    }
    void result(const std::string& key, const Json& value) { results_["result." + key] = value; }

    // digest of the resolved parameters minus the listed keys
    std::string config_digest(const std::set<std::string>& exclude = {}) const {
        Json j;
        for (auto it = params_.begin(); it != params_.end(); ++it)
            if (!exclude.count(it.key())) j[it.key()] = it.value();
        return sha256_hex(dump_flat_json(j));
    }

    void write(OutputSet& outputs, std::uint64_t seed, const std::string& digest = {}) {
        Json doc = doc_;
        doc["seed"] = seed;
        doc["started_at"] = started_;
        doc["finished_at"] = utc_now();
        for (auto it = params_.begin(); it != params_.end(); ++it) doc[it.key()] = it.value();
        for (auto it = results_.begin(); it != results_.end(); ++it) doc[it.key()] = it.value();
        if (!digest.empty()) doc["config_digest"] = digest;
        for (const auto& name : outputs.names()) doc["output." + name + ".sha256"] = sha256_file(outputs.dir() / name);
        // manifest goes last and atomically; then the outputs are kept
        write_atomic(outputs.dir() / "manifest.json", dump_flat_json(doc));
        outputs.commit();
    }

private:
    Json doc_, params_, results_;
    std::string started_;
};

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    Common common;
    std::string mode = "lindblad";
    int length = 0;
    double gamma = 0.0;
    double hopping = 1.0;
    std::vector<int> inject;
    double dt = 0.0, t_max = 0.0;
    int stride = 1;
    std::size_t trajectories = 1;
    std::string scheme = "exponential";
};

int cmd_simulate(const SimulateArgs& a) {
    Manifest man("simulate");
    const ChainSpec spec{a.length, a.hopping, a.gamma};
    const Description mode = parse_description(a.mode);
    const std::vector<int> inject = a.inject.empty() ? std::vector<int>{center_site(a.length)} : a.inject;
    const int particles = static_cast<int>(inject.size());

    OutputSet out(a.common.out);
    if (mode == Description::mixed) {
        LindbladConfig cfg;
        cfg.spec = spec;
        cfg.particles = particles;
        cfg.initial_sites = inject;
        cfg.dt = a.dt;
        cfg.t_max = a.t_max;
        cfg.record_stride = a.stride;
        const LindbladConfig r = cfg.resolved();
        const LindbladRun run = evolve_lindblad(r);
        CsvWriter d(out.add("densities.csv"), {"t", "site", "density"});
        for (Index k = 0; k < run.times.size(); ++k)
            for (int s = 0; s < a.length; ++s) {
                d.cell(run.times[k]).cell(s + 1).cell(run.densities(k, s));
                d.end_row();
            }
        d.close();
        CsvWriter c(out.add("coherence.csv"), {"t", "bond", "c_n"});
        for (Index k = 0; k < run.times.size(); ++k)
            for (int b = 0; b + 1 < a.length; ++b) {
                c.cell(run.times[k]).cell(b + 1).cell(run.coherence(k, b));
                c.end_row();
            }
        c.close();
        man.param("dt", r.dt);
        man.param("t_max", r.t_max);
        man.result("max_trace_drift", run.max_trace_drift);
        man.result("min_sampled_eigenvalue", run.min_eigenvalue);
    } else {
        SseConfig cfg;
        cfg.spec = spec;
        cfg.particles = particles;
        cfg.initial_sites = inject;
        cfg.dt = a.dt;
        cfg.t_max = a.t_max;
        cfg.record_stride = a.stride;
        cfg.seed = a.common.seed;
        cfg.scheme = parse_scheme(a.scheme);
        const SseConfig r = cfg.resolved();
        EnsembleOptions eo;
        eo.workers = a.common.workers;
        const EnsembleRecord ens = run_ensemble(r, a.trajectories, eo);
        CsvWriter d(out.add("densities.csv"), {"t", "site", "density", "stderr"});
        for (Index k = 0; k < ens.times.size(); ++k)
            for (int s = 0; s < a.length; ++s) {
                d.cell(ens.times[k]).cell(s + 1).cell(ens.mean_densities(k, s)).cell(ens.se_densities(k, s));
                d.end_row();
            }
        d.close();
        CsvWriter c(out.add("coherence.csv"), {"t", "bond", "c_n", "stderr"});
        for (Index k = 0; k < ens.times.size(); ++k)
            for (int b = 0; b + 1 < a.length; ++b) {
                c.cell(ens.times[k]).cell(b + 1).cell(ens.mean_coherence(k, b)).cell(ens.se_coherence(k, b));
                c.end_row();
            }
        c.close();
        man.param("dt", r.dt);
        man.param("t_max", r.t_max);
        man.param("trajectories", a.trajectories);
        man.param("scheme", to_string(r.scheme));
    }
    man.param("mode", to_string(mode));
    man.param("length", a.length);
    man.param("gamma", a.gamma);
    man.param("hopping", a.hopping);
    man.param("inject", join_ints(inject));
    man.param("stride", a.stride);
    man.write(out, a.common.seed);
    return kSuccess;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumArgs {
    Common common;
    int length = 0;
    std::vector<double> gammas;
    double hopping = 1.0;
    double tol_im = 1e-9;
};

int cmd_spectrum(const SpectrumArgs& a) {
    if (a.length > 60) throw ParameterError("spectrum supports L <= 60");
    Manifest man("spectrum");
    std::vector<SpectrumRecord> recs(a.gammas.size());
    ordered_map_reduce(
        a.gammas.size(), a.common.workers,
        [&](std::size_t i) {
            const ChainSpec spec{a.length, a.hopping, a.gammas[i]};
            return std::make_pair(i, liouvillian_spectrum(build_liouvillian(spec, 1), a.gammas[i], a.tol_im));
        },
        [&](std::pair<std::size_t, SpectrumRecord>&& r) { recs[r.first] = std::move(r.second); });

    OutputSet out(a.common.out);
    CsvWriter s(out.add("spectrum.csv"), {"L", "gamma", "re", "im", "class"});
    CsvWriter m(out.add("spectrum_summary.csv"), {"L", "gamma", "overdamped_count", "gap"});
    for (const auto& r : recs) {
        for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
            s.cell(a.length).cell(r.gamma).cell(r.eigenvalues[i].real()).cell(r.eigenvalues[i].imag());
            s.cell(to_string(r.classes[i]));
            s.end_row();
        }
        m.cell(a.length).cell(r.gamma).cell(r.overdamped_count).cell(r.gap);
        m.end_row();
        std::cout << "L=" << a.length << " gamma=" << format_double(r.gamma) << " overdamped=" << r.overdamped_count
                  << " steady=" << r.steady_count << " gap=" << format_double(r.gap) << "\n";
    }
    s.close();
    m.close();
    man.param("length", a.length);
    man.param("gammas", join_doubles(a.gammas));
    man.param("hopping", a.hopping);
    man.param("tol_im", a.tol_im);
    man.write(out, a.common.seed);
    return kSuccess;
}

// ------------------------------------------------------- coherence-length

struct FitArgs {
    double eligibility = 1e-9;
    int initial_distance = 2;
    double extension_ratio = 0.7;
    double late_fraction = 0.8;
};

void add_fit_options(CLI::App* app, FitArgs& f) {
    app->add_option("--eligibility", f.eligibility, "Minimum C_max for a bond to enter the fit")->capture_default_str();
    app->add_option("--initial-distance", f.initial_distance, "First fit window d <= value")->capture_default_str();
    app->add_option("--extension-ratio", f.extension_ratio, "Window grows while log-decrement >= ratio/length")
        ->capture_default_str();
    app->add_option("--late-fraction", f.late_fraction, "C_inf averages t >= fraction * t_max")->capture_default_str();
}

FitOptions to_fit_options(const FitArgs& f) {
    FitOptions o;
    o.eligibility = f.eligibility;
    o.initial_distance = f.initial_distance;
    o.extension_ratio = f.extension_ratio;
    return o;
}

void record_fit_params(Manifest& man, const FitArgs& f) {
    man.param("eligibility", f.eligibility);
    man.param("initial_distance", f.initial_distance);
    man.param("extension_ratio", f.extension_ratio);
    man.param("late_fraction", f.late_fraction);
}

struct CoherenceLengthArgs {
    Common common;
    std::string mode = "lindblad";
    int length = 0;
    double gamma = 0.0;
    int inject = 0;
    std::size_t trajectories = 800;
    int stride = 1;
    std::string scheme = "exponential";
    bool self_test = false;
    FitArgs fit;
};

// Bundled exponential dataset: C_max(d) = 0.3 exp(-d / 5) on a 41-site chain.
PipelineResult synthetic_dataset() {
    PipelineResult r;
    const int length = 41;
    r.inject = 21;
    r.maxima.c_max.resize(length - 1);
    r.maxima.c_inf = RealVector::Zero(length - 1);
    for (int b = 1; b < length; ++b) r.maxima.c_max[b - 1] = 0.3 * std::exp(-bond_distance(b, r.inject) / 5.0);
    return r;
}

int cmd_coherence_length(const CoherenceLengthArgs& a) {
    Manifest man("coherence-length");
    PipelineResult res;
    std::string mode_name = "synthetic";
    if (a.self_test) {
        res = synthetic_dataset();
        res.fit = fit_coherence_length(res.maxima, res.inject, to_fit_options(a.fit));
        man.param("self_test", true);
    } else {
        if (a.length < 2) throw ParameterError("--length is required (>= 2) unless --self-test is given");
        const Description mode = parse_description(a.mode);
        mode_name = to_string(mode);
        PipelineOptions po;
        po.trajectories = a.trajectories;
        po.seed = a.common.seed;
        po.workers = a.common.workers;
        po.record_stride = a.stride;
        po.late_fraction = a.fit.late_fraction;
        po.scheme = parse_scheme(a.scheme);
        po.fit = to_fit_options(a.fit);
        res = coherence_length_pipeline(mode, ChainSpec{a.length, 1.0, a.gamma}, po, a.inject);
        man.param("mode", mode_name);
        man.param("length", a.length);
        man.param("gamma", a.gamma);
        man.param("inject", res.inject);
        man.param("stride", a.stride);
        if (mode == Description::trajectory) {
            man.param("trajectories", a.trajectories);
            man.param("scheme", to_string(po.scheme));
        }
    }
    record_fit_params(man, a.fit);

    OutputSet out(a.common.out);
    const CoherenceLengthFit& f = res.fit;
    std::set<int> used(f.bonds.begin(), f.bonds.end()), eligible(f.eligible.begin(), f.eligible.end());
    CsvWriter m(out.add("maxima.csv"), {"bond", "distance", "c_max", "c_inf", "eligible", "used"});
    for (Index b = 1; b <= res.maxima.c_max.size(); ++b) {
        m.cell(static_cast<long long>(b)).cell(bond_distance(static_cast<int>(b), res.inject));
        m.cell(res.maxima.c_max[b - 1]).cell(res.maxima.c_inf[b - 1]);
        m.cell(eligible.count(static_cast<int>(b)) ? 1 : 0).cell(used.count(static_cast<int>(b)) ? 1 : 0);
        m.end_row();
    }
    m.close();

    Json fit;
    fit["status"] = to_string(f.status);
    fit["mode"] = mode_name;
    fit["length"] = f.length;
    fit["prefactor"] = f.prefactor;
    fit["r2"] = f.r2;
    fit["side"] = f.side;
    fit["inject"] = res.inject;
    fit["max_distance"] = f.max_distance;
    fit["bonds_used"] = join_ints(f.bonds);
    write_atomic(out.add("fit.json"), dump_flat_json(fit));
    std::cout << "status=" << to_string(f.status) << " length=" << format_double(f.length)
              << " r2=" << format_double(f.r2) << "\n";
    man.write(out, a.common.seed);
    return kSuccess;
}

// ----------------------------------------------------------- phase-diagram

struct PhaseArgs {
    Common common;
    std::string mode = "lindblad";
    std::vector<int> lengths;
    std::vector<double> gammas;
    std::vector<double> gamma_l;
    std::size_t trajectories = 800;
    int stride = 1;
    std::string scheme = "exponential";
    std::vector<double> fit_window, saturation_window;
    double max_gamma_l = 10.0;
    FitArgs fit;
};

const std::vector<std::string> kPhaseHeader = {"L", "gamma", "mode", "length", "r2", "status"};

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else {
            cells.back() += c;
        }
    }
    return cells;
}

using RowKey = std::pair<int, std::uint64_t>;

RowKey row_key(int length, double gamma) { return {length, std::bit_cast<std::uint64_t>(gamma)}; }

std::map<RowKey, PhaseRow> load_phase_rows(const fs::path& path, Description mode) {
    std::map<RowKey, PhaseRow> rows;
    std::ifstream in(path);
    std::string line;
    if (!std::getline(in, line)) return rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != kPhaseHeader.size()) continue;  // torn trailing line
        if (parse_description(c[2]) != mode) continue;
        PhaseRow r;
        r.length = std::stoi(c[0]);
        r.gamma = std::strtod(c[1].c_str(), nullptr);
        r.mode = mode;
        r.coherence_length = std::strtod(c[3].c_str(), nullptr);
        r.r2 = std::strtod(c[4].c_str(), nullptr);
        r.status = c[5];
        if (r.status.rfind("failed", 0) == 0) continue;  // retried on resume
        rows[row_key(r.length, r.gamma)] = r;
    }
    return rows;
}

void write_phase_row(CsvWriter& w, const PhaseRow& r) {
    w.cell(r.length).cell(r.gamma).cell(to_string(r.mode)).cell(r.coherence_length).cell(r.r2).cell(r.status);
    w.end_row();
}

int cmd_phase_diagram(const PhaseArgs& a) {
    const Description mode = parse_description(a.mode);
    if (a.lengths.empty()) throw ParameterError("--lengths must not be empty");
    if (a.gammas.empty() && a.gamma_l.empty()) throw ParameterError("give --gammas and/or --gamma-l");
    std::vector<SweepPoint> grid;
    std::set<RowKey> seen;
    for (int L : a.lengths) {
        std::vector<double> gs = a.gammas;
        for (double x : a.gamma_l) gs.push_back(x / L);
        for (double g : gs)
            if (seen.insert(row_key(L, g)).second) grid.push_back({L, g});
    }
    const bool trajectory = mode == Description::trajectory;
    const std::vector<double> fit_window =
        a.fit_window.empty() ? (trajectory ? std::vector<double>{0.2, 0.8} : std::vector<double>{0.1, 1.0}) : a.fit_window;
    const std::vector<double> sat_window = a.saturation_window.empty()
                                               ? (trajectory ? std::vector<double>{2.0, 8.0} : std::vector<double>{4.0, 19.0})
                                               : a.saturation_window;
    if (fit_window.size() != 2 || sat_window.size() != 2) throw ParameterError("windows take exactly two values");

    Manifest man("phase-diagram");
    man.param("mode", to_string(mode));
    man.param("trajectories", trajectory ? a.trajectories : 0);
    man.param("stride", a.stride);
    man.param("scheme", trajectory ? a.scheme : std::string("none"));
    record_fit_params(man, a.fit);
    const std::string digest = man.config_digest();
    man.param("lengths", join_ints(a.lengths));
    man.param("gammas", join_doubles(a.gammas));
    man.param("gamma_l", join_doubles(a.gamma_l));
    man.param("fit_window", join_doubles(fit_window));
    man.param("saturation_window", join_doubles(sat_window));
    man.param("max_gamma_l", a.max_gamma_l);

    const fs::path dir = a.common.out;
    fs::create_directories(dir);
    const fs::path partial = dir / "phase.partial.csv";
    const fs::path partial_meta = dir / "phase.partial.json";

    // rows from an earlier run with identical per-point settings
    std::map<RowKey, PhaseRow> done;
    if (fs::exists(dir / "manifest.json") && fs::exists(dir / "phase.csv")) {
        try {
            std::ifstream in(dir / "manifest.json");
            const Json old = Json::parse(in);
            if (old.value("subcommand", "") == "phase-diagram" && old.value("config_digest", "") == digest &&
                old.value("output.phase.csv.sha256", "") == sha256_file(dir / "phase.csv"))
                done = load_phase_rows(dir / "phase.csv", mode);
        } catch (const nlohmann::json::exception&) {
        }
    }
    bool partial_ok = false;
    if (fs::exists(partial_meta)) {
        try {
            std::ifstream in(partial_meta);
            partial_ok = Json::parse(in).value("config_digest", "") == digest;
        } catch (const nlohmann::json::exception&) {
        }
    }
    if (partial_ok && fs::exists(partial)) {
        for (auto& [k, r] : load_phase_rows(partial, mode)) done.emplace(k, r);
    } else {
        Json meta;
        meta["config_digest"] = digest;
        write_atomic(partial_meta, dump_flat_json(meta));
        CsvWriter(partial, {"L", "gamma", "mode", "length", "r2", "status"}).close();
    }
    std::ofstream journal(partial, std::ios::app | std::ios::binary);

    SweepOptions so;
    so.mode = mode;
    so.workers = a.common.workers;
    so.pipeline.trajectories = a.trajectories;
    so.pipeline.seed = a.common.seed;
    so.pipeline.record_stride = a.stride;
    so.pipeline.late_fraction = a.fit.late_fraction;
    so.pipeline.scheme = parse_scheme(a.scheme);
    so.pipeline.fit = to_fit_options(a.fit);

    std::size_t reused = 0;
    const auto rows = sweep_phase_diagram(
        grid, so,
        [&](const SweepPoint& p, PhaseRow& row) {
            auto it = done.find(row_key(p.length, p.gamma));
            if (it == done.end()) return false;
            row = it->second;
            ++reused;
            return true;
        },
        [&](const PhaseRow& r) {
            std::ostringstream line;
            {
                // one complete line per point so a crash leaves at most a torn tail
                std::string s = std::to_string(r.length) + "," + format_double(r.gamma) + "," + to_string(r.mode) + "," +
                                format_double(r.coherence_length) + "," + format_double(r.r2) + ",";
                const bool quote = r.status.find_first_of(",\"\n") != std::string::npos;
                if (quote) {
                    s += '"';
                    for (char c : r.status) {
                        if (c == '"') s += '"';
                        s += (c == '\n' ? ' ' : c);
                    }
                    s += '"';
                } else {
                    s += r.status;
                }
                line << s << '\n';
            }
            journal << line.str() << std::flush;
            std::cout << "L=" << r.length << " gamma=" << format_double(r.gamma) << " length="
                      << format_double(r.coherence_length) << " status=" << r.status << std::endl;
        });
    journal.close();

    OutputSet out(dir);
    std::size_t failures = 0;
    CsvWriter p(out.add("phase.csv"), {"L", "gamma", "mode", "length", "r2", "status"});
    for (const auto& r : rows) {
        write_phase_row(p, r);
        failures += r.status.rfind("failed", 0) == 0;
    }
    p.close();

    CsvWriter c(out.add("collapse.csv"), {"gammaL", "length_over_L", "L"});
    std::set<int> distinct(a.lengths.begin(), a.lengths.end());
    double spread = kNaN;
    if (distinct.size() >= 2) {
        try {
            const CollapseResult cr = scaling_collapse(rows, a.max_gamma_l);
            for (const auto& pt : cr.points) {
                c.cell(pt.gamma_l).cell(pt.length_over_l).cell(pt.length);
                c.end_row();
            }
            spread = cr.max_spread;
        } catch (const ParameterError&) {
        }
    }
    c.close();

    // saturation on the longest chain of the sweep
    const int lmax = *distinct.rbegin();
    std::vector<double> gs, ls;
    for (const auto& r : rows)
        if (r.length == lmax && r.status == "ok") {
            gs.push_back(r.gamma);
            ls.push_back(r.coherence_length);
        }
    Json sat;
    sat["length"] = lmax;
    sat["mode"] = to_string(mode);
    sat["fit_window_lo"] = fit_window[0];
    sat["fit_window_hi"] = fit_window[1];
    sat["saturation_window_lo"] = sat_window[0];
    sat["saturation_window_hi"] = sat_window[1];
    try {
        const SaturationFit sf = fit_saturation(gs, ls, {fit_window[0], fit_window[1]}, {sat_window[0], sat_window[1]});
        sat["status"] = "ok";
        sat["a"] = sf.a;
        sat["p"] = sf.p;
        sat["l_inf"] = sf.l_inf;
        sat["gamma_sat"] = sf.gamma_sat;
    } catch (const ParameterError& e) {
        sat["status"] = std::string("unavailable: ") + e.what();
        sat["a"] = kNaN;
        sat["p"] = kNaN;
        sat["l_inf"] = kNaN;
        sat["gamma_sat"] = kNaN;
    }
    write_atomic(out.add("saturation.json"), dump_flat_json(sat));

    man.result("points", rows.size());
    man.result("reused_points", reused);
    man.result("failed_points", failures);
    man.result("collapse_max_spread", spread);
    man.write(out, a.common.seed, digest);
    std::error_code ec;
    fs::remove(partial, ec);
    fs::remove(partial_meta, ec);
    if (failures > 0) {
        std::cerr << failures << " grid point(s) failed; see phase.csv\n";
        return kPartialSweep;
    }
    return kSuccess;
}

// ----------------------------------------------------------- two-site-check

struct TwoSiteArgs {
    Common common;
    std::vector<double> gammas = {0.0, 1.0, 2.0, 4.0};
    double t_max = 10.0;
    double dt = 0.01;
    double interval = 0.1;
};

int cmd_two_site(const TwoSiteArgs& a) {
    Manifest man("two-site-check");
    const int stride = std::max(1, static_cast<int>(std::lround(a.interval / a.dt)));
    OutputSet out(a.common.out);
    CsvWriter w(out.add("twosite.csv"), {"gamma", "t", "analytic", "numeric", "abs_diff"});
    double worst = 0.0;
    for (double g : a.gammas) {
        LindbladConfig cfg;
        cfg.spec = ChainSpec{2, 1.0, g};
        cfg.initial_sites = {1};
        cfg.dt = a.dt;
        cfg.t_max = a.t_max;
        cfg.record_stride = stride;
        cfg.record_densities = false;
        const LindbladRun run = evolve_lindblad(cfg);
        for (Index k = 0; k < run.times.size(); ++k) {
            const double t = run.times[k];
            const double exact = twosite_cn(g, t);
            const double num = run.coherence(k, 0);
            worst = std::max(worst, std::abs(exact - num));
            w.cell(g).cell(t).cell(exact).cell(num).cell(std::abs(exact - num));
            w.end_row();
        }
    }
    w.close();
    std::cout << "max |analytic - numeric| = " << format_double(worst) << "\n";
    man.param("gammas", join_doubles(a.gammas));
    man.param("t_max", a.t_max);
    man.param("dt", a.dt);
    man.param("record_interval", a.interval);
    man.result("max_abs_diff", worst);
    man.write(out, a.common.seed);
    return kSuccess;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Monitored single-particle chain: trajectories, master equation, coherence analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    app.set_config("--config", "", "INI/TOML file with option defaults; use a [subcommand] section (flags override it)");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Time-resolved densities and coherence (lindblad | trajectory)");
    add_common(s, sim.common);
    s->add_option("--mode", sim.mode, "lindblad | trajectory")->capture_default_str();
    s->add_option("--length", sim.length, "Number of sites")->required()->check(CLI::Range(2, 4096));
    s->add_option("--gamma", sim.gamma, "Measurement strength")->capture_default_str()->check(CLI::NonNegativeNumber);
    s->add_option("--hopping", sim.hopping, "Hopping J")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--inject", sim.inject, "Initial site(s), 1-based; default centre")->delimiter(',');
    s->add_option("--dt", sim.dt, "Time step (default min(0.05, 0.05/gamma))");
    s->add_option("--t-max", sim.t_max, "End time (default max(2L, 10/gamma))");
    s->add_option("--stride", sim.stride, "Record every n-th step")->capture_default_str()->check(CLI::PositiveNumber);
    s->add_option("--trajectories", sim.trajectories, "Trajectories (trajectory mode)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    s->add_option("--scheme", sim.scheme, "exponential | euler-maruyama")->capture_default_str();

    SpectrumArgs spec;
    auto* sp = app.add_subcommand("spectrum", "Single-particle superoperator spectrum and classification");
    add_common(sp, spec.common);
    sp->add_option("--length", spec.length, "Number of sites")->required()->check(CLI::Range(2, 60));
    sp->add_option("--gamma", spec.gammas, "Measurement strengths")->required()->delimiter(',');
    sp->add_option("--hopping", spec.hopping, "Hopping J")->capture_default_str()->check(CLI::PositiveNumber);
    sp->add_option("--tol-im", spec.tol_im, "Relative tolerance for real eigenvalues")->capture_default_str();

    CoherenceLengthArgs cl;
    auto* c = app.add_subcommand("coherence-length", "Simulate, take per-bond maxima, fit the decay length");
    add_common(c, cl.common);
    c->add_option("--mode", cl.mode, "lindblad | trajectory")->capture_default_str();
    c->add_option("--length", cl.length, "Number of sites")->check(CLI::Range(2, 4096));
    c->add_option("--gamma", cl.gamma, "Measurement strength")->capture_default_str()->check(CLI::NonNegativeNumber);
    c->add_option("--inject", cl.inject, "Injection site (default centre)");
    c->add_option("--trajectories", cl.trajectories, "Trajectories (trajectory mode)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    c->add_option("--stride", cl.stride, "Record every n-th step")->capture_default_str()->check(CLI::PositiveNumber);
    c->add_option("--scheme", cl.scheme, "exponential | euler-maruyama")->capture_default_str();
    c->add_flag("--self-test", cl.self_test, "Fit the bundled exponential dataset instead of simulating");
    add_fit_options(c, cl.fit);

    PhaseArgs ph;
    auto* p = app.add_subcommand("phase-diagram", "Coherence-length sweep, scaling collapse, saturation fit");
    add_common(p, ph.common);
    p->add_option("--mode", ph.mode, "lindblad | trajectory")->capture_default_str();
    p->add_option("--lengths", ph.lengths, "Chain lengths")->required()->delimiter(',');
    p->add_option("--gammas", ph.gammas, "Measurement strengths")->delimiter(',');
    p->add_option("--gamma-l", ph.gamma_l, "Values of gamma*L (gamma = value / L for each length)")->delimiter(',');
    p->add_option("--trajectories", ph.trajectories, "Trajectories per point (trajectory mode)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    p->add_option("--stride", ph.stride, "Record every n-th step")->capture_default_str()->check(CLI::PositiveNumber);
    p->add_option("--scheme", ph.scheme, "exponential | euler-maruyama")->capture_default_str();
    p->add_option("--fit-window", ph.fit_window, "Power-law gamma window lo,hi")->delimiter(',')->expected(2);
    p->add_option("--saturation-window", ph.saturation_window, "Saturation gamma window lo,hi")
        ->delimiter(',')
        ->expected(2);
    p->add_option("--max-gamma-l", ph.max_gamma_l, "Collapse quality uses bins with gamma*L <= value")
        ->capture_default_str();
    add_fit_options(p, ph.fit);

    TwoSiteArgs ts;
    auto* t = app.add_subcommand("two-site-check", "Two-site closed form against the master-equation integrator");
    add_common(t, ts.common);
    t->add_option("--gamma", ts.gammas, "Measurement strengths")->delimiter(',')->capture_default_str();
    t->add_option("--t-max", ts.t_max, "End time")->capture_default_str()->check(CLI::PositiveNumber);
    t->add_option("--dt", ts.dt, "Integrator step")->capture_default_str()->check(CLI::PositiveNumber);
    t->add_option("--record-interval", ts.interval, "Output spacing in time")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (s->parsed()) return cmd_simulate(sim);
        if (sp->parsed()) return cmd_spectrum(spec);
        if (c->parsed()) return cmd_coherence_length(cl);
        if (p->parsed()) return cmd_phase_diagram(ph);
        if (t->parsed()) return cmd_two_site(ts);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UnsupportedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kUsage;
}

}  // namespace mchain::cli
