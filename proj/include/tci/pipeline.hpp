#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tci/admissibility.hpp"
#include "tci/improvement.hpp"
#include "tci/io.hpp"
#include "tci/subsolution.hpp"
#include "tci/version.hpp"

namespace tci {

using nlohmann::json;

/// Tolerances of the run-report invariant suite. Fixed defaults match the
/// contracts of the individual modules; the config may tighten them.
struct Tolerances {
    double divergence = 1e-8;
    double weak_momentum = 1e-6;
    double weak_mass = 1e-8;
    double trace = 1e-12;
    double stationary_residual = 1e-8;
    double energy = 1e-6;
    double validate_match = 1e-12;
};

struct RunConfig {
    GridSpec grid;
    double density_mean = 2.0;
    struct DensityMode {
        std::array<int, 3> k{};
        double re = 0.0, im = 0.0;
    };
    std::vector<DensityMode> density_modes;
    PressureLaw law = PressureLaw::polytropic(1.0, 2.0);
    double chi_margin = 1.5;
    double chi_floor = 1.0;
    bool admissible = false;      // chi from the differential inequality
    int flat_iters = 2;
    int steps = 4;
    double cover_radius = 0.15625;
    int k_min = 6;
    int segment_samples = 48;
    double segment_shrink = 0.85;
    std::vector<double> theta_ladder = {1.0, 0.6, 0.36, 0.22, 0.13};
    std::uint64_t seed = 1;
    int dump_stride = 1;
    int probe_vector_tests = 8;
    int probe_scalar_tests = 4;
    int nonneg_tests = 32;
    Tolerances tol;
    std::string out_dir = "out";

    ImprovementOptions improvement_options() const {
        ImprovementOptions o;
        o.cover.s = cover_radius;
        o.k_min = k_min;
        o.theta_ladder = theta_ladder;
        o.segment.samples = segment_samples;
        o.segment.shrink = segment_shrink;
        return o;
    }
};

inline RunConfig parse_config(const json& j) {
    RunConfig c;
    try {
        const auto& g = j.at("grid");
        c.grid.n = g.at("n").get<int>();
        c.grid.N = g.at("N").get<int>();
        c.grid.dt = g.at("dt").get<double>();
        c.grid.T = g.at("T").get<double>();
        c.grid.validate();

        const auto& d = j.at("density");
        c.density_mean = d.at("mean").get<double>();
        if (!(c.density_mean > 0.0))
            throw std::invalid_argument("density.mean must be positive");
        for (const auto& m : d.value("modes", json::array())) {
            RunConfig::DensityMode mode;
            auto kv = m.at("k");
            if (static_cast<int>(kv.size()) != c.grid.n)
                throw std::invalid_argument("density.modes[].k must have n entries");
            for (int a = 0; a < c.grid.n; ++a) mode.k[a] = kv.at(a).get<int>();
            mode.re = m.value("re", 0.0);
            mode.im = m.value("im", 0.0);
            c.density_modes.push_back(mode);
        }

        const auto& p = j.at("pressure");
        std::string type = p.at("type").get<std::string>();
        if (type == "polytropic")
            c.law = PressureLaw::polytropic(p.at("k").get<double>(), p.at("gamma").get<double>());
        else if (type == "tabulated")
            c.law = PressureLaw::tabulated(p.at("rho").get<std::vector<double>>(),
                                           p.at("p").get<std::vector<double>>());
        else
            throw std::invalid_argument("pressure.type must be polytropic or tabulated");

        if (j.contains("chi")) {
            const auto& ch = j.at("chi");
            c.chi_margin = ch.value("margin", c.chi_margin);
            c.chi_floor = ch.value("floor", c.chi_floor);
            c.admissible = ch.value("admissible", c.admissible);
        }
        if (j.contains("iteration")) {
            const auto& it = j.at("iteration");
            c.flat_iters = it.value("flat_iters", c.flat_iters);
            c.steps = it.value("steps", c.steps);
            c.cover_radius = it.value("cover_radius", c.cover_radius);
            c.k_min = it.value("k_min", c.k_min);
            c.segment_samples = it.value("segment_samples", c.segment_samples);
            c.segment_shrink = it.value("segment_shrink", c.segment_shrink);
            if (it.contains("theta_ladder"))
                c.theta_ladder = it.at("theta_ladder").get<std::vector<double>>();
            if (!it.contains("seed"))
                throw std::invalid_argument("iteration.seed is mandatory");
            c.seed = it.at("seed").get<std::uint64_t>();
        } else {
            throw std::invalid_argument("iteration section (with seed) is mandatory");
        }
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            c.tol.divergence = t.value("divergence", c.tol.divergence);
            c.tol.weak_momentum = t.value("weak_momentum", c.tol.weak_momentum);
            c.tol.weak_mass = t.value("weak_mass", c.tol.weak_mass);
            c.tol.trace = t.value("trace", c.tol.trace);
            c.tol.energy = t.value("energy", c.tol.energy);
        }
        if (j.contains("output")) {
            const auto& o = j.at("output");
            c.out_dir = o.value("dir", c.out_dir);
            c.dump_stride = o.value("dump_stride", c.dump_stride);
        }
        if (j.contains("tests")) {
            const auto& t = j.at("tests");
            c.probe_vector_tests = t.value("vector", c.probe_vector_tests);
            c.probe_scalar_tests = t.value("scalar", c.probe_scalar_tests);
            c.nonneg_tests = t.value("nonneg", c.nonneg_tests);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j;
    in >> j;
    return parse_config(j);
}

/// Density from its finite Fourier description:
/// rho0(x) = mean + sum_modes 2 Re[(re + i im) exp(2 pi i k.x)].
inline ScalarGridField build_density(const RunConfig& c) {
    ScalarGridField rho(c.grid);
    for (std::size_t i = 0; i < c.grid.npoints(); ++i) {
        auto x = c.grid.point(i);
        double v = c.density_mean;
        for (const auto& m : c.density_modes) {
            double ph = 0.0;
            for (int a = 0; a < c.grid.n; ++a) ph += m.k[a] * x[a];
            ph *= 2.0 * M_PI;
            v += 2.0 * (m.re * std::cos(ph) - m.im * std::sin(ph));
        }
        rho.v[i] = v;
    }
    for (double v : rho.v)
        if (!(v > 0.0))
            throw std::invalid_argument("density: Fourier description is not positive everywhere");
    return rho;
}

// ---------------------------------------------------------------------------
// Invariant suite over a state; the same rows are produced by the run and by
// validate-from-dumps, so replay comparisons are exact.

struct ResidualRow {
    std::string name;
    double value = 0.0;
    double tol = 0.0;
    bool larger_is_better = false;  // for margins
    bool pass() const { return larger_is_better ? value > tol : value <= tol; }
};

inline json row_to_json(const ResidualRow& r) {
    return json{{"name", r.name}, {"value", r.value}, {"tol", r.tol},
                {"larger_is_better", r.larger_is_better}, {"pass", r.pass()}};
}

inline std::vector<ResidualRow> state_residual_table(const SubsolutionState& st,
                                                     const RunConfig& cfg) {
    Rng rng(cfg.seed);
    Rng vec_rng = rng.fork(101), sc_rng = rng.fork(102);
    auto vtests = build_probe_vector_tests(st.grid.n, st.t_begin, st.t_end(),
                                           cfg.probe_vector_tests, vec_rng);
    auto stests = build_probe_scalar_tests(st.grid.n, st.t_begin, st.t_end(),
                                           cfg.probe_scalar_tests, sc_rng);
    std::vector<ResidualRow> rows;
    rows.push_back({"divergence_sup", st.div_residual_max(), cfg.tol.divergence, false});
    rows.push_back({"weak_momentum_max", st.weak_momentum_residual_max(vtests),
                    cfg.tol.weak_momentum, false});
    rows.push_back({"weak_mass_max", st.weak_mass_residual_max(stests), cfg.tol.weak_mass, false});
    rows.push_back({"trace_sup", st.trace_violation_max(), cfg.tol.trace, false});
    rows.push_back({"hint_margin_min", st.hint_margin_min(), 0.0, true});
    rows.push_back({"deficit", st.deficit(), 0.0, true});
    rows.push_back({"momentum_mean_sup", st.mean_momentum_max(), 1e-10, false});
    return rows;
}

/// The state exactly as its dump represents it (subsampled in time when the
/// dump stride exceeds one); the reported residual table is computed on this.
inline SubsolutionState dumped_view(const SubsolutionState& st, int stride) {
    if (stride <= 1) return st;
    GridSpec g = st.grid;
    g.dt = st.grid.dt * stride;
    int nt_out = (st.nt - 1) / stride + 1;
    SubsolutionState out(g, st.rho0, st.p0, st.chi, st.t_begin, (nt_out - 1) * g.dt);
    const std::size_t np = g.npoints();
    for (int s = 0; s < nt_out; ++s) {
        int src = s * stride;
        for (int a = 0; a < g.n; ++a)
            std::copy(st.m_slice(a, src), st.m_slice(a, src) + np, out.m_slice(a, s));
        for (int k = 0; k < sym_size(g.n); ++k)
            std::copy(st.U_slice(k, src), st.U_slice(k, src) + np, out.U_slice(k, s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline phases. Each phase writes its artifacts under cfg.out_dir and
// merges a section into report.json (timings go to a sidecar file so the
// report and CSVs replay byte-identically for a fixed config and seed).

namespace detail {

inline json load_report(const std::string& dir) {
    std::ifstream in(dir + "/report.json");
    if (!in) return json::object();
    json j;
    in >> j;
    return j;
}

inline void save_report(const std::string& dir, const json& j) {
    std::ofstream out(dir + "/report.json");
    out << j.dump(2) << "\n";
}

inline void append_timing(const std::string& dir, const std::string& phase, double ms) {
    bool fresh = !std::filesystem::exists(dir + "/timings.csv");
    std::ofstream out(dir + "/timings.csv", std::ios::app);
    if (fresh) out << "phase,wall_ms\n";
    out << phase << "," << fmt_g17(ms) << "\n";
}

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

} // namespace detail

struct PipelineContext {
    RunConfig cfg;
    ScalarGridField rho0;
    StationarySubsolution stationary;
    AdmissibilityConstants constants;
    double chi0 = 0.0;
    ChiFn chi = ChiFn::constant(1.0);
    std::optional<ChiProfile> profile;
    double maximal_admissible_time = 0.0;
};

/// Deterministic derivation of everything the config implies before any
/// field iteration: density, stationary pair, constants, chi profile.
inline PipelineContext prepare_context(const RunConfig& cfg) {
    PipelineContext ctx;
    ctx.cfg = cfg;
    ctx.rho0 = build_density(cfg);
    ctx.stationary = build_stationary_subsolution(ctx.rho0, cfg.law);
    ctx.constants = compute_constants(ctx.rho0, cfg.law);
    const int n = cfg.grid.n;
    double lam = ctx.stationary.lambda_tilde;
    ctx.chi0 = choose_chi(lam, cfg.chi_margin, cfg.chi_floor, n);
    if (cfg.admissible) {
        ChiProfile prof = chi_solve(ctx.chi0, ctx.constants, cfg.grid.T);
        double thr = n * lam;
        double tbar = ctx.chi0 > thr ? maximal_time(prof, thr)
                                     : throw std::runtime_error("chi0 <= n lambda");
        ctx.maximal_admissible_time = std::min(tbar, cfg.grid.T);
        // the flat phase needs the profile on [-T/2, 0): verify it extends
        prof.value(-cfg.grid.T / 2.0);
        ctx.profile = prof;
        ctx.chi = ChiFn::ode(prof);
    } else {
        ctx.chi = ChiFn::constant(ctx.chi0);
        ctx.maximal_admissible_time = cfg.grid.T;  // constant chi never crosses the threshold
    }
    return ctx;
}

inline json gain_report_to_json(const GainReport& r) {
    return json{{"l2_gain", r.l2_gain},
                {"deficit_before", r.deficit_before},
                {"deficit_after", r.deficit_after},
                {"k_used", r.k_used},
                {"hint_margin_min", r.hint_margin_min},
                {"weak_drift", r.weak_drift},
                {"theta_min", r.theta_min},
                {"balls_accepted", r.balls_accepted},
                {"balls_total", r.balls_total},
                {"cover_lhs", r.cover_lhs},
                {"cover_rhs", r.cover_rhs},
                {"radius", r.radius}};
}

/// Phase 1: stationary pair, flat approximation on [-T/2, T/2], reflection to
/// the time-symmetric data on [0, T]. Writes state0.wfld, flat.wfld,
/// rho0.wfld and the subsolution section of the report.
inline int run_subsolution_phase(const RunConfig& cfg) {
    detail::Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    PipelineContext ctx = prepare_context(cfg);
    Rng master(cfg.seed);
    Rng flat_rng = master.fork(11);

    ImprovementOptions opts = cfg.improvement_options();
    double Thalf = cfg.grid.T / 2.0;
    auto flat = approximate_flat_subsolution(ctx.stationary, ctx.chi, Thalf, cfg.flat_iters,
                                             flat_rng, opts);
    auto data0 = time_symmetric_data(flat.state, Thalf);

    write_wfld(cfg.out_dir + "/rho0.wfld", scalar_to_dump(ctx.rho0));
    write_wfld(cfg.out_dir + "/flat.wfld", state_to_dump(dumped_view(flat.state, cfg.dump_stride)));
    write_wfld(cfg.out_dir + "/state0.wfld", state_to_dump(dumped_view(data0, cfg.dump_stride)));

    json rep = detail::load_report(cfg.out_dir);
    rep["version"] = version_string;
    rep["seed"] = cfg.seed;
    json sub;
    sub["sign_branch"] = ctx.stationary.sign_branch;
    sub["lambda_tilde"] = ctx.stationary.lambda_tilde;
    sub["chi0"] = ctx.chi0;
    sub["stationary_residual_sup"] = ctx.stationary.residual_sup;
    sub["symbol_residual"] = ctx.stationary.symbol_residual;
    sub["stationary_pass"] = ctx.stationary.residual_sup <= cfg.tol.stationary_residual;
    sub["flat_iters_done"] = flat.iters_done;
    sub["alphas"] = flat.alphas;
    sub["slice0_deficits"] = flat.slice0_deficits;
    json freps = json::array();
    double f_min = std::numeric_limits<double>::infinity();
    for (const auto& r : flat.reports) {
        freps.push_back(gain_report_to_json(r));
        if (r.balls_accepted > 0) f_min = std::min(f_min, r.f_ratio_min);
    }
    sub["reports"] = freps;
    sub["f_ratio_min"] = std::isfinite(f_min) ? f_min : 0.0;
    sub["initial_deficit_t0"] = data0.slice_deficit(0);
    rep["subsolution"] = sub;
    detail::save_report(cfg.out_dir, rep);
    detail::append_timing(cfg.out_dir, "subsolution", watch.ms());
    return ctx.stationary.residual_sup <= cfg.tol.stationary_residual ? 0 : 1;
}

/// Phase 2: the improvement iteration on [0, T] from state0.wfld (or a
/// resume dump). Writes state.wfld, steps.csv and the iterate section.
inline int run_iterate_phase(const RunConfig& cfg, const std::string& resume = "") {
    detail::Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    PipelineContext ctx = prepare_context(cfg);
    ChiFn chi_run = ctx.chi.reflected(cfg.grid.T / 2.0);

    std::string src = resume.empty() ? cfg.out_dir + "/state0.wfld" : resume;
    ScalarGridField p0(cfg.grid);
    for (std::size_t i = 0; i < cfg.grid.npoints(); ++i)
        p0.v[i] = cfg.law.value(ctx.rho0.v[i]);
    auto st = dump_to_state(read_wfld(src), ctx.rho0, p0, chi_run,
                            cfg.grid.dt * cfg.dump_stride);

    Rng master(cfg.seed);
    Rng it_rng = master.fork(22);
    auto reports = iterate(st, cfg.steps, it_rng, cfg.improvement_options());

    write_wfld(cfg.out_dir + "/state.wfld", state_to_dump(dumped_view(st, 1)));

    CsvWriter csv(cfg.out_dir + "/steps.csv",
                  {"step", "deficit", "gain", "k_used", "hint_margin_min", "weak_drift",
                   "theta_min", "balls_accepted", "balls_total", "cover_lhs", "cover_rhs"});
    bool monotone = true;
    double beta_min = std::numeric_limits<double>::infinity();
    double f_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        csv.row({std::to_string(i + 1), fmt_g17(r.deficit_after), fmt_g17(r.l2_gain),
                 std::to_string(r.k_used), fmt_g17(r.hint_margin_min), fmt_g17(r.weak_drift),
                 fmt_g17(r.theta_min), std::to_string(r.balls_accepted),
                 std::to_string(r.balls_total), fmt_g17(r.cover_lhs), fmt_g17(r.cover_rhs)});
        if (!(r.deficit_after < r.deficit_before)) monotone = false;
        double beta = r.l2_gain / (r.deficit_before * r.deficit_before);
        beta_min = std::min(beta_min, beta);
        if (r.balls_accepted > 0) f_min = std::min(f_min, r.f_ratio_min);
    }

    auto table = state_residual_table(st, cfg);
    json rep = detail::load_report(cfg.out_dir);
    json it;
    it["steps"] = cfg.steps;
    json jreps = json::array();
    for (const auto& r : reports) jreps.push_back(gain_report_to_json(r));
    it["reports"] = jreps;
    it["deficit_monotone"] = monotone;
    it["beta_impl"] = reports.empty() ? 0.0 : beta_min;
    it["f_ratio_min"] = std::isfinite(f_min) ? f_min : 0.0;
    json jtable = json::array();
    bool all_pass = monotone;
    for (const auto& row : table) {
        jtable.push_back(row_to_json(row));
        all_pass = all_pass && row.pass();
    }
    it["residual_table"] = jtable;
    it["pass"] = all_pass;
    rep["iterate"] = it;
    detail::save_report(cfg.out_dir, rep);
    detail::append_timing(cfg.out_dir, "iterate", watch.ms());
    return all_pass ? 0 : 1;
}

/// Phase 3: admissibility of a state dump under the chi profile the config
/// implies: constants, maximal time, energy residuals.
inline int run_admissibility_phase(const RunConfig& cfg, const std::string& state_path = "") {
    detail::Stopwatch watch;
    std::filesystem::create_directories(cfg.out_dir);
    PipelineContext ctx = prepare_context(cfg);
    ChiFn chi_run = ctx.chi.reflected(cfg.grid.T / 2.0);

    std::string src = state_path;
    if (src.empty()) {
        src = cfg.out_dir + "/state.wfld";
        if (!std::filesystem::exists(src)) src = cfg.out_dir + "/state0.wfld";
    }
    ScalarGridField p0(cfg.grid);
    for (std::size_t i = 0; i < cfg.grid.npoints(); ++i)
        p0.v[i] = cfg.law.value(ctx.rho0.v[i]);
    double dt_expect = cfg.grid.dt;
    {
        auto probe = read_wfld(src);
        if (probe.times.size() >= 2) dt_expect = probe.times[1] - probe.times[0];
    }
    auto st = dump_to_state(read_wfld(src), ctx.rho0, p0, chi_run, dt_expect);

    Rng master(cfg.seed);
    Rng nn_rng = master.fork(33);
    auto tests = build_nonneg_tests(cfg.grid.n, st.t_begin, st.t_end(), cfg.nonneg_tests, nn_rng);
    auto res = energy_residual(st, chi_run, cfg.law, tests);

    // two-method cross-check of the chi profile
    double rk4_err = 0.0, tbar_err = 0.0;
    if (ctx.profile) {
        const auto& prof = *ctx.profile;
        double t_end = 0.9 * std::min(prof.extinction_time(), cfg.grid.T);
        double step = 1e-4;
        auto tab = chi_rk4(prof, t_end, step);
        for (std::size_t i = 0; i < tab.size(); ++i) {
            double t = static_cast<double>(i) * step;
            double cf = prof.value(t);
            rk4_err = std::max(rk4_err, std::abs(tab[i] - cf) / std::max(1e-12, std::abs(cf)));
        }
        double thr = cfg.grid.n * ctx.stationary.lambda_tilde;
        if (ctx.chi0 > thr && thr > 0.0) {
            double closed = maximal_time(prof, thr);
            double bis = maximal_time_bisect(prof, thr, 10.0 * closed + 1.0);
            tbar_err = std::abs(closed - bis);
        }
    }

    json rep = detail::load_report(cfg.out_dir);
    json adm;
    adm["c0"] = ctx.constants.c0;
    adm["c1"] = ctx.constants.c1;
    adm["c2"] = ctx.constants.c2;
    adm["C1"] = ctx.constants.C1;
    adm["C2"] = ctx.constants.C2;
    adm["chi_mode"] = cfg.admissible ? "ode" : "constant";
    adm["chi0"] = ctx.chi0;
    if (ctx.profile) {
        adm["chi_profile"] = json{{"chi0", ctx.profile->chi0},
                                  {"C1", ctx.profile->C1},
                                  {"C2", ctx.profile->C2},
                                  {"t_max", ctx.profile->t_max},
                                  {"branch", ChiProfile::branch_name(ctx.profile->branch())}};
        adm["rk4_vs_closed_form"] = rk4_err;
        adm["maximal_time_bisect_err"] = tbar_err;
    }
    adm["maximal_time"] = ctx.maximal_admissible_time;
    adm["energy_worst_reduced"] = res.worst_reduced;
    adm["energy_worst_full"] = res.worst_full;
    adm["energy_pointwise_margin"] = res.pointwise_margin;
    bool pass = !cfg.admissible || res.worst_reduced <= cfg.tol.energy;
    adm["pass"] = pass;
    rep["admissibility"] = adm;
    detail::save_report(cfg.out_dir, rep);
    detail::append_timing(cfg.out_dir, "admissibility", watch.ms());
    return pass ? 0 : 1;
}

/// Recompute the invariant suite from raw dumps alone and compare with the
/// recorded residual table. Nothing in memory is trusted.
inline int run_validate_phase(const RunConfig& cfg, const std::string& state_path = "") {
    detail::Stopwatch watch;
    PipelineContext ctx = prepare_context(cfg);
    ChiFn chi_run = ctx.chi.reflected(cfg.grid.T / 2.0);
    std::string src = state_path.empty() ? cfg.out_dir + "/state.wfld" : state_path;
    ScalarGridField p0(cfg.grid);
    for (std::size_t i = 0; i < cfg.grid.npoints(); ++i)
        p0.v[i] = cfg.law.value(ctx.rho0.v[i]);
    auto dump = read_wfld(src);
    double dt_expect = dump.times.size() >= 2 ? dump.times[1] - dump.times[0] : cfg.grid.dt;
    auto st = dump_to_state(dump, ctx.rho0, p0, chi_run, dt_expect);
    auto table = state_residual_table(st, cfg);

    json rep = detail::load_report(cfg.out_dir);
    bool match = true, all_pass = true;
    json rows = json::array();
    for (const auto& row : table) {
        rows.push_back(row_to_json(row));
        all_pass = all_pass && row.pass();
    }
    if (rep.contains("iterate") && rep["iterate"].contains("residual_table")) {
        const auto& recorded = rep["iterate"]["residual_table"];
        if (recorded.size() == table.size()) {
            for (std::size_t i = 0; i < table.size(); ++i) {
                double rec = recorded[i].at("value").get<double>();
                if (std::abs(rec - table[i].value) > cfg.tol.validate_match) match = false;
            }
        } else {
            match = false;
        }
    }
    json val;
    val["residual_table"] = rows;
    val["matches_report"] = match;
    val["pass"] = all_pass && match;
    rep["validate"] = val;
    detail::save_report(cfg.out_dir, rep);
    detail::append_timing(cfg.out_dir, "validate", watch.ms());
    return (all_pass && match) ? 0 : 1;
}

/// Summarize report.json; exit code reflects every recorded pass flag.
inline int run_report_phase(const RunConfig& cfg, std::ostream& os) {
    json rep = detail::load_report(cfg.out_dir);
    if (rep.empty()) {
        os << "no report found in " << cfg.out_dir << "\n";
        return 1;
    }
    bool all = true;
    auto flag = [&](const char* section, const char* key) {
        if (rep.contains(section) && rep[section].contains(key)) {
            bool p = rep[section][key].get<bool>();
            all = all && p;
            os << section << ": " << (p ? "pass" : "FAIL") << "\n";
        }
    };
    os << "tci " << rep.value("version", "?") << ", seed " << rep.value("seed", 0ull) << "\n";
    if (rep.contains("subsolution")) {
        const auto& s = rep["subsolution"];
        os << "subsolution: sign branch " << s.value("sign_branch", 0) << ", lambda_tilde "
           << s.value("lambda_tilde", 0.0) << ", chi0 " << s.value("chi0", 0.0)
           << ", residual " << s.value("stationary_residual_sup", 0.0) << "\n";
    }
    flag("subsolution", "stationary_pass");
    if (rep.contains("iterate")) {
        const auto& s = rep["iterate"];
        os << "iterate: beta_impl " << s.value("beta_impl", 0.0) << ", f_ratio_min "
           << s.value("f_ratio_min", 0.0) << "\n";
    }
    flag("iterate", "pass");
    if (rep.contains("admissibility")) {
        const auto& s = rep["admissibility"];
        os << "admissibility: T_bar " << s.value("maximal_time", 0.0) << ", worst energy residual "
           << s.value("energy_worst_reduced", 0.0) << "\n";
    }
    flag("admissibility", "pass");
    flag("validate", "pass");
    os << (all ? "ALL PASS" : "FAILURES PRESENT") << "\n";
    return all ? 0 : 1;
}

} // namespace tci
