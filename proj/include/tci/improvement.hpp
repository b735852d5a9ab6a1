#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tci/potential.hpp"
#include "tci/subsolution.hpp"
#include "tci/wave.hpp"

namespace tci {

// The improvement step: pick admissible segments at the centers of a family
// of pairwise disjoint space-time balls, add the corresponding localized
// waves, and keep the state inside the hyperinterior at every grid point.
// The oscillation index k is searched upward by doubling under the per-axis
// Nyquist cap; because the grid caps k below the threshold the continuum
// argument provides, the used fraction theta of the segment half-length is
// backed off on a ladder until the pointwise verification passes. Gains stay
// proportional to theta^2 * deficit^2 and every accepted step decreases the
// deficit.

struct Ball {
    std::array<double, 4> center{};  // (x_1..x_n, t)
    double r = 0.0;
    std::size_t center_idx = 0;      // flat spatial index of the snapped center
    int center_slice = 0;
};

struct CoverResult {
    std::vector<Ball> balls;
    double lhs = 0.0;   // 2 sum_j deficit(center_j)^2 |B_j|
    double rhs = 0.0;   // integral of deficit^2
    bool ok = false;
    double radius = 0.0;
    double roam = 0.0;
};

enum class CoverPolicy { domain, slab };

struct CoverOptions {
    double s = 0.15625;           // requested radius bound
    CoverPolicy policy = CoverPolicy::domain;
    // slab policy: balls centered on the time slice slab_t, spatial centers
    // inside [margin, 1 - margin]^n, time half-width capped by slab_halfwidth
    double slab_t = 0.0;
    double slab_halfwidth = 0.0;
    double slab_margin = 0.0;
};

namespace detail {

inline double quantize_down(double v, double step) {
    return std::floor(v / step + 1e-9) * step;
}

/// Greedy center choice: among candidate points of a cell, the one with the
/// largest deficit (ties to the lowest index). Candidates are grid points
/// within the roam box around the cell center.
inline void pick_center(const SubsolutionState& st, double roam,
                        const std::array<double, 4>& cell_center, int slice_lo, int slice_hi,
                        std::array<double, 4>& out_center, std::size_t& out_idx, int& out_slice) {
    const GridSpec& g = st.grid;
    const int n = g.n;
    const double h = g.h();
    std::array<int, 3> base{};
    for (int a = 0; a < n; ++a) base[a] = static_cast<int>(std::llround(cell_center[a] / h));
    int reach = std::max(0, static_cast<int>(std::floor(roam / h + 1e-9)));
    int t_reach = std::max(0, static_cast<int>(std::floor(roam / g.dt + 1e-9)));
    int s_base = st.slice_of(cell_center[n]);
    double best = -1.0;
    for (int ds = -t_reach; ds <= t_reach; ++ds) {
        int s = s_base + ds;
        if (s < slice_lo || s > slice_hi) continue;
        std::array<int, 3> iv{};
        auto scan = [&](auto&& self, int axis) -> void {
            if (axis == n) {
                std::size_t idx = g.index(iv);
                double d = st.deficit_at(s, idx);
                if (d > best) {
                    best = d;
                    out_idx = idx;
                    out_slice = s;
                }
                return;
            }
            for (int dd = -reach; dd <= reach; ++dd) {
                iv[axis] = base[axis] + dd;
                self(self, axis + 1);
            }
        };
        scan(scan, 0);
    }
    auto x = g.point(out_idx);
    for (int a = 0; a < n; ++a) out_center[a] = x[a];
    out_center[n] = st.time_of(out_slice);
}

} // namespace detail

/// Pairwise disjoint balls with snapped centers and quantized radii such that
/// 2 sum_j deficit(c_j)^2 |B_j| >= integral of deficit^2 over the covered
/// domain. Centers roam greedily toward large deficits once the plain lattice
/// fails the condition.
inline CoverResult ball_cover(const SubsolutionState& st, const CoverOptions& opts, Rng& rng) {
    const GridSpec& g = st.grid;
    const int n = g.n;
    const double h = g.h();
    CoverResult best_fail;

    // integral of deficit^2 over the relevant domain
    double rhs = 0.0;
    if (opts.policy == CoverPolicy::domain) {
        for (int s = 0; s < st.nt; ++s) {
            double w = (s == 0 || s == st.nt - 1) ? 0.5 : 1.0;
            double acc = 0.0;
            for (std::size_t i = 0; i < g.npoints(); ++i) {
                double d = st.deficit_at(s, i);
                acc += d * d;
            }
            rhs += w * acc / static_cast<double>(g.npoints());
        }
        rhs *= g.dt;
    } else {
        int s0 = st.slice_of(opts.slab_t);
        double a = opts.slab_margin;
        double acc = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < g.npoints(); ++i) {
            auto x = g.point(i);
            bool in = true;
            for (int ax = 0; ax < n; ++ax)
                if (x[ax] < a || x[ax] > 1.0 - a) in = false;
            if (!in) continue;
            double d = st.deficit_at(s0, i);
            acc += d * d;
            ++cnt;
        }
        (void)cnt;
        rhs = acc * std::pow(h, n);
    }

    for (double roam_frac : {0.0, 0.25}) {
        CoverResult res;
        std::vector<Ball> balls;
        if (opts.policy == CoverPolicy::domain) {
            int mx = std::max(1, static_cast<int>(std::floor(1.0 / (2.0 * opts.s))));
            double cell = 1.0 / mx;
            int mt = std::max(1, static_cast<int>(std::floor(st.grid.T / cell)));
            double roam = detail::quantize_down(roam_frac * cell / 2.0, h);
            double r = detail::quantize_down(cell / 2.0 - roam - std::max(h, g.dt), h);
            if (r < 3.0 * h) continue;
            // jitter: spatial offsets wrap on the torus; the time offset uses
            // the leftover strip so balls always fit in [t_begin, t_end]
            std::array<double, 4> off{};
            for (int a = 0; a < n; ++a) off[a] = detail::quantize_down(rng.uniform() * cell, h);
            double leftover = (st.t_end() - st.t_begin) - mt * cell;
            off[n] = detail::quantize_down(rng.uniform() * std::max(0.0, leftover), g.dt);
            std::array<int, 3> cidx{};
            auto emit = [&](auto&& self, int axis) -> void {
                if (axis == n) {
                    for (int q = 0; q < mt; ++q) {
                        std::array<double, 4> cc{};
                        for (int a = 0; a < n; ++a) cc[a] = off[a] + (cidx[a] + 0.5) * cell;
                        cc[n] = st.t_begin + off[n] + (q + 0.5) * cell;
                        if (cc[n] - r < st.t_begin || cc[n] + r > st.t_end()) continue;
                        Ball b;
                        b.r = r;
                        detail::pick_center(st, roam, cc, 0, st.nt - 1, b.center, b.center_idx,
                                            b.center_slice);
                        if (b.center[n] - r < st.t_begin || b.center[n] + r > st.t_end()) continue;
                        balls.push_back(b);
                    }
                    return;
                }
                for (int i = 0; i < mx; ++i) {
                    cidx[axis] = i;
                    self(self, axis + 1);
                }
            };
            emit(emit, 0);
            res.roam = roam;
            res.radius = r;
        } else {
            double a = opts.slab_margin;
            double side = 1.0 - 2.0 * a;
            int mx = std::max(1, static_cast<int>(std::floor(side / (2.0 * opts.s))));
            double cell = side / mx;
            double roam = detail::quantize_down(roam_frac * cell / 2.0, h);
            double r = detail::quantize_down(
                std::min(cell / 2.0 - roam - h, opts.slab_halfwidth), h);
            if (r < 3.0 * h) continue;
            int s0 = st.slice_of(opts.slab_t);
            std::array<double, 4> off{};
            for (int ax = 0; ax < n; ++ax)
                off[ax] = detail::quantize_down(rng.uniform() * (side - mx * cell), h);
            std::array<int, 3> cidx{};
            auto emit = [&](auto&& self, int axis) -> void {
                if (axis == n) {
                    std::array<double, 4> cc{};
                    for (int ax = 0; ax < n; ++ax) cc[ax] = a + off[ax] + (cidx[ax] + 0.5) * cell;
                    cc[n] = opts.slab_t;
                    Ball b;
                    b.r = r;
                    detail::pick_center(st, roam, cc, s0, s0, b.center, b.center_idx, b.center_slice);
                    // keep the roamed center inside the subcube
                    auto x = st.grid.point(b.center_idx);
                    for (int ax = 0; ax < n; ++ax)
                        if (x[ax] < a + r || x[ax] > 1.0 - a - r) return;
                    balls.push_back(b);
                    return;
                }
                for (int i = 0; i < mx; ++i) {
                    cidx[axis] = i;
                    self(self, axis + 1);
                }
            };
            emit(emit, 0);
            res.roam = roam;
            res.radius = r;
        }

        double lhs = 0.0;
        for (const auto& b : balls) {
            double d = st.deficit_at(b.center_slice, b.center_idx);
            double vol = opts.policy == CoverPolicy::domain
                             ? (n == 2 ? 4.0 / 3.0 * M_PI * b.r * b.r * b.r
                                       : M_PI * M_PI / 2.0 * b.r * b.r * b.r * b.r)
                             : M_PI * b.r * b.r;  // slab: slice measure of the ball
            lhs += 2.0 * d * d * vol;
        }
        res.balls = std::move(balls);
        res.lhs = lhs;
        res.rhs = rhs;
        res.ok = lhs >= rhs;
        if (res.ok) return res;
        if (best_fail.balls.empty() || res.lhs > best_fail.lhs) best_fail = res;
    }
    return best_fail;  // ok = false; caller decides (shrink s or fail)
}

struct GainReport {
    double l2_gain = 0.0;
    double deficit_before = 0.0, deficit_after = 0.0;
    int k_used = 0;              // largest accepted oscillation index
    double hint_margin_min = 0.0;
    double weak_drift = 0.0;     // max |pairing of the added waves| over probes
    double theta_min = 1.0;      // smallest accepted amplitude fraction
    int balls_accepted = 0, balls_total = 0;
    double cover_lhs = 0.0, cover_rhs = 0.0;
    double f_ratio_min = std::numeric_limits<double>::infinity();
    double radius = 0.0;
    double slice0_gain = 0.0;    // slice-level gain at the slab time (slab policy)
};

struct ImprovementOptions {
    CoverOptions cover;
    int k_min = 6;
    std::vector<double> theta_ladder = {1.0, 0.6, 0.36, 0.22, 0.13};
    SegmentSearchOptions segment;
    CutoffProfile profile = CutoffProfile::plateau_quartic;
    double deficit_skip = 1e-9;     // skip balls with no local deficit left
    double accept_slack = 1e-9;     // required strict margin (relative to chi/n)
    int probe_tests = 4;            // drift probes per step
};

/// One improvement step. Throws when the cover condition is unattainable at
/// the requested radius (signals s too large for the state's roughness).
inline GainReport improvement_step(SubsolutionState& st, Rng& rng, const ImprovementOptions& opts) {
    const GridSpec& g = st.grid;
    const int n = g.n;
    const std::size_t np = g.npoints();

    GainReport rep;
    rep.deficit_before = st.deficit();
    double l2_before = st.momentum_l2_sq();
    double slice0_before = 0.0;
    if (opts.cover.policy == CoverPolicy::slab)
        slice0_before = st.slice_deficit(st.slice_of(opts.cover.slab_t));

    auto cover = ball_cover(st, opts.cover, rng);
    if (!cover.ok)
        throw std::runtime_error("improvement_step: cover condition unattainable at radius " +
                                 std::to_string(opts.cover.s));
    rep.cover_lhs = cover.lhs;
    rep.cover_rhs = cover.rhs;
    rep.balls_total = static_cast<int>(cover.balls.size());
    rep.radius = cover.radius;

    // fixed probe tests for the weak drift of this step
    Rng probe_rng = rng.fork(0xd41f7);
    auto probes = build_probe_vector_tests(n, st.t_begin, st.t_end(), opts.probe_tests, probe_rng);
    std::vector<std::array<std::vector<double>, 3>> probe_grids(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        for (int a = 0; a < n; ++a) {
            probe_grids[p][a].resize(np);
            for (std::size_t i = 0; i < np; ++i)
                probe_grids[p][a][i] = probes[p].comp[a].value(g.point(i));
        }
    }
    std::vector<double> drift(probes.size(), 0.0);

    for (const auto& ball : cover.balls) {
        double t_c = st.time_of(ball.center_slice);
        auto params = st.params_at(t_c, ball.center_idx);
        double local_deficit = st.deficit_at(ball.center_slice, ball.center_idx);
        if (local_deficit <= opts.deficit_skip) continue;

        StateTriple z;
        z.n = n;
        z.m = st.m_at(ball.center_slice, ball.center_idx);
        z.U = st.U_at(ball.center_slice, ball.center_idx);
        z.q = params.q_level();
        if (in_hull(params, z) != HullPosition::inside_hint) continue;

        auto seg = admissible_segment(params, z, rng, opts.segment);
        if (!seg) continue;

        OperatorSpec op;
        try {
            op = potential_operator(seg->c, seg->d, params.rho, n);
        } catch (const std::exception&) {
            continue;
        }
        int k_cap = frequency_cap(op, g.N);
        if (k_cap < opts.k_min) continue;

        int s_lo = std::max(0, st.slice_of(ball.center[n] - ball.r) );
        int s_hi = std::min(st.nt - 1, st.slice_of(ball.center[n] + ball.r));

        WaveSpec spec;
        spec.c = seg->c;
        spec.d = seg->d;
        spec.rho = params.rho;
        spec.amp = seg->half_param;
        spec.center = {ball.center[0], ball.center[1], ball.center[2], ball.center[3]};
        spec.radius = ball.r;
        spec.profile = opts.profile;

        // cache materialized slices per k (theta scales linearly)
        std::vector<std::pair<int, std::vector<WaveSliceFields>>> cache;
        auto slices_for = [&](int k) -> const std::vector<WaveSliceFields>& {
            for (auto& c : cache)
                if (c.first == k) return c.second;
            spec.k = k;
            std::vector<WaveSliceFields> fields;
            fields.reserve(s_hi - s_lo + 1);
            for (int s = s_lo; s <= s_hi; ++s)
                fields.push_back(wave_slice(op, spec, g, st.time_of(s)));
            cache.emplace_back(k, std::move(fields));
            return cache.back().second;
        };

        bool accepted = false;
        double theta_acc = 0.0;
        int k_acc = 0;
        for (double theta : opts.theta_ladder) {
            for (int k = opts.k_min; k <= k_cap && !accepted; k *= 2) {
                const auto& fields = slices_for(k);
                bool ok = true;
                for (int s = s_lo; s <= s_hi && ok; ++s) {
                    const auto& wf = fields[static_cast<std::size_t>(s - s_lo)];
                    if (!wf.nonzero) continue;
                    double t = st.time_of(s);
                    double level = st.chi.value(t) / n;
                    double slack = opts.accept_slack * level;
                    for (std::size_t i = 0; i < np; ++i) {
                        Vec3 m = st.m_at(s, i);
                        Sym6 U = st.U_at(s, i);
                        for (int a = 0; a < n; ++a) m[a] += theta * wf.m.comp[a][i];
                        for (int kk = 0; kk < sym_size(n); ++kk)
                            U[kk] += theta * wf.U.comp[kk][i];
                        if (e_value(st.rho0.v[i], m, U, n) >= level - slack) {
                            ok = false;
                            break;
                        }
                    }
                }
                if (ok) {
                    accepted = true;
                    theta_acc = theta;
                    k_acc = k;
                }
            }
            if (accepted) break;
        }
        if (!accepted) continue;

        const auto& fields = slices_for(k_acc);
        for (int s = s_lo; s <= s_hi; ++s) {
            const auto& wf = fields[static_cast<std::size_t>(s - s_lo)];
            if (!wf.nonzero) continue;
            for (int a = 0; a < n; ++a) {
                double* ms = st.m_slice(a, s);
                const double* wm = wf.m.comp[a].data();
                for (std::size_t i = 0; i < np; ++i) ms[i] += theta_acc * wm[i];
            }
            for (int kk = 0; kk < sym_size(n); ++kk) {
                double* us = st.U_slice(kk, s);
                const double* wu = wf.U.comp[kk].data();
                for (std::size_t i = 0; i < np; ++i) us[i] += theta_acc * wu[i];
            }
            // drift accumulators: plain pairing of the added momentum with probes
            double t = st.time_of(s);
            double w_tr = (s == 0 || s == st.nt - 1) ? 0.5 : 1.0;
            for (std::size_t p = 0; p < probes.size(); ++p) {
                double b = probes[p].bump.value(t);
                if (b == 0.0) continue;
                double sum = 0.0;
                for (int a = 0; a < n; ++a) {
                    const double* wm = wf.m.comp[a].data();
                    const double* pg = probe_grids[p][a].data();
                    for (std::size_t i = 0; i < np; ++i) sum += wm[i] * pg[i];
                }
                drift[p] += w_tr * theta_acc * b * sum / static_cast<double>(np) * g.dt;
            }
        }
        ++rep.balls_accepted;
        rep.k_used = std::max(rep.k_used, k_acc);
        rep.theta_min = std::min(rep.theta_min, theta_acc);
        rep.f_ratio_min = std::min(rep.f_ratio_min, seg->ratio);
    }

    rep.deficit_after = st.deficit();
    rep.l2_gain = st.momentum_l2_sq() - l2_before;
    rep.hint_margin_min = st.hint_margin_min();
    for (double d : drift) rep.weak_drift = std::max(rep.weak_drift, std::abs(d));
    if (opts.cover.policy == CoverPolicy::slab)
        rep.slice0_gain = slice0_before - st.slice_deficit(st.slice_of(opts.cover.slab_t));
    if (rep.balls_accepted == 0) rep.theta_min = 0.0;
    return rep;
}

/// Iterated improvement. The cover radius halves automatically when the cover
/// condition fails at the current radius; below 4 grid cells the failure is
/// propagated.
inline std::vector<GainReport> iterate(SubsolutionState& st, int steps, Rng& rng,
                                       ImprovementOptions opts) {
    std::vector<GainReport> out;
    for (int step = 0; step < steps; ++step) {
        Rng step_rng = rng.fork(static_cast<std::uint64_t>(step) + 1);
        for (;;) {
            try {
                out.push_back(improvement_step(st, step_rng, opts));
                break;
            } catch (const std::runtime_error&) {
                double next = opts.cover.s / 2.0;
                if (next < 4.0 * st.grid.h()) throw;
                opts.cover.s = next;
            }
        }
    }
    return out;
}

struct FlatApproximation {
    SubsolutionState state;            // lives on [-T, T]
    std::vector<GainReport> reports;
    std::vector<double> alphas;        // subcube slice-deficit before each pass
    std::vector<double> slice0_deficits;  // full-Q deficit at t = 0 after each pass
    int iters_done = 0;
};

/// Finite-iteration approximation of the flat-initial-trace subsolution:
/// starting from m = 0, U = U_tilde on [-T, T], each pass adds waves in balls
/// centered on the t = 0 slice, supported in Q_k x [-2^{-k} T, 2^{-k} T] with
/// expanding subcubes Q_k, |Q \ Q_k| <= 2^{-k}. The t = 0 deficit decreases;
/// the modulus constraint at t = 0 is approached, not attained, and the
/// remaining deficit is reported.
inline FlatApproximation approximate_flat_subsolution(const StationarySubsolution& stat,
                                                      const ChiFn& chi, double T, int iters,
                                                      Rng& rng, ImprovementOptions opts) {
    if (iters < 0) throw std::invalid_argument("approximate_flat_subsolution: iters >= 0");
    FlatApproximation out;
    out.state = flat_initial_state(stat, chi, -T, 2.0 * T);
    const GridSpec& g = out.state.grid;
    for (int k = 1; k <= iters; ++k) {
        double margin = (1.0 - std::sqrt(1.0 - std::pow(2.0, -k))) / 2.0;
        margin = detail::quantize_down(margin, g.h());
        double halfwidth = std::pow(2.0, -k) * T;
        if (halfwidth < 4.0 * std::max(g.h(), g.dt)) break;  // window below resolution

        ImprovementOptions o = opts;
        o.cover.policy = CoverPolicy::slab;
        o.cover.slab_t = 0.0;
        o.cover.slab_margin = margin;
        o.cover.slab_halfwidth = halfwidth;

        int s0 = out.state.slice_of(0.0);
        double alpha = 0.0;
        for (std::size_t i = 0; i < g.npoints(); ++i) {
            auto x = g.point(i);
            bool in = true;
            for (int ax = 0; ax < g.n; ++ax)
                if (x[ax] < margin || x[ax] > 1.0 - margin) in = false;
            if (in) alpha += out.state.deficit_at(s0, i);
        }
        alpha *= std::pow(g.h(), g.n);
        out.alphas.push_back(alpha);

        Rng pass_rng = rng.fork(static_cast<std::uint64_t>(k));
        out.reports.push_back(improvement_step(out.state, pass_rng, o));
        out.slice0_deficits.push_back(out.state.slice_deficit(s0));
        out.iters_done = k;
    }
    return out;
}

} // namespace tci
