#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tci/chi.hpp"
#include "tci/fft.hpp"
#include "tci/geometry.hpp"
#include "tci/grid.hpp"
#include "tci/pressure.hpp"
#include "tci/spectral.hpp"
#include "tci/weakform.hpp"

namespace tci {

/// The stationary pair (U_tilde, q_tilde) solving div U + grad q = 0 with
/// q = p(rho0) + chi/n, built mode by mode from the Fourier coefficients of
/// p(rho0). The rational symbol admits two sign branches; the branch with
/// vanishing residual under this library's transform convention is selected
/// empirically and recorded.
struct StationarySubsolution {
    ScalarGridField rho0;
    ScalarGridField p0;            // p(rho0)
    SymMatrixGridField U;          // U_tilde, symmetric trace-free
    double lambda_tilde = 0.0;     // sup over the grid of lambda_max(-U)
    int sign_branch = 0;           // resolved sign of the symbol
    double residual_sup = 0.0;     // ||div U + grad p||_inf
    double symbol_residual = 0.0;  // coefficient-space identity defect
};

inline StationarySubsolution build_stationary_subsolution(const ScalarGridField& rho0,
                                                          const PressureLaw& law) {
    const GridSpec& g = rho0.grid;
    g.validate();
    const int n = g.n;
    StationarySubsolution out;
    out.rho0 = rho0;
    out.p0 = ScalarGridField(g);
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        if (!(rho0.v[i] > 0.0))
            throw std::invalid_argument("build_stationary_subsolution: rho0 must be positive");
        double p = law.value(rho0.v[i]);
        if (!std::isfinite(p))
            throw std::runtime_error("build_stationary_subsolution: non-finite pressure value");
        out.p0.v[i] = p;
    }

    auto& fft = Fft::instance();
    auto phat = fft.forward(out.p0);

    auto build_branch = [&](double sign) {
        SymMatrixGridField U(g);
        std::array<SpectralCoeffs, 6> uhat;
        for (int k = 0; k < sym_size(n); ++k) uhat[k] = SpectralCoeffs(g);
        for (std::size_t idx = 0; idx < g.npoints(); ++idx) {
            auto kv = phat.wavevector(idx);
            double k2 = 0.0;
            for (int a = 0; a < n; ++a) k2 += static_cast<double>(kv[a]) * kv[a];
            if (k2 == 0.0 || has_nyquist(kv, n, g.N)) continue;
            for (int i = 0; i < n; ++i) {
                for (int j = i; j < n; ++j) {
                    double sym = i == j ? (n * kv[i] * kv[i] - k2) / ((n - 1.0) * k2)
                                        : (n * kv[i] * kv[j]) / ((n - 1.0) * k2);
                    uhat[sym_index(i, j, n)].c[idx] = sign * sym * phat.c[idx];
                }
            }
        }
        for (int k = 0; k < sym_size(n); ++k) {
            auto f = fft.inverse(uhat[k]);
            U.comp[k] = std::move(f.v);
        }
        return U;
    };

    auto residual_of = [&](const SymMatrixGridField& U) {
        auto divU = spectral_divergence(U);
        auto gradp = spectral_gradient(out.p0);
        double worst = 0.0;
        for (int a = 0; a < n; ++a)
            for (std::size_t i = 0; i < g.npoints(); ++i)
                worst = std::max(worst, std::abs(divU.comp[a][i] + gradp.comp[a][i]));
        return worst;
    };

    SymMatrixGridField u_plus = build_branch(+1.0);
    SymMatrixGridField u_minus = build_branch(-1.0);
    double r_plus = residual_of(u_plus), r_minus = residual_of(u_minus);
    if (r_minus <= r_plus) {
        out.U = std::move(u_minus);
        out.sign_branch = -1;
        out.residual_sup = r_minus;
    } else {
        out.U = std::move(u_plus);
        out.sign_branch = +1;
        out.residual_sup = r_plus;
    }

    // coefficient-space identity sum_j k_j Uhat_ij = sign * k_i phat
    {
        double worst = 0.0;
        std::array<SpectralCoeffs, 6> uh;
        for (int k = 0; k < sym_size(n); ++k) {
            ScalarGridField tmp(g);
            tmp.v = out.U.comp[k];
            uh[k] = fft.forward(tmp);
        }
        for (std::size_t idx = 0; idx < g.npoints(); ++idx) {
            auto kv = phat.wavevector(idx);
            if (has_nyquist(kv, n, g.N)) continue;
            for (int i = 0; i < n; ++i) {
                std::complex<double> lhs = 0.0;
                for (int j = 0; j < n; ++j)
                    lhs += static_cast<double>(kv[j]) * uh[sym_index(i, j, n)].c[idx];
                std::complex<double> rhs = static_cast<double>(out.sign_branch) *
                                           static_cast<double>(kv[i]) * phat.c[idx];
                worst = std::max(worst, std::abs(lhs - rhs));
            }
        }
        out.symbol_residual = worst;
    }

    double lam = 0.0;
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        Sym6 negU{};
        for (int k = 0; k < sym_size(n); ++k) negU[k] = -out.U.comp[k][i];
        lam = std::max(lam, sym_eig_max(negU, n));
    }
    out.lambda_tilde = lam;
    return out;
}

/// Constant modulus level for the stationary phase:
/// chi = margin * max(n * lambda_tilde, chi_floor). The floor keeps the
/// hyperinterior nonempty for constant densities (lambda_tilde = 0).
inline double choose_chi(double lambda_tilde, double margin, double chi_floor, int n) {
    if (!(margin > 1.0)) throw std::invalid_argument("choose_chi: margin must exceed 1");
    if (!(chi_floor > 0.0)) throw std::invalid_argument("choose_chi: chi_floor must be positive");
    return margin * std::max(n * lambda_tilde, chi_floor);
}

/// A time-sampled subsolution: slice family (m, U) over [t_begin, t_begin + span],
/// time-independent density rho0 and modulus level chi(t). The modified
/// pressure is q0(x, t) = p(rho0(x)) + chi(t)/n throughout.
class SubsolutionState {
public:
    GridSpec grid;
    ScalarGridField rho0;
    ScalarGridField p0;
    ChiFn chi = ChiFn::constant(1.0);
    double t_begin = 0.0;
    int nt = 0;

    SubsolutionState() = default;

    SubsolutionState(const GridSpec& g, const ScalarGridField& rho, const ScalarGridField& p,
                     const ChiFn& chi_fn, double t0, double span)
        : grid(g), rho0(rho), p0(p), chi(chi_fn), t_begin(t0) {
        nt = static_cast<int>(std::llround(span / g.dt)) + 1;
        const std::size_t np = g.npoints();
        for (int a = 0; a < g.n; ++a) m_[a].assign(static_cast<std::size_t>(nt) * np, 0.0);
        for (int k = 0; k < sym_size(g.n); ++k) U_[k].assign(static_cast<std::size_t>(nt) * np, 0.0);
    }

    double time_of(int slice) const { return t_begin + slice * grid.dt; }
    int slice_of(double t) const { return static_cast<int>(std::llround((t - t_begin) / grid.dt)); }
    double t_end() const { return time_of(nt - 1); }

    double* m_slice(int comp, int s) { return &m_[comp][static_cast<std::size_t>(s) * grid.npoints()]; }
    const double* m_slice(int comp, int s) const { return &m_[comp][static_cast<std::size_t>(s) * grid.npoints()]; }
    double* U_slice(int comp, int s) { return &U_[comp][static_cast<std::size_t>(s) * grid.npoints()]; }
    const double* U_slice(int comp, int s) const { return &U_[comp][static_cast<std::size_t>(s) * grid.npoints()]; }

    Vec3 m_at(int s, std::size_t idx) const {
        Vec3 v{};
        for (int a = 0; a < grid.n; ++a) v[a] = m_slice(a, s)[idx];
        return v;
    }
    Sym6 U_at(int s, std::size_t idx) const {
        Sym6 u{};
        for (int k = 0; k < sym_size(grid.n); ++k) u[k] = U_slice(k, s)[idx];
        return u;
    }

    ConstraintParams params_at(double t, std::size_t idx) const {
        ConstraintParams p;
        p.n = grid.n;
        p.rho = rho0.v[idx];
        p.chi = chi.value(t);
        p.pval = p0.v[idx];
        return p;
    }

    /// Deficit density rho0*chi - |m|^2 at a slice point.
    double deficit_at(int s, std::size_t idx) const {
        double m2 = 0.0;
        for (int a = 0; a < grid.n; ++a) {
            double v = m_slice(a, s)[idx];
            m2 += v * v;
        }
        return rho0.v[idx] * chi.value(time_of(s)) - m2;
    }

    /// Spatial integral of the deficit density on one slice.
    double slice_deficit(int s) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < grid.npoints(); ++i) sum += deficit_at(s, i);
        return sum / static_cast<double>(grid.npoints());
    }

    /// Space-time deficit integral (trapezoid in time, exact mean in space).
    double deficit() const {
        double sum = 0.0;
        for (int s = 0; s < nt; ++s) {
            double w = (s == 0 || s == nt - 1) ? 0.5 : 1.0;
            sum += w * slice_deficit(s);
        }
        return sum * grid.dt;
    }

    /// Space-time integral of |m|^2.
    double momentum_l2_sq() const {
        double sum = 0.0;
        const std::size_t np = grid.npoints();
        for (int s = 0; s < nt; ++s) {
            double w = (s == 0 || s == nt - 1) ? 0.5 : 1.0;
            double acc = 0.0;
            for (int a = 0; a < grid.n; ++a) {
                const double* ms = m_slice(a, s);
                for (std::size_t i = 0; i < np; ++i) acc += ms[i] * ms[i];
            }
            sum += w * acc / static_cast<double>(np);
        }
        return sum * grid.dt;
    }

    /// Minimum over slices/points of chi/n - e(rho0, m, U); interior slices only.
    double hint_margin_min(bool interior_only = true) const {
        double worst = std::numeric_limits<double>::infinity();
        int lo = interior_only ? 1 : 0;
        int hi = interior_only ? nt - 2 : nt - 1;
        for (int s = lo; s <= hi; ++s) {
            double level = chi.value(time_of(s)) / grid.n;
            for (std::size_t i = 0; i < grid.npoints(); ++i) {
                double e = e_value(rho0.v[i], m_at(s, i), U_at(s, i), grid.n);
                worst = std::min(worst, level - e);
            }
        }
        return worst;
    }

    /// Max over slices of the spectral divergence sup norm.
    double div_residual_max() const {
        double worst = 0.0;
        for (int s = 0; s < nt; ++s) {
            VectorGridField v(grid);
            for (int a = 0; a < grid.n; ++a)
                v.comp[a].assign(m_slice(a, s), m_slice(a, s) + grid.npoints());
            worst = std::max(worst, sup_norm(spectral_divergence(v)));
        }
        return worst;
    }

    double trace_violation_max() const {
        double worst = 0.0;
        for (int s = 0; s < nt; ++s)
            for (std::size_t i = 0; i < grid.npoints(); ++i)
                worst = std::max(worst, std::abs(sym_trace(U_at(s, i), grid.n)));
        return worst;
    }

    double mean_momentum_max() const {
        double worst = 0.0;
        const std::size_t np = grid.npoints();
        for (int s = 0; s < nt; ++s)
            for (int a = 0; a < grid.n; ++a) {
                const double* ms = m_slice(a, s);
                double mean = 0.0;
                for (std::size_t i = 0; i < np; ++i) mean += ms[i];
                worst = std::max(worst, std::abs(mean / static_cast<double>(np)));
            }
        return worst;
    }

    /// Weak residual of the momentum equation against one vector test:
    /// integral of m . dphi/dt + <U, grad phi> + q0 div phi.
    double weak_momentum_residual(const VectorTest& test) const {
        const int n = grid.n;
        const std::size_t np = grid.npoints();
        // cache the spatial factors of the test on the grid
        std::array<std::vector<double>, 3> phi;
        std::array<std::array<std::vector<double>, 3>, 3> dphi;  // dphi[a][b] = d_b phi_a
        std::vector<double> divphi(np, 0.0);
        for (int a = 0; a < n; ++a) {
            phi[a].resize(np);
            for (int b = 0; b < n; ++b) dphi[a][b].resize(np);
        }
        for (std::size_t i = 0; i < np; ++i) {
            auto x = grid.point(i);
            for (int a = 0; a < n; ++a) {
                phi[a][i] = test.comp[a].value(x);
                auto gr = test.comp[a].gradient(x);
                for (int b = 0; b < n; ++b) dphi[a][b][i] = gr[b];
            }
            for (int a = 0; a < n; ++a) divphi[i] += dphi[a][a][i];
        }
        double acc = 0.0;
        for (int s = 0; s < nt; ++s) {
            double t = time_of(s);
            double b = test.bump.value(t), db = test.bump.derivative(t);
            if (b == 0.0 && db == 0.0) continue;
            double q_chi = chi.value(t) / n;
            double sum = 0.0;
            for (std::size_t i = 0; i < np; ++i) {
                double term = 0.0;
                for (int a = 0; a < n; ++a) term += m_slice(a, s)[i] * phi[a][i] * db;
                double uterm = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int bb = 0; bb < n; ++bb)
                        uterm += U_slice(sym_index(a, bb, n), s)[i] * dphi[a][bb][i];
                term += uterm * b;
                term += (p0.v[i] + q_chi) * divphi[i] * b;
                sum += term;
            }
            double w = (s == 0 || s == nt - 1) ? 0.5 : 1.0;
            acc += w * sum / static_cast<double>(np);
        }
        return acc * grid.dt;
    }

    /// Weak residual of the mass equation against one scalar test: the
    /// density is time-independent, so this reduces to integral of m . grad psi.
    double weak_mass_residual(const ScalarTest& test) const {
        const int n = grid.n;
        const std::size_t np = grid.npoints();
        std::array<std::vector<double>, 3> grad;
        for (int a = 0; a < n; ++a) grad[a].resize(np);
        for (std::size_t i = 0; i < np; ++i) {
            auto gr = test.space.gradient(grid.point(i));
            for (int a = 0; a < n; ++a) grad[a][i] = gr[a];
        }
        double acc = 0.0;
        for (int s = 0; s < nt; ++s) {
            double b = test.bump.value(time_of(s));
            if (b == 0.0) continue;
            double sum = 0.0;
            for (std::size_t i = 0; i < np; ++i)
                for (int a = 0; a < n; ++a) sum += m_slice(a, s)[i] * grad[a][i];
            double w = (s == 0 || s == nt - 1) ? 0.5 : 1.0;
            acc += w * b * sum / static_cast<double>(np);
        }
        return acc * grid.dt;
    }

    double weak_momentum_residual_max(const std::vector<VectorTest>& tests) const {
        double worst = 0.0;
        for (const auto& t : tests) worst = std::max(worst, std::abs(weak_momentum_residual(t)));
        return worst;
    }
    double weak_mass_residual_max(const std::vector<ScalarTest>& tests) const {
        double worst = 0.0;
        for (const auto& t : tests) worst = std::max(worst, std::abs(weak_mass_residual(t)));
        return worst;
    }

private:
    std::array<std::vector<double>, 3> m_;
    std::array<std::vector<double>, 6> U_;
};

/// Fresh state with m = 0 and U broadcast from the stationary construction.
inline SubsolutionState flat_initial_state(const StationarySubsolution& stat, const ChiFn& chi,
                                           double t0, double span) {
    SubsolutionState st(stat.rho0.grid, stat.rho0, stat.p0, chi, t0, span);
    const std::size_t np = st.grid.npoints();
    for (int s = 0; s < st.nt; ++s)
        for (int k = 0; k < sym_size(st.grid.n); ++k)
            std::copy(stat.U.comp[k].begin(), stat.U.comp[k].end(), st.U_slice(k, s));
    (void)np;
    return st;
}

/// Time-symmetric initial data: reflect a state living on [-T, T] onto
/// [0, 2T] by m0(t) = m(t) for t in [0,T], m(t - 2T) for t in [T, 2T]
/// (same for U). The two branches must agree at the seam.
inline SubsolutionState time_symmetric_data(const SubsolutionState& flat, double T) {
    const GridSpec& g = flat.grid;
    if (std::abs(flat.t_begin + T) > 1e-12 || std::abs(flat.t_end() - T) > 1e-9)
        throw std::invalid_argument("time_symmetric_data: flat state must live on [-T, T]");
    // seam continuity: values at t = T and t = -T must match
    const std::size_t np = g.npoints();
    int s_lo = 0, s_hi = flat.nt - 1;
    double seam = 0.0;
    for (int a = 0; a < g.n; ++a)
        for (std::size_t i = 0; i < np; ++i)
            seam = std::max(seam, std::abs(flat.m_slice(a, s_hi)[i] - flat.m_slice(a, s_lo)[i]));
    for (int k = 0; k < sym_size(g.n); ++k)
        for (std::size_t i = 0; i < np; ++i)
            seam = std::max(seam, std::abs(flat.U_slice(k, s_hi)[i] - flat.U_slice(k, s_lo)[i]));
    if (seam > 1e-10)
        throw std::runtime_error("time_symmetric_data: branch mismatch at the seam exceeds 1e-10");

    SubsolutionState out(g, flat.rho0, flat.p0, flat.chi.reflected(T), 0.0, 2.0 * T);
    for (int s = 0; s < out.nt; ++s) {
        double t = out.time_of(s);
        double tau = t <= T ? t : t - 2.0 * T;
        int src = flat.slice_of(tau);
        for (int a = 0; a < g.n; ++a)
            std::copy(flat.m_slice(a, src), flat.m_slice(a, src) + np, out.m_slice(a, s));
        for (int k = 0; k < sym_size(g.n); ++k)
            std::copy(flat.U_slice(k, src), flat.U_slice(k, src) + np, out.U_slice(k, s));
    }
    return out;
}

} // namespace tci
