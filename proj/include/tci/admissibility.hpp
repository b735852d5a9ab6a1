#pragma once

#include <cmath>
#include <vector>

#include "tci/chi.hpp"
#include "tci/pressure.hpp"
#include "tci/spectral.hpp"
#include "tci/subsolution.hpp"
#include "tci/weakform.hpp"

namespace tci {

// Energy admissibility: the constants bounding the transport terms of the
// energy inequality, the chi differential inequality they imply, and the
// weak residual check certifying admissibility against nonnegative tests.

/// c0 = sqrt(grid max rho0); c1, c2 are sup norms of the spectrally
/// differentiated composite fields grad(eps + p/rho0) and grad(1/rho0).
inline AdmissibilityConstants compute_constants(const ScalarGridField& rho0,
                                                const PressureLaw& law) {
    const GridSpec& g = rho0.grid;
    AdmissibilityConstants C;
    double rho_max = 0.0, rho_min = std::numeric_limits<double>::infinity();
    for (double r : rho0.v) {
        rho_max = std::max(rho_max, r);
        rho_min = std::min(rho_min, r);
    }
    if (!(rho_min > 0.0))
        throw std::invalid_argument("compute_constants: density touches zero");
    C.c0 = std::sqrt(rho_max);

    ScalarGridField g1(g), g2(g);
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        double r = rho0.v[i];
        g1.v[i] = internal_energy(law, r, rho_min) + law.value(r) / r;
        g2.v[i] = 1.0 / r;
    }
    auto grad1 = spectral_gradient(g1);
    auto grad2 = spectral_gradient(g2);
    double c1 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < g.npoints(); ++i) {
        double n1 = 0.0, n2 = 0.0;
        for (int a = 0; a < g.n; ++a) {
            n1 += grad1.comp[a][i] * grad1.comp[a][i];
            n2 += grad2.comp[a][i] * grad2.comp[a][i];
        }
        c1 = std::max(c1, std::sqrt(n1));
        c2 = std::max(c2, std::sqrt(n2));
    }
    C.c1 = c1;
    C.c2 = c2;
    C.C1 = 2.0 * c1 * C.c0;
    C.C2 = c2 * C.c0;
    return C;
}

struct EnergyResidual {
    double worst_reduced = 0.0;     // max over tests of the reduced-form pairing
    double worst_full = 0.0;        // max over tests of -(full weak inequality LHS)
    double pointwise_margin = 0.0;  // max over grid of the pointwise LHS bound
    bool admissible(double tol) const { return worst_reduced <= tol; }
};

/// Weak residual of the reduced admissibility inequality
///   (1/2) chi' + m . grad(eps + p/rho0) + (chi/2) m . grad(1/rho0) <= 0
/// paired against nonnegative tests: positive values certify violation.
/// Also cross-checks the full energy inequality with eta = rho eps + |m|^2/(2 rho),
/// flux (eps + |m|^2/(2 rho^2) + p/rho) m, including the initial-data term.
inline EnergyResidual energy_residual(const SubsolutionState& st, const ChiFn& chi,
                                      const PressureLaw& law,
                                      const std::vector<NonnegTest>& tests) {
    const GridSpec& g = st.grid;
    const int n = g.n;
    const std::size_t np = g.npoints();

    double rho_min = std::numeric_limits<double>::infinity();
    for (double r : st.rho0.v) rho_min = std::min(rho_min, r);

    ScalarGridField g1(g), g2(g), eps(g);
    for (std::size_t i = 0; i < np; ++i) {
        double r = st.rho0.v[i];
        eps.v[i] = internal_energy(law, r, rho_min);
        g1.v[i] = eps.v[i] + law.value(r) / r;
        g2.v[i] = 1.0 / r;
    }
    auto grad1 = spectral_gradient(g1);
    auto grad2 = spectral_gradient(g2);

    EnergyResidual out;

    // pointwise sufficient bound: (1/2)chi' + |m||grad g1| + (chi/2)|m||grad g2|
    for (int s = 0; s < st.nt; ++s) {
        double t = st.time_of(s);
        double chv = chi.value(t), chd = chi.derivative(t);
        for (std::size_t i = 0; i < np; ++i) {
            auto m = st.m_at(s, i);
            double mn = norm(m, n);
            double a1 = 0.0, a2 = 0.0;
            for (int a = 0; a < n; ++a) {
                a1 += grad1.comp[a][i] * grad1.comp[a][i];
                a2 += grad2.comp[a][i] * grad2.comp[a][i];
            }
            double lhs = 0.5 * chd + mn * std::sqrt(a1) + 0.5 * chv * mn * std::sqrt(a2);
            out.pointwise_margin = std::max(out.pointwise_margin, lhs);
        }
    }

    for (const auto& test : tests) {
        double reduced = 0.0, full = 0.0;
        for (int s = 0; s < st.nt; ++s) {
            double t = st.time_of(s);
            double chv = chi.value(t), chd = chi.derivative(t);
            double w = (s == 0 || s == st.nt - 1) ? 0.5 : 1.0;
            double acc_r = 0.0, acc_f = 0.0;
            for (std::size_t i = 0; i < np; ++i) {
                auto x = g.point(i);
                auto m = st.m_at(s, i);
                double phi = test.value(x, t);
                double dphi = test.dt(x, t);
                auto gphi = test.grad(x, t);
                if (phi != 0.0 || dphi != 0.0) {
                    double mg1 = 0.0, mg2 = 0.0;
                    for (int a = 0; a < n; ++a) {
                        mg1 += m[a] * grad1.comp[a][i];
                        mg2 += m[a] * grad2.comp[a][i];
                    }
                    acc_r += (0.5 * chd + mg1 + 0.5 * chv * mg2) * phi;
                    double rho = st.rho0.v[i];
                    double m2 = dot(m, m, n);
                    double eta_e = rho * eps.v[i] + 0.5 * m2 / rho;
                    double fluxc = eps.v[i] + 0.5 * m2 / (rho * rho) + law.value(rho) / rho;
                    double mflux = 0.0;
                    for (int a = 0; a < n; ++a) mflux += m[a] * gphi[a];
                    acc_f += eta_e * dphi + fluxc * mflux;
                }
            }
            reduced += w * acc_r / static_cast<double>(np);
            full += w * acc_f / static_cast<double>(np);
        }
        reduced *= g.dt;
        full *= g.dt;
        // initial-data term of the full inequality (tests vanish at t_begin
        // for interior bumps; kept for completeness)
        {
            double acc0 = 0.0;
            for (std::size_t i = 0; i < np; ++i) {
                auto x = g.point(i);
                double phi0 = test.value(x, st.t_begin);
                if (phi0 == 0.0) continue;
                auto m = st.m_at(0, i);
                double rho = st.rho0.v[i];
                acc0 += (rho * eps.v[i] + 0.5 * dot(m, m, n) / rho) * phi0;
            }
            full += acc0 / static_cast<double>(np);
        }
        out.worst_reduced = std::max(out.worst_reduced, reduced);
        out.worst_full = std::max(out.worst_full, -full);  // violation when LHS < 0
    }
    return out;
}

} // namespace tci
