#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "tci/cutoff.hpp"
#include "tci/fft.hpp"
#include "tci/grid.hpp"
#include "tci/potential.hpp"

namespace tci {

// Localized oscillating solutions of the linear system with q = 0: the
// third-order operator applied to phi(y) * (2 pi k)^{-3} cos(2 pi k eta.y),
// phi a radial bump supported in a space-time ball. On the plateau of the
// cutoff the wave equals Abar * sin(2 pi k eta.y) exactly; the sup distance
// from that pure wave decays like const(C^3 norm of the cutoff)/k.
//
// Slice evaluation is hybrid: time derivatives of the potential are applied
// analytically (the time axis is a plain sample), spatial derivatives
// spectrally on the grid. Because the divergence identities of the operator
// hold monomial by monomial, the materialized momentum is spectrally
// divergence-free to rounding, at every cutoff regularity.

struct WaveSpec {
    Vec3 c{}, d{};                  // generators, |c| = |d| = sqrt(rho chi)
    double rho = 1.0;               // local density at the ball center
    double amp = 1.0;               // segment half-length scale actually used
    int k = 8;                      // oscillation index; phase = 2 pi k eta.y
    std::array<double, 4> center{}; // space-time center (x_1..x_n, t)
    double radius = 0.125;          // space-time ball radius
    CutoffProfile profile = CutoffProfile::plateau_quartic;

    /// Pure-wave momentum amplitude m_bar = amp * (c - d).
    Vec3 mbar(int n) const {
        Vec3 v{};
        for (int i = 0; i < n; ++i) v[i] = amp * (c[i] - d[i]);
        return v;
    }
};

struct WaveSliceFields {
    VectorGridField m;
    SymMatrixGridField U;
    bool nonzero = false;
};

namespace detail {

/// Partial derivatives of the cutoff phi(y) = P(u), u = |y-y0|^2/r^2, at one
/// point, up to order 3, indexed by axis multisets over nv variables.
struct CutoffPartials {
    // value, grad[a], hess[a<=b], third[a<=b<=c] packed on demand
    double p0;
    std::array<double, 4> g{};
    std::array<std::array<double, 4>, 4> h{};
    double third(int a, int b, int c, const std::array<double, 4>& ug, double uh,
                 const CutoffDerivs& P) const {
        double v = P.p3 * ug[a] * ug[b] * ug[c];
        v += P.p2 * uh * ((a == b ? ug[c] : 0.0) + (a == c ? ug[b] : 0.0) + (b == c ? ug[a] : 0.0));
        return v;
    }
};

inline double min_image(double d) { return d - std::round(d); }

} // namespace detail

/// Per-axis Nyquist cap for the oscillation index: the wave's spatial mode
/// along axis a is k * |eta_a|; the improvement step keeps it at or below N/4.
inline int frequency_cap(const OperatorSpec& op, int N) {
    double emax = 0.0;
    for (int a = 0; a < op.n; ++a) emax = std::max(emax, std::abs(op.eta[a]));
    if (emax < 1e-12) return 0;
    return static_cast<int>(std::floor(static_cast<double>(N) / 4.0 / emax));
}

/// Materialize the wave on the time slice t as grid fields (m, U). Returns
/// nonzero = false when the slice does not meet the support ball.
inline WaveSliceFields wave_slice(const OperatorSpec& op, const WaveSpec& spec,
                                  const GridSpec& grid, double t) {
    const int n = op.n, nv = op.nv, N = grid.N;
    WaveSliceFields out;
    out.m = VectorGridField(grid);
    out.U = SymMatrixGridField(grid);
    const double r = spec.radius;
    const double dt_c = t - spec.center[n];
    if (std::abs(dt_c) >= r) return out;

    const double w = 2.0 * M_PI * spec.k;
    const std::size_t np = grid.npoints();

    // g_tau(x) = d^tau/dt^tau [phi * w^{-3} cos(w eta.y)] at this slice
    std::array<std::vector<std::complex<double>>, 4> ghat;
    for (auto& g : ghat) g.assign(np, {0.0, 0.0});

    const double inv_r2 = 1.0 / (r * r);
    std::array<double, 4> y{};
    y[n] = t;
    for (std::size_t idx = 0; idx < np; ++idx) {
        auto x = grid.point(idx);
        std::array<double, 4> dy{};
        double u = dt_c * dt_c;
        for (int a = 0; a < n; ++a) {
            dy[a] = detail::min_image(x[a] - spec.center[a]);
            u += dy[a] * dy[a];
        }
        dy[n] = dt_c;
        u *= inv_r2;
        if (u >= 1.0) continue;
        auto P = cutoff_eval(spec.profile, u);
        const double ut = 2.0 * dy[n] * inv_r2;  // du/dt
        const double uh = 2.0 * inv_r2;          // d2u/dt2
        // time partials of phi: chain rule in u along the time axis only
        const double phi0 = P.p0;
        const double phi1 = P.p1 * ut;
        const double phi2 = P.p2 * ut * ut + P.p1 * uh;
        const double phi3 = P.p3 * ut * ut * ut + 3.0 * P.p2 * ut * uh;
        // time partials of the oscillation
        double s = 0.0;
        for (int a = 0; a < n; ++a) s += op.eta[a] * x[a];
        s += op.eta[n] * t;
        const double et = op.eta[n];
        const double c0 = std::cos(w * s) / (w * w * w);
        const double c1 = -std::sin(w * s) / (w * w) * et;
        const double c2 = -std::cos(w * s) / w * et * et;
        const double c3 = std::sin(w * s) * et * et * et;
        ghat[0][idx] = phi0 * c0;
        ghat[1][idx] = phi1 * c0 + phi0 * c1;
        ghat[2][idx] = phi2 * c0 + 2.0 * phi1 * c1 + phi0 * c2;
        ghat[3][idx] = phi3 * c0 + 3.0 * phi2 * c1 + 3.0 * phi1 * c2 + phi0 * c3;
    }

    auto& fft = Fft::instance();
    for (int tau = 0; tau < 4; ++tau) fft.forward_raw(grid, ghat[tau].data());

    // spatial symbols: for entry (i,j) accumulate over coefficients grouped
    // by time order tau and spatial monomial mu, |mu| = 3 - tau
    SpectralCoeffs probe(grid);  // only for wavevector decoding
    std::vector<std::complex<double>> acc(np);
    std::vector<std::array<int, 3>> kvec(np);
    std::vector<bool> nyq(np);
    for (std::size_t idx = 0; idx < np; ++idx) {
        kvec[idx] = probe.wavevector(idx);
        nyq[idx] = has_nyquist(kvec[idx], n, N);
    }

    auto emit = [&](int i, int j, std::vector<double>& target) {
        std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t m = 0; m < op.monos.size(); ++m) {
            const double cf = op.coefficient(i, j, static_cast<int>(m)) * spec.amp;
            if (cf == 0.0) continue;
            const auto& e = op.monos[m];
            const int tau = e[n];
            for (std::size_t idx = 0; idx < np; ++idx) {
                if (nyq[idx]) continue;
                std::complex<double> sym(1.0, 0.0);
                for (int a = 0; a < n; ++a)
                    for (int p = 0; p < e[a]; ++p)
                        sym *= std::complex<double>(0.0, 2.0 * M_PI * kvec[idx][a]);
                acc[idx] += cf * sym * ghat[tau][idx];
            }
        }
        fft.inverse_raw(grid, acc.data());
        for (std::size_t idx = 0; idx < np; ++idx) target[idx] = acc[idx].real();
    };

    for (int i = 0; i < n; ++i) emit(i, n, out.m.comp[i]);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) emit(i, j, out.U.comp[sym_index(i, j, n)]);
    (void)nv;
    out.nonzero = true;
    return out;
}

/// The pure plane wave phi * m_bar * sin(2 pi k eta.y) the localized wave
/// approximates, evaluated on a slice (momentum components only).
inline VectorGridField pure_wave_slice(const OperatorSpec& op, const WaveSpec& spec,
                                       const GridSpec& grid, double t) {
    const int n = op.n;
    VectorGridField out(grid);
    const double w = 2.0 * M_PI * spec.k;
    const double r = spec.radius;
    const double dt_c = t - spec.center[n];
    auto mbar = spec.mbar(n);
    for (std::size_t idx = 0; idx < grid.npoints(); ++idx) {
        auto x = grid.point(idx);
        double u = dt_c * dt_c;
        for (int a = 0; a < n; ++a) {
            double d = detail::min_image(x[a] - spec.center[a]);
            u += d * d;
        }
        u /= r * r;
        if (u >= 1.0) continue;
        double phi = cutoff_eval(spec.profile, u).p0;
        double s = op.eta[n] * t;
        for (int a = 0; a < n; ++a) s += op.eta[a] * x[a];
        double osc = std::sin(w * s);
        for (int a = 0; a < n; ++a) out.comp[a][idx] += phi * mbar[a] * osc;
    }
    return out;
}

/// Sup deviation of the materialized wave from the pure wave on a slice.
inline double wave_deviation(const OperatorSpec& op, const WaveSpec& spec,
                             const GridSpec& grid, double t) {
    auto hy = wave_slice(op, spec, grid, t);
    auto pw = pure_wave_slice(op, spec, grid, t);
    double worst = 0.0;
    for (int a = 0; a < op.n; ++a)
        for (std::size_t i = 0; i < grid.npoints(); ++i)
            worst = std::max(worst, std::abs(hy.m.comp[a][i] - pw.comp[a][i]));
    return worst;
}

struct OscillationMass {
    double mass = 0.0;         // integral of |m|^2 over the plateau region
    double region_measure = 0.0;  // discrete measure of the plateau region
};

/// Integral of |m_tilde|^2 over the inner (plateau) region of the ball at a
/// fixed time, by grid quadrature; converges to (1/2)|m_bar|^2 |B| as k grows.
inline OscillationMass oscillation_mass(const OperatorSpec& op, const WaveSpec& spec,
                                        const GridSpec& grid, double t) {
    auto hy = wave_slice(op, spec, grid, t);
    OscillationMass out;
    const int n = op.n;
    const double r = spec.radius;
    const double dt_c = t - spec.center[n];
    const double cell = std::pow(grid.h(), n);
    for (std::size_t idx = 0; idx < grid.npoints(); ++idx) {
        auto x = grid.point(idx);
        double u = dt_c * dt_c;
        for (int a = 0; a < n; ++a) {
            double d = detail::min_image(x[a] - spec.center[a]);
            u += d * d;
        }
        u /= r * r;
        if (u > 0.25) continue;   // plateau: cutoff identically 1
        double m2 = 0.0;
        for (int a = 0; a < n; ++a) m2 += hy.m.comp[a][idx] * hy.m.comp[a][idx];
        out.mass += m2 * cell;
        out.region_measure += cell;
    }
    return out;
}

} // namespace tci
