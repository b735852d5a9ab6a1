#pragma once

#include <cmath>

#include "tci/fft.hpp"
#include "tci/grid.hpp"

namespace tci {

// Exact spectral calculus for band-limited periodic fields. Derivatives act
// as multiplication by 2*pi*i*k in coefficient space; Nyquist modes are
// zeroed so that d/dx of a real field stays real and antisymmetric.

inline bool has_nyquist(const std::array<int, 3>& k, int n, int N) {
    for (int a = 0; a < n; ++a)
        if (k[a] == N / 2) return true;
    return false;
}

inline SpectralCoeffs derivative_coeffs(const SpectralCoeffs& s, int axis) {
    SpectralCoeffs out(s.grid);
    for (std::size_t i = 0; i < s.c.size(); ++i) {
        auto k = s.wavevector(i);
        if (has_nyquist(k, s.grid.n, s.grid.N)) {
            out.c[i] = 0.0;
            continue;
        }
        out.c[i] = s.c[i] * std::complex<double>(0.0, 2.0 * M_PI * k[axis]);
    }
    return out;
}

inline VectorGridField spectral_gradient(const ScalarGridField& f) {
    auto& fft = Fft::instance();
    auto s = fft.forward(f);
    VectorGridField g(f.grid);
    for (int a = 0; a < f.grid.n; ++a) {
        auto da = fft.inverse(derivative_coeffs(s, a));
        g.comp[a] = std::move(da.v);
    }
    return g;
}

inline ScalarGridField spectral_divergence(const VectorGridField& v) {
    auto& fft = Fft::instance();
    ScalarGridField out(v.grid);
    SpectralCoeffs acc(v.grid);
    for (int a = 0; a < v.grid.n; ++a) {
        ScalarGridField comp(v.grid);
        comp.v = v.comp[a];
        auto s = fft.forward(comp);
        auto d = derivative_coeffs(s, a);
        for (std::size_t i = 0; i < acc.c.size(); ++i) acc.c[i] += d.c[i];
    }
    return fft.inverse(acc);
}

/// Row-wise divergence of a symmetric matrix field: (div U)_i = sum_j d_j U_ij.
inline VectorGridField spectral_divergence(const SymMatrixGridField& U) {
    auto& fft = Fft::instance();
    VectorGridField out(U.grid);
    const int n = U.grid.n;
    // forward-transform each packed component once
    std::array<SpectralCoeffs, 6> comp_hat;
    for (int k = 0; k < sym_size(n); ++k) {
        ScalarGridField tmp(U.grid);
        tmp.v = U.comp[k];
        comp_hat[k] = fft.forward(tmp);
    }
    for (int i = 0; i < n; ++i) {
        SpectralCoeffs acc(U.grid);
        for (int j = 0; j < n; ++j) {
            auto d = derivative_coeffs(comp_hat[sym_index(i, j, n)], j);
            for (std::size_t t = 0; t < acc.c.size(); ++t) acc.c[t] += d.c[t];
        }
        auto g = fft.inverse(acc);
        out.comp[i] = std::move(g.v);
    }
    return out;
}

inline ScalarGridField spectral_laplacian(const ScalarGridField& f) {
    auto& fft = Fft::instance();
    auto s = fft.forward(f);
    for (std::size_t i = 0; i < s.c.size(); ++i) {
        auto k = s.wavevector(i);
        if (has_nyquist(k, s.grid.n, s.grid.N)) {
            s.c[i] = 0.0;
            continue;
        }
        double k2 = 0.0;
        for (int a = 0; a < s.grid.n; ++a) k2 += static_cast<double>(k[a]) * k[a];
        s.c[i] *= -4.0 * M_PI * M_PI * k2;
    }
    return fft.inverse(s);
}

/// L2 norm from coefficients (Parseval, unit cell).
inline double l2_norm(const SpectralCoeffs& s) {
    double sum = 0.0;
    for (const auto& c : s.c) sum += std::norm(c);
    return std::sqrt(sum);
}

} // namespace tci
