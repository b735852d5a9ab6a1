#pragma once

#include <cmath>
#include <vector>

#include "tci/grid.hpp"
#include "tci/rng.hpp"

namespace tci {

// Test functions for weak-form residuals: trigonometric polynomials in space
// times smooth compactly supported time profiles with closed-form
// derivatives. Spatial quadrature of (band-limited field) x (low-order trig
// polynomial) is the exact grid mean; time quadrature is the trapezoid rule
// on the slice sampling.

/// C^3 bump (1 - s^2)^4 on |s| < 1, s = (t - t0)/width.
struct TimeBump {
    double t0 = 0.5;
    double width = 0.25;

    double value(double t) const {
        double s = (t - t0) / width;
        if (std::abs(s) >= 1.0) return 0.0;
        double z = 1.0 - s * s;
        return z * z * z * z;
    }
    double derivative(double t) const {
        double s = (t - t0) / width;
        if (std::abs(s) >= 1.0) return 0.0;
        double z = 1.0 - s * s;
        return -8.0 * s * z * z * z / width;
    }
};

/// Real trigonometric polynomial sum_k [a_k cos(2 pi k.x) + b_k sin(2 pi k.x)].
struct TrigPoly {
    struct Mode {
        std::array<int, 3> k{};
        double a = 0.0, b = 0.0;
    };
    int n = 2;
    std::vector<Mode> modes;

    double value(const std::array<double, 3>& x) const {
        double s = 0.0;
        for (const auto& m : modes) {
            double ph = 0.0;
            for (int a = 0; a < n; ++a) ph += m.k[a] * x[a];
            ph *= 2.0 * M_PI;
            s += m.a * std::cos(ph) + m.b * std::sin(ph);
        }
        return s;
    }

    Vec3 gradient(const std::array<double, 3>& x) const {
        Vec3 g{};
        for (const auto& m : modes) {
            double ph = 0.0;
            for (int a = 0; a < n; ++a) ph += m.k[a] * x[a];
            ph *= 2.0 * M_PI;
            double dc = -std::sin(ph), ds = std::cos(ph);
            for (int a = 0; a < n; ++a)
                g[a] += 2.0 * M_PI * m.k[a] * (m.a * dc + m.b * ds);
        }
        return g;
    }

    static TrigPoly random(int n, int max_mode, int nmodes, Rng& rng) {
        TrigPoly p;
        p.n = n;
        for (int i = 0; i < nmodes; ++i) {
            Mode m;
            bool zero = true;
            for (int a = 0; a < n; ++a) {
                m.k[a] = rng.uniform_int(-max_mode, max_mode);
                if (m.k[a] != 0) zero = false;
            }
            if (zero) m.k[0] = 1;
            m.a = rng.uniform(-1.0, 1.0);
            m.b = rng.uniform(-1.0, 1.0);
            p.modes.push_back(m);
        }
        return p;
    }
};

/// Vector-valued test for the weak momentum equation: independent trig
/// polynomials per component, common time bump.
struct VectorTest {
    int n = 2;
    std::array<TrigPoly, 3> comp;
    TimeBump bump;
};

/// Scalar test for the weak mass equation.
struct ScalarTest {
    TrigPoly space;
    TimeBump bump;
};

/// Nonnegative space-time test (trig polynomial squared times bump squared),
/// used by the energy-inequality residual.
struct NonnegTest {
    TrigPoly g;
    TimeBump bump;

    double value(const std::array<double, 3>& x, double t) const {
        double b = bump.value(t), s = g.value(x);
        return s * s * b * b;
    }
    double dt(const std::array<double, 3>& x, double t) const {
        double b = bump.value(t), s = g.value(x);
        return s * s * 2.0 * b * bump.derivative(t);
    }
    Vec3 grad(const std::array<double, 3>& x, double t) const {
        double b = bump.value(t), s = g.value(x);
        Vec3 gx = g.gradient(x);
        Vec3 out{};
        for (int a = 0; a < 3; ++a) out[a] = 2.0 * s * gx[a] * b * b;
        return out;
    }
};

inline std::vector<VectorTest> build_probe_vector_tests(int n, double t_begin, double t_end,
                                                        int count, Rng& rng) {
    std::vector<VectorTest> out;
    double span = t_end - t_begin;
    for (int i = 0; i < count; ++i) {
        VectorTest t;
        t.n = n;
        for (int a = 0; a < n; ++a) t.comp[a] = TrigPoly::random(n, 2, 3, rng);
        t.bump.t0 = t_begin + span * (0.25 + 0.5 * rng.uniform());
        t.bump.width = span * (0.1 + 0.15 * rng.uniform());
        // keep the support strictly inside (t_begin, t_end)
        t.bump.width = std::min(t.bump.width, 0.98 * std::min(t.bump.t0 - t_begin, t_end - t.bump.t0));
        out.push_back(t);
    }
    return out;
}

inline std::vector<ScalarTest> build_probe_scalar_tests(int n, double t_begin, double t_end,
                                                        int count, Rng& rng) {
    std::vector<ScalarTest> out;
    double span = t_end - t_begin;
    for (int i = 0; i < count; ++i) {
        ScalarTest t;
        t.space = TrigPoly::random(n, 2, 3, rng);
        t.bump.t0 = t_begin + span * (0.25 + 0.5 * rng.uniform());
        t.bump.width = span * (0.1 + 0.15 * rng.uniform());
        t.bump.width = std::min(t.bump.width, 0.98 * std::min(t.bump.t0 - t_begin, t_end - t.bump.t0));
        out.push_back(t);
    }
    return out;
}

inline std::vector<NonnegTest> build_nonneg_tests(int n, double t_begin, double t_end,
                                                  int count, Rng& rng) {
    std::vector<NonnegTest> out;
    double span = t_end - t_begin;
    for (int i = 0; i < count; ++i) {
        NonnegTest t;
        t.g = TrigPoly::random(n, 2, 3, rng);
        t.bump.t0 = t_begin + span * (0.2 + 0.6 * rng.uniform());
        t.bump.width = span * (0.08 + 0.2 * rng.uniform());
        t.bump.width = std::min(t.bump.width, 0.98 * std::min(t.bump.t0 - t_begin, t_end - t.bump.t0));
        out.push_back(t);
    }
    return out;
}

} // namespace tci
