#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tci/smallmat.hpp"

namespace tci {

/// Uniform periodic grid on the unit cube Q = [0,1]^n plus a uniform time
/// sampling of [0, T] with step dt. Spatial points x_i = i/N, no duplicated
/// boundary layer.
struct GridSpec {
    int n = 2;        // spatial dimension, 2 or 3
    int N = 64;       // points per axis, power of two
    double dt = 1.0 / 512;
    double T = 0.5;

    double h() const { return 1.0 / N; }
    std::size_t npoints() const {
        std::size_t p = 1;
        for (int i = 0; i < n; ++i) p *= static_cast<std::size_t>(N);
        return p;
    }
    int nslices() const { return static_cast<int>(std::llround(T / dt)) + 1; }

    void validate() const {
        if (n < 2 || n > 3) throw std::invalid_argument("GridSpec: n must be 2 or 3");
        if (N < 8 || (N & (N - 1)) != 0) throw std::invalid_argument("GridSpec: N must be a power of two >= 8");
        if (!(T > 0.0)) throw std::invalid_argument("GridSpec: T must be positive");
        if (!(dt > 0.0)) throw std::invalid_argument("GridSpec: dt must be positive");
        double ratio = T / dt;
        if (std::abs(ratio - std::llround(ratio)) > 1e-9)
            throw std::invalid_argument("GridSpec: T must be an integer multiple of dt");
    }

    bool same_layout(const GridSpec& o) const { return n == o.n && N == o.N; }

    std::size_t index(const std::array<int, 3>& i) const {
        std::size_t idx = 0;
        for (int a = 0; a < n; ++a) {
            int w = ((i[a] % N) + N) % N;
            idx = idx * N + static_cast<std::size_t>(w);
        }
        return idx;
    }

    /// Coordinates of grid point from its flat index.
    std::array<double, 3> point(std::size_t idx) const {
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = n - 1; a >= 0; --a) {
            x[a] = static_cast<double>(idx % N) * h();
            idx /= N;
        }
        return x;
    }
};

struct ScalarGridField {
    GridSpec grid;
    std::vector<double> v;

    ScalarGridField() = default;
    explicit ScalarGridField(const GridSpec& g) : grid(g), v(g.npoints(), 0.0) {}

    double& operator[](std::size_t i) { return v[i]; }
    double operator[](std::size_t i) const { return v[i]; }
};

struct VectorGridField {
    GridSpec grid;
    std::array<std::vector<double>, 3> comp;

    VectorGridField() = default;
    explicit VectorGridField(const GridSpec& g) : grid(g) {
        for (int a = 0; a < g.n; ++a) comp[a].assign(g.npoints(), 0.0);
    }

    Vec3 at(std::size_t i) const {
        Vec3 v{0.0, 0.0, 0.0};
        for (int a = 0; a < grid.n; ++a) v[a] = comp[a][i];
        return v;
    }
};

struct SymMatrixGridField {
    GridSpec grid;
    std::array<std::vector<double>, 6> comp;  // packed upper triangle

    SymMatrixGridField() = default;
    explicit SymMatrixGridField(const GridSpec& g) : grid(g) {
        for (int k = 0; k < sym_size(g.n); ++k) comp[k].assign(g.npoints(), 0.0);
    }

    Sym6 at(std::size_t i) const {
        Sym6 s{};
        for (int k = 0; k < sym_size(grid.n); ++k) s[k] = comp[k][i];
        return s;
    }

    double max_trace_violation() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.npoints(); ++i)
            worst = std::max(worst, std::abs(sym_trace(at(i), grid.n)));
        return worst;
    }
};

inline double sup_norm(const ScalarGridField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

inline double sup_norm(const VectorGridField& f) {
    double m = 0.0;
    for (int a = 0; a < f.grid.n; ++a)
        for (double x : f.comp[a]) m = std::max(m, std::abs(x));
    return m;
}

/// L2 norm over Q by grid quadrature (exact mean times unit volume).
inline double l2_norm(const ScalarGridField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s / static_cast<double>(f.grid.npoints()));
}

inline double l2_norm(const VectorGridField& f) {
    double s = 0.0;
    for (int a = 0; a < f.grid.n; ++a)
        for (double x : f.comp[a]) s += x * x;
    return std::sqrt(s / static_cast<double>(f.grid.npoints()));
}

inline double grid_mean(const ScalarGridField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s / static_cast<double>(f.grid.npoints());
}

} // namespace tci
