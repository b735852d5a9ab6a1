#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tci/rng.hpp"
#include "tci/smallmat.hpp"

namespace tci {

// Pointwise geometry of the differential inclusion behind the semi-stationary
// isentropic system: the functional e, the constraint sets K_{rho,chi} and
// their convex hulls, the wave cone of the linear system, special directions,
// and admissible segments.

// Tolerance ladder: algebraic identities 1e-12, geometric membership 1e-10,
// recursive decompositions 1e-6.
inline constexpr double tol_algebraic = 1e-12;
inline constexpr double tol_membership = 1e-10;
inline constexpr double tol_decompose = 1e-6;

/// A pointwise state (m, U, q) of the augmented linear system.
struct StateTriple {
    int n = 2;
    Vec3 m{0.0, 0.0, 0.0};
    Sym6 U{};       // trace-free symmetric, packed
    double q = 0.0;
};

/// Parameters (rho, chi) of the slice K_{rho,chi}, plus the pressure value
/// p(rho) that fixes the hyperplane q = p(rho) + chi/n.
struct ConstraintParams {
    int n = 2;
    double rho = 1.0;
    double chi = 1.0;
    double pval = 0.0;   // p(rho)

    double q_level() const { return pval + chi / n; }
    double e_level() const { return chi / n; }

    void validate() const {
        if (!(rho > 0.0) || !(chi > 0.0))
            throw std::invalid_argument("ConstraintParams: rho and chi must be positive");
    }
};

/// e(rho, m, U) = lambda_max(m (x) m / rho - U). Convex in (m, U) for fixed
/// rho; its chi/n-sublevel set in the pressure hyperplane is the convex hull
/// of K_{rho,chi}.
inline double e_value(double rho, const Vec3& m, const Sym6& U, int n) {
    if (!(rho > 0.0)) throw std::invalid_argument("e_value: rho must be positive");
    Sym6 S{};
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            S[sym_index(i, j, n)] = m[i] * m[j] / rho - U[sym_index(i, j, n)];
    return sym_eig_max(S, n);
}

enum class HullPosition { inside_hint, on_boundary, outside, wrong_pressure };

inline HullPosition in_hull(const ConstraintParams& params, const StateTriple& z) {
    params.validate();
    if (std::abs(z.q - params.q_level()) > tol_membership) return HullPosition::wrong_pressure;
    double e = e_value(params.rho, z.m, z.U, z.n);
    double level = params.e_level();
    if (e < level - tol_membership) return HullPosition::inside_hint;
    if (e > level + tol_membership) return HullPosition::outside;
    return HullPosition::on_boundary;
}

/// Signed margin chi/n - e; positive inside the hyperinterior.
inline double hint_margin(const ConstraintParams& params, const Vec3& m, const Sym6& U) {
    return params.e_level() - e_value(params.rho, m, U, params.n);
}

/// Space-time matrix of a state under the block identification
/// M = [[U + q I, m], [m^T, 0]], symmetric (n+1) x (n+1).
inline std::array<double, 16> spacetime_matrix(const StateTriple& z) {
    const int n = z.n, nv = n + 1;
    std::array<double, 16> M{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M[nv * i + j] = sym_get(z.U, i, j, n) + (i == j ? z.q : 0.0);
    for (int i = 0; i < n; ++i) {
        M[nv * i + n] = z.m[i];
        M[nv * n + i] = z.m[i];
    }
    M[nv * n + n] = 0.0;
    return M;
}

/// Wave cone membership: determinant of the space-time matrix vanishes
/// (|det| <= 1e-10 * scale^{n+1}, scale = largest entry magnitude).
inline bool in_wave_cone(const StateTriple& z) {
    const int nv = z.n + 1;
    auto M = spacetime_matrix(z);
    double scale = 0.0;
    for (int i = 0; i < nv * nv; ++i) scale = std::max(scale, std::abs(M[i]));
    if (scale == 0.0) return true;
    std::array<double, 16> D{};
    for (int i = 0; i < nv; ++i)
        for (int j = 0; j < nv; ++j) D[4 * i + j] = M[nv * i + j];
    double det = dense_det(D, nv);
    return std::abs(det) <= tol_membership * std::pow(scale, nv);
}

/// Special wave-cone direction (c - d, (c(x)c - d(x)d)/rho, 0) for |c| = |d|.
/// Carries zero pressure component; kernel vector (c+d, -(|c|^2 + c.d)/rho).
inline StateTriple special_direction(const Vec3& c, const Vec3& d, double rho, int n) {
    if (!(rho > 0.0)) throw std::invalid_argument("special_direction: rho must be positive");
    double nc = norm(c, n), nd = norm(d, n);
    if (std::abs(nc - nd) > tol_algebraic * std::max(1.0, nc))
        throw std::invalid_argument("special_direction: |c| must equal |d|");
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff = std::max(diff, std::abs(c[i] - d[i]));
    if (diff <= tol_algebraic * std::max(1.0, nc))
        throw std::invalid_argument("special_direction: c must differ from d");
    StateTriple dir;
    dir.n = n;
    for (int i = 0; i < n; ++i) dir.m[i] = c[i] - d[i];
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            dir.U[sym_index(i, j, n)] = (c[i] * c[j] - d[i] * d[j]) / rho;
    dir.q = 0.0;
    return dir;
}

/// Space-time wave covector of the special direction: eta = (c + d, -(|c|^2 + c.d)/rho),
/// a kernel vector of the direction's space-time matrix. Returned normalized.
inline std::array<double, 4> wave_covector(const Vec3& c, const Vec3& d, double rho, int n) {
    std::array<double, 4> eta{};
    for (int i = 0; i < n; ++i) eta[i] = c[i] + d[i];
    eta[n] = -(dot(c, c, n) + dot(c, d, n)) / rho;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) s += eta[i] * eta[i];
    if (s < 1e-28) throw std::invalid_argument("wave_covector: degenerate pair (c ~ -d)");
    double inv = 1.0 / std::sqrt(s);
    for (int i = 0; i <= n; ++i) eta[i] *= inv;
    return eta;
}

/// An admissible segment [center - dir, center + dir] in the hyperinterior,
/// parallel to the special direction of its generators c, d on the sphere
/// |c|^2 = |d|^2 = rho*chi with c != +-d.
struct AdmissibleSegment {
    StateTriple center;
    StateTriple direction;       // (m_bar, U_bar, 0), already scaled
    Vec3 c{}, d{};               // generators
    double half_param = 0.0;     // scale applied to the unit-generator direction
    double ratio = 0.0;          // |m_bar| sqrt(rho chi) / (rho chi - |m|^2)
};

struct SegmentSearchOptions {
    int samples = 64;
    double shrink = 0.85;        // fraction of the bisected reach that is used
    double min_pair_sep = 0.15;  // reject |c-d| or |c+d| below this times sqrt(rho chi)
};

namespace detail {
/// Largest t >= 0 with e(center + t*dir) <= level on the given side (+1/-1),
/// by doubling bracket and bisection. e is convex along the line, so the
/// sublevel set is an interval around t = 0.
inline double reach_along(const ConstraintParams& params, const StateTriple& z,
                          const StateTriple& dir, double side) {
    const int n = params.n;
    auto e_at = [&](double t) {
        Vec3 m = z.m;
        Sym6 U = z.U;
        for (int i = 0; i < n; ++i) m[i] += side * t * dir.m[i];
        for (int k = 0; k < sym_size(n); ++k) U[k] += side * t * dir.U[k];
        return e_value(params.rho, m, U, n);
    };
    const double level = params.e_level();
    if (e_at(0.0) >= level) return 0.0;
    double hi = 0.25;
    int guard = 0;
    while (e_at(hi) < level && guard++ < 60) hi *= 2.0;
    double lo = guard >= 60 ? hi : 0.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (e_at(mid) < level) lo = mid;
        else hi = mid;
    }
    return lo;
}
} // namespace detail

/// Randomized search for an admissible segment centered at z: sample
/// generator pairs uniformly on the sphere |c|^2 = rho*chi, bisect the reach
/// along each special direction, keep the pair maximizing the guaranteed
/// half-length |m_bar|.
inline std::optional<AdmissibleSegment> admissible_segment(
    const ConstraintParams& params, const StateTriple& z, Rng& rng,
    const SegmentSearchOptions& opts = {}) {
    params.validate();
    if (in_hull(params, z) != HullPosition::inside_hint)
        throw std::invalid_argument("admissible_segment: center must lie in the hyperinterior");
    const int n = params.n;
    const double R = std::sqrt(params.rho * params.chi);
    std::optional<AdmissibleSegment> best;
    for (int s = 0; s < opts.samples; ++s) {
        auto cu = rng.sphere_dir(n);
        auto du = rng.sphere_dir(n);
        Vec3 c{}, d{};
        for (int i = 0; i < n; ++i) {
            c[i] = R * cu[i];
            d[i] = R * du[i];
        }
        Vec3 cmd{}, cpd{};
        for (int i = 0; i < n; ++i) {
            cmd[i] = c[i] - d[i];
            cpd[i] = c[i] + d[i];
        }
        if (norm(cmd, n) < opts.min_pair_sep * R || norm(cpd, n) < opts.min_pair_sep * R)
            continue;
        StateTriple dir = special_direction(c, d, params.rho, n);
        double tp = detail::reach_along(params, z, dir, +1.0);
        double tm = detail::reach_along(params, z, dir, -1.0);
        double t = opts.shrink * std::min(tp, tm);
        if (t <= 0.0) continue;
        double mbar = t * norm(dir.m, n);
        if (!best || mbar > norm(best->direction.m, n)) {
            AdmissibleSegment seg;
            seg.center = z;
            seg.direction.n = n;
            for (int i = 0; i < n; ++i) seg.direction.m[i] = t * dir.m[i];
            for (int k = 0; k < sym_size(n); ++k) seg.direction.U[k] = t * dir.U[k];
            seg.direction.q = 0.0;
            seg.c = c;
            seg.d = d;
            seg.half_param = t;
            double deficit = params.rho * params.chi - dot(z.m, z.m, n);
            seg.ratio = deficit > 0.0 ? mbar * R / deficit : 0.0;
            best = seg;
        }
    }
    return best;
}

/// One weighted leaf of a hull decomposition; the point lies in K_{rho,chi}.
struct HullLeaf {
    double weight = 0.0;
    StateTriple point;
};

/// The K point generated by c on the sphere |c|^2 = rho chi:
/// (c, c(x)c/rho - (|c|^2/(n rho)) I, p + chi/n).
inline StateTriple k_point(const ConstraintParams& params, const Vec3& c) {
    const int n = params.n;
    StateTriple z;
    z.n = n;
    z.m = c;
    double c2 = dot(c, c, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            z.U[sym_index(i, j, n)] = c[i] * c[j] / params.rho - (i == j ? c2 / (n * params.rho) : 0.0);
    z.q = params.q_level();
    return z;
}

/// Distance of z from K_{rho,chi}: max of the modulus defect, the distance of
/// U from the graph value, and the pressure defect.
inline double k_distance(const ConstraintParams& params, const StateTriple& z) {
    const int n = params.n;
    double dmod = std::abs(dot(z.m, z.m, n) - params.rho * params.chi);
    StateTriple g = k_point(params, z.m);
    double dU = 0.0;
    for (int k = 0; k < sym_size(n); ++k) dU = std::max(dU, std::abs(z.U[k] - g.U[k]));
    double dq = std::abs(z.q - params.q_level());
    return std::max({dmod, dU, dq});
}

namespace detail {
/// Exact two-point split of a boundary-face state (n = 2 only): for a state
/// with e = chi/n and |m|^2 < rho*chi, the matrix (chi/n) I - S is rank one
/// along the eigenvector u of the smaller eigenvalue of S, and the two-atom
/// measure on the sphere matching first and second moments is closed form:
/// c = m + a u, d = m - b u with a = -beta + s, b = beta + s,
/// beta = m.u, s = sqrt(beta^2 + rho*chi - |m|^2).
inline void face_split(const ConstraintParams& params, const StateTriple& z,
                       std::vector<HullLeaf>& out, double weight) {
    const int n = 2;
    Sym6 S{};
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            S[sym_index(i, j, n)] = z.m[i] * z.m[j] / params.rho - z.U[sym_index(i, j, n)];
    double lo = 0.0, hi = 0.0;
    Vec3 u{};
    sym2_eigen(S, lo, hi, u);
    double beta = dot(z.m, u, n);
    double R2 = params.rho * params.chi - dot(z.m, z.m, n);
    if (R2 < 0.0) R2 = 0.0;
    double s = std::sqrt(beta * beta + R2);
    double a = -beta + s, b = beta + s;
    Vec3 c{}, d{};
    for (int i = 0; i < n; ++i) {
        c[i] = z.m[i] + a * u[i];
        d[i] = z.m[i] - b * u[i];
    }
    double mu = b / (a + b);
    out.push_back({weight * mu, k_point(params, c)});
    out.push_back({weight * (1.0 - mu), k_point(params, d)});
}

inline void decompose_rec(const ConstraintParams& params, const StateTriple& z, Rng& rng,
                          std::vector<HullLeaf>& out, double weight, int depth, int max_depth) {
    const int n = params.n;
    double R2 = params.rho * params.chi - dot(z.m, z.m, n);
    if (std::abs(R2) <= tol_decompose * params.rho * params.chi) {
        // already on the modulus sphere: inside the closed hull this forces
        // the graph value of U, so the state is (within tolerance) in K
        out.push_back({weight, z});
        return;
    }
    double e = e_value(params.rho, z.m, z.U, n);
    if (e >= params.e_level() - tol_decompose) {
        face_split(params, z, out, weight);
        return;
    }
    if (depth >= max_depth)
        throw std::runtime_error("hull_decompose: max recursion depth exceeded (tolerance too tight)");
    // interior point: pick the longest special-direction chord found by
    // sampling, extend it to the boundary of the hull on both sides
    SegmentSearchOptions opts;
    opts.samples = 48;
    opts.shrink = 1.0;
    auto seg = admissible_segment(params, z, rng, opts);
    if (!seg) throw std::runtime_error("hull_decompose: no usable chord direction found");
    StateTriple dir = special_direction(seg->c, seg->d, params.rho, n);
    double tp = reach_along(params, z, dir, +1.0);
    double tm = reach_along(params, z, dir, -1.0);
    auto at = [&](double t) {
        StateTriple w = z;
        for (int i = 0; i < n; ++i) w.m[i] += t * dir.m[i];
        for (int k = 0; k < sym_size(n); ++k) w.U[k] += t * dir.U[k];
        return w;
    };
    // z = wp * z(tp) + (1 - wp) * z(-tm)
    double wp = tm / (tp + tm);
    decompose_rec(params, at(tp), rng, out, weight * wp, depth + 1, max_depth);
    decompose_rec(params, at(-tm), rng, out, weight * (1.0 - wp), depth + 1, max_depth);
}
} // namespace detail

/// Decompose a point of the convex hull into a convex combination of points
/// of K_{rho,chi}; consecutive construction steps differ by wave-cone
/// directions (an interior chord along a special direction, then an exact
/// rank-one boundary split). n = 2 only.
inline std::vector<HullLeaf> hull_decompose(const ConstraintParams& params, const StateTriple& z,
                                            Rng& rng, int max_depth = 8) {
    params.validate();
    if (params.n != 2)
        throw std::invalid_argument("hull_decompose: implemented for n = 2");
    auto pos = in_hull(params, z);
    if (pos == HullPosition::outside || pos == HullPosition::wrong_pressure)
        throw std::invalid_argument("hull_decompose: point is not in the hull");
    std::vector<HullLeaf> out;
    detail::decompose_rec(params, z, rng, out, 1.0, 0, max_depth);
    return out;
}

/// Weighted recombination of decomposition leaves, for verification.
inline StateTriple recombine(const std::vector<HullLeaf>& leaves, int n) {
    StateTriple z;
    z.n = n;
    for (const auto& leaf : leaves) {
        for (int i = 0; i < n; ++i) z.m[i] += leaf.weight * leaf.point.m[i];
        for (int k = 0; k < sym_size(n); ++k) z.U[k] += leaf.weight * leaf.point.U[k];
        z.q += leaf.weight * leaf.point.q;
    }
    return z;
}

} // namespace tci
