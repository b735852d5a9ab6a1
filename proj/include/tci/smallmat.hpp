#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace tci {

// Small fixed-capacity vector / symmetric-matrix values used by the pointwise
// geometry. The spatial dimension n (2 or 3) is a runtime parameter; storage
// is sized for the maximum. Symmetric matrices are stored packed, upper
// triangle row-major: n=2 -> (00,01,11), n=3 -> (00,01,02,11,12,22).

using Vec3 = std::array<double, 3>;
using Sym6 = std::array<double, 6>;

inline constexpr int sym_size(int n) { return n * (n + 1) / 2; }

inline int sym_index(int i, int j, int n) {
    if (i > j) std::swap(i, j);
    // offset of row i = i*n - i*(i-1)/2
    return i * n - i * (i - 1) / 2 + (j - i);
}

inline double dot(const Vec3& a, const Vec3& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec3& a, int n) { return std::sqrt(dot(a, a, n)); }

/// Packed symmetric outer product a (x) b + b (x) a, halved: sym part of a(x)b.
inline Sym6 sym_outer(const Vec3& a, const Vec3& b, int n) {
    Sym6 s{};
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            s[sym_index(i, j, n)] = 0.5 * (a[i] * b[j] + a[j] * b[i]);
    return s;
}

inline double sym_get(const Sym6& s, int i, int j, int n) { return s[sym_index(i, j, n)]; }

inline double sym_trace(const Sym6& s, int n) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += s[sym_index(i, i, n)];
    return t;
}

inline Sym6 sym_axpy(double a, const Sym6& x, const Sym6& y, int n) {
    Sym6 r{};
    for (int k = 0; k < sym_size(n); ++k) r[k] = a * x[k] + y[k];
    return r;
}

inline double sym_max_abs(const Sym6& s, int n) {
    double m = 0.0;
    for (int k = 0; k < sym_size(n); ++k) m = std::max(m, std::abs(s[k]));
    return m;
}

/// Largest eigenvalue of a packed symmetric n x n matrix, closed form.
/// n=2: quadratic formula. n=3: trigonometric method on the shifted matrix.
inline double sym_eig_max(const Sym6& s, int n) {
    if (n == 2) {
        double a = s[0], c = s[1], b = s[2];
        double tr = a + b;
        double disc = std::sqrt((a - b) * (a - b) + 4.0 * c * c);
        return 0.5 * (tr + disc);
    }
    if (n == 3) {
        double a = s[0], b = s[3], c = s[5];
        double d = s[1], e = s[4], f = s[2];
        double p1 = d * d + f * f + e * e;
        double q = (a + b + c) / 3.0;
        if (p1 == 0.0) return std::max({a, b, c});
        double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
        double p = std::sqrt(p2 / 6.0);
        // B = (A - q I)/p, r = det(B)/2 clamped to [-1,1]
        double b00 = (a - q) / p, b11 = (b - q) / p, b22 = (c - q) / p;
        double b01 = d / p, b12 = e / p, b02 = f / p;
        double detB = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
                    + b02 * (b01 * b12 - b11 * b02);
        double r = std::clamp(detB / 2.0, -1.0, 1.0);
        double phi = std::acos(r) / 3.0;
        return q + 2.0 * p * std::cos(phi);
    }
    throw std::invalid_argument("sym_eig_max: n must be 2 or 3");
}

inline double sym_eig_min(const Sym6& s, int n) {
    Sym6 neg{};
    for (int k = 0; k < sym_size(n); ++k) neg[k] = -s[k];
    return -sym_eig_max(neg, n);
}

/// Both eigenvalues (ascending) and the eigenvector of the smaller one, n=2.
inline void sym2_eigen(const Sym6& s, double& lo, double& hi, Vec3& v_lo) {
    double a = s[0], c = s[1], b = s[2];
    double tr = a + b;
    double disc = std::sqrt((a - b) * (a - b) + 4.0 * c * c);
    hi = 0.5 * (tr + disc);
    lo = 0.5 * (tr - disc);
    // eigenvector for lo: (A - hi I) has rank 1; v_lo spans its row space
    double r1x = a - hi, r1y = c;
    double r2x = c, r2y = b - hi;
    double n1 = r1x * r1x + r1y * r1y, n2 = r2x * r2x + r2y * r2y;
    double vx, vy;
    if (n1 >= n2 && n1 > 0.0) { vx = r1x; vy = r1y; }
    else if (n2 > 0.0) { vx = r2x; vy = r2y; }
    else { vx = 1.0; vy = 0.0; }  // multiple eigenvalue, any direction
    double nn = std::sqrt(vx * vx + vy * vy);
    v_lo = {vx / nn, vy / nn, 0.0};
}

/// Operator norm (largest |eigenvalue|) of a packed symmetric matrix.
inline double sym_op_norm(const Sym6& s, int n) {
    return std::max(std::abs(sym_eig_max(s, n)), std::abs(sym_eig_min(s, n)));
}

/// Determinant of a dense m x m matrix, m <= 4 (row-major).
inline double dense_det(const std::array<double, 16>& a, int m) {
    if (m == 1) return a[0];
    if (m == 2) return a[0] * a[3] - a[1] * a[2];
    if (m == 3) {
        return a[0] * (a[4] * a[8] - a[5] * a[7])
             - a[1] * (a[3] * a[8] - a[5] * a[6])
             + a[2] * (a[3] * a[7] - a[4] * a[6]);
    }
    if (m == 4) {
        auto minor3 = [&](int r0, int r1, int r2, int c0, int c1, int c2) {
            return a[4 * r0 + c0] * (a[4 * r1 + c1] * a[4 * r2 + c2] - a[4 * r1 + c2] * a[4 * r2 + c1])
                 - a[4 * r0 + c1] * (a[4 * r1 + c0] * a[4 * r2 + c2] - a[4 * r1 + c2] * a[4 * r2 + c0])
                 + a[4 * r0 + c2] * (a[4 * r1 + c0] * a[4 * r2 + c1] - a[4 * r1 + c1] * a[4 * r2 + c0]);
        };
        return a[0] * minor3(1, 2, 3, 1, 2, 3) - a[1] * minor3(1, 2, 3, 0, 2, 3)
             + a[2] * minor3(1, 2, 3, 0, 1, 3) - a[3] * minor3(1, 2, 3, 0, 1, 2);
    }
    throw std::invalid_argument("dense_det: m must be <= 4");
}

} // namespace tci
