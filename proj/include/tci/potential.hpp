#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "tci/geometry.hpp"
#include "tci/rng.hpp"
#include "tci/smallmat.hpp"

namespace tci {

// Constant-coefficient homogeneous third-order operator A(d) mapping scalar
// potentials to symmetric (n+1) x (n+1) space-time matrix fields M with
//   div_y M = 0,  M^T = M,  M_{(n+1)(n+1)} = 0,  tr M = 0
// for every C^3 input, and A(d)[psi(y.eta)] = Abar psi'''(y.eta) for the
// space-time matrix Abar of a given special direction. The coefficient
// tensor is not taken from any closed formula: it is the solution of the
// linear system expressing those identities monomial by monomial (the
// divergence rows must be annihilated for every direction, not just eta),
// and it is certified after the fact by a randomized polynomial oracle.

namespace detail {

/// Exponent tuples of all monomials of the given total degree over nv vars.
inline std::vector<std::array<int, 4>> monomials(int nv, int degree) {
    std::vector<std::array<int, 4>> out;
    std::array<int, 4> e{0, 0, 0, 0};
    // iterate nondecreasing multisets
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == nv - 1) {
            e[pos] = remaining;
            out.push_back(e);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            e[pos] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    rec(rec, 0, degree);
    return out;
}

inline int mono_code(const std::array<int, 4>& e) {
    return e[0] + 8 * (e[1] + 8 * (e[2] + 8 * e[3]));
}

} // namespace detail

struct OperatorSpec {
    int n = 2;                       // spatial dimension
    int nv = 3;                      // space-time dimension n + 1
    std::array<double, 4> eta{};     // unit wave covector, in ker(Abar)
    std::array<double, 16> abar{};   // target space-time matrix (dense nv x nv)
    std::vector<std::array<int, 4>> monos;   // degree-3 exponent tuples
    std::vector<double> coeff;       // [pair * nmono + mono]
    double solve_residual = 0.0;

    int npairs() const { return nv * (nv + 1) / 2; }
    int pair_index(int i, int j) const {
        if (i > j) std::swap(i, j);
        return i * nv - i * (i - 1) / 2 + (j - i);
    }
    double coefficient(int i, int j, int mono) const {
        return coeff[static_cast<std::size_t>(pair_index(i, j)) * monos.size() + mono];
    }
};

/// Build the operator for the special direction generated by (c, d, rho).
/// Requires |c| = |d| and c != +-d (the wave covector must have a nonzero
/// spatial part, i.e. eta not parallel to e_{n+1}).
inline OperatorSpec potential_operator(const Vec3& c, const Vec3& d, double rho, int n) {
    StateTriple dir = special_direction(c, d, rho, n);   // validates c != d, |c| = |d|
    auto eta = wave_covector(c, d, rho, n);              // validates c != -d
    double eta_space = 0.0;
    for (int i = 0; i < n; ++i) eta_space += eta[i] * eta[i];
    if (eta_space < 1e-20)
        throw std::invalid_argument("potential_operator: wave covector parallel to the time axis");

    OperatorSpec op;
    op.n = n;
    op.nv = n + 1;
    op.eta = eta;
    op.abar = spacetime_matrix(dir);
    op.monos = detail::monomials(op.nv, 3);
    const int nv = op.nv;
    const int nmono = static_cast<int>(op.monos.size());
    const int npair = op.npairs();
    const int nx = npair * nmono;

    std::vector<int> mono_lookup(8 * 8 * 8 * 8, -1);
    for (int m = 0; m < nmono; ++m) mono_lookup[detail::mono_code(op.monos[m])] = m;
    auto quartics = detail::monomials(nv, 4);

    auto var = [&](int i, int j, int mono) { return op.pair_index(i, j) * nmono + mono; };

    const int rows_div = nv * static_cast<int>(quartics.size());
    const int rows_corner = nmono;
    const int rows_trace = nmono;
    const int rows_target = npair;
    const int nrows = rows_div + rows_corner + rows_trace + rows_target;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nrows, nx);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(nrows);
    int row = 0;
    // div_y rows: for row i and each quartic monomial mu, the coefficient of
    // mu in sum_j xi_j T_ij(xi) must vanish
    for (int i = 0; i < nv; ++i) {
        for (const auto& mu : quartics) {
            for (int j = 0; j < nv; ++j) {
                if (mu[j] == 0) continue;
                auto e = mu;
                e[j] -= 1;
                A(row, var(i, j, mono_lookup[detail::mono_code(e)])) += 1.0;
            }
            ++row;
        }
    }
    for (int m = 0; m < nmono; ++m) A(row++, var(nv - 1, nv - 1, m)) = 1.0;  // corner
    for (int m = 0; m < nmono; ++m) {                                        // trace
        for (int i = 0; i < nv; ++i) A(row, var(i, i, m)) += 1.0;
        ++row;
    }
    for (int i = 0; i < nv; ++i) {                                           // T(eta) = Abar
        for (int j = i; j < nv; ++j) {
            for (int m = 0; m < nmono; ++m) {
                double v = 1.0;
                for (int a = 0; a < nv; ++a)
                    for (int p = 0; p < op.monos[m][a]; ++p) v *= eta[a];
                A(row, var(i, j, m)) += v;
            }
            b(row) = op.abar[nv * i + j];
            ++row;
        }
    }

    Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    double scale = std::max(1.0, sym_max_abs(dir.U, n) + norm(dir.m, n));
    op.solve_residual = (A * x - b).lpNorm<Eigen::Infinity>();
    if (op.solve_residual > 1e-10 * scale)
        throw std::runtime_error("potential_operator: constraint system inconsistent");
    op.coeff.assign(x.data(), x.data() + nx);
    return op;
}

/// Apply the operator given the exact third partial derivatives of the input
/// (indexed like op.monos). Returns the dense space-time matrix M.
inline std::array<double, 16> apply_operator(const OperatorSpec& op,
                                             const std::vector<double>& third_partials) {
    std::array<double, 16> M{};
    for (int i = 0; i < op.nv; ++i) {
        for (int j = i; j < op.nv; ++j) {
            double s = 0.0;
            for (std::size_t m = 0; m < op.monos.size(); ++m)
                s += op.coefficient(i, j, static_cast<int>(m)) * third_partials[m];
            M[op.nv * i + j] = s;
            M[op.nv * j + i] = s;
        }
    }
    return M;
}

// ---------------------------------------------------------------------------
// Randomized certification oracle. Dense multivariate polynomials with exact
// partial derivatives stand in for arbitrary C^3 inputs.

namespace detail {

struct Poly {
    int nv = 3;
    int degree = 5;
    std::vector<std::array<int, 4>> exps;   // all monomials of degree <= degree
    std::vector<double> coef;

    static Poly random(int nv, int degree, Rng& rng) {
        Poly p;
        p.nv = nv;
        p.degree = degree;
        for (int d = 0; d <= degree; ++d)
            for (const auto& e : monomials(nv, d)) p.exps.push_back(e);
        p.coef.resize(p.exps.size());
        for (auto& c : p.coef) c = rng.uniform(-1.0, 1.0);
        return p;
    }

    /// Partial derivative d^|e| / dy^e evaluated at y.
    double partial(const std::array<int, 4>& e, const std::array<double, 4>& y) const {
        double sum = 0.0;
        for (std::size_t t = 0; t < exps.size(); ++t) {
            double term = coef[t];
            bool dead = false;
            for (int a = 0; a < nv && !dead; ++a) {
                int p = exps[t][a];
                for (int k = 0; k < e[a]; ++k) term *= p--;
                if (p < 0) dead = true;
                else for (int k = 0; k < p; ++k) term *= y[a];
            }
            if (!dead) sum += term;
        }
        return sum;
    }
};

} // namespace detail

struct CertificationReport {
    double worst_divergence = 0.0;   // relative to coefficient scale
    double worst_corner = 0.0;
    double worst_trace = 0.0;
    double worst_asymmetry = 0.0;    // structurally zero with packed storage
    double worst_planewave = 0.0;
    double worst() const {
        return std::max({worst_divergence, worst_corner, worst_trace,
                         worst_asymmetry, worst_planewave});
    }
};

/// Evaluate the four structural identities and the plane-wave reproduction on
/// random polynomial inputs at random points. Violations are reported
/// relative to the operator's output scale.
inline CertificationReport certify_operator(const OperatorSpec& op, Rng& rng, int trials = 100) {
    CertificationReport rep;
    const int nv = op.nv;
    double scale = 0.0;
    for (int i = 0; i < nv * nv; ++i) scale = std::max(scale, std::abs(op.abar[i]));
    scale = std::max(scale, 1e-8);
    for (int t = 0; t < trials; ++t) {
        auto phi = detail::Poly::random(nv, 5, rng);
        std::array<double, 4> y{};
        for (int a = 0; a < nv; ++a) y[a] = rng.uniform(-1.0, 1.0);
        std::vector<double> thirds(op.monos.size());
        double out_scale = 1e-8;
        for (std::size_t m = 0; m < op.monos.size(); ++m) {
            thirds[m] = phi.partial(op.monos[m], y);
            out_scale = std::max(out_scale, std::abs(thirds[m]));
        }
        auto M = apply_operator(op, thirds);
        rep.worst_corner = std::max(rep.worst_corner, std::abs(M[nv * nv - 1]) / out_scale);
        double tr = 0.0;
        for (int i = 0; i < nv; ++i) tr += M[nv * i + i];
        rep.worst_trace = std::max(rep.worst_trace, std::abs(tr) / out_scale);
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nv; ++j)
                rep.worst_asymmetry = std::max(rep.worst_asymmetry,
                                               std::abs(M[nv * i + j] - M[nv * j + i]) / out_scale);
        // divergence rows need fourth partials of phi
        for (int i = 0; i < nv; ++i) {
            double div = 0.0;
            for (int j = 0; j < nv; ++j) {
                for (std::size_t m = 0; m < op.monos.size(); ++m) {
                    double cij = op.coefficient(i, j, static_cast<int>(m));
                    if (cij == 0.0) continue;
                    auto e = op.monos[m];
                    e[j] += 1;
                    div += cij * phi.partial(e, y);
                }
            }
            rep.worst_divergence = std::max(rep.worst_divergence, std::abs(div) / out_scale);
        }
        // plane-wave reproduction: phi = psi(y.eta) for a random quintic psi
        std::array<double, 6> psi{};
        for (auto& cc : psi) cc = rng.uniform(-1.0, 1.0);
        double s = 0.0;
        for (int a = 0; a < nv; ++a) s += op.eta[a] * y[a];
        double psi3 = 6.0 * psi[3] + 24.0 * psi[4] * s + 60.0 * psi[5] * s * s;
        for (std::size_t m = 0; m < op.monos.size(); ++m) {
            // third partial of psi(y.eta) with exponent e: psi''' * prod eta^e
            double v = psi3;
            for (int a = 0; a < nv; ++a)
                for (int p = 0; p < op.monos[m][a]; ++p) v *= op.eta[a];
            thirds[m] = v;
        }
        auto Mw = apply_operator(op, thirds);
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nv; ++j)
                rep.worst_planewave = std::max(rep.worst_planewave,
                                               std::abs(Mw[nv * i + j] - op.abar[nv * i + j] * psi3)
                                                   / (scale * std::max(1.0, std::abs(psi3))));
    }
    return rep;
}

} // namespace tci
