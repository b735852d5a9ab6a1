#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tci {

/// Constants of the energy differential inequality
/// chi' <= -C1 sqrt(chi) - C2 chi^{3/2}:
/// c0 = sqrt(max rho0), c1 bounds |grad(eps(rho0) + p(rho0)/rho0)|,
/// c2 bounds |grad(1/rho0)|, C1 = 2 c1 c0, C2 = c2 c0.
struct AdmissibilityConstants {
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    double C1 = 0.0, C2 = 0.0;
};

/// Solution of chi' = -C1 chi^{1/2} - C2 chi^{3/2} with chi(0) = chi0 > 0,
/// taken with equality (the longest admissible profile). Closed form via
/// u = sqrt(chi), u' = -(C1 + C2 u^2)/2, clipped at chi = 0.
struct ChiProfile {
    double chi0 = 1.0;
    double C1 = 0.0, C2 = 0.0;
    double t_max = 1.0;

    enum class Branch { constant, linear_sqrt, rational, tangent };

    Branch branch() const {
        bool b1 = C1 > 0.0, b2 = C2 > 0.0;
        if (!b1 && !b2) return Branch::constant;
        if (b1 && !b2) return Branch::linear_sqrt;
        if (!b1 && b2) return Branch::rational;
        return Branch::tangent;
    }

    static const char* branch_name(Branch b) {
        switch (b) {
            case Branch::constant: return "constant";
            case Branch::linear_sqrt: return "linear_sqrt";
            case Branch::rational: return "rational";
            case Branch::tangent: return "tangent";
        }
        return "?";
    }

    /// Time at which chi hits zero; +inf when it never does.
    double extinction_time() const {
        double u0 = std::sqrt(chi0);
        switch (branch()) {
            case Branch::constant: return std::numeric_limits<double>::infinity();
            case Branch::linear_sqrt: return 2.0 * u0 / C1;
            case Branch::rational: return std::numeric_limits<double>::infinity();
            case Branch::tangent: {
                double th0 = std::atan(u0 * std::sqrt(C2 / C1));
                return 2.0 * th0 / std::sqrt(C1 * C2);
            }
        }
        return std::numeric_limits<double>::infinity();
    }

    double sqrt_value(double t) const {
        double u0 = std::sqrt(chi0);
        switch (branch()) {
            case Branch::constant: return u0;
            case Branch::linear_sqrt: return std::max(0.0, u0 - 0.5 * C1 * t);
            case Branch::rational: {
                double den = 1.0 + 0.5 * C2 * u0 * t;
                if (den <= 0.0)
                    throw std::domain_error("ChiProfile: backward extension blows up before t");
                return u0 / den;
            }
            case Branch::tangent: {
                double s = std::sqrt(C1 * C2);
                double th0 = std::atan(u0 * std::sqrt(C2 / C1));
                double th = th0 - 0.5 * s * t;
                if (th <= 0.0) return 0.0;
                if (th >= 0.5 * M_PI)
                    throw std::domain_error("ChiProfile: backward extension blows up before t");
                return std::sqrt(C1 / C2) * std::tan(th);
            }
        }
        return 0.0;
    }

    double value(double t) const {
        double u = sqrt_value(t);
        return u * u;
    }

    /// chi'(t) = -C1 sqrt(chi) - C2 chi^{3/2} (0 after extinction).
    double derivative(double t) const {
        double u = sqrt_value(t);
        if (u <= 0.0) return 0.0;
        return -C1 * u - C2 * u * u * u;
    }
};

inline ChiProfile chi_solve(double chi0, const AdmissibilityConstants& C, double t_max) {
    if (!(chi0 > 0.0)) throw std::invalid_argument("chi_solve: chi0 must be positive");
    ChiProfile p;
    p.chi0 = chi0;
    p.C1 = C.C1;
    p.C2 = C.C2;
    p.t_max = t_max;
    return p;
}

/// Classical RK4 on chi' = -C1 sqrt(chi) - C2 chi^{3/2}, clipped at zero.
/// Cross-validates the closed form; also the representation of record for
/// tabulated runs that want sampled profiles.
inline std::vector<double> chi_rk4(const ChiProfile& p, double t_end, double step) {
    auto f = [&](double chi) {
        if (chi <= 0.0) return 0.0;
        double u = std::sqrt(chi);
        return -p.C1 * u - p.C2 * u * u * u;
    };
    std::vector<double> out;
    double chi = p.chi0;
    out.push_back(chi);
    long nsteps = std::lround(t_end / step);
    for (long i = 0; i < nsteps; ++i) {
        double k1 = f(chi);
        double k2 = f(std::max(0.0, chi + 0.5 * step * k1));
        double k3 = f(std::max(0.0, chi + 0.5 * step * k2));
        double k4 = f(std::max(0.0, chi + step * k3));
        chi = std::max(0.0, chi + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        out.push_back(chi);
    }
    return out;
}

/// First time chi(t) = threshold, by closed-form inversion. Requires
/// chi0 > threshold; +inf (never) is mapped to t_max by the caller.
inline double maximal_time(const ChiProfile& p, double threshold) {
    if (!(p.chi0 > threshold))
        throw std::invalid_argument("maximal_time: requires chi0 > threshold");
    double u0 = std::sqrt(p.chi0), ut = std::sqrt(std::max(0.0, threshold));
    switch (p.branch()) {
        case ChiProfile::Branch::constant: return std::numeric_limits<double>::infinity();
        case ChiProfile::Branch::linear_sqrt: return 2.0 * (u0 - ut) / p.C1;
        case ChiProfile::Branch::rational:
            if (threshold <= 0.0) return std::numeric_limits<double>::infinity();
            return 2.0 * (1.0 / ut - 1.0 / u0) / p.C2;
        case ChiProfile::Branch::tangent: {
            double s = std::sqrt(p.C1 * p.C2);
            double th0 = std::atan(u0 * std::sqrt(p.C2 / p.C1));
            double tht = std::atan(ut * std::sqrt(p.C2 / p.C1));
            return 2.0 * (th0 - tht) / s;
        }
    }
    return std::numeric_limits<double>::infinity();
}

/// Bisection cross-check of maximal_time on the closed-form profile.
inline double maximal_time_bisect(const ChiProfile& p, double threshold, double t_hi) {
    if (p.value(t_hi) > threshold) return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = t_hi;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (p.value(mid) > threshold) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Time profile of the modulus level chi used by a run: a positive constant
/// (the stationary construction), a decreasing ODE profile (the admissible
/// construction), or either of those reflected across t = T_reflect (the
/// time-symmetric initial-data construction on [0, 2 T_reflect]).
class ChiFn {
public:
    static ChiFn constant(double v) {
        ChiFn f;
        f.kind_ = Kind::Constant;
        f.const_ = v;
        return f;
    }
    static ChiFn ode(const ChiProfile& p) {
        ChiFn f;
        f.kind_ = Kind::Ode;
        f.profile_ = p;
        return f;
    }
    ChiFn reflected(double T_reflect) const {
        ChiFn f = *this;
        f.reflect_at_ = T_reflect;
        return f;
    }

    double value(double t) const {
        double tt = fold(t);
        return kind_ == Kind::Constant ? const_ : profile_.value(tt);
    }
    double derivative(double t) const {
        double tt = fold(t);
        return kind_ == Kind::Constant ? 0.0 : profile_.derivative(tt);
    }
    bool is_constant() const { return kind_ == Kind::Constant; }
    double constant_value() const { return const_; }
    const ChiProfile& profile() const { return profile_; }
    double reflect_at() const { return reflect_at_; }

private:
    enum class Kind { Constant, Ode };
    Kind kind_ = Kind::Constant;
    double const_ = 1.0;
    ChiProfile profile_;
    double reflect_at_ = std::numeric_limits<double>::infinity();

    double fold(double t) const {
        return t > reflect_at_ ? t - 2.0 * reflect_at_ : t;
    }
};

} // namespace tci
