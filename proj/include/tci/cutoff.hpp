#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace tci {

/// Radial bump profiles P(u), u = |y - y0|^2 / r^2, with closed-form
/// derivatives through order 3 in u. The localized waves are never
/// differentiated spectrally across the cutoff; these exact derivatives feed
/// the third-order operator directly.
///
/// plateau_quartic (default): identically 1 on the inner half-ball
/// (u <= 1/4), quartic-power transition (1 - v^4)^4 with v = (4u-1)/3 on the
/// shell, zero outside. C^3 at both seams.
/// quartic: the plain bump (1 - u)^4 on u < 1, no plateau.
enum class CutoffProfile { plateau_quartic, quartic };

inline CutoffProfile cutoff_profile_from_string(const std::string& s) {
    if (s == "plateau_quartic") return CutoffProfile::plateau_quartic;
    if (s == "quartic") return CutoffProfile::quartic;
    throw std::invalid_argument("unknown cutoff profile: " + s);
}

inline const char* to_string(CutoffProfile p) {
    switch (p) {
        case CutoffProfile::plateau_quartic: return "plateau_quartic";
        case CutoffProfile::quartic: return "quartic";
    }
    return "?";
}

struct CutoffDerivs {
    double p0 = 0.0, p1 = 0.0, p2 = 0.0, p3 = 0.0;  // value and d/du derivatives
};

inline CutoffDerivs cutoff_eval(CutoffProfile prof, double u) {
    CutoffDerivs out;
    if (u >= 1.0) return out;
    if (prof == CutoffProfile::quartic) {
        double z = 1.0 - u;
        out.p0 = z * z * z * z;
        out.p1 = -4.0 * z * z * z;
        out.p2 = 12.0 * z * z;
        out.p3 = -24.0 * z;
        return out;
    }
    if (u <= 0.25) {
        out.p0 = 1.0;
        return out;
    }
    const double v = (4.0 * u - 1.0) / 3.0;
    const double dv = 4.0 / 3.0;
    const double z = 1.0 - v * v * v * v;
    const double v2 = v * v, v3 = v2 * v, v5 = v3 * v2, v9 = v5 * v3 * v;
    out.p0 = z * z * z * z;
    double d1 = -16.0 * v3 * z * z * z;
    double d2 = -48.0 * v2 * z * z * z + 192.0 * v3 * v3 * z * z;
    double d3 = -96.0 * v * z * z * z + 1728.0 * v5 * z * z - 1536.0 * v9 * z;
    out.p1 = d1 * dv;
    out.p2 = d2 * dv * dv;
    out.p3 = d3 * dv * dv * dv;
    return out;
}

} // namespace tci
