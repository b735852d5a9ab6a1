#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tci {

/// Barotropic pressure law p(rho), strictly increasing and C1 on the density
/// range in use. Either polytropic p = k rho^gamma or a tabulated strictly
/// increasing C1 law (monotone cubic Hermite through the samples).
class PressureLaw {
public:
    static PressureLaw polytropic(double k, double gamma) {
        if (!(k > 0.0) || !(gamma > 1.0))
            throw std::invalid_argument("polytropic law requires k > 0, gamma > 1");
        PressureLaw law;
        law.kind_ = Kind::Polytropic;
        law.k_ = k;
        law.gamma_ = gamma;
        return law;
    }

    static PressureLaw tabulated(std::vector<double> rho, std::vector<double> p) {
        if (rho.size() != p.size() || rho.size() < 2)
            throw std::invalid_argument("tabulated law needs matching arrays, size >= 2");
        for (std::size_t i = 1; i < rho.size(); ++i)
            if (!(rho[i] > rho[i - 1]) || !(p[i] > p[i - 1]))
                throw std::invalid_argument("tabulated law must be strictly increasing");
        PressureLaw law;
        law.kind_ = Kind::Tabulated;
        law.rho_ = std::move(rho);
        law.p_ = std::move(p);
        law.build_slopes();
        return law;
    }

    double operator()(double rho) const { return value(rho); }

    double value(double rho) const {
        if (kind_ == Kind::Polytropic) return k_ * std::pow(rho, gamma_);
        return hermite(rho, false);
    }

    double derivative(double rho) const {
        if (kind_ == Kind::Polytropic) return k_ * gamma_ * std::pow(rho, gamma_ - 1.0);
        return hermite(rho, true);
    }

    bool is_polytropic() const { return kind_ == Kind::Polytropic; }
    double poly_k() const { return k_; }
    double poly_gamma() const { return gamma_; }

private:
    enum class Kind { Polytropic, Tabulated };
    Kind kind_ = Kind::Polytropic;
    double k_ = 1.0, gamma_ = 2.0;
    std::vector<double> rho_, p_, slope_;

    void build_slopes() {
        // Fritsch-Carlson monotone slopes
        std::size_t m = rho_.size();
        std::vector<double> d(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) d[i] = (p_[i + 1] - p_[i]) / (rho_[i + 1] - rho_[i]);
        slope_.assign(m, 0.0);
        slope_[0] = d[0];
        slope_[m - 1] = d[m - 2];
        for (std::size_t i = 1; i + 1 < m; ++i) slope_[i] = 0.5 * (d[i - 1] + d[i]);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            double a = slope_[i] / d[i], b = slope_[i + 1] / d[i];
            double s = a * a + b * b;
            if (s > 9.0) {
                double t = 3.0 / std::sqrt(s);
                slope_[i] = t * a * d[i];
                slope_[i + 1] = t * b * d[i];
            }
        }
    }

    double hermite(double rho, bool deriv) const {
        std::size_t m = rho_.size();
        if (rho <= rho_[0] || rho >= rho_[m - 1]) {
            // linear extension keeps the law increasing outside the table
            std::size_t i = rho <= rho_[0] ? 0 : m - 1;
            if (deriv) return slope_[i];
            return p_[i] + slope_[i] * (rho - rho_[i]);
        }
        auto it = std::upper_bound(rho_.begin(), rho_.end(), rho);
        std::size_t i = static_cast<std::size_t>(it - rho_.begin()) - 1;
        double hstep = rho_[i + 1] - rho_[i];
        double t = (rho - rho_[i]) / hstep;
        double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
        double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
        if (!deriv)
            return h00 * p_[i] + h10 * hstep * slope_[i] + h01 * p_[i + 1] + h11 * hstep * slope_[i + 1];
        double d00 = (6 * t * t - 6 * t) / hstep, d10 = (3 * t * t - 4 * t + 1);
        double d01 = (-6 * t * t + 6 * t) / hstep, d11 = (3 * t * t - 2 * t);
        return d00 * p_[i] + d10 * slope_[i] + d01 * p_[i + 1] + d11 * slope_[i + 1];
    }
};

namespace detail {
inline double simpson(const PressureLaw& law, double a, double b) {
    double m = 0.5 * (a + b);
    auto f = [&](double s) { return law.value(s) / (s * s); };
    return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

inline double adaptive(const PressureLaw& law, double a, double b, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double left = simpson(law, a, m), right = simpson(law, m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive(law, a, m, left, tol / 2.0, depth - 1)
         + adaptive(law, m, b, right, tol / 2.0, depth - 1);
}
} // namespace detail

/// Internal energy from the law p(r) = r^2 eps'(r):
/// eps(rho) = integral_{rho_ref}^{rho} p(s)/s^2 ds.
/// Closed form for polytropic laws, adaptive Simpson otherwise.
inline double internal_energy(const PressureLaw& law, double rho, double rho_ref) {
    if (!(rho > 0.0) || !(rho_ref > 0.0))
        throw std::invalid_argument("internal_energy: density must be positive");
    if (law.is_polytropic()) {
        double k = law.poly_k(), g = law.poly_gamma();
        if (std::abs(g - 1.0) < 1e-14) return k * (std::log(rho) - std::log(rho_ref));
        return k / (g - 1.0) * (std::pow(rho, g - 1.0) - std::pow(rho_ref, g - 1.0));
    }
    if (rho == rho_ref) return 0.0;
    double a = std::min(rho, rho_ref), b = std::max(rho, rho_ref);
    double whole = detail::simpson(law, a, b);
    double val = detail::adaptive(law, a, b, whole, 1e-13, 48);
    return rho >= rho_ref ? val : -val;
}

} // namespace tci
