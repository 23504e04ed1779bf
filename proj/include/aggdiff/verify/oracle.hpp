#pragma once

// Brute-force quadrature references, written without the reduced kernel so
// they can check it independently.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace aggdiff::verify {

using Profile = std::function<double(double)>;

/// ∫_lo^hi f with an adaptive 61-point Gauss–Kronrod rule.
inline double integrate(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-11) {
    if (!(hi > lo))
        return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, tol);
}

/// ∫_lo^hi f split at every break inside the interval.
inline double integrate_split(const std::function<double(double)>& f, double lo, double hi,
                              std::vector<double> breaks, double tol = 1e-11) {
    breaks.push_back(lo);
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = std::max(lo, breaks[k]);
        const double b = std::min(hi, breaks[k + 1]);
        if (b > a)
            acc += integrate(f, a, b, tol);
    }
    return acc;
}

/// 4π∫_0^R r² u(r) dr.
inline double radial_mass(const Profile& u, double R, std::vector<double> breaks = {}) {
    return integrate_split([&](double r) { return 4.0 * std::numbers::pi * r * r * u(r); }, 0.0, R, breaks);
}

/// 2π ∫_{−1}^{1} (r² + r'² − 2rr't)^{−λ/2} dt by tanh–sinh, which tolerates the endpoint singularity.
inline double angular_average(double r, double rp, double lambda, double eps = 0.0) {
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double t) {
        const double d2 = std::max(r * r + rp * rp - 2.0 * r * rp * t, 0.0) + eps * eps;
        return std::pow(d2, -0.5 * lambda);
    };
    return 2.0 * std::numbers::pi * ts.integrate(f, -1.0, 1.0);
}

/// ∫ u(y) (|x−y|² + ε²)^{−λ/2} dy at |x| = r for u supported in [0, R].
inline double potential(const Profile& u, double r, double lambda, double R, std::vector<double> breaks = {},
                        double eps = 0.0) {
    breaks.push_back(r);
    return integrate_split([&](double rp) { return rp * rp * u(rp) * angular_average(r, rp, lambda, eps); }, 0.0,
                           R, breaks, 1e-9);
}

/// ∬u(x)u(y)|x−y|^{−λ}dxdy by a triple nested quadrature (outer radius, inner radius, angle).
inline double interaction(const Profile& u, double lambda, double R, std::vector<double> breaks = {}) {
    return integrate_split(
        [&](double r) { return 4.0 * std::numbers::pi * r * r * u(r) * potential(u, r, lambda, R, breaks); }, 0.0, R,
        breaks, 1e-8);
}

/// Central difference of the oracle potential in r.
inline double potential_derivative(const Profile& u, double r, double lambda, double R, double h,
                                   std::vector<double> breaks = {}) {
    return (potential(u, r + h, lambda, R, breaks) - potential(u, r - h, lambda, R, breaks)) / (2.0 * h);
}

} // namespace aggdiff::verify
