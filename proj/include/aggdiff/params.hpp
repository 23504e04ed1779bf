#pragma once

#include "aggdiff/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace aggdiff {

/// Physical parameters of u_t = Δu^m + εΔu − ∇·(u∇c), c = (−Δ)^{−s}u in R^d.
struct ModelParams {
    int d = 3;
    double s = 1.1;
    double m = 1.2;
    double eps = 0.0;
};

/// Every exponent and constant derived from (d, s, m).
struct Exponents {
    double p = 0;      ///< exponent of the norm preserved by the dynamical scaling
    double a = 0;      ///< threshold exponent on ‖u‖_1
    double a0 = 0;     ///< ‖u‖_1 exponent of the variational HLS quotient
    double b0 = 0;     ///< ‖u‖_m exponent of the variational HLS quotient
    double beta = 0;   ///< homogeneity of the interaction bound in ‖u‖_1^a‖u‖_m^m
    double lambda = 0; ///< kernel power d − 2s
    double c_ds = 0;   ///< Riesz normalization constant
    int d = 3;
    double s = 0;
    double m = 0;
};

/// Throws RegimeError unless d ≥ 3, 2 < 2s < d, 2d/(d+2s) < m < 2 − 2s/d and eps ≥ 0.
inline void validate(const ModelParams& p) {
    if (p.d < 3)
        throw RegimeError("d>=3 fails (d=" + std::to_string(p.d) + ")");
    if (!(2.0 < 2.0 * p.s))
        throw RegimeError("2<2s fails");
    if (!(2.0 * p.s < p.d))
        throw RegimeError("2s<d fails");
    const double d = p.d;
    if (!(2.0 * d / (d + 2.0 * p.s) < p.m))
        throw RegimeError("2d/(d+2s)<m fails");
    if (!(p.m < 2.0 - 2.0 * p.s / d))
        throw RegimeError("m<2-2s/d fails");
    if (!(p.eps >= 0.0))
        throw RegimeError("eps>=0 fails");
}

/// c_{d,s} = Γ(d/2 − s) / (π^{d/2} 4^s Γ(s)).
inline double riesz_constant(int d, double s) {
    const double half_d = 0.5 * d;
    if (!(s > 0.0) || !(half_d - s > 0.0))
        throw DomainError("riesz_constant requires 0 < s < d/2");
    return std::tgamma(half_d - s) /
           (std::pow(std::numbers::pi, half_d) * std::pow(4.0, s) * std::tgamma(s));
}

/// Sharp constant of the diagonal Hardy–Littlewood–Sobolev inequality with kernel |x|^{−lambda}.
inline double hls_sharp_constant(int d, double lambda) {
    if (!(lambda > 0.0) || !(lambda < d))
        throw DomainError("hls_sharp_constant requires 0 < lambda < d");
    const double dd = d;
    return std::pow(std::numbers::pi, 0.5 * lambda) * std::tgamma(0.5 * dd - 0.5 * lambda) /
           std::tgamma(dd - 0.5 * lambda) *
           std::pow(std::tgamma(0.5 * dd) / std::tgamma(dd), -1.0 + lambda / dd);
}

inline Exponents derive_exponents(const ModelParams& params) {
    validate(params);
    const double d = params.d;
    const double s = params.s;
    const double m = params.m;
    Exponents e;
    e.d = params.d;
    e.s = s;
    e.m = m;
    e.p = d * (2.0 - m) / (2.0 * s);
    e.beta = (d - 2.0 * s) / (d * (m - 1.0));
    e.a0 = ((d + 2.0 * s) * m - 2.0 * d) / (d * (m - 1.0));
    // b0 = mβ and a(β − 1) = a0 are algebraic identities; deriving through them
    // keeps both exact to rounding where 2d − 2s − dm suffers cancellation.
    e.b0 = m * e.beta;
    e.a = e.a0 / (e.beta - 1.0);
    e.lambda = d - 2.0 * s;
    e.c_ds = riesz_constant(params.d, s);
    return e;
}

} // namespace aggdiff
