#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/field.hpp"
#include "aggdiff/params.hpp"
#include "aggdiff/riesz.hpp"

#include <cmath>
#include <vector>

#include <json.hpp>

namespace aggdiff {

/// Every scalar functional of a density at one glance.
struct EnergyReport {
    double entropy_term = 0;     ///< (1/(m−1))∫u^m
    double interaction_term = 0; ///< (c_ds/2) h(u)
    double free_energy = 0;      ///< entropy_term − interaction_term
    double mass = 0;
    double lm_norm = 0;
    double product = 0;          ///< ‖u‖_1^a ‖u‖_m^m
    double barrier = 0;          ///< ‖u‖_1^a F(u)
    double vhls_quotient = 0;    ///< J(u); 0 for the zero field
    double second_moment = 0;
};

/// Dichotomy thresholds derived from the optimal constant.
struct Thresholds {
    double x_star = 0;
    double g_at_xstar = 0;
    double cstar = 0;
};

inline double free_energy(const RadialField& u, const Exponents& e, const ReducedKernel& k) {
    return power_integral(u, e.m) / (e.m - 1.0) - 0.5 * e.c_ds * interaction(u, k);
}

/// ‖u‖_1^a F(u).
inline double barrier_functional(const RadialField& u, const Exponents& e, const ReducedKernel& k) {
    return std::pow(mass(u), e.a) * free_energy(u, e, k);
}

/// μ_i = (m/(m−1))u_i^{m−1} − c_i with cell-averaged c; u^{m−1} is 0 where u = 0.
inline CellValues chemical_potential(const RadialField& u, const Exponents& e, const ReducedKernel& k,
                                     std::size_t rows = static_cast<std::size_t>(-1)) {
    std::vector<double> phi = plain_potential(u, k, rows);
    const double coef = e.m / (e.m - 1.0);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double um = u[i] > 0.0 ? std::pow(u[i], e.m - 1.0) : 0.0;
        phi[i] = coef * um - e.c_ds * phi[i];
    }
    return {u.grid(), std::move(phi)};
}

/// J(u) = h(u) / (‖u‖_1^{a0} ‖u‖_m^{b0}).
inline double vhls_quotient(const RadialField& u, const Exponents& e, const ReducedKernel& k) {
    const double l1 = mass(u);
    if (!(l1 > 0.0))
        throw ZeroField();
    return interaction(u, k) / (std::pow(l1, e.a0) * std::pow(lp_norm(u, e.m), e.b0));
}

/// g(x) = x/(m−1) − (c_ds/2) C* x^β.
inline double barrier_g(double x, const Exponents& e, double cstar) {
    return x / (e.m - 1.0) - 0.5 * e.c_ds * cstar * std::pow(x, e.beta);
}

inline double barrier_g_derivative(double x, const Exponents& e, double cstar) {
    return 1.0 / (e.m - 1.0) - 0.5 * e.c_ds * cstar * e.beta * std::pow(x, e.beta - 1.0);
}

/// Maximizer x_* of g and the maximum g(x_*).
inline Thresholds xstar_threshold(const Exponents& e, double cstar) {
    if (!(cstar > 0.0))
        throw DomainError("xstar_threshold requires cstar > 0");
    if (!(e.beta > 1.0))
        throw DomainError("xstar_threshold requires beta > 1");
    Thresholds t;
    t.cstar = cstar;
    t.x_star = std::pow(2.0 / ((e.m - 1.0) * e.c_ds * cstar * e.beta), 1.0 / (e.beta - 1.0));
    t.g_at_xstar = barrier_g(t.x_star, e, cstar);
    return t;
}

/**
 * @brief Discrete ∫|(2m/(2m−1))∂_r u^{m−1/2} − √u ∂_r c|² dx.
 *
 * Evaluated on interior faces: the gradient by a face difference, √u from the
 * mean of the adjacent cells, ∂_r c from the exact face force.
 */
inline double dissipation(const RadialField& u, const Exponents& e, const ReducedKernel& k) {
    const RadialGrid& g = u.grid();
    const std::size_t n = g.size();
    const std::size_t end = std::min(n, u.support_end() + 1);
    if (end == 0)
        return 0.0;
    const FaceValues f = force(u, k, e.c_ds);
    const double coef = 2.0 * e.m / (2.0 * e.m - 1.0);
    const double h = g.dr();
    double acc = 0.0;
    for (std::size_t face = 1; face < end && face < n; ++face) {
        const double ul = u[face - 1];
        const double ur = u[face];
        const double grad = (std::pow(ur, e.m - 0.5) - std::pow(ul, e.m - 0.5)) / h;
        const double integrand = coef * grad - std::sqrt(0.5 * (ul + ur)) * f.values[face];
        acc += g.face_area(face) * h * integrand * integrand;
    }
    return acc;
}

/// ∫u|∂_r c|² dx, the quantity bounded by C‖u‖_q³ with q = 3d/(d − 2(1 − 2s)).
inline double attraction_energy(const RadialField& u, const Exponents& e, const ReducedKernel& k) {
    const RadialGrid& g = u.grid();
    const std::size_t n = g.size();
    const FaceValues f = force(u, k, e.c_ds);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(u[i] > 0.0))
            continue;
        const double fc = 0.5 * (f.values[i] + f.values[i + 1]);
        acc += u[i] * fc * fc * g.volume(i);
    }
    return acc;
}

/// The Lebesgue exponent q = 3d/(d − 2(1 − 2s)) controlling attraction_energy.
inline double attraction_exponent(const Exponents& e) {
    return 3.0 * e.d / (e.d - 2.0 * (1.0 - 2.0 * e.s));
}

inline EnergyReport energy_report(const RadialField& u, const Exponents& e, const ReducedKernel& k) {
    EnergyReport r;
    r.mass = mass(u);
    const double um = power_integral(u, e.m);
    const double h = interaction(u, k);
    r.lm_norm = std::pow(um, 1.0 / e.m);
    r.entropy_term = um / (e.m - 1.0);
    r.interaction_term = 0.5 * e.c_ds * h;
    r.free_energy = r.entropy_term - r.interaction_term;
    r.product = std::pow(r.mass, e.a) * um;
    r.barrier = std::pow(r.mass, e.a) * r.free_energy;
    r.vhls_quotient = r.mass > 0.0 ? h / (std::pow(r.mass, e.a0) * std::pow(r.lm_norm, e.b0)) : 0.0;
    r.second_moment = second_moment(u);
    return r;
}

inline void to_json(nlohmann::json& j, const EnergyReport& r) {
    j = nlohmann::json{{"entropy_term", r.entropy_term},
                       {"interaction_term", r.interaction_term},
                       {"free_energy", r.free_energy},
                       {"mass", r.mass},
                       {"lm_norm", r.lm_norm},
                       {"product", r.product},
                       {"barrier", r.barrier},
                       {"vhls_quotient", r.vhls_quotient},
                       {"second_moment", r.second_moment}};
}

inline void to_json(nlohmann::json& j, const Thresholds& t) {
    j = nlohmann::json{{"x_star", t.x_star}, {"g_at_xstar", t.g_at_xstar}, {"cstar", t.cstar}};
}

} // namespace aggdiff
