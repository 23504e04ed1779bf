#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/field.hpp"
#include "aggdiff/functionals.hpp"
#include "aggdiff/params.hpp"
#include "aggdiff/riesz.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace aggdiff {

enum class ExtremalInit { Bump, Gaussian };

struct ExtremalOptions {
    double tol_j = 1e-9;     ///< relative change of J between iterations
    double tol_res = 1e-4;   ///< Euler–Lagrange residual target
    std::size_t max_iter = 20000;
    double damping = 0.5;    ///< initial ω; halved while J would decrease
    double min_damping = 1e-6;
    ExtremalInit init = ExtremalInit::Bump;
    /// Initial support (bump) or width (Gaussian) as a fraction of r_max.
    double init_width = 0.125;
    /// Coarsen the grid when the support exceeds this fraction of r_max.
    double enlarge_at = 0.8;
};

/// Normalized maximizer W of the variational HLS quotient.
struct ExtremalProfile {
    RadialField w;
    double cstar = 0;
    double support_radius = 0;
    double el_residual = 0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> j_history;  ///< J after every accepted iteration
    /// Positions in j_history where the grid was coarsened; J may jump there.
    std::vector<std::size_t> enlargement_marks;
    std::size_t enlargements = 0;
};

/// solve_extremal ran out of iterations; the best profile so far is attached.
class NoConvergence : public NotConverged {
public:
    NoConvergence(const std::string& what, ExtremalProfile best)
        : NotConverged(what), best_(std::move(best)) {}
    const ExtremalProfile& best() const { return best_; }

private:
    ExtremalProfile best_;
};

/// Largest cell centre with w > 1e−12‖w‖_∞.
inline double support_radius(const RadialField& w) {
    const double cut = 1e-12 * lp_norm(w, INFINITY);
    for (std::size_t i = w.size(); i > 0; --i)
        if (w[i - 1] > cut)
            return w.grid().center(i - 1);
    return 0.0;
}

/// sup over the support of |2φ − b0 C w^{m−1} − a0 C| / (a0 C) for a given plain potential φ.
inline double el_residual_with(const RadialField& w, const std::vector<double>& phi, double cstar,
                               const Exponents& e) {
    const std::size_t end = w.support_end();
    if (end == 0)
        throw ZeroField("Euler-Lagrange residual of the zero field");
    if (phi.size() < end)
        throw GridMismatch("potential does not cover the support");
    double worst = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
        if (!(w[i] > 0.0))
            continue;
        const double r = 2.0 * phi[i] - e.b0 * cstar * std::pow(w[i], e.m - 1.0) - e.a0 * cstar;
        worst = std::max(worst, std::abs(r));
    }
    return worst / (e.a0 * cstar);
}

/// Residual with φ the cell-averaged plain potential of w itself.
inline double el_residual(const RadialField& w, double cstar, const Exponents& e, const ReducedKernel& k) {
    if (w.is_zero())
        throw ZeroField("Euler-Lagrange residual of the zero field");
    return el_residual_with(w, plain_potential(w, k, w.support_end()), cstar, e);
}

/// The Euler–Lagrange update ((2φ − a0 C)_+ / (b0 C))^{1/(m−1)}.
inline RadialField el_update(const RadialField& w, double cstar, const Exponents& e, const ReducedKernel& k) {
    const std::vector<double> phi = plain_potential(w, k);
    std::vector<double> v(w.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double base = std::max(0.0, 2.0 * phi[i] - e.a0 * cstar) / (e.b0 * cstar);
        v[i] = base > 0.0 ? std::pow(base, 1.0 / (e.m - 1.0)) : 0.0;
    }
    return RadialField(w.grid(), std::move(v));
}

namespace detail {

inline RadialField initial_density(const RadialGrid& g, const ExtremalOptions& opt, double m) {
    const double width = opt.init_width * g.r_max();
    if (opt.init == ExtremalInit::Bump)
        return sample(g, [&](double r) {
            const double x = r / width;
            return x < 1.0 ? std::pow(1.0 - x * x, 1.0 / (m - 1.0)) : 0.0;
        });
    return sample(g, [&](double r) { return std::exp(-(r * r) / (width * width)); });
}

inline RadialField mix(const RadialField& a, const RadialField& b, double omega) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = (1.0 - omega) * a[i] + omega * b[i];
    return RadialField(a.grid(), std::move(v));
}

} // namespace detail

/**
 * @brief Damped Euler–Lagrange fixed point for the maximizer of J.
 *
 * Every iterate is renormalized to ‖W‖_1 = ‖W‖_m = 1 by rescaling the grid, so
 * one kernel table serves the whole run. Steps that would lower J are retried
 * with half the damping. The grid cell count is that of `grid`; its radius
 * only sets the initial guess.
 */
inline ExtremalProfile solve_extremal(const ModelParams& params, const RadialGrid& grid,
                                      const ExtremalOptions& opt = {}) {
    const Exponents e = derive_exponents(params);
    if (params.d != 3)
        throw UnsupportedDimension("solve_extremal supports d=3 only");
    const ReducedKernel k = build_kernel(grid, e.lambda);

    RadialField w = normalize_both_norms(detail::initial_density(grid, opt, e.m), e).field;
    ExtremalProfile prof;
    double J = interaction(w, k);
    prof.j_history.push_back(J);
    double omega = opt.damping;
    double res = el_residual(w, J, e, k);
    double dj = INFINITY;

    auto snapshot = [&](bool ok) {
        ExtremalProfile p = prof;
        p.w = w;
        p.cstar = J;
        p.support_radius = support_radius(w);
        p.el_residual = res;
        p.converged = ok;
        return p;
    };

    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        if (dj <= opt.tol_j * J && res <= opt.tol_res) {
            prof.iterations = it;
            return snapshot(true);
        }
        const RadialField target = el_update(w, J, e, k);
        bool accepted = false;
        double w_omega = omega;
        while (w_omega >= opt.min_damping) {
            RadialField trial = detail::mix(w, target, w_omega);
            if (trial.is_zero())
                break;
            if (!is_nonincreasing(trial, 1e-12 * lp_norm(trial, INFINITY)))
                trial = rearrange_decreasing(trial);
            trial = normalize_both_norms(trial, e).field;
            const double Jt = interaction(trial, k);
            if (Jt >= J * (1.0 - 1e-13)) {
                dj = std::abs(Jt - J);
                w = std::move(trial);
                J = Jt;
                accepted = true;
                break;
            }
            w_omega *= 0.5;
        }
        prof.iterations = it + 1;
        if (!accepted) {
            // No ascent direction left at working precision.
            res = el_residual(w, J, e, k);
            if (res <= opt.tol_res)
                return snapshot(true);
            throw NoConvergence("extremal iteration stalled with residual " + std::to_string(res), snapshot(false));
        }
        prof.j_history.push_back(J);
        res = el_residual(w, J, e, k);

        if (support_radius(w) > opt.enlarge_at * w.grid().r_max()) {
            // Same cell count over twice the radius: the profile gets more room in index space.
            w = normalize_both_norms(resample(w, w.grid().scaled(2.0)), e).field;
            J = interaction(w, k);
            res = el_residual(w, J, e, k);
            dj = INFINITY;
            ++prof.enlargements;
            prof.enlargement_marks.push_back(prof.j_history.size());
            prof.j_history.push_back(J);
        }
    }
    throw NoConvergence("no convergence in " + std::to_string(opt.max_iter) + " iterations", snapshot(false));
}

/// Threshold member αW(λ·) of the steady-state family, scaled so that ‖·‖_∞ = 1.
inline RadialField threshold_profile(const ExtremalProfile& p, const Exponents& e) {
    if (!p.converged)
        throw NotConverged("threshold profile needs a converged extremal profile");
    const Thresholds t = xstar_threshold(e, p.cstar);
    const double alpha = 1.0 / p.w[0];
    const double lam = std::pow(std::pow(t.x_star, 1.0 - e.beta) * std::pow(alpha, 2.0 - e.m), 1.0 / (2.0 * e.s));
    return dilate(p.w, alpha, lam);
}

inline Thresholds compute_thresholds(const ExtremalProfile& p, const Exponents& e) {
    if (!p.converged)
        throw NotConverged("thresholds need a converged extremal profile");
    return xstar_threshold(e, p.cstar);
}

inline nlohmann::json profile_sidecar(const ExtremalProfile& p, const ModelParams& params) {
    return nlohmann::json{{"cstar", p.cstar},
                          {"support_radius", p.support_radius},
                          {"el_residual", p.el_residual},
                          {"iterations", p.iterations},
                          {"converged", p.converged},
                          {"params", {{"d", params.d}, {"s", params.s}, {"m", params.m}, {"eps", params.eps}}}};
}

} // namespace aggdiff
