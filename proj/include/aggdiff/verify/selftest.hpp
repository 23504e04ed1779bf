#pragma once

#include "aggdiff/classify.hpp"
#include "aggdiff/evolve.hpp"
#include "aggdiff/extremal.hpp"
#include "aggdiff/field.hpp"
#include "aggdiff/functionals.hpp"
#include "aggdiff/params.hpp"
#include "aggdiff/riesz.hpp"
#include "aggdiff/verify/oracle.hpp"
#include "aggdiff/verify/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace aggdiff::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelftestOptions {
    std::uint64_t seed = 20240611;
    std::size_t fields = 100;
    double kernel_gain = 1.0;  ///< fault injection: values other than 1 corrupt the kernel
};

/// Random (d, s, m) strictly inside the supercritical regime, away from the edges by 10% of the m-window.
inline ModelParams random_params(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> dd(3, 6);
    ModelParams p;
    p.d = dd(rng);
    std::uniform_real_distribution<double> ss(1.0 + 1e-3, 0.5 * p.d - 1e-3);
    p.s = ss(rng);
    const double lo = 2.0 * p.d / (p.d + 2.0 * p.s);
    const double hi = 2.0 - 2.0 * p.s / p.d;
    std::uniform_real_distribution<double> mm(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo));
    p.m = mm(rng);
    return p;
}

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

} // namespace detail

/**
 * @brief Fast invariant battery behind `aggdiff selftest`.
 *
 * Coarse grids keep the whole run to a few seconds; the acceptance binary
 * repeats the same properties at full resolution.
 */
inline std::vector<CheckResult> run_selftest(const ModelParams& params, const SelftestOptions& opt) {
    using detail::fmt;
    std::vector<CheckResult> out;
    const Exponents e = derive_exponents(params);
    std::mt19937_64 rng(opt.seed);

    {
        CheckResult c{"exponent_identities", true, ""};
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Exponents x = derive_exponents(random_params(rng));
            const double scale = std::max({1.0, std::abs(x.a * x.beta), std::abs(x.b0)});
            worst = std::max({worst, std::abs(x.b0 - x.m * x.beta) / scale,
                              std::abs(x.a + x.a0 - x.a * x.beta) / scale});
        }
        c.passed = worst <= 1e-14;
        c.detail = "max identity defect " + fmt(worst);
        out.push_back(c);
    }

    const RadialGrid g(256, 5.0);
    const ReducedKernel k = build_kernel(g, e.lambda).with_gain(opt.kernel_gain);

    {
        CheckResult c{"riesz_oracle", true, ""};
        auto gauss = [](double r) { return std::exp(-r * r); };
        const RadialField u = project(g, gauss);
        double worst = 0.0;
        for (double r : {0.0, 1.0, 2.0}) {
            const double ref = potential(gauss, r, e.lambda, g.r_max());
            worst = std::max(worst, std::abs(potential_at(u, k, 1.0, r) - ref) / ref);
        }
        const double href = interaction(gauss, e.lambda, g.r_max());
        worst = std::max(worst, std::abs(aggdiff::interaction(u, k) - href) / href);
        c.passed = worst <= 1e-3;
        c.detail = "max relative deviation " + fmt(worst);
        out.push_back(c);
    }

    {
        CheckResult c{"hls_bound", true, ""};
        const double bound = hls_sharp_constant(3, e.lambda);
        RandomFields gen(opt.seed);
        std::size_t violations = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < opt.fields; ++i) {
            const double J = vhls_quotient(gen.next(g), e, k);
            worst = std::max(worst, J);
            if (J > bound)
                ++violations;
        }
        c.passed = violations == 0;
        c.detail = std::to_string(violations) + " violations, max J " + fmt(worst) + " vs bound " + fmt(bound);
        out.push_back(c);
    }

    {
        CheckResult c{"rearrangement", true, ""};
        RandomFields gen(opt.seed + 1);
        std::size_t bad = 0;
        for (int i = 0; i < 20; ++i) {
            const RadialField u = gen.next(g);
            const double h0 = aggdiff::interaction(u, k);
            const double h1 = aggdiff::interaction(rearrange_decreasing(u), k);
            if (h1 < h0 - 1e-8 * h0)
                ++bad;
        }
        c.passed = bad == 0;
        c.detail = std::to_string(bad) + " of 20 fields lost interaction energy";
        out.push_back(c);
    }

    {
        CheckResult c{"scale_invariance", true, ""};
        RandomFields gen(opt.seed + 2);
        const RadialField u = gen.gaussian_mixture(g);
        const double J0 = vhls_quotient(u, e, k);
        const double P0 = threshold_product(u, e);
        const double H0 = barrier_functional(u, e, k);
        double worst = 0.0;
        for (double a : {0.5, 1.0, 2.0})
            for (double l : {0.5, 1.0, 2.0}) {
                const RadialField v = dilate(u, a, l);
                worst = std::max(worst, std::abs(vhls_quotient(v, e, k) - J0) / J0);
                const RadialField w = apply_dynamic_scaling(u, l, e);
                worst = std::max(worst, std::abs(threshold_product(w, e) - P0) / P0);
                worst = std::max(worst, std::abs(barrier_functional(w, e, k) - H0) / std::abs(H0));
            }
        c.passed = worst <= 1e-6;
        c.detail = "max relative change " + fmt(worst);
        out.push_back(c);
    }

    {
        CheckResult c{"virial", true, ""};
        const RadialGrid gv(512, 5.0);
        const ReducedKernel kv = build_kernel(gv, e.lambda).with_gain(opt.kernel_gain);
        const RadialField u = project(gv, [](double r) { return std::exp(-r * r); });
        const VirialCheck v = virial_check(u, e, kv);
        const double rel = std::abs(v.lhs - v.rhs) / std::abs(v.rhs);
        c.passed = rel <= 0.02;
        c.detail = "moment flux " + fmt(v.lhs) + " vs identity " + fmt(v.rhs) + " (rel " + fmt(rel) + ")";
        out.push_back(c);
    }

    ExtremalProfile prof;
    bool have_profile = false;
    {
        CheckResult c{"extremal", true, ""};
        ExtremalOptions eo;
        eo.tol_res = 1e-2;
        eo.tol_j = 1e-6;
        try {
            prof = solve_extremal(params, RadialGrid(512, 1.0), eo);
            have_profile = true;
            const ReducedKernel kw = build_kernel(prof.w.grid(), e.lambda).with_gain(opt.kernel_gain);
            const double J = vhls_quotient(prof.w, e, kw);
            const double bound = hls_sharp_constant(3, e.lambda);
            RandomFields gen(opt.seed + 3);
            double best_trial = 0.0;
            for (int i = 0; i < 20; ++i)
                best_trial = std::max(best_trial, vhls_quotient(gen.next(g), e, k));
            const bool compact = prof.w.support_end() < prof.w.size();
            c.passed = J <= bound && J >= best_trial && compact && is_nonincreasing(prof.w);
            c.detail = "C* " + fmt(J) + ", best trial " + fmt(best_trial) + ", residual " + fmt(prof.el_residual);
        } catch (const Error& ex) {
            c.passed = false;
            c.detail = ex.what();
        }
        out.push_back(c);
    }

    {
        CheckResult c{"threshold_identities", true, ""};
        const double cstar = have_profile ? prof.cstar : 1.0;
        const Thresholds t = xstar_threshold(e, cstar);
        const double h = 1e-4 * t.x_star;
        const double gp = (barrier_g(t.x_star + h, e, cstar) - barrier_g(t.x_star - h, e, cstar)) / (2.0 * h);
        const double d = e.d;
        const double dl = d - 2.0 * e.s;
        const double ident = (2.0 * dl * t.g_at_xstar + (2.0 * d - 2.0 * dl / (e.m - 1.0)) * t.x_star) / t.x_star;
        c.passed = std::abs(gp) <= 1e-8 && std::abs(ident) <= 1e-10;
        c.detail = "g'(x*) " + fmt(gp) + ", identity defect " + fmt(ident);
        out.push_back(c);
    }

    {
        CheckResult c{"amplitude_peak", true, ""};
        if (!have_profile) {
            c.passed = false;
            c.detail = "no extremal profile";
        } else {
            const RadialField W = threshold_profile(prof, e);
            const ReducedKernel kw = build_kernel(W.grid(), e.lambda).with_gain(opt.kernel_gain);
            auto Q = [&](double kappa) { return barrier_functional(scale_values(W, kappa), e, kw); };
            const double q9 = Q(0.9), q1 = Q(1.0), q11 = Q(1.1);
            c.passed = q9 < q1 && q11 < q1;
            c.detail = "Q(0.9) " + fmt(q9) + ", Q(1) " + fmt(q1) + ", Q(1.1) " + fmt(q11);
        }
        out.push_back(c);
    }

    {
        CheckResult c{"conservation", true, ""};
        const RadialGrid ge(128, 6.0);
        const ReducedKernel ke = build_kernel(ge, e.lambda).with_gain(opt.kernel_gain);
        const RadialField u0 = project(ge, [](double r) { return r < 2.0 ? std::pow(1.0 - r * r / 4.0, 5.0) : 0.0; });
        SimConfig sc;
        sc.t_end = 1.0;
        sc.record_every = 20;
        const SimTrace tr = run(u0, ke, e, sc);
        const double F0 = tr.rows.front().free_energy;
        double worst_rise = 0.0;
        for (std::size_t i = 1; i < tr.rows.size(); ++i)
            worst_rise = std::max(worst_rise, tr.rows[i].free_energy - tr.rows[i - 1].free_energy);
        c.passed = tr.max_mass_drift <= 1e-8 && worst_rise <= 1e-6 * std::abs(F0);
        c.detail = "mass drift " + fmt(tr.max_mass_drift) + ", largest F increase " + fmt(worst_rise);
        out.push_back(c);
    }
    return out;
}

} // namespace aggdiff::verify
