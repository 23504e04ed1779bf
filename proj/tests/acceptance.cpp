// Acceptance battery: one PASS/FAIL line per criterion, at full resolution.

#include "aggdiff/aggdiff.hpp"
#include "aggdiff/verify/oracle.hpp"
#include "aggdiff/verify/random_fields.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace aggdiff;

namespace {

struct CriterionResult {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }
double gauss(double r) { return std::exp(-r * r); }
double unit_ball(double r) { return r < 1.0 ? 1.0 : 0.0; }

const ModelParams params{};
const Exponents& ex() {
    static const Exponents e = derive_exponents(params);
    return e;
}

double hls_gamma_oracle(int d, double lambda) {
    const double dd = d;
    const double ratio = boost::math::tgamma(0.5 * dd) / boost::math::tgamma(dd);
    return std::pow(std::numbers::pi, 0.5 * lambda) * boost::math::tgamma(0.5 * (dd - lambda)) /
           boost::math::tgamma(dd - 0.5 * lambda) * std::pow(ratio, lambda / dd - 1.0);
}

ExtremalOptions coarse_options() {
    ExtremalOptions o;
    o.tol_res = 1e-2;
    o.tol_j = 1e-7;
    return o;
}

const ExtremalProfile& fine_profile() {
    static const ExtremalProfile p = solve_extremal(params, RadialGrid(2048, 1.0));
    return p;
}

const ExtremalProfile& fine_profile_gaussian() {
    static const ExtremalProfile p = [] {
        ExtremalOptions o;
        o.init = ExtremalInit::Gaussian;
        return solve_extremal(params, RadialGrid(2048, 1.0), o);
    }();
    return p;
}

/// Threshold profile on `n` cells padded to `pad` times its support, with matching kernel and thresholds.
struct DichotomySetup {
    Thresholds th;
    RadialField W;
    ReducedKernel k;
};

DichotomySetup dichotomy_setup(std::size_t n, double pad_factor) {
    const ExtremalProfile p = solve_extremal(params, RadialGrid(n, 1.0), coarse_options());
    const RadialField thr = threshold_profile(p, ex());
    DichotomySetup s;
    s.th = compute_thresholds(p, ex());
    const auto cells = static_cast<std::size_t>(std::ceil(pad_factor * thr.support_end()));
    s.W = pad(thr, std::max(cells, thr.size()));
    s.k = build_kernel(s.W.grid(), ex().lambda);
    return s;
}

std::string num(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

CriterionResult criterion1() {
    CriterionResult v;
    const Exponents& e = ex();
    const double err = std::max({std::abs(e.a - 1.2), std::abs(e.a0 - 0.4), std::abs(e.b0 - 1.6),
                                 std::abs(e.beta - 4.0 / 3.0), std::abs(e.p - 12.0 / 11.0), std::abs(e.lambda - 0.8)});
    v.require(err <= 1e-12, "default exponents");
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        ModelParams p;
        p.d = std::uniform_int_distribution<int>(3, 8)(rng);
        p.s = std::uniform_real_distribution<double>(1.0, 0.5 * p.d)(rng);
        const double lo = 2.0 * p.d / (p.d + 2.0 * p.s), hi = 2.0 - 2.0 * p.s / p.d;
        p.m = std::uniform_real_distribution<double>(lo, hi)(rng);
        if (!(p.m > lo && p.m < hi && p.s > 1.0))
            continue;
        const Exponents x = derive_exponents(p);
        // scaled by the operand size: a reaches O(100) near the upper edge of m, where one ulp exceeds 1e-14
        const double scale = std::max({1.0, std::abs(x.a * x.beta), std::abs(x.b0)});
        worst = std::max({worst, std::abs(x.b0 - x.m * x.beta) / scale, std::abs(x.a + x.a0 - x.a * x.beta) / scale});
    }
    v.require(worst <= 1e-14, "identities");
    v.detail << "default exponent error " << num(err) << ", worst identity defect " << num(worst)
             << " (relative to max(1, a*beta))";
    return v;
}

CriterionResult criterion2() {
    CriterionResult v;
    const double lam = ex().lambda;
    double worst = 0.0;
    {
        const RadialGrid g(1024, 6.0);
        const ReducedKernel k = build_kernel(g, lam);
        const RadialField u = project(g, gauss);
        for (double r : {0.0, 1.0, 2.0})
            worst = std::max(worst, rel(potential_at(u, k, 1.0, r), verify::potential(gauss, r, lam, 6.0)));
        worst = std::max(worst, rel(interaction(u, k), verify::interaction(gauss, lam, 6.0)));
    }
    {
        const RadialGrid g(1024, 2.0);
        const ReducedKernel k = build_kernel(g, lam);
        const RadialField u = sample(g, unit_ball);
        for (double r : {0.0, 0.5, 1.0, 1.5})
            worst = std::max(worst, rel(potential_at(u, k, 1.0, r), verify::potential(unit_ball, r, lam, 2.0, {1.0})));
        worst = std::max(worst, rel(interaction(u, k), verify::interaction(unit_ball, lam, 1.0, {1.0})));
    }
    v.require(worst <= 1e-3, "oracle agreement");
    v.detail << "max relative deviation from quadrature oracle " << num(worst) << " (Gaussian and ball, n=1024)";
    return v;
}

CriterionResult criterion3() {
    CriterionResult v;
    const double bound = hls_gamma_oracle(3, ex().lambda);
    const RadialGrid g(1024, 3.0);
    const ReducedKernel k = build_kernel(g, ex().lambda);
    verify::RandomFields gen(20240611);
    int violations = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double J = vhls_quotient(gen.next(g), ex(), k);
        worst = std::max(worst, J);
        violations += J > bound ? 1 : 0;
    }
    v.require(violations == 0, "HLS violations");
    v.detail << violations << " violations in 100 fields, max J " << num(worst) << " vs gamma-oracle bound "
             << num(bound);
    return v;
}

CriterionResult criterion4() {
    CriterionResult v;
    const Exponents& e = ex();
    const RadialGrid g(1024, 3.0);
    const ReducedKernel k = build_kernel(g, e.lambda);
    verify::RandomFields gen(4);
    double worst = 0.0;
    for (int f = 0; f < 4; ++f) {
        const RadialField u = gen.next(g);
        const double J = vhls_quotient(u, e, k), P = threshold_product(u, e), H = barrier_functional(u, e, k);
        for (double a : {0.25, 0.5, 1.0, 2.0, 4.0})
            for (double l : {0.25, 0.5, 1.0, 2.0, 4.0}) {
                worst = std::max(worst, rel(vhls_quotient(dilate(u, a, l), e, k), J));
                const RadialField w = apply_dynamic_scaling(u, l, e);
                worst = std::max({worst, rel(threshold_product(w, e), P), rel(barrier_functional(w, e, k), H)});
            }
    }
    v.require(worst <= 1e-6, "invariance");
    v.detail << "max relative change of J, product and barrier " << num(worst);
    return v;
}

CriterionResult criterion5() {
    CriterionResult v;
    const ExtremalProfile& a = fine_profile();
    const ExtremalProfile& b = fine_profile_gaussian();
    v.require(a.converged && b.converged, "convergence");
    const double dj = rel(a.cstar, b.cstar);
    v.require(dj <= 1e-4, "initialization agreement");
    v.require(a.el_residual <= 1e-4 && b.el_residual <= 1e-4, "EL residual");
    bool monotone = true;
    for (const ExtremalProfile* p : {&a, &b})
        for (std::size_t i = 1; i < p->j_history.size(); ++i) {
            const bool mark = std::find(p->enlargement_marks.begin(), p->enlargement_marks.end(), i) !=
                              p->enlargement_marks.end();
            if (!mark && p->j_history[i] < p->j_history[i - 1] * (1.0 - 1e-10))
                monotone = false;
        }
    v.require(monotone, "monotone ascent");
    const RadialGrid g(1024, 3.0);
    const ReducedKernel k = build_kernel(g, ex().lambda);
    verify::RandomFields gen(5);
    double best_trial = 0.0;
    for (int i = 0; i < 20; ++i)
        best_trial = std::max(best_trial, vhls_quotient(rearrange_decreasing(gen.next(g)), ex(), k));
    v.require(a.cstar >= best_trial, "beats trials");
    v.require(a.w.support_end() < a.w.size() && is_nonincreasing(a.w), "compact and nonincreasing");
    v.detail << "C* " << num(a.cstar) << " (bump) vs " << num(b.cstar) << " (Gaussian), rel diff " << num(dj)
             << ", residuals " << num(a.el_residual) << "/" << num(b.el_residual) << ", best of 20 trials "
             << num(best_trial) << ", support " << a.w.support_end() << "/" << a.w.size() << " cells";
    return v;
}

CriterionResult criterion6() {
    CriterionResult v;
    const Exponents& e = ex();
    const ExtremalProfile& p = fine_profile();
    const Thresholds t = compute_thresholds(p, e);
    const double h = 1e-4 * t.x_star;
    const double gp = (barrier_g(t.x_star + h, e, p.cstar) - barrier_g(t.x_star - h, e, p.cstar)) / (2.0 * h);
    const double d = e.d, dl = d - 2.0 * e.s;
    const double ident = std::abs(2.0 * dl * t.g_at_xstar + (2.0 * d - 2.0 * dl / (e.m - 1.0)) * t.x_star) / t.x_star;
    v.require(std::abs(gp) <= 1e-8, "g'(x*)");
    v.require(ident <= 1e-10, "threshold identity");
    const RadialField W = threshold_profile(p, e);
    const ReducedKernel k = build_kernel(W.grid(), e.lambda);
    const double Ma = std::pow(mass(W), e.a);
    const double steady = rel(2.0 * dl * free_energy(W, e, k) * Ma,
                              -(2.0 * d - 2.0 * dl / (e.m - 1.0)) * power_integral(W, e.m) * Ma);
    v.require(steady <= 1e-3, "steady-state identity");
    const std::size_t end = W.support_end();
    const CellValues mu = chemical_potential(W, e, k, end);
    const auto [lo, hi] = std::minmax_element(mu.values.begin(), mu.values.begin() + static_cast<long>(end));
    const double spread = (*hi - *lo) / (e.m / (e.m - 1.0) * std::pow(lp_norm(W, INFINITY), e.m - 1.0));
    v.require(spread <= 1e-3, "constant chemical potential");
    v.detail << "g'(x*) " << num(gp) << ", identity defect " << num(ident) << ", steady-state identity "
             << num(steady) << ", mu spread on support " << num(spread);
    return v;
}

struct Dichotomy {
    DichotomySetup setup;
    SimTrace low, high;
};

const Dichotomy& dichotomy() {
    static const Dichotomy D = [] {
        Dichotomy out;
        out.setup = dichotomy_setup(512, 8.0);
        SimConfig cfg;
        cfg.t_end = 50.0;
        cfg.record_every = 200;
        out.low = run(scale_values(out.setup.W, 0.8), out.setup.k, ex(), cfg);
        out.high = run(scale_values(out.setup.W, 1.2), out.setup.k, ex(), cfg);
        return out;
    }();
    return D;
}

double worst_energy_rise(const SimTrace& tr) {
    double worst = 0.0;
    for (std::size_t i = 1; i < tr.rows.size(); ++i)
        worst = std::max(worst, tr.rows[i].free_energy - tr.rows[i - 1].free_energy);
    return worst / std::abs(tr.rows.front().free_energy);
}

CriterionResult criterion7() {
    CriterionResult v;
    const RadialGrid g(512, 5.0);
    const ReducedKernel k = build_kernel(g, ex().lambda);
    SimConfig cfg;
    cfg.t_end = 0.2;
    cfg.record_every = 20;
    const SimTrace smooth = run(project(g, gauss), k, ex(), cfg);
    const Dichotomy& D = dichotomy();
    double drift = 0.0, rise = 0.0;
    for (const SimTrace* tr : {&smooth, &D.low, &D.high}) {
        drift = std::max(drift, tr->max_mass_drift);
        rise = std::max(rise, worst_energy_rise(*tr));
    }
    v.require(drift <= 1e-8, "mass drift");
    v.require(rise <= 1e-6, "energy monotonicity");
    const double ratio =
        (smooth.rows.front().free_energy - smooth.rows.back().free_energy) / integrated_dissipation(smooth);
    v.require(std::abs(ratio - 1.0) <= 0.1, "energy-dissipation balance");
    v.detail << "max mass drift " << num(drift) << ", largest F increase " << num(rise) << " of |F(u0)|"
             << ", F decay / integrated dissipation " << num(ratio);
    return v;
}

CriterionResult criterion8() {
    CriterionResult v;
    const Exponents& e = ex();
    const RadialGrid g(2048, 5.0);
    const VirialCheck vc = virial_check(project(g, gauss), e, build_kernel(g, e.lambda));
    const double gap = std::abs(vc.lhs - vc.rhs) / std::abs(vc.rhs);
    v.require(gap <= 0.02, "moment flux vs identity");
    const RadialField W = threshold_profile(fine_profile(), e);
    const ReducedKernel k = build_kernel(W.grid(), e.lambda);
    const double scale = std::abs(2.0 * e.d - 2.0 * (e.d - 2.0 * e.s) / (e.m - 1.0)) * power_integral(W, e.m);
    const double at_threshold = std::abs(virial_check(W, e, k).rhs) / scale;
    v.require(at_threshold <= 1e-3, "vanishing at threshold");
    v.detail << "Gaussian n=2048 relative gap " << num(gap) << ", threshold-profile rhs / scale " << num(at_threshold);
    return v;
}

CriterionResult criterion9() {
    CriterionResult v;
    const Dichotomy& D = dichotomy();
    const Exponents& e = ex();
    double linf_max = 0.0;
    for (const TraceRow& r : D.low.rows)
        linf_max = std::max(linf_max, r.linf);
    v.require(D.low.outcome.kind == OutcomeKind::CompletedBounded && D.low.t_final == 50.0, "0.8 run bounded");
    v.require(linf_max <= 2.0 * D.low.linf0, "0.8 run stays below twice its initial maximum");
    v.require(D.high.outcome.kind == OutcomeKind::BlowupDetected && std::isfinite(D.high.outcome.t_detect),
              "1.2 run blows up");
    const Classification cl = classify(scale_values(D.setup.W, 0.8), D.setup.th, e, D.setup.k);
    const Classification ch = classify(scale_values(D.setup.W, 1.2), D.setup.th, e, D.setup.k);
    v.require(cl.verdict == aggdiff::Verdict::GlobalExistence, "0.8 verdict");
    v.require(ch.verdict == aggdiff::Verdict::FiniteTimeBlowup, "1.2 verdict");
    const BarrierReport bl = barrier_check(D.low, D.setup.th, e);
    const BarrierReport bh = barrier_check(D.high, D.setup.th, e);
    v.require(bl.holds && bh.holds, "barrier");

    std::vector<double> t_detect;
    for (std::size_t n : {256u, 512u, 1024u}) {
        const DichotomySetup s = n == 512 ? D.setup : dichotomy_setup(n, 8.0);
        SimConfig cfg;
        cfg.t_end = 50.0;
        cfg.record_every = 1000;
        const SimTrace tr = n == 512 ? D.high : run(scale_values(s.W, 1.2), s.k, e, cfg);
        t_detect.push_back(tr.outcome.kind == OutcomeKind::BlowupDetected ? tr.outcome.t_detect : INFINITY);
    }
    const bool finite = std::all_of(t_detect.begin(), t_detect.end(), [](double t) { return std::isfinite(t); });
    const bool trend = t_detect[0] >= t_detect[1] && t_detect[1] >= t_detect[2];
    v.require(finite && trend, "t_detect finite and monotone under refinement");
    v.detail << "0.8: " << to_string(D.low.outcome.kind) << "/" << to_string(cl.verdict) << ", max linf/linf0 "
             << num(linf_max / D.low.linf0) << ", product/x* max " << num(bl.max_ratio) << "; 1.2: "
             << to_string(D.high.outcome.kind) << "/" << to_string(ch.verdict) << " at t=" << num(D.high.outcome.t_detect)
             << ", product/x* min " << num(bh.min_ratio) << "; t_detect n=256/512/1024: " << num(t_detect[0]) << "/"
             << num(t_detect[1]) << "/" << num(t_detect[2]) << " (numerical observation, not a proof)";
    return v;
}

CriterionResult criterion10() {
    CriterionResult v;
    const Exponents& e = ex();
    const RadialField W = threshold_profile(fine_profile(), e);
    const ReducedKernel k = build_kernel(W.grid(), e.lambda);
    auto Q = [&](double kappa) { return barrier_functional(scale_values(W, kappa), e, k); };
    const double q9 = Q(0.9), q1 = Q(1.0), q11 = Q(1.1);
    v.require(q9 < q1 && q11 < q1, "peak at kappa=1");
    v.detail << "Q(0.9) " << num(q9) << ", Q(1) " << num(q1) << ", Q(1.1) " << num(q11);
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria{
        {"exponent arithmetic", criterion1},    {"Riesz oracle equivalence", criterion2},
        {"HLS bound", criterion3},              {"scale invariance", criterion4},
        {"extremal convergence", criterion5},   {"threshold identities", criterion6},
        {"conservation and energy", criterion7}, {"virial self-consistency", criterion8},
        {"dichotomy", criterion9},              {"amplitude peak", criterion10},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& ex) {
            v.pass = false;
            v.detail << "exception: " << ex.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += v.pass ? 0 : 1;
        std::printf("criterion %zu %s: %s: %s (%.1f s)\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    v.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
