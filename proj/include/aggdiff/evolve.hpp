#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/field.hpp"
#include "aggdiff/functionals.hpp"
#include "aggdiff/params.hpp"
#include "aggdiff/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace aggdiff {

struct SimConfig {
    double t_end = 50.0;
    double cfl = 0.4;
    double dt_min = 1e-12;
    double blowup_factor = 1e3;
    std::size_t record_every = 100;
    double eps = 0.0;
    std::size_t max_steps = 100'000'000;

    void validate() const {
        if (!(t_end > 0.0))
            throw ConfigError("sim.t_end must be > 0");
        if (!(cfl > 0.0 && cfl <= 1.0))
            throw ConfigError("sim.cfl must lie in (0, 1]");
        if (!(dt_min > 0.0))
            throw ConfigError("sim.dt_min must be > 0");
        if (!(blowup_factor > 1.0))
            throw ConfigError("sim.blowup_factor must be > 1");
        if (record_every == 0)
            throw ConfigError("sim.record_every must be >= 1");
        if (!(eps >= 0.0))
            throw ConfigError("sim.eps must be >= 0");
    }
};

struct TraceRow {
    double t = 0;
    double mass = 0;
    double lm_norm = 0;
    double linf = 0;
    double free_energy = 0;
    double second_moment = 0;
    double dissipation = 0;
    double dt = 0;
};

enum class OutcomeKind { CompletedBounded, BlowupDetected, Inconclusive };

inline const char* to_string(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::CompletedBounded:
        return "CompletedBounded";
    case OutcomeKind::BlowupDetected:
        return "BlowupDetected";
    case OutcomeKind::Inconclusive:
        return "Inconclusive";
    }
    return "?";
}

struct Outcome {
    OutcomeKind kind = OutcomeKind::Inconclusive;
    double t_detect = 0;  ///< only meaningful for BlowupDetected
    std::string reason;
};

struct SimTrace {
    std::vector<TraceRow> rows;
    Outcome outcome;
    std::size_t steps = 0;
    double t_final = 0;
    double mass0 = 0;
    double linf0 = 0;
    double max_mass_drift = 0;  ///< max over steps of |mass − mass0| / mass0
    std::vector<std::string> warnings;
    RadialField final_state;
};

/// Upwind fluxes through the interior faces for one evaluation of μ.
struct FluxState {
    std::vector<double> flux;     ///< outward flux at face f (index f, faces 0 and n stay zero)
    std::vector<double> out_rate; ///< per-cell outgoing rate coefficient for the positivity bound
    std::size_t faces = 0;        ///< faces 1 … faces−1 may carry flux
};

/**
 * @brief Explicit conservative finite-volume step for u_t = ∇·(u∇μ) + εΔu.
 *
 * Face velocity −(μ_{i+1} − μ_i)/Δr with μ from the cell-averaged potential,
 * upwind mobility, no flux through r = 0 and r = r_max. The step size is the
 * parabolic bound Δr²/(2d(m‖u‖_∞^{m−1} + ε)) or the exact positivity bound,
 * whichever is smaller, times the Courant factor.
 */
class Stepper {
public:
    Stepper(const ReducedKernel& k, const Exponents& e, const SimConfig& cfg) : k_(k), e_(e), cfg_(cfg) {
        if (e.d != 3)
            throw UnsupportedDimension("evolve supports d=3 only");
    }

    FluxState fluxes(const RadialField& u) const {
        const RadialGrid& g = u.grid();
        const std::size_t n = g.size();
        const std::size_t end = u.support_end();
        FluxState s;
        s.flux.assign(n + 1, 0.0);
        s.out_rate.assign(n, 0.0);
        if (end == 0)
            return s;
        const std::size_t rows = std::min(n, end + 1);
        const std::size_t faces = std::min(n, end + 1);
        s.faces = faces;
        const CellValues mu = chemical_potential(u, e_, k_, rows);
        const double h = g.dr();
        const double eps = cfg_.eps;
        for (std::size_t f = 1; f < faces; ++f) {
            const double v = -(mu.values[f] - mu.values[f - 1]) / h;
            const double A = g.face_area(f);
            const double upwind = v > 0.0 ? u[f - 1] : u[f];
            s.flux[f] = A * (upwind * v + eps * (u[f - 1] - u[f]) / h);
            if (v > 0.0)
                s.out_rate[f - 1] += A * v;
            else
                s.out_rate[f] -= A * v;
            if (eps > 0.0) {
                s.out_rate[f - 1] += A * eps / h;
                s.out_rate[f] += A * eps / h;
            }
        }
        return s;
    }

    double stable_dt(const RadialField& u, const FluxState& s) const {
        const RadialGrid& g = u.grid();
        const double h = g.dr();
        const double linf = lp_norm(u, INFINITY);
        const double diff = e_.m * std::pow(linf, e_.m - 1.0) + cfg_.eps;
        double dt = diff > 0.0 ? h * h / (2.0 * e_.d * diff) : std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < u.size(); ++i)
            if (s.out_rate[i] > 0.0)
                dt = std::min(dt, g.volume(i) / s.out_rate[i]);
        return cfg_.cfl * dt;
    }

    /// d(u_i V_i)/dt for every cell.
    static std::vector<double> divergence(const RadialGrid& g, const FluxState& s) {
        std::vector<double> div(g.size(), 0.0);
        for (std::size_t f = 1; f < s.faces; ++f) {
            div[f - 1] -= s.flux[f];
            div[f] += s.flux[f];
        }
        return div;
    }

    /// One step of at most `dt_cap`; returns the new field and the step used.
    std::pair<RadialField, double> step(const RadialField& u,
                                        double dt_cap = std::numeric_limits<double>::infinity()) const {
        const FluxState s = fluxes(u);
        if (s.faces == 0)
            return {u, std::min(dt_cap, cfg_.t_end)};
        const double dt = std::min(stable_dt(u, s), dt_cap);
        const RadialGrid& g = u.grid();
        const std::vector<double> div = divergence(g, s);
        std::vector<double> v = u.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += dt * div[i] / g.volume(i);
            if (!std::isfinite(v[i]))
                throw NonFiniteValue("non-finite density in cell " + std::to_string(i));
            if (v[i] < 0.0)
                v[i] = 0.0;  // only reachable through rounding at the positivity bound
        }
        return {RadialField(g, std::move(v)), dt};
    }

    const ReducedKernel& kernel() const { return k_; }
    const Exponents& exponents() const { return e_; }
    const SimConfig& config() const { return cfg_; }

private:
    ReducedKernel k_;
    Exponents e_;
    SimConfig cfg_;
};

inline TraceRow diagnostics(const RadialField& u, double t, double dt, const Exponents& e, const ReducedKernel& k) {
    TraceRow r;
    r.t = t;
    r.mass = mass(u);
    r.lm_norm = lp_norm(u, e.m);
    r.linf = lp_norm(u, INFINITY);
    r.free_energy = free_energy(u, e, k);
    r.second_moment = second_moment(u);
    r.dissipation = dissipation(u, e, k);
    r.dt = dt;
    return r;
}

struct HypothesisReport {
    double mass = 0;
    double linf = 0;
    double second_moment = 0;
    double grad_um_l2 = 0;  ///< discrete ‖∂_r u^m‖_2
    bool mass_ok = false;
    bool linf_ok = false;
    bool moment_ok = false;
    bool gradient_ok = false;
    bool touches_boundary = false;  ///< mass in the outer 5% of cells
    bool ok() const { return mass_ok && linf_ok && moment_ok && gradient_ok; }
};

/// Finite mass, L^∞ bound, second moment and ‖∇u^m‖_2 for initial data.
inline HypothesisReport hypothesis_check(const RadialField& u0, const Exponents& e) {
    for (std::size_t i = 0; i < u0.size(); ++i)
        if (!std::isfinite(u0[i]))
            throw NonFiniteValue("initial density is not finite in cell " + std::to_string(i));
    HypothesisReport r;
    r.mass = mass(u0);
    r.linf = lp_norm(u0, INFINITY);
    r.second_moment = second_moment(u0);
    const RadialGrid& g = u0.grid();
    double acc = 0.0;
    for (std::size_t f = 1; f < g.size(); ++f) {
        const double d = (std::pow(u0[f], e.m) - std::pow(u0[f - 1], e.m)) / g.dr();
        acc += d * d * g.face_area(f) * g.dr();
    }
    r.grad_um_l2 = std::sqrt(acc);
    r.mass_ok = std::isfinite(r.mass) && r.mass > 0.0;
    r.linf_ok = std::isfinite(r.linf);
    r.moment_ok = std::isfinite(r.second_moment);
    r.gradient_ok = std::isfinite(r.grad_um_l2);
    const std::size_t tail = g.size() - std::max<std::size_t>(1, g.size() / 20);
    r.touches_boundary = u0.support_end() > tail;
    return r;
}

/// Lower bound ‖u‖_∞ ≥ M^{(d+2)/2} / (c m_2^{d/2}) from splitting the mass at the optimal radius.
inline double moment_linf_lower_bound(double mass_value, double m2, int d) {
    const double dd = d;
    const double ball_volume = std::pow(std::numbers::pi, 0.5 * dd) / std::tgamma(0.5 * dd + 1.0);
    const double c = 0.5 * dd * ball_volume * std::pow((dd + 2.0) / dd, 0.5 * (dd + 2.0));
    if (!(m2 > 0.0))
        return 0.0;
    return std::pow(mass_value, 0.5 * (dd + 2.0)) / (c * std::pow(m2, 0.5 * dd));
}

/// Integrate from u0 until t_end, blow-up detection, or step collapse.
inline SimTrace run(const RadialField& u0, const ReducedKernel& k, const Exponents& e, const SimConfig& cfg) {
    cfg.validate();
    const HypothesisReport hyp = hypothesis_check(u0, e);
    const Stepper stepper(k, e, cfg);
    SimTrace tr;
    tr.mass0 = hyp.mass;
    tr.linf0 = hyp.linf;
    if (hyp.touches_boundary)
        tr.warnings.push_back("initial support reaches the outer 5% of the grid");

    const RadialGrid& g = u0.grid();
    const std::size_t tail = g.size() - std::max<std::size_t>(1, g.size() / 20);
    bool warned_tail = hyp.touches_boundary;
    const double trigger = cfg.blowup_factor * std::max(1.0, tr.linf0);

    RadialField u = u0;
    double t = 0.0;
    double last_dt = 0.0;
    tr.rows.push_back(diagnostics(u, t, 0.0, e, k));
    tr.outcome.kind = OutcomeKind::CompletedBounded;
    std::size_t since_record = 0;
    while (t < cfg.t_end) {
        if (tr.steps >= cfg.max_steps) {
            tr.outcome = {OutcomeKind::Inconclusive, 0.0, "step limit reached"};
            break;
        }
        std::pair<RadialField, double> next;
        try {
            next = stepper.step(u, cfg.t_end - t);
        } catch (const NonFiniteValue& ex) {
            tr.outcome = {OutcomeKind::Inconclusive, 0.0, ex.what()};
            break;
        }
        const double dt = next.second;
        if (dt < cfg.dt_min && t + dt < cfg.t_end) {
            const double linf = lp_norm(u, INFINITY);
            if (linf > 2.0 * tr.linf0)
                tr.outcome = {OutcomeKind::BlowupDetected, t, "time step collapsed while the maximum grew"};
            else
                tr.outcome = {OutcomeKind::Inconclusive, 0.0, "time step collapsed"};
            break;
        }
        u = std::move(next.first);
        t = (t + dt >= cfg.t_end * (1.0 - 1e-15)) ? cfg.t_end : t + dt;
        last_dt = dt;
        ++tr.steps;
        ++since_record;
        if (tr.mass0 > 0.0)
            tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(mass(u) - tr.mass0) / tr.mass0);
        if (!warned_tail && u.support_end() > tail) {
            tr.warnings.push_back("mass reached the outer 5% of the grid at t=" + std::to_string(t));
            warned_tail = true;
        }
        const double linf = lp_norm(u, INFINITY);
        if (linf > trigger) {
            tr.rows.push_back(diagnostics(u, t, dt, e, k));
            tr.outcome = {OutcomeKind::BlowupDetected, t, "maximum exceeded blowup_factor"};
            since_record = 0;
            break;
        }
        if (since_record >= cfg.record_every || t >= cfg.t_end) {
            tr.rows.push_back(diagnostics(u, t, dt, e, k));
            since_record = 0;
        }
    }
    if (since_record > 0)
        tr.rows.push_back(diagnostics(u, t, last_dt, e, k));
    tr.t_final = t;
    tr.final_state = std::move(u);
    return tr;
}

/// Trapezoid rule for ∫ dissipation dt over the recorded rows.
inline double integrated_dissipation(const SimTrace& tr) {
    double acc = 0.0;
    for (std::size_t i = 1; i < tr.rows.size(); ++i)
        acc += 0.5 * (tr.rows[i].dissipation + tr.rows[i - 1].dissipation) * (tr.rows[i].t - tr.rows[i - 1].t);
    return acc;
}

struct VirialCheck {
    double lhs = 0;  ///< Σ_i ⟨r²⟩_i d(u_i V_i)/dt from the scheme's fluxes
    double rhs = 0;  ///< (2d − 2(d−2s)/(m−1))∫u^m + 2(d−2s)F(u), plus 2dε‖u‖_1 when ε > 0
};

inline VirialCheck virial_check(const RadialField& u, const Exponents& e, const ReducedKernel& k, double eps = 0.0) {
    SimConfig cfg;
    cfg.eps = eps;
    const Stepper stepper(k, e, cfg);
    const FluxState s = stepper.fluxes(u);
    const RadialGrid& g = u.grid();
    const std::vector<double> div = Stepper::divergence(g, s);
    VirialCheck v;
    for (std::size_t i = 0; i < g.size(); ++i)
        v.lhs += moment_weight(g, i) * div[i];
    const double d = e.d;
    const double dl = d - 2.0 * e.s;
    v.rhs = (2.0 * d - 2.0 * dl / (e.m - 1.0)) * power_integral(u, e.m) + 2.0 * dl * free_energy(u, e, k) +
            2.0 * d * eps * mass(u);
    return v;
}

inline void write_trace_csv(std::ostream& os, const SimTrace& tr) {
    os << "t,mass,lm,linf,F,m2,dissipation,dt\n" << std::setprecision(15);
    for (const TraceRow& r : tr.rows)
        os << r.t << ',' << r.mass << ',' << r.lm_norm << ',' << r.linf << ',' << r.free_energy << ','
           << r.second_moment << ',' << r.dissipation << ',' << r.dt << '\n';
}

inline nlohmann::json trace_footer(const SimTrace& tr) {
    nlohmann::json j{{"outcome", to_string(tr.outcome.kind)},
                     {"reason", tr.outcome.reason},
                     {"steps", tr.steps},
                     {"t_final", tr.t_final},
                     {"mass0", tr.mass0},
                     {"linf0", tr.linf0},
                     {"max_mass_drift", tr.max_mass_drift},
                     {"warnings", tr.warnings}};
    if (tr.outcome.kind == OutcomeKind::BlowupDetected)
        j["t_detect"] = tr.outcome.t_detect;
    else
        j["t_detect"] = nullptr;
    return j;
}

} // namespace aggdiff
