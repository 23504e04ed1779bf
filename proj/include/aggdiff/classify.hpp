#pragma once

#include "aggdiff/evolve.hpp"
#include "aggdiff/field.hpp"
#include "aggdiff/functionals.hpp"
#include "aggdiff/params.hpp"
#include "aggdiff/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

namespace aggdiff {

enum class Verdict { GlobalExistence, FiniteTimeBlowup, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::GlobalExistence:
        return "GlobalExistence";
    case Verdict::FiniteTimeBlowup:
        return "FiniteTimeBlowup";
    case Verdict::Indeterminate:
        return "Indeterminate";
    }
    return "?";
}

struct Classification {
    bool energy_ok = false;
    double product = 0;       ///< ‖u0‖_1^a ‖u0‖_m^m
    double energy_lhs = 0;    ///< ‖u0‖_1^a F(u0)
    double x_star = 0;
    double g_at_xstar = 0;
    double energy_margin = 0;   ///< (g(x_*) − energy_lhs)/|g(x_*)|, positive when the hypothesis holds
    double product_margin = 0;  ///< (product − x_*)/x_*
    Verdict verdict = Verdict::Indeterminate;
};

/// Decision rule: below both thresholds → global existence, energy below but product above → blow-up.
inline Classification classify(const RadialField& u0, const Thresholds& th, const Exponents& e,
                               const ReducedKernel& k, double tol = 1e-3) {
    Classification c;
    const EnergyReport rep = energy_report(u0, e, k);
    c.product = rep.product;
    c.energy_lhs = rep.barrier;
    c.x_star = th.x_star;
    c.g_at_xstar = th.g_at_xstar;
    c.energy_margin = (th.g_at_xstar - c.energy_lhs) / std::abs(th.g_at_xstar);
    c.product_margin = (c.product - th.x_star) / th.x_star;
    c.energy_ok = c.energy_margin > tol;
    if (!c.energy_ok || std::abs(c.product_margin) <= tol)
        c.verdict = Verdict::Indeterminate;
    else
        c.verdict = c.product_margin < 0.0 ? Verdict::GlobalExistence : Verdict::FiniteTimeBlowup;
    return c;
}

inline void to_json(nlohmann::json& j, const Classification& c) {
    j = nlohmann::json{{"verdict", to_string(c.verdict)},
                       {"product", c.product},
                       {"x_star", c.x_star},
                       {"energy_lhs", c.energy_lhs},
                       {"g_at_xstar", c.g_at_xstar},
                       {"energy_ok", c.energy_ok},
                       {"margins", {{"energy", c.energy_margin}, {"product", c.product_margin}}}};
}

struct BarrierReport {
    double min_ratio = 0;  ///< min over records of product / x_*
    double max_ratio = 0;
    std::size_t records = 0;
    bool holds = false;    ///< ratio stayed on the starting side of 1
    bool below = false;    ///< the run started below x_*
};

/// Recorded ‖u‖_1^a‖u‖_m^m / x_* along a trace; it must not cross 1 from the side it started on.
inline BarrierReport barrier_check(const SimTrace& tr, const Thresholds& th, const Exponents& e) {
    BarrierReport b;
    b.min_ratio = std::numeric_limits<double>::infinity();
    b.max_ratio = -std::numeric_limits<double>::infinity();
    for (const TraceRow& r : tr.rows) {
        const double ratio = std::pow(r.mass, e.a) * std::pow(r.lm_norm, e.m) / th.x_star;
        b.min_ratio = std::min(b.min_ratio, ratio);
        b.max_ratio = std::max(b.max_ratio, ratio);
        ++b.records;
    }
    if (b.records == 0)
        return b;
    const TraceRow& first = tr.rows.front();
    b.below = std::pow(first.mass, e.a) * std::pow(first.lm_norm, e.m) < th.x_star;
    b.holds = b.below ? b.max_ratio < 1.0 : b.min_ratio > 1.0;
    return b;
}

inline void to_json(nlohmann::json& j, const BarrierReport& b) {
    j = nlohmann::json{{"min_ratio", b.min_ratio},
                       {"max_ratio", b.max_ratio},
                       {"records", b.records},
                       {"holds", b.holds},
                       {"side", b.below ? "below" : "above"}};
}

} // namespace aggdiff
