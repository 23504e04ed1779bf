#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/field.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace aggdiff {

namespace detail {

/// Full Gauss–Legendre rule on [−1, 1] expanded from boost's half-rule.
template <unsigned N>
inline const std::vector<std::pair<double, double>>& gauss_rule() {
    static const std::vector<std::pair<double, double>> rule = [] {
        using G = boost::math::quadrature::gauss<double, N>;
        std::vector<std::pair<double, double>> out;
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (x[k] == 0.0) {
                out.emplace_back(0.0, w[k]);
            } else {
                out.emplace_back(-x[k], w[k]);
                out.emplace_back(x[k], w[k]);
            }
        }
        return out;
    }();
    return rule;
}

/*
 * Antiderivatives in r' of r'(r+r')^q and r'|r'−r|^q with q = 2 − λ, and
 * their partial derivatives in r. Differences over a source cell give the
 * exact angular-reduced potential of a piecewise-constant density.
 */
struct KernelPrimitive {
    double q;

    double plus(double r, double rp) const {
        const double S = r + rp;
        const double Sq1 = std::pow(S, q + 1.0);
        return S * Sq1 / (q + 2.0) - r * Sq1 / (q + 1.0);
    }
    double absval(double r, double rp) const {
        const double t = rp - r;
        const double a = std::abs(t);
        if (a == 0.0)
            return 0.0;
        const double aq1 = std::pow(a, q + 1.0);
        return a * aq1 / (q + 2.0) + r * (t > 0.0 ? aq1 : -aq1) / (q + 1.0);
    }
    double value(double r, double rp) const { return plus(r, rp) - absval(r, rp); }

    double plus_dr(double r, double rp) const {
        const double S = r + rp;
        const double Sq = std::pow(S, q);
        return q * S * Sq / (q + 1.0) - r * Sq;
    }
    double absval_dr(double r, double rp) const {
        const double t = rp - r;
        const double a = std::abs(t);
        if (a == 0.0)
            return 0.0;
        const double aq = std::pow(a, q);
        return -(q / (q + 1.0)) * t * aq - r * aq;
    }
    double value_dr(double r, double rp) const { return plus_dr(r, rp) - absval_dr(r, rp); }

    /// ∫_lo^hi r' B(r, r') dr'.
    double cell(double r, double lo, double hi) const { return value(r, hi) - value(r, lo); }
    double cell_dr(double r, double lo, double hi) const { return value_dr(r, hi) - value_dr(r, lo); }
};

/// (r+r')² and (r−r')² replaced by r²+r'²+ε²±2rr'.
inline double regularized_bracket(double r, double rp, double q, double eps) {
    const double base = r * r + rp * rp + eps * eps;
    return std::pow(base + 2.0 * r * rp, 0.5 * q) - std::pow(std::max(0.0, base - 2.0 * r * rp), 0.5 * q);
}

inline double regularized_bracket_dr(double r, double rp, double q, double eps) {
    const double base = r * r + rp * rp + eps * eps;
    const double wp = base + 2.0 * r * rp;
    const double wm = std::max(base - 2.0 * r * rp, 1e-300);
    return q * (std::pow(wp, 0.5 * q - 1.0) * (r + rp) - std::pow(wm, 0.5 * q - 1.0) * (r - rp));
}

/// Dense kernel data shared between copies of a ReducedKernel.
struct KernelTable {
    std::size_t n = 0;
    double dr = 1.0;
    double lambda = 0.5;
    double eps = 0.0;
    /// S_ij = ∬_{cell i × cell j} |x − y|^{−λ} dx dy, row-major, exactly symmetric.
    std::vector<double> S;

    mutable std::once_flag force_once;
    /// ∂_r of the plain potential at edge f from unit density in cell j, row-major (n+1) × n.
    mutable std::vector<double> F;
};

inline void fill_force(const KernelTable& t) {
    const std::size_t n = t.n;
    const double q = 2.0 - t.lambda;
    const double pref = 2.0 * std::numbers::pi / q;
    const KernelPrimitive prim{q};
    t.F.assign((n + 1) * n, 0.0);
    const auto& rule = gauss_rule<16>();
    for (std::size_t f = 1; f <= n; ++f) {
        const double r = t.dr * static_cast<double>(f);
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = t.dr * static_cast<double>(j);
            const double hi = lo + t.dr;
            double val;
            if (t.eps == 0.0) {
                val = pref * (-prim.cell(r, lo, hi) / (r * r) + prim.cell_dr(r, lo, hi) / r);
            } else {
                double acc = 0.0;
                for (const auto& [x, w] : rule) {
                    const double rp = lo + 0.5 * t.dr * (1.0 + x);
                    acc += 0.5 * t.dr * w * rp *
                           (-regularized_bracket(r, rp, q, t.eps) / (r * r) +
                            regularized_bracket_dr(r, rp, q, t.eps) / r);
                }
                val = pref * acc;
            }
            t.F[f * n + j] = val;
        }
    }
}

inline std::shared_ptr<const KernelTable> build_table(std::size_t n, double dr, double lambda, double eps) {
    auto t = std::make_shared<KernelTable>();
    t->n = n;
    t->dr = dr;
    t->lambda = lambda;
    t->eps = eps;
    t->S.assign(n * n, 0.0);
    const double q = 2.0 - lambda;
    const double pref = 8.0 * std::numbers::pi * std::numbers::pi / q;
    const KernelPrimitive prim{q};
    const auto& near = gauss_rule<16>();
    const auto& far = gauss_rule<8>();

    // Integrate over the target cell nearer the origin with exact source integration;
    // that ordering keeps the antiderivative differences free of cancellation.
    for (std::size_t i = 0; i < n; ++i) {
        const double tlo = dr * static_cast<double>(i);
        for (std::size_t j = i; j < n; ++j) {
            const double slo = dr * static_cast<double>(j);
            const double shi = slo + dr;
            const auto& rule = (j - i <= 1) ? near : far;
            double acc = 0.0;
            for (const auto& [x, w] : rule) {
                const double r = tlo + 0.5 * dr * (1.0 + x);
                acc += w * r * prim.cell(r, slo, shi);
            }
            acc *= 0.5 * dr * pref;
            t->S[i * n + j] = acc;
            t->S[j * n + i] = acc;
        }
    }

    if (eps > 0.0) {
        // Smooth correction r r'(B_ε − B_0) by tensor quadrature.
        const auto& rule = gauss_rule<8>();
        for (std::size_t i = 0; i < n; ++i) {
            const double tlo = dr * static_cast<double>(i);
            for (std::size_t j = i; j < n; ++j) {
                const double slo = dr * static_cast<double>(j);
                double acc = 0.0;
                for (const auto& [x, wx] : rule) {
                    const double r = tlo + 0.5 * dr * (1.0 + x);
                    for (const auto& [y, wy] : rule) {
                        const double rp = slo + 0.5 * dr * (1.0 + y);
                        const double b0 = std::pow(r + rp, q) - std::pow(std::abs(r - rp), q);
                        acc += wx * wy * r * rp * (regularized_bracket(r, rp, q, eps) - b0);
                    }
                }
                acc *= 0.25 * dr * dr * pref;
                t->S[i * n + j] += acc;
                if (j != i)
                    t->S[j * n + i] += acc;
            }
        }
    }
    return t;
}

/// ε = 0 tables depend only on (n, λ) once lengths are measured in cells.
inline std::shared_ptr<const KernelTable> cached_unit_table(std::size_t n, double lambda) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, double>, std::weak_ptr<const KernelTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n, lambda}];
    if (auto hit = slot.lock())
        return hit;
    auto fresh = build_table(n, 1.0, lambda, 0.0);
    slot = fresh;
    return fresh;
}

} // namespace detail

/**
 * @brief Galerkin table of the Riesz interaction on a radial grid (d = 3).
 *
 * Holds S_ij, the double integral of |x−y|^{−λ} (or its ε-regularized form)
 * over shells i and j. The cell-averaged plain potential is (S u)_i / V_i and
 * the interaction is uᵀ S u. Without regularization the kernel is homogeneous,
 * so a kernel serves every grid with the same cell count: potentials scale by
 * σ^{3−λ} and forces by σ^{2−λ}, σ being the ratio of cell widths.
 */
class ReducedKernel {
public:
    ReducedKernel() = default;

    static ReducedKernel build(const RadialGrid& grid, double lambda, double eps = 0.0, int d = 3) {
        if (d != 3)
            throw UnsupportedDimension("the reduced Riesz kernel is implemented for d=3 only (d=" +
                                       std::to_string(d) + ")");
        if (!(lambda > 0.0 && lambda < 1.0))
            throw DomainError("reduced kernel requires 0 < lambda < 1");
        if (!(eps >= 0.0))
            throw DomainError("kernel regularization eps must be >= 0");
        ReducedKernel k;
        k.grid_ = grid;
        if (eps == 0.0)
            k.table_ = detail::cached_unit_table(grid.size(), lambda);
        else
            k.table_ = detail::build_table(grid.size(), grid.dr(), lambda, eps);
        return k;
    }

    const RadialGrid& grid() const { return grid_; }
    std::size_t size() const { return grid_.size(); }
    double lambda() const { return table_->lambda; }
    double eps() const { return table_->eps; }
    double gain() const { return gain_; }

    /// Multiplies every weight by `gain`; used only to inject faults in self-tests.
    ReducedKernel with_gain(double gain) const {
        ReducedKernel k = *this;
        k.gain_ *= gain;
        return k;
    }

    /// Ratio between table lengths and `g` lengths to the power that rescales S; throws on mismatch.
    double length_scale(const RadialGrid& g) const {
        if (g.size() != table_->n)
            throw GridMismatch("kernel built for n=" + std::to_string(table_->n) + ", field has n=" +
                               std::to_string(g.size()));
        const double sigma = g.dr() / table_->dr;
        if (table_->eps > 0.0 && std::abs(sigma - 1.0) > 1e-12)
            throw GridMismatch("regularized kernel requires the grid it was built on");
        return sigma;
    }

    /// S_ij on grid `g`.
    double weight(std::size_t i, std::size_t j, const RadialGrid& g) const {
        const double sigma = length_scale(g);
        return gain_ * std::pow(sigma, 6.0 - lambda()) * table_->S[i * table_->n + j];
    }
    double weight(std::size_t i, std::size_t j) const { return weight(i, j, grid_); }

    /// (S u)_i for i < rows, using only source cells below u's support end.
    std::vector<double> apply(const RadialField& u, std::size_t rows) const {
        const double sigma = length_scale(u.grid());
        const std::size_t n = table_->n;
        const std::size_t cols = u.support_end();
        rows = std::min(rows, n);
        std::vector<double> out(rows, 0.0);
        const double* S = table_->S.data();
        const double* v = u.values().data();
        for (std::size_t i = 0; i < rows; ++i) {
            const double* row = S + i * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j)
                acc += row[j] * v[j];
            out[i] = acc;
        }
        const double scale = gain_ * std::pow(sigma, 6.0 - lambda());
        for (double& x : out)
            x *= scale;
        return out;
    }

    /// ∂_r of the plain potential at every edge for density u.
    std::vector<double> apply_force(const RadialField& u) const {
        const double sigma = length_scale(u.grid());
        std::call_once(table_->force_once, [this] { detail::fill_force(*table_); });
        const std::size_t n = table_->n;
        const std::size_t cols = u.support_end();
        const double scale = gain_ * std::pow(sigma, 2.0 - lambda());
        std::vector<double> out(n + 1, 0.0);
        for (std::size_t f = 1; f <= n; ++f) {
            const double* row = table_->F.data() + f * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j)
                acc += row[j] * u[j];
            out[f] = scale * acc;
        }
        return out;
    }

private:
    RadialGrid grid_;
    std::shared_ptr<const detail::KernelTable> table_;
    double gain_ = 1.0;
};

inline ReducedKernel build_kernel(const RadialGrid& grid, double lambda, double eps = 0.0, int d = 3) {
    return ReducedKernel::build(grid, lambda, eps, d);
}

/// Cell averages of ∫u(y)|x−y|^{−λ}dy (no normalization constant) for cells i < rows.
inline std::vector<double> plain_potential(const RadialField& u, const ReducedKernel& k,
                                           std::size_t rows = static_cast<std::size_t>(-1)) {
    std::vector<double> out = k.apply(u, rows);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] /= u.grid().volume(i);
    return out;
}

/// c = c_ds ∫u(y)|x−y|^{−λ}dy, averaged over each cell.
inline RadialField potential(const RadialField& u, const ReducedKernel& k, double c_ds) {
    std::vector<double> v = plain_potential(u, k);
    for (double& x : v)
        x = std::max(0.0, c_ds * x);
    return RadialField(u.grid(), std::move(v));
}

/// Exact point value of c at radius r for the piecewise-constant density u.
inline double potential_at(const RadialField& u, const ReducedKernel& k, double c_ds, double r) {
    k.length_scale(u.grid());
    const RadialGrid& g = u.grid();
    const double lam = k.lambda();
    const double q = 2.0 - lam;
    const std::size_t end = u.support_end();
    double acc = 0.0;
    if (k.eps() == 0.0) {
        if (r == 0.0) {
            for (std::size_t j = 0; j < end; ++j)
                acc += u[j] * (std::pow(g.edge(j + 1), 3.0 - lam) - std::pow(g.edge(j), 3.0 - lam));
            return k.gain() * c_ds * 4.0 * std::numbers::pi * acc / (3.0 - lam);
        }
        const detail::KernelPrimitive prim{q};
        for (std::size_t j = 0; j < end; ++j)
            acc += u[j] * prim.cell(r, g.edge(j), g.edge(j + 1));
        return k.gain() * c_ds * 2.0 * std::numbers::pi / (q * r) * acc;
    }
    const double eps = k.eps();
    if (r == 0.0) {
        const auto& rule = detail::gauss_rule<16>();
        for (std::size_t j = 0; j < end; ++j) {
            double cell = 0.0;
            for (const auto& [x, w] : rule) {
                const double rp = g.edge(j) + 0.5 * g.dr() * (1.0 + x);
                cell += w * 4.0 * std::numbers::pi * rp * rp * std::pow(rp * rp + eps * eps, -0.5 * lam);
            }
            acc += u[j] * 0.5 * g.dr() * cell;
        }
        return k.gain() * c_ds * acc;
    }
    const auto& rule = detail::gauss_rule<16>();
    for (std::size_t j = 0; j < end; ++j) {
        double cell = 0.0;
        for (const auto& [x, w] : rule) {
            const double rp = g.edge(j) + 0.5 * g.dr() * (1.0 + x);
            cell += w * rp * detail::regularized_bracket(r, rp, q, eps);
        }
        acc += u[j] * 0.5 * g.dr() * cell;
    }
    return k.gain() * c_ds * 2.0 * std::numbers::pi / (q * r) * acc;
}

/// ∂_r c at every cell edge (zero at the origin by symmetry).
inline FaceValues force(const RadialField& u, const ReducedKernel& k, double c_ds) {
    FaceValues out{u.grid(), k.apply_force(u)};
    for (double& x : out.values)
        x *= c_ds;
    return out;
}

/// h(u) = ∬u(x)u(y)|x−y|^{−λ}dxdy.
inline double interaction(const RadialField& u, const ReducedKernel& k) {
    const std::vector<double> Su = k.apply(u, u.support_end());
    double acc = 0.0;
    for (std::size_t i = 0; i < Su.size(); ++i)
        acc += u[i] * Su[i];
    return acc;
}

} // namespace aggdiff
