#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace aggdiff {

/**
 * @brief Uniform cell-centred grid on the ball of radius r_max in R^3.
 *
 * Edges r_{i−1/2} = i·Δr, centres r_i = (i + 1/2)Δr and exact shell volumes
 * V_i = (4π/3)Δr³((i+1)³ − i³), so ΣV_i equals the ball volume up to rounding.
 */
class RadialGrid {
public:
    RadialGrid() = default;
    RadialGrid(std::size_t n, double r_max) : n_(n), r_max_(r_max) {
        if (n == 0)
            throw InvalidField("grid needs at least one cell");
        if (!(r_max > 0.0) || !std::isfinite(r_max))
            throw InvalidField("grid radius must be positive and finite");
    }

    std::size_t size() const { return n_; }
    double r_max() const { return r_max_; }
    double dr() const { return r_max_ / static_cast<double>(n_); }

    double edge(std::size_t i) const { return static_cast<double>(i) * dr(); }
    double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dr(); }

    double volume(std::size_t i) const {
        const double k = static_cast<double>(i);
        const double h = dr();
        return 4.0 * std::numbers::pi / 3.0 * h * h * h * (3.0 * k * k + 3.0 * k + 1.0);
    }

    /// Area of the sphere through edge f (f = 0 … n).
    double face_area(std::size_t f) const {
        const double r = edge(f);
        return 4.0 * std::numbers::pi * r * r;
    }

    double total_volume() const {
        const double R = r_max_;
        return 4.0 * std::numbers::pi / 3.0 * R * R * R;
    }

    /// Same cell count, every length multiplied by `factor`.
    RadialGrid scaled(double factor) const { return RadialGrid(n_, r_max_ * factor); }

    /// Same Δr, `n` cells.
    RadialGrid extended(std::size_t n) const { return RadialGrid(n, dr() * static_cast<double>(n)); }

    friend bool operator==(const RadialGrid&, const RadialGrid&) = default;

private:
    std::size_t n_ = 1;
    double r_max_ = 1.0;
};

/// Nonnegative, piecewise-constant radial density.
class RadialField {
public:
    RadialField() = default;
    explicit RadialField(const RadialGrid& grid) : grid_(grid), values_(grid.size(), 0.0) {}
    RadialField(const RadialGrid& grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw GridMismatch("value count does not match grid size");
        for (double v : values_)
            if (v < 0.0)
                throw InvalidField("density must be nonnegative");
    }

    const RadialGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Index one past the last cell with a positive value (0 for the zero field).
    std::size_t support_end() const {
        std::size_t k = values_.size();
        while (k > 0 && !(values_[k - 1] > 0.0))
            --k;
        return k;
    }

    bool is_zero() const { return support_end() == 0; }

private:
    RadialGrid grid_;
    std::vector<double> values_;
};

/// Signed per-cell quantity (chemical potential, residuals).
struct CellValues {
    RadialGrid grid;
    std::vector<double> values;
};

/// Per-face quantity at edges r_{f−1/2}, f = 0 … n.
struct FaceValues {
    RadialGrid grid;
    std::vector<double> values;
};

// ---------------------------------------------------------------------------
// construction

/// Point values at cell centres.
inline RadialField sample(const RadialGrid& grid, const std::function<double(double)>& f) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        v[i] = std::max(0.0, f(grid.center(i)));
    return RadialField(grid, std::move(v));
}

/// Cell averages (1/V_i)∫_cell f dV; mass-exact for the projected function up to quadrature error.
inline RadialField project(const RadialGrid& grid, const std::function<double(double)>& f) {
    using Gauss = boost::math::quadrature::gauss<double, 10>;
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lo = grid.edge(i);
        const double hi = grid.edge(i + 1);
        const double integral =
            Gauss::integrate([&](double r) { return 4.0 * std::numbers::pi * r * r * f(r); }, lo, hi);
        v[i] = std::max(0.0, integral / grid.volume(i));
    }
    return RadialField(grid, std::move(v));
}

inline RadialField scale_values(const RadialField& u, double c) {
    if (!(c >= 0.0))
        throw InvalidField("value scale must be nonnegative");
    std::vector<double> v = u.values();
    for (double& x : v)
        x *= c;
    return RadialField(u.grid(), std::move(v));
}

/// Append zero cells (same Δr) up to `n` cells.
inline RadialField pad(const RadialField& u, std::size_t n) {
    if (n < u.size())
        throw GridMismatch("pad cannot shrink a field");
    std::vector<double> v = u.values();
    v.resize(n, 0.0);
    return RadialField(u.grid().extended(n), std::move(v));
}

// ---------------------------------------------------------------------------
// quadrature of the piecewise-constant field

inline double mass(const RadialField& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        acc += u[i] * u.grid().volume(i);
    return acc;
}

/// Σ u_i^q V_i, the q-th power of the L^q norm.
inline double power_integral(const RadialField& u, double q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] > 0.0)
            acc += std::pow(u[i], q) * u.grid().volume(i);
    return acc;
}

/// (Σ u_i^q V_i)^{1/q}; q = ∞ gives max u_i.
inline double lp_norm(const RadialField& u, double q) {
    if (std::isinf(q)) {
        double mx = 0.0;
        for (double v : u.values())
            mx = std::max(mx, v);
        return mx;
    }
    if (!(q >= 1.0))
        throw DomainError("lp_norm requires q >= 1");
    if (q == 1.0)
        return mass(u);
    return std::pow(power_integral(u, q), 1.0 / q);
}

/// ∫_cell |x|² dx / V_i, the exact second-moment weight of a cell.
inline double moment_weight(const RadialGrid& g, std::size_t i) {
    const double a = g.edge(i);
    const double b = g.edge(i + 1);
    const double a2 = a * a, b2 = b * b;
    // (3/5)(b⁵ − a⁵)/(b³ − a³), expanded to avoid cancellation
    return 0.6 * (b2 * b2 + b2 * b * a + b2 * a2 + b * a2 * a + a2 * a2) / (b2 + b * a + a2);
}

inline double second_moment(const RadialField& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] > 0.0)
            acc += u[i] * moment_weight(u.grid(), i) * u.grid().volume(i);
    return acc;
}

/// ‖u‖_1^a ‖u‖_m^m, the quantity compared against x_* by the dichotomy.
inline double threshold_product(const RadialField& u, const Exponents& e) {
    return std::pow(mass(u), e.a) * power_integral(u, e.m);
}

// ---------------------------------------------------------------------------
// transforms

/// Piecewise-linear interpolation through the cell centres, clamped at 0 and zero past r_max.
inline double interpolate(const RadialField& u, double r) {
    const RadialGrid& g = u.grid();
    if (r < 0.0)
        r = -r;
    if (r >= g.r_max())
        return 0.0;
    const double x = r / g.dr() - 0.5;
    if (x <= 0.0)
        return u[0];
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= u.size())
        return u[u.size() - 1];
    const double t = x - static_cast<double>(i);
    return std::max(0.0, (1.0 - t) * u[i] + t * u[i + 1]);
}

/// Interpolate `u` onto `target` (used when a rescaled field must keep a fixed grid).
inline RadialField resample(const RadialField& u, const RadialGrid& target) {
    std::vector<double> v(target.size());
    for (std::size_t i = 0; i < target.size(); ++i)
        v[i] = interpolate(u, target.center(i));
    return RadialField(target, std::move(v));
}

/// Mass of `u` carried by radii beyond `radius`, counting partial cells by volume fraction.
inline double mass_beyond(const RadialField& u, double radius) {
    const RadialGrid& g = u.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double lo = g.edge(i);
        const double hi = g.edge(i + 1);
        if (hi <= radius)
            continue;
        if (lo >= radius) {
            acc += u[i] * g.volume(i);
        } else {
            const double shell = 4.0 * std::numbers::pi / 3.0 * (hi * hi * hi - radius * radius * radius);
            acc += u[i] * shell;
        }
    }
    return acc;
}

enum class ScalingMode {
    Rescale,  ///< exact: grid lengths divided by λ, values multiplied
    Resample  ///< keep the grid, interpolate; throws SupportClipped on truncation
};

/// Returns amp·u(λ r); with Rescale the result lives on the grid scaled by 1/λ.
inline RadialField dilate(const RadialField& u, double amp, double lam,
                          ScalingMode mode = ScalingMode::Rescale) {
    if (!(lam > 0.0) || !(amp >= 0.0))
        throw DomainError("dilation needs lam > 0 and amp >= 0");
    const RadialField stretched(u.grid().scaled(1.0 / lam), scale_values(u, amp).values());
    if (mode == ScalingMode::Rescale)
        return stretched;
    const double total = mass(stretched);
    const double lost = mass_beyond(stretched, u.grid().r_max());
    if (total > 0.0 && lost > 1e-8 * total)
        throw SupportClipped("rescaled field loses " + std::to_string(lost / total) +
                             " of its mass past r_max");
    return resample(stretched, u.grid());
}

/// u_λ(x) = λ^{2s/(2−m)} u(λx), the scaling that leaves the equation invariant.
inline RadialField apply_dynamic_scaling(const RadialField& u, double lam, const Exponents& e,
                                         ScalingMode mode = ScalingMode::Rescale) {
    return dilate(u, std::pow(lam, 2.0 * e.s / (2.0 - e.m)), lam, mode);
}

struct NormalizedField {
    RadialField field;
    double lambda = 1.0;
    double alpha = 1.0;
};

/// ū(x) = α u(λx) with ‖ū‖_1 = ‖ū‖_m = 1 (d = 3 grid).
inline NormalizedField normalize_both_norms(const RadialField& u, const Exponents& e) {
    const double l1 = mass(u);
    if (!(l1 > 0.0))
        throw ZeroField("cannot normalize the zero field");
    const double lm = lp_norm(u, e.m);
    const double d = e.d;
    const double k = e.m / (d * (e.m - 1.0));
    const double lam = std::pow(l1, k) * std::pow(lm, -k);
    const double alpha = std::pow(lam, d) / l1;
    return {dilate(u, alpha, lam), lam, alpha};
}

/**
 * @brief Symmetric decreasing rearrangement via the distribution function.
 *
 * Cells are ordered by value and stacked along the volume coordinate
 * v = (4π/3)r³; the resulting step function of v is averaged back over the
 * grid cells. Output is nonincreasing, mass-preserving and equimeasurable to
 * within one cell volume at every level.
 */
inline RadialField rearrange_decreasing(const RadialField& u) {
    const RadialGrid& g = u.grid();
    const std::size_t n = u.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return u[x] > u[y]; });

    std::vector<double> out(n, 0.0);
    std::size_t src = 0;
    double src_left = n > 0 ? g.volume(order[0]) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double need = g.volume(i);
        double acc = 0.0;
        while (need > 0.0 && src < n) {
            const double take = std::min(need, src_left);
            acc += take * u[order[src]];
            need -= take;
            src_left -= take;
            if (src_left <= 0.0 || (src_left <= 1e-15 * g.volume(order[src]))) {
                ++src;
                src_left = src < n ? g.volume(order[src]) : 0.0;
            }
        }
        out[i] = acc / g.volume(i);
    }
    // Enforce monotonicity against rounding in the partial-cell averages.
    for (std::size_t i = 1; i < n; ++i)
        out[i] = std::min(out[i], out[i - 1]);
    return RadialField(g, std::move(out));
}

inline bool is_nonincreasing(const RadialField& u, double tol = 0.0) {
    for (std::size_t i = 1; i < u.size(); ++i)
        if (u[i] > u[i - 1] + tol)
            return false;
    return true;
}

/// Total volume of the cells where u > level.
inline double level_volume(const RadialField& u, double level) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] > level)
            acc += u.grid().volume(i);
    return acc;
}

// ---------------------------------------------------------------------------
// CSV

inline void write_csv(std::ostream& os, const RadialField& u, const std::string& value_name = "u") {
    os << "r," << value_name << '\n';
    os << std::setprecision(17);
    for (std::size_t i = 0; i < u.size(); ++i)
        os << u.grid().center(i) << ',' << u[i] << '\n';
}

inline void write_csv(const std::string& path, const RadialField& u, const std::string& value_name = "u") {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open " + path + " for writing");
    write_csv(os, u, value_name);
}

/// Reads a `r,<name>` CSV with uniformly spaced centres starting at Δr/2.
inline RadialField read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError(path + ": empty file");
    std::vector<double> rs;
    std::vector<double> vs;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path + ": malformed row '" + line + "'");
        try {
            rs.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError(path + ": malformed row '" + line + "'");
        }
    }
    if (rs.empty())
        throw ConfigError(path + ": no data rows");
    const double dr = 2.0 * rs.front();
    for (std::size_t i = 0; i < rs.size(); ++i)
        if (std::abs(rs[i] - (static_cast<double>(i) + 0.5) * dr) > 1e-9 * dr * static_cast<double>(i + 1))
            throw ConfigError(path + ": centres are not uniformly spaced from the origin");
    return RadialField(RadialGrid(rs.size(), dr * static_cast<double>(rs.size())), std::move(vs));
}

} // namespace aggdiff
