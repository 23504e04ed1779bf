#pragma once

#include "aggdiff/field.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace aggdiff::verify {

/// Seeded generator of nonnegative radial test densities of mixed shapes.
class RandomFields {
public:
    explicit RandomFields(std::uint64_t seed) : rng_(seed) {}

    /// Cycles through Gaussian mixtures, step functions, annuli and cusps.
    RadialField next(const RadialGrid& g) {
        const int kind = static_cast<int>(counter_++ % 4);
        switch (kind) {
        case 0:
            return gaussian_mixture(g);
        case 1:
            return steps(g);
        case 2:
            return annulus(g);
        default:
            return cusp(g);
        }
    }

    RadialField gaussian_mixture(const RadialGrid& g) {
        const double R = g.r_max();
        std::uniform_int_distribution<int> count(1, 4);
        std::uniform_real_distribution<double> amp(0.1, 2.0), centre(0.0, 0.5 * R), width(0.03 * R, 0.2 * R);
        const int k = count(rng_);
        std::vector<double> a(k), c(k), w(k);
        for (int i = 0; i < k; ++i) {
            a[i] = amp(rng_);
            c[i] = centre(rng_);
            w[i] = width(rng_);
        }
        return sample(g, [&](double r) {
            double s = 0.0;
            for (int i = 0; i < k; ++i)
                s += a[i] * std::exp(-(r - c[i]) * (r - c[i]) / (w[i] * w[i]));
            return s;
        });
    }

    /// Piecewise-constant random values on a random support.
    RadialField steps(const RadialGrid& g) {
        std::uniform_int_distribution<std::size_t> len(g.size() / 8, g.size() / 2);
        std::uniform_int_distribution<std::size_t> block(1, 16);
        std::uniform_real_distribution<double> val(0.0, 3.0);
        const std::size_t end = len(rng_);
        std::vector<double> v(g.size(), 0.0);
        std::size_t i = 0;
        while (i < end) {
            const std::size_t b = block(rng_);
            const double x = val(rng_);
            for (std::size_t j = i; j < std::min(end, i + b); ++j)
                v[j] = x;
            i += b;
        }
        return RadialField(g, std::move(v));
    }

    RadialField annulus(const RadialGrid& g) {
        const double R = g.r_max();
        std::uniform_real_distribution<double> inner(0.0, 0.4 * R), thick(0.02 * R, 0.3 * R), h(0.2, 3.0);
        const double r1 = inner(rng_);
        const double r2 = r1 + thick(rng_);
        const double height = h(rng_);
        return project(g, [&](double r) { return (r >= r1 && r < r2) ? height : 0.0; });
    }

    /// (1 − r/ρ)_+^γ / (r/ρ + δ)^κ style profiles with a sharp peak at the origin.
    RadialField cusp(const RadialGrid& g) {
        const double R = g.r_max();
        std::uniform_real_distribution<double> rho(0.1 * R, 0.6 * R), gam(0.5, 3.0), kap(0.0, 1.2), del(0.01, 0.2);
        const double p = rho(rng_), ga = gam(rng_), ka = kap(rng_), de = del(rng_);
        return sample(g, [&](double r) {
            const double x = r / p;
            return x < 1.0 ? std::pow(1.0 - x, ga) / std::pow(x + de, ka) : 0.0;
        });
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    std::uint64_t counter_ = 0;
};

} // namespace aggdiff::verify
