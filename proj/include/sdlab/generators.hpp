#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "sdlab/dyadic.hpp"
#include "sdlab/vector_grid.hpp"

namespace sdlab {

/// Seeded test inputs mixing indicators, towers and log-normal noise.
class InputGenerator {
public:
    enum class Shape { LogNormal, Indicator, Tower };

    explicit InputGenerator(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    static const char* name(Shape s) {
        switch (s) {
        case Shape::LogNormal: return "lognormal";
        case Shape::Indicator: return "indicator";
        case Shape::Tower: return "tower";
        }
        return "?";
    }

    Shape pick() { return static_cast<Shape>(std::uniform_int_distribution<int>(0, 2)(rng_)); }

    DyadicCube random_cube(int d, int L, int min_level = 0) {
        const int k = std::uniform_int_distribution<int>(min_level, L)(rng_);
        DyadicCube q{d, k, {0, 0}, 0};
        for (int a = 0; a < d; ++a)
            q.index[a] = std::uniform_int_distribution<std::int64_t>(0, (std::int64_t{1} << k) - 1)(rng_);
        return q;
    }

    GridFunction lognormal(int d, int L, double sigma = 1.5, double zero_prob = 0.1) {
        GridFunction f(d, L);
        std::normal_distribution<double> n(0, sigma);
        std::bernoulli_distribution z(zero_prob);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = z(rng_) ? 0.0 : std::exp(n(rng_));
        return f;
    }

    GridFunction indicator(int d, int L) {
        GridFunction f(d, L);
        const auto fp = footprint(random_cube(d, L, 1 <= L ? 1 : 0), L);
        for (const auto& c : fp.cells) f[c.cell] = 1.0;
        return f;
    }

    /// Σ_k c_k 1_{Q_k} over a random nested chain Q_0 ⊃ Q_1 ⊃ ... down to a random finest cell.
    GridFunction tower(int d, int L) {
        GridFunction f(d, L);
        DyadicCube leaf = random_cube(d, L, L);
        std::uniform_real_distribution<double> growth(0.0, 1.5);
        const double rate = growth(rng_);
        const int top = std::uniform_int_distribution<int>(0, L)(rng_);
        for (int k = top; k <= L; ++k) {
            DyadicCube q = leaf;
            while (q.level > k) q = parent(q);
            const double c = std::pow(2.0, rate * d * (k - top));
            for (const auto& cell : footprint(q, L).cells) f[cell.cell] += c;
        }
        return f;
    }

    GridFunction make(int d, int L, Shape s) {
        switch (s) {
        case Shape::LogNormal: return lognormal(d, L);
        case Shape::Indicator: return indicator(d, L);
        case Shape::Tower: return tower(d, L);
        }
        return lognormal(d, L);
    }

    GridFunction any(int d, int L) { return make(d, L, pick()); }

    /// Atom slices share a spatial shape scaled by log-normal atom factors, or are drawn independently.
    VectorGridFunction vector(int d, int L, std::size_t atoms) {
        VectorGridFunction v(d, L, atoms);
        std::normal_distribution<double> n(0, 1.0);
        if (std::bernoulli_distribution(0.5)(rng_)) {
            const GridFunction base = any(d, L);
            for (std::size_t w = 0; w < atoms; ++w) {
                const double s = std::exp(n(rng_));
                for (std::size_t c = 0; c < v.cells(); ++c) v.at(c, w) = base[c] * s;
            }
        } else {
            for (std::size_t w = 0; w < atoms; ++w) v.set_slice(w, any(d, L));
        }
        return v;
    }

private:
    std::mt19937_64 rng_;
};

} // namespace sdlab
