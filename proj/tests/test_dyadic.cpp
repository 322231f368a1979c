#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sdlab/dyadic.hpp"
#include "sdlab/grid_io.hpp"

using namespace sdlab;

TEST(Grid, StandardGridSizes) {
    EXPECT_EQ(build_grid(1, 0).size(), 1u);
    EXPECT_EQ(build_grid(1, 2).size(), 7u);
    EXPECT_EQ(build_grid(2, 1).size(), 5u);
    EXPECT_EQ(build_grid(1, 0).cube(0), (DyadicCube{1, 0, {0, 0}, 0}));
}

TEST(Grid, ParentChildRoundTrip) {
    for (int d = 1; d <= 2; ++d)
        for (int shift = 0; shift < shift_count(d); ++shift) {
            const Grid g(d, d == 1 ? 5 : 3, shift);
            for (std::size_t id = 0; id < g.level_begin(g.depth()); ++id)
                for (auto c : g.child_ids(id)) {
                    EXPECT_EQ(g.parent_id(c), id);
                    EXPECT_TRUE(contains(g.cube(id), g.cube(c)));
                }
        }
}

TEST(Grid, ShiftedCubesAreTranslatesByThirds) {
    // Level 1, shift 1: corners (m - 1/3)/2.
    const DyadicCube q{1, 1, {1, 0}, 1};
    EXPECT_DOUBLE_EQ(q.lower(0), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(q.upper(0), 5.0 / 6.0);
    const DyadicCube r{1, 2, {1, 0}, 1};
    EXPECT_DOUBLE_EQ(r.lower(0), (1 + 1.0 / 3.0) / 4);
}

TEST(Grid, RejectsOutOfRangeParameters) {
    EXPECT_THROW(build_grid(3, 1), ConfigError);
    EXPECT_THROW(build_grid(1, 13), ConfigError);
    EXPECT_THROW(build_grid(2, 7), ConfigError);
    EXPECT_THROW(build_grid(1, 2, 3), ConfigError);
}

TEST(Averages, DirectFormulas) {
    const GridFunction f(1, 1, {1, 0});
    const DyadicCube unit{1, 0, {0, 0}, 0};
    EXPECT_DOUBLE_EQ(average(f, Exponent::of(1), unit), 0.5);
    EXPECT_NEAR(average(f, Exponent::of(2), unit), 0.70710678118654752, 1e-15);
    EXPECT_DOUBLE_EQ(average(f, Exponent::infinity(), unit), 1.0);
    const auto c = GridFunction::constant(2, 3, 2.5);
    for (double r : {0.5, 1.0, 3.0}) EXPECT_NEAR(average(c, Exponent::of(r), DyadicCube{2, 1, {1, 0}, 0}), 2.5, 1e-14);
}

TEST(Averages, SignedValuesUseModulus) {
    const GridFunction f(1, 1, {-3, 1});
    EXPECT_DOUBLE_EQ(average(f, Exponent::of(1), DyadicCube{1, 0, {0, 0}, 0}), 2.0);
}

TEST(Averages, ShiftedCubeIsClippedToTheUnitCube) {
    // Level 0 shift 2 in d = 1: index -1 is [-1/3, 2/3), index 0 is [2/3, 5/3).
    const auto fp = footprint(DyadicCube{1, 0, {-1, 0}, 2}, 2);
    EXPECT_NEAR(fp.measure, 2.0 / 3.0, 1e-15);
    EXPECT_FALSE(fp.aligned);
    EXPECT_NEAR(footprint(DyadicCube{1, 0, {0, 0}, 2}, 2).measure, 1.0 / 3.0, 1e-15);
}

// Minimal container by enumeration of every cube of the three shifted grids up to a fixed level.
static double enumerated_cover_ratio(const AxisCube& q) {
    double best = INFINITY;
    for (int alpha = 0; alpha < shift_count(q.dim); ++alpha)
        for (int k = 0; k <= 14; ++k) {
            const Grid g(q.dim, std::min(k, q.dim == 1 ? 12 : 6), alpha);
            if (k > g.depth()) break;
            for (std::size_t i = g.level_begin(k); i < g.level_begin(k) + g.level_size(k); ++i) {
                const auto c = g.cube(i);
                bool in = true;
                for (int a = 0; a < q.dim; ++a)
                    in = in && c.lower(a) <= q.lower[a] + 1e-12 && q.lower[a] + q.side <= c.upper(a) + 1e-12;
                if (in) best = std::min(best, c.measure() / q.measure());
            }
        }
    return best;
}

TEST(Covering, StandardCubeCoversItself) {
    const auto c = cover_cube({1, {0.25, 0}, 0.25});
    EXPECT_EQ(c.shift, 0);
    EXPECT_DOUBLE_EQ(c.ratio, 1.0);
}

TEST(Covering, MiddleHalfInterval) {
    const AxisCube q{1, {0.25, 0}, 0.5};
    const auto c = cover_cube(q);
    EXPECT_LE(c.cube.side(), 1.5);
    EXPECT_DOUBLE_EQ(c.ratio, enumerated_cover_ratio(q));
    EXPECT_DOUBLE_EQ(c.ratio, 2.0);
}

TEST(Covering, RandomCubesAgainstEnumeration) {
    std::mt19937_64 rng(7);
    for (int d = 1; d <= 2; ++d) {
        std::uniform_int_distribution<int> lv(1, d == 1 ? 10 : 5);
        for (int t = 0; t < 100; ++t) {
            // Corners and sides on the 2^-12 lattice so every cube is representable.
            const int grain = d == 1 ? 12 : 6;
            const std::int64_t n = std::int64_t{1} << grain;
            const std::int64_t side = std::max<std::int64_t>(1, n >> lv(rng));
            std::uniform_int_distribution<std::int64_t> pos(0, n - side);
            AxisCube q{d, {0, 0}, std::ldexp(static_cast<double>(side), -grain)};
            for (int a = 0; a < d; ++a) q.lower[a] = std::ldexp(static_cast<double>(pos(rng)), -grain);
            const auto c = cover_cube(q);
            EXPECT_LE(c.ratio, std::pow(6.0, d) + 1e-9);
            EXPECT_NEAR(c.ratio, enumerated_cover_ratio(q), 1e-9);
        }
    }
}

TEST(GridIo, JsonAndCsvRoundTrip) {
    const GridFunction f(2, 2, {0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 0.125});
    const auto g = grid_function_from_json(to_json(f));
    EXPECT_EQ(g.values(), f.values());
    std::stringstream ss;
    write_csv(ss, f);
    EXPECT_EQ(read_csv(ss, 2, 2).values(), f.values());
    const DyadicCube q{2, 3, {5, 2}, 7};
    EXPECT_EQ(cube_from_json(to_json(q)), q);
}
