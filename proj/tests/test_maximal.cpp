#include <cmath>

#include <gtest/gtest.h>

#include "sdlab/generators.hpp"
#include "sdlab/maximal.hpp"

using namespace sdlab;

namespace {

CubeCollection tree(int d, int L) { return CubeCollection::of(build_grid(d, L)); }

// max over all standard cubes containing the cell, computed cube by cube from raw cell sums.
double brute_maximal(const std::vector<GridFunction>& f, const Exponents& r, std::size_t cell) {
    const int L = f.front().depth();
    const std::size_t n = std::size_t{1} << L;
    double best = 0;
    for (int k = 0; k <= L; ++k) {
        const std::size_t span = n >> k, start = cell / span * span;
        double prod = 1;
        for (std::size_t j = 0; j < f.size(); ++j) {
            double s = 0;
            for (std::size_t c = start; c < start + span; ++c) s += std::pow(std::abs(f[j][c]), r[j].value());
            prod *= std::pow(s / static_cast<double>(span), 1 / r[j].value());
        }
        best = std::max(best, prod);
    }
    return best;
}

} // namespace

TEST(ScalarMaximal, ConstantsAreFixedPoints) {
    const auto one = GridFunction::constant(2, 3, 1.0);
    const auto M = scalar_maximal({one, one}, exponents({1, 3}), tree(2, 3));
    for (double v : M.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(ScalarMaximal, TwoCellExamples) {
    const GridFunction f(1, 1, {1, 0});
    const auto M1 = scalar_maximal({f}, exponents({1}), tree(1, 1));
    EXPECT_DOUBLE_EQ(M1[0], 1.0);
    EXPECT_DOUBLE_EQ(M1[1], 0.5);
    const auto M2 = scalar_maximal({f, f}, exponents({1, 1}), tree(1, 1));
    EXPECT_DOUBLE_EQ(M2[0], 1.0);
    EXPECT_DOUBLE_EQ(M2[1], 0.25);
}

TEST(ScalarMaximal, AgreesWithCubeByCubeEnumeration) {
    InputGenerator gen(21);
    const auto D = tree(1, 6);
    for (int t = 0; t < 30; ++t) {
        const std::vector<GridFunction> f{gen.any(1, 6), gen.any(1, 6)};
        const auto r = exponents({1.0 + t % 3, 1.5});
        const auto M = scalar_maximal(f, r, D);
        for (std::size_t c = 0; c < M.size(); ++c) EXPECT_NEAR(M[c], brute_maximal(f, r, c), 1e-12 * (1 + M[c]));
    }
}

TEST(ScalarMaximal, DominatesTheFunction) {
    InputGenerator gen(4);
    for (int t = 0; t < 20; ++t) {
        const auto f = gen.any(2, 3);
        const auto M = scalar_maximal({f}, exponents({1}), tree(2, 3));
        for (std::size_t c = 0; c < f.size(); ++c) EXPECT_GE(M[c], std::abs(f[c]) * (1 - 1e-14));
    }
}

TEST(ScalarMaximal, ShiftedCollectionsAreRejected) {
    const auto f = GridFunction::constant(1, 3, 1.0);
    EXPECT_THROW(scalar_maximal({f}, exponents({1}), CubeCollection::all_shifts(1, 3)), UnsupportedError);
}

TEST(LatticeMaximal, PerAtomExample) {
    const auto F = VectorGridFunction::from_slices({GridFunction(1, 1, {1, 0}), GridFunction(1, 1, {0, 1})});
    const auto M = lattice_maximal({F}, exponents({1}), tree(1, 1));
    EXPECT_DOUBLE_EQ(M.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(M.at(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(M.at(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(M.at(1, 1), 1.0);
}

TEST(LatticeMaximal, SingleAtomMatchesScalar) {
    InputGenerator gen(8);
    const auto D = tree(1, 5);
    for (int t = 0; t < 10; ++t) {
        const auto f = gen.any(1, 5), g = gen.any(1, 5);
        const auto M = lattice_maximal({VectorGridFunction::from_slices({f}), VectorGridFunction::from_slices({g})},
                                       exponents({2, 1}), D);
        EXPECT_EQ(M.slice(0).values(), scalar_maximal({f, g}, exponents({2, 1}), D).values());
    }
}

TEST(LatticeMaximal, ConstantInSpaceReturnsInput) {
    VectorGridFunction F(1, 4, 3);
    for (std::size_t c = 0; c < F.cells(); ++c)
        for (std::size_t w = 0; w < 3; ++w) F.at(c, w) = 1.0 + static_cast<double>(w);
    const auto M = lattice_maximal({F}, exponents({1}), tree(1, 4));
    for (std::size_t c = 0; c < F.cells(); ++c)
        for (std::size_t w = 0; w < 3; ++w) EXPECT_NEAR(M.at(c, w), F.at(c, w), 1e-14);
}

TEST(OpnormSearch, ConstantsGiveAtLeastOne) {
    OpnormSearch cfg;
    cfg.depth = 5;
    cfg.trials = 20;
    const auto est = maximal_opnorm_lower(exponents({1}), exponents({2}), {SpaceSpec::lebesgue(2, 2)}, cfg);
    EXPECT_GE(est.estimate, 1.0 - 1e-12);
}

TEST(OpnormSearch, FeffermanSteinRatiosStayBoundedInAtoms) {
    OpnormSearch cfg;
    cfg.depth = 5;
    cfg.trials = 40;
    std::vector<double> est;
    for (std::size_t n : {2u, 8u, 32u})
        est.push_back(maximal_opnorm_lower(exponents({1}), exponents({2}), {SpaceSpec::lebesgue(2, n)}, cfg).estimate);
    // Scalar Hardy–Littlewood constant of the dyadic maximal operator on L² is 2.
    for (double e : est) EXPECT_LE(e, 2.0 + 1e-9);
}
