#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sdlab/generators.hpp"
#include "sdlab/sparse.hpp"

using namespace sdlab;

namespace {

DyadicCube cube(int level, std::int64_t i) { return {1, level, {i, 0}, 0}; }

std::vector<DyadicCube> full_tree(int L) { return build_grid(1, L).cubes(); }

const GridFunction spike(1, 2, {4, 0, 0, 0}); // 4·1_{[0,1/4)}, unit L¹ norm

// Sparseness of a standard dyadic family by its Carleson packing over the family's own cubes.
bool carleson_sparse(const std::vector<DyadicCube>& S, double eta) {
    for (const auto& P : S) {
        double packed = 0;
        for (const auto& Q : S)
            if (contains(P, Q)) packed += Q.measure();
        if (eta * packed > P.measure() + 1e-15) return false;
    }
    return true;
}

} // namespace

TEST(VerifySparse, DisjointCubesUseThemselves) {
    const auto v = verify_sparse({cube(2, 0), cube(2, 3), cube(3, 5)}, 1.0);
    ASSERT_TRUE(v.sparse);
    EXPECT_TRUE(certificate_valid(v.family));
}

TEST(VerifySparse, FullTreeDepthOneIsHalfSparse) {
    const auto v = verify_sparse(full_tree(1), 0.5);
    ASSERT_TRUE(v.sparse);
    EXPECT_TRUE(certificate_valid(v.family));
    EXPECT_EQ(v.family.cubes.size(), 3u);
}

TEST(VerifySparse, FullTreeDepthTwoIsRefuted) {
    const auto v = verify_sparse(full_tree(2), 0.5);
    ASSERT_FALSE(v.sparse);
    EXPECT_GT(v.refutation.demand, v.refutation.available);
    EXPECT_NEAR(v.refutation.demand, 1.5, 1e-12);
    EXPECT_NEAR(v.refutation.available, 1.0, 1e-12);
}

TEST(VerifySparse, AgreesWithPackingOnEverySubfamilyAtDepthTwo) {
    const auto tree = full_tree(2);
    for (double eta : {0.25, 0.5, 0.75}) {
        for (std::uint32_t mask = 1; mask < (1u << tree.size()); ++mask) {
            std::vector<DyadicCube> S;
            for (std::size_t i = 0; i < tree.size(); ++i)
                if (mask >> i & 1u) S.push_back(tree[i]);
            const auto v = verify_sparse(S, eta);
            EXPECT_EQ(v.sparse, carleson_sparse(S, eta)) << "mask " << mask << " eta " << eta;
            if (v.sparse) {
                EXPECT_TRUE(certificate_valid(v.family));
            }
        }
    }
}

TEST(VerifySparse, TamperedCertificateIsInvalid) {
    auto v = verify_sparse(full_tree(1), 0.5);
    ASSERT_TRUE(v.sparse);
    v.family.cells[0] = v.family.cells[1];
    EXPECT_FALSE(certificate_valid(v.family));
}

TEST(VerifySparse, ShiftedCubesNeedResolution) {
    EXPECT_THROW(verify_sparse({DyadicCube{1, 1, {1, 0}, 1}}, 0.5), ResolutionError);
    EXPECT_THROW(verify_sparse({cube(0, 0)}, 0.0), DomainError);
}

TEST(SparseForm, Examples) {
    const auto one = GridFunction::constant(1, 2, 1.0);
    EXPECT_DOUBLE_EQ(sparse_form({cube(0, 0)}, {one}, exponents({1})), 1.0);
    DualFactor g{&one, Exponent::of(2)};
    EXPECT_DOUBLE_EQ(sparse_form({cube(0, 0), cube(1, 0), cube(1, 1)}, {one}, exponents({1}), 1.0, g), 2.0);
    EXPECT_DOUBLE_EQ(sparse_form({cube(2, 0), cube(1, 0), cube(0, 0)}, {spike}, exponents({1})), 3.0);
}

TEST(SparseForm, QPowerSum) {
    const auto one = GridFunction::constant(1, 2, 1.0);
    // (Σ|Q|)^{1/q} for f ≡ 1.
    EXPECT_NEAR(sparse_form(full_tree(1), {one}, exponents({1}), 0.5), 4.0, 1e-14);
}

TEST(OptimalSparse, SingleCubeGrid) {
    const auto f = GridFunction::constant(1, 0, 3.0);
    const auto o = optimal_sparse_form({f}, exponents({1}), build_grid(1, 0), OptimizeMode::Exact);
    EXPECT_DOUBLE_EQ(o.value, 3.0);
    ASSERT_EQ(o.family.cubes.size(), 1u);
}

TEST(OptimalSparse, ConstantFunctionPackingBound) {
    // Exhaustive enumeration with the packing criterion gives 2, attained by levels 0 and 1.
    const auto one = GridFunction::constant(1, 2, 1.0);
    const auto o = optimal_sparse_form({one}, exponents({1}), build_grid(1, 2), OptimizeMode::Exact);
    EXPECT_NEAR(o.value, 2.0, 1e-12);
    EXPECT_NEAR(o.maximal_l1, 1.0, 1e-12);
}

TEST(OptimalSparse, SpikeExactAndGreedy) {
    const auto exact = optimal_sparse_form({spike}, exponents({1}), build_grid(1, 2), OptimizeMode::Exact);
    const auto greedy = optimal_sparse_form({spike}, exponents({1}), build_grid(1, 2), OptimizeMode::Greedy);
    EXPECT_NEAR(exact.value, 3.0, 1e-12);
    EXPECT_NEAR(exact.maximal_l1, 2.0, 1e-12);
    EXPECT_GE(greedy.value, 0.5 * exact.value);
    EXPECT_TRUE(certificate_valid(exact.family));
}

TEST(OptimalSparse, RampAgainstEnumeration) {
    // f = (1,2,3,4): enumeration over all 127 subfamilies gives 6, ‖Mf‖₁ = 3.125.
    const GridFunction ramp(1, 2, {1, 2, 3, 4});
    const auto o = optimal_sparse_form({ramp}, exponents({1}), build_grid(1, 2), OptimizeMode::Exact);
    EXPECT_NEAR(o.value, 6.0, 1e-12);
    EXPECT_NEAR(o.maximal_l1, 3.125, 1e-12);
}

TEST(OptimalSparse, ExactIsCapped) {
    const auto f = GridFunction::constant(1, 4, 1.0);
    EXPECT_THROW(optimal_sparse_form({f}, exponents({1}), build_grid(1, 4), OptimizeMode::Exact), SizeError);
}

TEST(OptimalSparse, GreedyFamiliesAreSparseOnRandomInputs) {
    InputGenerator gen(17);
    for (int t = 0; t < 30; ++t) {
        const int d = 1 + t % 2, L = d == 1 ? 6 : 3;
        const auto o = optimal_sparse_form({gen.any(d, L), gen.any(d, L)}, exponents({1, 2}), build_grid(d, L),
                                           OptimizeMode::Greedy);
        EXPECT_TRUE(certificate_valid(o.family));
        EXPECT_TRUE(verify_sparse(o.family.cubes, 0.5).sparse);
    }
}

TEST(CZ, HugeLambdaLeavesEverythingGood) {
    const auto z = cz_decompose({spike}, exponents({1}), 100.0);
    EXPECT_TRUE(z.stopping[0].empty());
    EXPECT_EQ(z.good[0].values(), z.f[0].values());
    for (double b : z.bad.values()) EXPECT_EQ(b, 0.0);
}

TEST(CZ, SpikeAtLambdaOne) {
    const auto z = cz_decompose({spike}, exponents({1}), 1.0);
    ASSERT_EQ(z.stopping[0].size(), 1u);
    EXPECT_EQ(z.stopping[0][0], cube(1, 0));
    EXPECT_EQ(z.good[0].values(), (std::vector<double>{2, 2, 0, 0}));
    EXPECT_EQ(z.bad.values(), (std::vector<double>{4, 2, 0, 0}));
    const auto c = cz_check(z);
    EXPECT_EQ(c.violations, 0u);
    EXPECT_LE(c.bad_measure, c.bad_bound);
}

TEST(CZ, SpikeAtLambdaHalfSelectsTheUnitCube) {
    // ⟨f⟩_{[0,1)} = 1 > 1/2 while the parent [0,2) averages exactly 1/2.
    const auto z = cz_decompose({spike}, exponents({1}), 0.5);
    ASSERT_EQ(z.stopping[0].size(), 1u);
    EXPECT_EQ(z.stopping[0][0], cube(0, 0));
    EXPECT_EQ(z.good[0].values(), (std::vector<double>{1, 1, 1, 1}));
    EXPECT_EQ(cz_check(z).violations, 0u);
}

TEST(CZ, SmallLambdaUsesVirtualAncestors) {
    const auto z = cz_decompose({spike}, exponents({1}), 1.0 / 16);
    ASSERT_EQ(z.stopping[0].size(), 1u);
    EXPECT_EQ(z.stopping[0][0].level, -3); // ⟨f⟩ over [0,8) is 1/8 > 1/16
    EXPECT_DOUBLE_EQ(z.level_set_measure[0], 8.0);
    EXPECT_EQ(cz_check(z).violations, 0u);
}

TEST(CZ, RandomBilinearInputsObeyTheProofBounds) {
    InputGenerator gen(5);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int t = 0; t < 50; ++t) {
        const int d = 1 + t % 2, L = d == 1 ? 6 : 3;
        const auto z = cz_decompose({gen.any(d, L), gen.any(d, L)}, exponents({1, 2}), std::pow(2.0, u(rng)));
        const auto c = cz_check(z);
        EXPECT_EQ(c.violations, 0u);
        EXPECT_TRUE(c.support_ok);
        EXPECT_TRUE(c.splitting_ok);
    }
}

TEST(Stopping, ConstantInputStopsAtTheRoot) {
    VectorGridFunction F(1, 4, 2);
    for (std::size_t c = 0; c < F.cells(); ++c) F.at(c, 0) = F.at(c, 1) = 1.0;
    const auto cert = stopping_domination({F}, exponents({1}), 1.0, {SpaceSpec::lebesgue(1, 2)});
    ASSERT_EQ(cert.family.cubes.size(), 1u);
    EXPECT_EQ(cert.c_stop, 1.0);
    EXPECT_TRUE(cert.pointwise_holds);
}

TEST(Stopping, SingleAtomMatchesScalarPrincipalCubes) {
    const auto F = VectorGridFunction::from_slices({spike});
    const auto cert = stopping_domination({F}, exponents({1}), 1.0, {SpaceSpec::lebesgue(1, 1)});
    const auto grid = build_grid(1, 2);
    const auto value = detail::cube_products({spike}, exponents({1}), CubeCollection::of(grid));
    std::vector<DyadicCube> scalar;
    for (auto i : detail::principal_cubes(grid, value, cert.c_stop)) scalar.push_back(grid.cube(i));
    std::sort(scalar.begin(), scalar.end());
    EXPECT_EQ(cert.family.cubes, scalar);
    EXPECT_EQ(cert.family.cubes, (std::vector<DyadicCube>{cube(0, 0), cube(1, 0), cube(2, 0)}));
    EXPECT_TRUE(cert.pointwise_holds);
}

TEST(Stopping, BilinearDualPairRandomSuite) {
    InputGenerator gen(12);
    const std::vector<SpaceSpec> xs{SpaceSpec::lebesgue(4, 8), SpaceSpec::lebesgue(4.0 / 3.0, 8)};
    for (int t = 0; t < 10; ++t) {
        const auto cert = stopping_domination({gen.vector(1, 5, 8), gen.vector(1, 5, 8)}, exponents({1, 1}), 1.0, xs);
        EXPECT_TRUE(certificate_valid(cert.family));
        EXPECT_TRUE(cert.pointwise_holds);
        for (double r : cert.cube_ratio) EXPECT_LE(r, 1 + 1e-12);
    }
}

TEST(Stopping, RejectsInsufficientConvexity) {
    const auto F = VectorGridFunction::from_slices({spike, spike});
    EXPECT_THROW(stopping_domination({F}, exponents({1}), 2.0, {SpaceSpec::lebesgue(1, 2)}), ConfigError);
}

TEST(FormBound, SingleCubeOperator) {
    const auto one = GridFunction::constant(1, 3, 1.0);
    const auto D = CubeCollection::of(build_grid(1, 3));
    const auto b = form_bound_from_pointwise(one, {one}, one, exponents({1}), 1.0, D);
    EXPECT_LE(b.ratio, 1 + 1e-12);
}

TEST(FormBound, FullTreeOperatorOnRandomData) {
    InputGenerator gen(31);
    const auto fam = verify_sparse(full_tree(1), 0.5).family;
    const auto D = CubeCollection::of(build_grid(1, 1));
    for (double q : {1.0, 0.5}) {
        for (int t = 0; t < 20; ++t) {
            const auto f = gen.any(1, 1), g = gen.any(1, 1);
            GridFunction T(1, 1);
            for (const auto& Q : fam.cubes) {
                const double a = average(f, Exponent::of(1), Q);
                for (const auto& c : footprint(Q, 1).cells) T[c.cell] += std::pow(a, q);
            }
            for (auto& v : T.values()) v = std::pow(v, 1 / q);
            const auto b = form_bound_from_pointwise(T, {f}, g, exponents({1}), q, D, SparseHypothesis{&fam, 1.0});
            EXPECT_TRUE(std::isfinite(b.ratio));
            EXPECT_TRUE(b.hypothesis_holds);
            EXPECT_LE(b.ratio, std::pow(fam.eta, -1 / q) * (1 + 1e-12)); // C_T η^{-1/q} with C_T = 1
        }
    }
}

TEST(Serialization, FamilyRoundTripIsBitExact) {
    InputGenerator gen(2);
    const auto o = optimal_sparse_form({gen.any(2, 3)}, exponents({1}), build_grid(2, 3), OptimizeMode::Greedy);
    const auto text = to_json(o.family).dump();
    const auto back = sparse_family_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(back, o.family);
    EXPECT_EQ(to_json(back).dump(), text);
}
