#include <gtest/gtest.h>

#include "sdlab/suites.hpp"

using namespace sdlab;

TEST(Suites, ExponentQueryReportsGamma) {
    SuiteConfig cfg;
    cfg.p = exponents({2});
    cfg.r = exponents({1});
    cfg.q = Exponent::of(1);
    const auto res = exponents_suite(cfg);
    ASSERT_TRUE(res.pass());
    EXPECT_EQ(res.report["gamma"], 2.0);
    EXPECT_EQ(res.report["binding_term"], "r-side");
}

TEST(Suites, EquivalenceReportCarriesMaximisingFamily) {
    SuiteConfig cfg;
    cfg.trials = 5;
    const auto res = equivalence_suite(cfg);
    EXPECT_TRUE(res.report.contains("max_maximal_over_exact"));
    EXPECT_TRUE(res.report["maximising_family"].contains("cubes"));
    EXPECT_EQ(res.tables.front().rows.size(), 15u);
}

TEST(Suites, SmallCzRunHasNoViolations) {
    SuiteConfig cfg;
    cfg.trials = 20;
    const auto res = cz_suite(cfg);
    EXPECT_TRUE(res.pass());
}

TEST(Suites, RunsAreDeterministic) {
    SuiteConfig cfg;
    cfg.trials = 10;
    cfg.seed = 42;
    const auto a = cz_suite(cfg), b = cz_suite(cfg);
    ASSERT_EQ(a.tables.size(), b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i) EXPECT_EQ(a.tables[i].rows, b.tables[i].rows);
}
