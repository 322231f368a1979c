// Acceptance runner: one PASS/FAIL line per check, grouped by criterion.
//   acceptance AC1 ... AC7   run one criterion
//   acceptance               run all of them
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sdlab/suites.hpp"

using namespace sdlab;

namespace {

struct Criterion {
    std::string id;
    std::string title;
    std::function<SuiteResult(const SuiteConfig&)> run;
};

const std::vector<Criterion> criteria{
    {"AC1", "sparse/maximal equivalence: 1 <= |M f|_1 / exact <= 8, greedy/exact >= 1/4, tol 1e-9, < 60 s",
     equivalence_suite},
    {"AC2", "CZ decomposition: proof bounds on 200 normalised inputs, zero violations", cz_suite},
    {"AC3", "stopping algorithm: flow-sparse at eta = 1/2, pointwise domination, C_stop within 2x, < 300 s",
     stopping_suite},
    {"AC4", "exponent calculators: gamma = 2, ellt grid, composition to 1e-12, BHT 20^3 grid", exponents_suite},
    {"AC5", "weighted envelope: ratio <= C [w]^gamma within 1%, slope <= gamma + 0.1", weights_suite},
    {"AC6", "vector-valued transfer: log-n slope <= 0.05 over n in {2,8,32}, scalar hypothesis first", transfer_suite},
    {"AC7", "structure: covering <= 6^d, Haar isometry to 1e-12, JSON round-trip", structure_suite},
};

bool run(const Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteResult res = c.run(SuiteConfig{});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("== %s %s\n", c.id.c_str(), c.title.c_str());
    for (const auto& ch : res.checks)
        std::printf("%s %s %s%s%s\n", ch.pass ? "PASS" : "FAIL", c.id.c_str(), ch.name.c_str(),
                    ch.detail.empty() ? "" : " | ", ch.detail.c_str());
    std::printf("%s %s (%.2f s)\n", res.pass() ? "PASS" : "FAIL", c.id.c_str(), secs);
    if (!res.pass()) std::printf("   report: %s\n", res.report.dump().c_str());
    std::fflush(stdout);
    return res.pass();
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> wanted(argv + 1, argv + argc);
    bool ok = true;
    std::size_t ran = 0;
    for (const auto& c : criteria) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
        ok = run(c) && ok;
        ++ran;
    }
    if (ran == 0) {
        std::fprintf(stderr, "unknown criterion; expected one of AC1..AC7\n");
        return 2;
    }
    return ok ? 0 : 1;
}
