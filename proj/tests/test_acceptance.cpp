// Full acceptance run: every criterion at the working scope (n=64, T=2000),
// one pass/fail line per criterion.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "torusflow/suite.hpp"

TEST_CASE("acceptance suite passes at n=64, T=2000") {
    torusflow::SuiteConfig cfg;
    cfg.resolution = 64;
    cfg.horizon = 2000.0;
    torusflow::SuiteReport report = torusflow::run_acceptance_suite(cfg);

    REQUIRE(report.criteria.size() == 12);
    for (const torusflow::CriterionResult& c : report.criteria) {
        std::printf("criterion %2d %-34s %s (%.1fs)%s%s\n", c.id, c.name.c_str(),
                    c.passed ? "pass" : "FAIL", c.seconds, c.passed ? "" : "  -- ",
                    c.passed ? "" : c.details.dump().c_str());
        std::fflush(stdout);
    }
    for (const torusflow::CriterionResult& c : report.criteria) {
        INFO("criterion ", c.id, " (", c.name, "): ", c.details.dump());
        CHECK(c.passed);
    }
    CHECK(report.all_passed());
}
