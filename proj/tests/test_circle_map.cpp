#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "torusflow/circle_map.hpp"

using namespace torusflow;

namespace {
const double kPhi = 0.5 * (std::sqrt(5.0) - 1.0); // golden rotation number

std::vector<double> sample_weights(int big_n) {
    std::vector<double> w;
    for (int k = -big_n; k <= big_n; ++k) w.push_back(1.0 / (k * k + 4.0));
    return w;
}
} // namespace

TEST_CASE("rotation map") {
    RotationMap r(0.3);
    CHECK(r.apply(0.9) == doctest::Approx(0.2));
    CHECK(r.lift(2.4) == doctest::Approx(2.7));
    RotationMap wrapped(1.3);
    CHECK(wrapped.rho() == doctest::Approx(0.3));
}

TEST_CASE("rotation number estimator on rigid rotations") {
    for (double rho : {0.25, kPhi, 0.123456}) {
        RotationMap r(rho);
        auto est = rotation_number(r, 5000);
        CHECK(est.error_bound == doctest::Approx(1.0 / 5000));
        CHECK(std::fabs(est.value - rho) <= est.error_bound);
    }
    RotationMap r(0.5);
    CHECK_THROWS_AS(rotation_number(r, 10), std::invalid_argument);
}

TEST_CASE("denjoy map is a strictly increasing degree-one lift") {
    DenjoyMap d(kPhi, sample_weights(6));
    double prev = d.lift(0.0);
    for (int i = 1; i <= 2000; ++i) {
        double x = double(i) / 2000.0;
        double v = d.lift(x);
        CHECK(v > prev);
        prev = v;
    }
    for (double x : {0.0, 0.17, 0.5, 0.93}) {
        CHECK(d.lift(x + 1.0) == doctest::Approx(d.lift(x) + 1.0).epsilon(1e-12));
        CHECK(d.lift(x - 2.0) == doctest::Approx(d.lift(x) - 2.0).epsilon(1e-12));
    }
}

TEST_CASE("denjoy map carries each inserted interval onto the next") {
    int big_n = 5;
    DenjoyMap d(kPhi, sample_weights(big_n));
    for (int k = -big_n; k < big_n; ++k) {
        auto [a, b] = d.interval(k);
        auto [a2, b2] = d.interval(k + 1);
        CHECK(d.apply(a) == doctest::Approx(a2).epsilon(1e-10));
        // affine on the interval: midpoint goes to midpoint
        double mid = 0.5 * (a + b);
        CHECK(d.apply(mid) == doctest::Approx(0.5 * (a2 + b2)).epsilon(1e-10));
    }
}

TEST_CASE("denjoy rotation number matches the construction parameter") {
    DenjoyMap d(kPhi, sample_weights(6));
    auto est = rotation_number(d, 4000);
    CHECK(std::fabs(est.value - kPhi) <= est.error_bound + 1e-9);
}

TEST_CASE("denjoy wandering intervals never overlap their iterates") {
    int big_n = 4;
    DenjoyMap d(kPhi, sample_weights(big_n));
    // push the midpoint of the central interval forward; it must stay
    // inside the successive intervals, which are pairwise disjoint
    auto [a0, b0] = d.interval(0);
    double x = 0.5 * (a0 + b0);
    for (int k = 1; k <= big_n; ++k) {
        x = d.apply(x);
        auto [a, b] = d.interval(k);
        CHECK(x >= a);
        CHECK(x <= b);
    }
}

TEST_CASE("denjoy validation") {
    CHECK_THROWS_AS(DenjoyMap(kPhi, {0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(DenjoyMap(kPhi, {0.1, -0.2, 0.1}), std::invalid_argument);
}

TEST_CASE("monotone map reproduces a tabulated rotation") {
    int m = 64;
    std::vector<double> values;
    for (int i = 0; i < m; ++i) values.push_back(double(i) / m + 0.3);
    MonotoneMap map(values);
    for (double x : {0.0, 0.11, 0.5, 0.77, 0.999}) {
        CHECK(map.lift(x) == doctest::Approx(x + 0.3).epsilon(1e-9));
    }
    auto est = rotation_number(map, 2000);
    CHECK(std::fabs(est.value - 0.3) <= est.error_bound + 1e-9);
}

TEST_CASE("monotone map interpolates a smooth conjugated rotation monotonically") {
    // psi(x) = x + 0.1 sin(2 pi x) is a diffeo; tabulate psi o R o psi^-1
    int m = 48;
    auto psi = [](double x) { return x + 0.1 * std::sin(2.0 * M_PI * x); };
    auto psi_inv = [&](double y) {
        double lo = y - 0.2, hi = y + 0.2;
        for (int i = 0; i < 80; ++i) {
            double mid = 0.5 * (lo + hi);
            (psi(mid) < y ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    std::vector<double> values;
    for (int i = 0; i < m; ++i) values.push_back(psi(psi_inv(double(i) / m) + 0.37));
    MonotoneMap map(values);
    double prev = map.lift(0.0);
    for (int i = 1; i <= 1000; ++i) {
        double v = map.lift(double(i) / 1000.0);
        CHECK(v >= prev);
        prev = v;
    }
    // nodes are reproduced exactly
    for (int i = 0; i < m; i += 7) CHECK(map.lift(double(i) / m) == doctest::Approx(values[i]));
    auto est = rotation_number(map, 3000);
    CHECK(std::fabs(est.value - 0.37) < 2e-3); // interpolation error perturbs it slightly
}

TEST_CASE("monotone map validation") {
    CHECK_THROWS_AS(MonotoneMap({0.1, 0.2}), std::invalid_argument);
    CHECK_THROWS_AS(MonotoneMap({0.1, 0.5, 0.4, 0.8}), std::invalid_argument);
    CHECK_THROWS_AS(MonotoneMap({0.1, 0.5, 0.9, 1.3}), std::invalid_argument);
}

TEST_CASE("json round trips") {
    std::mt19937 rng(3);
    {
        RotationMap r(kPhi);
        auto back = circle_map_from_json(r.to_json());
        CHECK(back->variant() == "rotation");
        CHECK(back->lift(0.25) == doctest::Approx(r.lift(0.25)));
    }
    {
        DenjoyMap d(kPhi, sample_weights(4));
        auto back = circle_map_from_json(d.to_json());
        for (int i = 0; i < 50; ++i) {
            double x = std::uniform_real_distribution<double>(0, 1)(rng);
            CHECK(back->lift(x) == doctest::Approx(d.lift(x)).epsilon(1e-12));
        }
    }
    {
        std::vector<double> values;
        for (int i = 0; i < 16; ++i) values.push_back(double(i) / 16 + 0.2);
        MonotoneMap map(values);
        auto back = circle_map_from_json(map.to_json());
        CHECK(back->lift(0.3) == doctest::Approx(map.lift(0.3)));
    }
    CHECK_THROWS_AS(circle_map_from_json({{"variant", "nope"}}), std::invalid_argument);
}
