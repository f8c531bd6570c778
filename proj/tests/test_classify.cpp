#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torusflow/classify.hpp"
#include "torusflow/constructions.hpp"
#include "torusflow/flow.hpp"

using namespace torusflow;

namespace {
const double kPhi = 0.5 * (std::sqrt(5.0) - 1.0);

ClassifyParams fast_params(int n, double T) {
    ClassifyParams p;
    p.resolution = n;
    p.horizon = T;
    return p;
}

/// Time reversal of an arbitrary field, integrated with the reference
/// integrator (no exact kernel); used for the symmetry property.
class ReversedField final : public VectorField {
public:
    explicit ReversedField(FieldPtr base) : base_(std::move(base)) {}
    TorusVector velocity(const TorusPoint& p) const override {
        TorusVector v = base_->velocity(p);
        return {-v.dx, -v.dy};
    }
    std::string variant() const override { return "reversed"; }
    nlohmann::json to_json() const override { return {{"variant", "reversed"}}; }

private:
    FieldPtr base_;
};
} // namespace

TEST_CASE("detect_singular agrees with designed zero sets") {
    HamiltonianBandField ham;
    CHECK(detect_singular(ham, {0.7, 0.5}, 1e-8, {}));
    CHECK(detect_singular(ham, {0.12, 0.0}, 1e-8, {}));
    CHECK(!detect_singular(ham, {0.7, 0.25}, 1e-8, {}));
    LinearField lin(1.0, kPhi);
    CHECK(!detect_singular(lin, {0.4, 0.9}, 1e-8, {}));
    FieldPtr blown = build_blowup(1.0, kPhi, {0.0, 0.0}, 3, 0.05);
    for (const TorusPoint& p : blown->designed_singular_points())
        CHECK(detect_singular(*blown, p, 1e-8, {}));
}

TEST_CASE("detect_periodic recovers closed-form periods") {
    ClassifyParams p = fast_params(64, 100.0);
    auto t1 = detect_periodic(LinearField(1.0, 0.0), {0.5, 0.5}, p);
    REQUIRE(t1.has_value());
    CHECK(std::fabs(*t1 - 1.0) < 1e-8);

    // slope (2,1): closes after one unit of time (lattice vector (2,1))
    auto t2 = detect_periodic(LinearField(2.0, 1.0), {0.13, 0.77}, p);
    REQUIRE(t2.has_value());
    CHECK(std::fabs(*t2 - 1.0) < 1e-8);

    // horizontal circle at y: period 1 / (2*pi*sin(2*pi*y))
    double y = 0.25;
    auto t3 = detect_periodic(HamiltonianBandField(), {0.0, y}, p);
    REQUIRE(t3.has_value());
    CHECK(std::fabs(*t3 - 1.0 / (2.0 * M_PI * std::sin(2.0 * M_PI * y))) < 1e-8);

    // rational rotation suspension: two loops close up
    FieldPtr half = suspend(std::make_shared<RotationMap>(0.5));
    auto t4 = detect_periodic(*half, {0.25, 0.5}, p);
    REQUIRE(t4.has_value());
    CHECK(std::fabs(*t4 - 2.0) < 1e-6);

    CHECK(!detect_periodic(LinearField(1.0, kPhi), {0.3, 0.7}, p).has_value());
}

TEST_CASE("limit sets of the irrational linear flow cover the grid") {
    ClassifyParams p = fast_params(64, 2000.0);
    LimitSetEstimate ls = estimate_limit_sets(LinearField(1.0, kPhi), {0.3, 0.7}, p);
    CHECK(ls.omega_cells.coverage() >= 0.99);
    CHECK(ls.alpha_cells.coverage() >= 0.99);
    CHECK(!ls.omega_in_sing);
    CHECK(!ls.alpha_in_sing);
}

TEST_CASE("limit sets of a periodic band orbit are its own circle") {
    ClassifyParams p = fast_params(64, 100.0);
    LimitSetEstimate ls = estimate_limit_sets(HamiltonianBandField(), {0.0, 0.25}, p);
    // the orbit is the horizontal circle y = 0.25: row 16 at n=64
    for (int idx : ls.omega_cells.members()) CHECK(idx / 64 == 16);
    CHECK(ls.omega_cells.size() == 64);
    CHECK(!ls.omega_in_sing);
    CHECK(ls.alpha_cells == ls.omega_cells);
}

TEST_CASE("blown orbit seeds trap into singular points both ways") {
    FieldPtr blown = build_blowup(1.0, kPhi, {0.0, 0.0}, 3, 0.05);
    const auto& sched = static_cast<const BlownUpField&>(*blown).schedule();
    double tm = 0.5 * sched.time(1);
    TorusPoint seed = wrap(tm * 1.0, tm * kPhi); // strictly between p0 and p1
    ClassifyParams p = fast_params(64, 2000.0);
    LimitSetEstimate ls = estimate_limit_sets(*blown, seed, p);
    CHECK(ls.omega_in_sing);
    CHECK(ls.alpha_in_sing);
    CHECK(classify_orbit(*blown, seed, p).value == OrbitClass::P);
}

TEST_CASE("classify_orbit decision procedure on closed forms") {
    ClassifyParams p = fast_params(64, 2000.0);
    CHECK(classify_orbit(LinearField(1.0, kPhi), {0.3, 0.7}, p).value == OrbitClass::LD);
    OrbitClassLabel per = classify_orbit(LinearField(1.0, 0.0), {0.2, 0.8}, p);
    CHECK(per.value == OrbitClass::Per);
    CHECK(std::fabs(per.period - 1.0) < 1e-8);
    CHECK(classify_orbit(HamiltonianBandField(), {0.5, 0.0}, p).value == OrbitClass::Sing);
    CHECK(classify_orbit(LimitCycleBandField(1.0), {0.0, 0.3}, p).value == OrbitClass::P);
}

TEST_CASE("classification is invariant under time reversal") {
    ClassifyParams p = fast_params(32, 400.0);
    auto lin = std::make_shared<LinearField>(1.0, kPhi);
    ReversedField rlin(lin);
    CHECK(classify_orbit(*lin, {0.3, 0.7}, p).value == OrbitClass::LD);
    CHECK(classify_orbit(rlin, {0.3, 0.7}, p).value == OrbitClass::LD);

    auto rat = std::make_shared<LinearField>(2.0, 1.0);
    ReversedField rrat(rat);
    CHECK(classify_orbit(*rat, {0.1, 0.1}, p).value == OrbitClass::Per);
    CHECK(classify_orbit(rrat, {0.1, 0.1}, p).value == OrbitClass::Per);

    auto band = std::make_shared<LimitCycleBandField>(1.0);
    ReversedField rband(band);
    CHECK(classify_orbit(*band, {0.0, 0.3}, p).value == OrbitClass::P);
    CHECK(classify_orbit(rband, {0.0, 0.3}, p).value == OrbitClass::P);
}

TEST_CASE("decompose labels the irrational linear flow all LD") {
    ClassifyParams p = fast_params(16, 400.0);
    GridPartition part = decompose(LinearField(1.0, kPhi), 16, p);
    CHECK(part.count(OrbitClass::LD) == 256);
    CHECK(part.diagnostics.empty());
    CHECK_THROWS_AS(decompose(LinearField(1.0, kPhi), 8, p), std::invalid_argument);
}

TEST_CASE("decompose labels the rational linear flow all Per") {
    ClassifyParams p = fast_params(16, 400.0);
    GridPartition part = decompose(LinearField(2.0, 1.0), 16, p);
    CHECK(part.count(OrbitClass::Per) == 256);
    for (const OrbitClassLabel& l : part.labels) CHECK(std::fabs(l.period - 1.0) < 1e-6);
}

TEST_CASE("decompose finds the singular rows of the band flow") {
    ClassifyParams p = fast_params(16, 400.0);
    GridPartition part = decompose(HamiltonianBandField(), 16, p);
    for (int idx = 0; idx < 256; ++idx) {
        int row = idx / 16;
        OrbitClass expect = (row == 0 || row == 8) ? OrbitClass::Sing : OrbitClass::Per;
        CHECK(part.labels[idx].value == expect);
    }
    CHECK(part.extra_seed_cells.size() == 32);
}

TEST_CASE("decompose is deterministic and its JSON round-trips") {
    ClassifyParams p = fast_params(16, 200.0);
    GridPartition a = decompose(LinearField(2.0, 1.0), 16, p);
    GridPartition b = decompose(LinearField(2.0, 1.0), 16, p);
    CHECK(a.to_json() == b.to_json());
    GridPartition back = GridPartition::from_json(a.to_json());
    CHECK(back.resolution == a.resolution);
    CHECK(back.horizon == a.horizon);
    for (int i = 0; i < 256; ++i) CHECK(back.labels[i].value == a.labels[i].value);
}

TEST_CASE("quasi-minimal sets: one for minimal flows, none for closed ones") {
    ClassifyParams p = fast_params(16, 400.0);
    GridPartition minimal = decompose(LinearField(1.0, kPhi), 16, p);
    auto qs = quasi_minimal_sets(minimal, p);
    REQUIRE(qs.size() == 1);
    CHECK(qs[0].closure.coverage() >= 0.99);

    GridPartition closed = decompose(LinearField(2.0, 1.0), 16, p);
    CHECK(quasi_minimal_sets(closed, p).empty());
    GridPartition band = decompose(HamiltonianBandField(), 16, p);
    CHECK(quasi_minimal_sets(band, p).empty());
}

TEST_CASE("orbit_class of a minimal flow is the whole grid") {
    ClassifyParams p = fast_params(16, 400.0);
    LinearField lin(1.0, kPhi);
    GridPartition part = decompose(lin, 16, p);
    OrbitClassEstimate est = orbit_class(lin, {0.3, 0.7}, part, p);
    CHECK(est.class_cells.size() == 256);
    CHECK(est.class_cells.contains(cell_index({0.3, 0.7}, 16)));

    HamiltonianBandField ham;
    GridPartition hpart = decompose(ham, 16, p);
    CHECK_THROWS_AS(orbit_class(ham, {0.0, 0.25}, hpart, p), WrongLabelError);
}

TEST_CASE("limit cycles of the band flow sit on the boundary of int P") {
    ClassifyParams p = fast_params(16, 300.0);
    LimitCycleBandField f(1.0);
    GridPartition part = decompose(f, 16, p);
    auto cycles = limit_cycles(f, part, p);
    REQUIRE(cycles.size() == 2);
    for (const LimitCycleEstimate& c : cycles) {
        CHECK(c.boundary_of_intP);
        CHECK(std::fabs(c.period - 1.0) < 1e-6);
        CHECK(c.cells.size() == 16); // one grid row each
    }

    GridPartition lin = decompose(LinearField(1.0, 0.0), 16, p);
    CHECK(limit_cycles(LinearField(1.0, 0.0), lin, p).empty());
}
