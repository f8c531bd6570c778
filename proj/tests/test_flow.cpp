#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "torusflow/flow.hpp"

using namespace torusflow;

namespace {
const double kPhi = 0.5 * (std::sqrt(5.0) - 1.0);
const IntegrationParams kParams{};

// endpoint reached by the exact kernel
TorusPoint kernel_end(const VectorField& f, const TorusPoint& seed, int dir, double T) {
    return flow_at(f, seed, dir, T, kParams);
}

// endpoint reached by the reference integrator
TorusPoint reference_end(const VectorField& f, const TorusPoint& seed, int dir, double T) {
    struct Last final : OrbitVisitor {
        TorusPoint p;
        bool sample(double, const TorusPoint& q) override {
            p = q;
            return true;
        }
    };
    Last last;
    f.trace_reference(seed, dir, T, kParams, 1.0 / 256, last);
    return last.p;
}

void check_kernel_matches_reference(const VectorField& f, const TorusPoint& seed, double T,
                                    double tol = 2e-6) {
    for (int dir : {+1, -1}) {
        TorusPoint a = kernel_end(f, seed, dir, T);
        TorusPoint b = reference_end(f, seed, dir, T);
        CAPTURE(seed.x);
        CAPTURE(seed.y);
        CAPTURE(dir);
        CHECK(torus_distance(a, b) < tol);
    }
}

void check_sample_spacing(const VectorField& f, const TorusPoint& seed, double T, double h) {
    Trajectory tr = integrate(f, seed, +1, T, kParams, h);
    REQUIRE(tr.points.size() >= 2);
    CHECK(tr.times.front() == 0.0);
    for (std::size_t i = 1; i < tr.points.size(); ++i) {
        CHECK(tr.times[i] >= tr.times[i - 1]);
        CHECK(torus_distance(tr.points[i - 1], tr.points[i]) <= h * 1.0001);
    }
}

BlowUpSchedule small_schedule() {
    BlowUpSchedule s;
    s.p0 = {0.31, 0.42};
    s.slope_a = 1.0;
    s.slope_b = kPhi;
    s.order = 2;
    s.times = {-3.0, -1.0, 0.0, 1.0, 2.0};
    s.radii = {0.004, 0.008, 0.0, 0.008, 0.004};
    s.r_margin = 0.03;
    for (double t : s.times) s.points.push_back(wrap(s.p0.x + s.slope_a * t, s.p0.y + s.slope_b * t));
    return s;
}
} // namespace

TEST_CASE("linear flow is a straight winding line") {
    LinearField f(1.0, kPhi);
    TorusPoint p = kernel_end(f, {0.2, 0.8}, +1, 10.0);
    CHECK(p.x == doctest::Approx(std::fmod(0.2 + 10.0, 1.0)).epsilon(1e-9));
    CHECK(p.y == doctest::Approx(0.8 + 10.0 * kPhi - std::floor(0.8 + 10.0 * kPhi)).epsilon(1e-9));
    check_kernel_matches_reference(f, {0.2, 0.8}, 7.3);
    check_sample_spacing(f, {0.0, 0.0}, 5.0, 1.0 / 128);
}

TEST_CASE("flow group property and reversibility") {
    LimitCycleBandField lcb(0.8);
    HamiltonianBandField ham;
    LinearField lin(1.0, kPhi);
    const VectorField* fields[] = {&lcb, &ham, &lin};
    for (const VectorField* f : fields) {
        TorusPoint seed{0.37, 0.21};
        TorusPoint ab = kernel_end(*f, seed, +1, 2.5);
        TorusPoint a = kernel_end(*f, seed, +1, 1.1);
        TorusPoint ab2 = kernel_end(*f, a, +1, 1.4);
        CHECK(torus_distance(ab, ab2) < 1e-7);
        TorusPoint back = kernel_end(*f, ab, -1, 2.5);
        CHECK(torus_distance(back, seed) < 1e-7);
    }
}

TEST_CASE("hamiltonian band rows are horizontal circles") {
    HamiltonianBandField f;
    double y0 = 0.25; // fastest row, speed 2*pi
    TorusPoint p = kernel_end(f, {0.1, y0}, +1, 0.3);
    double want = 0.1 + 2.0 * M_PI * 0.3;
    CHECK(p.x == doctest::Approx(want - std::floor(want)).epsilon(1e-9));
    CHECK(p.y == doctest::Approx(y0));
    check_kernel_matches_reference(f, {0.1, 0.25}, 2.0);
    check_kernel_matches_reference(f, {0.6, 0.9}, 2.0);
    check_sample_spacing(f, {0.0, 0.13}, 1.0, 1.0 / 128);
}

TEST_CASE("hamiltonian band singular rows trap") {
    HamiltonianBandField f;
    for (double row : {0.0, 0.5}) {
        Trajectory tr = integrate(f, {0.4, row}, +1, 2000.0, kParams);
        CHECK(tr.terminated_by == Termination::singularity_trap);
        CHECK(tr.elapsed() == doctest::Approx(kParams.t_trap));
        CHECK(torus_distance(tr.endpoint(), {0.4, row}) < 1e-9);
    }
}

TEST_CASE("limit cycle band matches its closed-form vertical motion") {
    double lambda = 0.7;
    LimitCycleBandField f(lambda);
    double y0 = 0.2, t = 1.7;
    TorusPoint p = kernel_end(f, {0.0, y0}, +1, t);
    double tau = std::tan(M_PI * y0) * std::exp(-2.0 * M_PI * lambda * t);
    CHECK(p.y == doctest::Approx(std::atan(tau) / M_PI).epsilon(1e-6));
    CHECK(p.x == doctest::Approx(t - std::floor(t)).epsilon(1e-6));
    check_kernel_matches_reference(f, {0.3, 0.2}, 2.2);
    check_kernel_matches_reference(f, {0.3, 0.85}, 2.2);
    check_kernel_matches_reference(f, {0.1, 0.5}, 2.0);
    check_sample_spacing(f, {0.9, 0.31}, 3.0, 1.0 / 128);
}

TEST_CASE("limit cycle band orbits converge to the bottom cycle forward") {
    LimitCycleBandField f(1.0);
    TorusPoint fwd = kernel_end(f, {0.0, 0.3}, +1, 50.0);
    CHECK(std::min(fwd.y, 1.0 - fwd.y) < 1e-9);
    TorusPoint bwd = kernel_end(f, {0.0, 0.3}, -1, 50.0);
    CHECK(std::fabs(bwd.y - 0.5) < 1e-9);
}

TEST_CASE("blown-up field vanishes exactly at the pinned points") {
    BlowUpSchedule sched = small_schedule();
    BlownUpField f(1.0, kPhi, sched);
    for (int i = -2; i <= 2; ++i) {
        if (i == 0) continue;
        CHECK(f.damping(sched.point(i)) == 0.0);
        CHECK(f.velocity(sched.point(i)).norm() == 0.0);
    }
    // p0 itself is a regular point of the flow
    CHECK(f.damping(sched.p0) == 1.0);
    CHECK(f.velocity({0.77, 0.13}).norm() == doctest::Approx(std::hypot(1.0, kPhi)));
    CHECK(f.designed_singular_points().size() == 4);
}

TEST_CASE("blown-up kernel agrees with the reference integrator") {
    BlownUpField f(1.0, kPhi, small_schedule());
    // seeds chosen off the scheduled orbit
    check_kernel_matches_reference(f, {0.05, 0.6}, 4.0, 5e-5);
    check_kernel_matches_reference(f, {0.5, 0.05}, 4.0, 5e-5);
    check_sample_spacing(f, {0.05, 0.6}, 3.0, 1.0 / 128);
}

TEST_CASE("blown-up orbits trap at the pinned points") {
    BlowUpSchedule sched = small_schedule();
    BlownUpField f(1.0, kPhi, sched);
    // seed exactly at a pinned point stays there
    Trajectory tr = integrate(f, sched.point(1), +1, 500.0, kParams);
    CHECK(tr.terminated_by == Termination::singularity_trap);
    CHECK(torus_distance(tr.endpoint(), sched.point(1)) < 1e-6);
    // seed on the scheduled orbit slightly before a pinned point limits into it
    TorusPoint near = wrap(sched.p0.x + 0.9, sched.p0.y + 0.9 * kPhi);
    Trajectory tr2 = integrate(f, near, +1, 5000.0, kParams);
    CHECK(tr2.terminated_by == Termination::singularity_trap);
    CHECK(torus_distance(tr2.endpoint(), sched.point(1)) < 2e-3);
}

TEST_CASE("suspension of a rotation has the rotation as return map") {
    FieldPtr f = suspend(std::make_shared<RotationMap>(kPhi));
    TransversalCircle circle(TransversalCircle::Axis::horizontal, 0.0, *f);
    for (double x0 : {0.0, 0.3, 0.77}) {
        PoincareReturn ret = poincare_return(*f, circle, {x0, 0.0}, +1, kParams);
        CHECK(ret.return_time == doctest::Approx(1.0).epsilon(1e-6));
        double want = x0 + kPhi;
        want -= std::floor(want);
        CHECK(std::fabs(ret.point.x - want) < 1e-8);
    }
}

TEST_CASE("suspension kernel agrees with the reference integrator") {
    FieldPtr f = suspend(std::make_shared<RotationMap>(kPhi));
    check_kernel_matches_reference(*f, {0.2, 0.6}, 3.3, 1e-5);
    check_sample_spacing(*f, {0.2, 0.6}, 3.0, 1.0 / 128);

    FieldPtr d = suspend(std::make_shared<DenjoyMap>(
        kPhi, std::vector<double>{0.05, 0.1, 0.2, 0.1, 0.05}));
    check_kernel_matches_reference(*d, {0.41, 0.25}, 3.3, 1e-5);
}

TEST_CASE("suspension fiber coordinate inverts the interpolation") {
    auto sf = std::make_shared<SuspensionField>(std::make_shared<RotationMap>(0.3));
    for (double y : {0.0, 0.2, 0.5, 0.9}) {
        for (double xi : {0.1, 0.6, 0.95}) {
            double x = xi + SuspensionField::ramp(y) * 0.3;
            x -= std::floor(x);
            CHECK(sf->fiber_coordinate(x, y) == doctest::Approx(xi).epsilon(1e-10));
        }
    }
    CHECK(SuspensionField::ramp(0.0) == 0.0);
    CHECK(SuspensionField::ramp(1.0) == 1.0);
    CHECK(SuspensionField::ramp(0.5) == doctest::Approx(0.5));
    CHECK(SuspensionField::ramp_derivative(0.0) == 0.0);
    CHECK(SuspensionField::ramp_derivative(1.0) == 0.0);
}

TEST_CASE("holonomy surgery realizes the w^3 crossing map") {
    FlowBox box{{0.5, 0.5}, 0.2, 0.1};
    HolonomyModifiedField f(1.0, box, 3);
    double cross_time = 2.0 * box.half_length + 0.2;
    for (double w : {-0.9, -0.4, 0.0, 0.25, 0.8}) {
        TorusPoint in = wrap(0.5 - box.half_length - 0.1, 0.5 + w * box.half_width);
        TorusPoint out = kernel_end(f, in, +1, cross_time);
        double w_out = (out.y - 0.5) / box.half_width;
        CHECK(w_out == doctest::Approx(w * w * w).epsilon(1e-9));
        // and back again through the inverse holonomy
        TorusPoint back = kernel_end(f, out, -1, cross_time);
        CHECK(torus_distance(back, in) < 1e-9);
    }
    // orbits outside the box band pass straight through
    TorusPoint side = kernel_end(f, {0.1, 0.85}, +1, 1.0);
    CHECK(side.y == doctest::Approx(0.85));
}

TEST_CASE("holonomy kernel agrees with the reference integrator") {
    FlowBox box{{0.5, 0.5}, 0.2, 0.1};
    HolonomyModifiedField f(1.0, box, 3);
    check_kernel_matches_reference(f, {0.1, 0.53}, 1.5, 1e-5);
    check_sample_spacing(f, {0.1, 0.53}, 1.5, 1.0 / 128);
    CHECK_THROWS_AS(HolonomyModifiedField(1.0, box, 2), std::invalid_argument);
    CHECK_THROWS_AS(HolonomyModifiedField(0.0, box, 3), std::invalid_argument);
}

TEST_CASE("transversal circle validation") {
    HamiltonianBandField ham;
    // vertical circles are transversal away from nothing: field is horizontal
    // but vanishes on two rows, so the normal component dips below threshold
    CHECK_THROWS_AS(TransversalCircle(TransversalCircle::Axis::vertical, 0.3, ham),
                    std::invalid_argument);
    LinearField lin(1.0, kPhi);
    TransversalCircle ok(TransversalCircle::Axis::vertical, 0.3, lin);
    CHECK(ok.coordinate({0.3, 0.8}) == doctest::Approx(0.8));
    CHECK(ok.signed_normal({0.25, 0.0}) == doctest::Approx(-0.05));
    // horizontal circle against a horizontal field: never transversal
    CHECK_THROWS_AS(TransversalCircle(TransversalCircle::Axis::horizontal, 0.25, ham),
                    std::invalid_argument);
}

TEST_CASE("no return raises") {
    LimitCycleBandField f(1.0);
    // vertical circle: fine (horizontal speed is 1), but a horizontal
    // circle at a generic height is crossed once and never again... use
    // the vertical one and a seed that does return; then starve the horizon
    TransversalCircle circle(TransversalCircle::Axis::vertical, 0.0, f);
    IntegrationParams starved = kParams;
    starved.return_horizon = 0.25;
    CHECK_THROWS_AS(poincare_return(f, circle, {0.0, 0.3}, +1, starved), NoReturnError);
    PoincareReturn ret = poincare_return(f, circle, {0.0, 0.3}, +1, kParams);
    CHECK(ret.return_time == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("seed families describe the designed invariant sets") {
    HamiltonianBandField ham;
    auto fams = ham.seed_families(1.0 / 64);
    REQUIRE(fams.size() == 2);
    for (const auto& fam : fams) {
        CHECK(fam.samples.size() >= 64);
        for (const auto& s : fam.samples) CHECK(ham.velocity(s).norm() < 1e-9);
    }
    BlownUpField blown(1.0, kPhi, small_schedule());
    auto bf = blown.seed_families(1.0 / 64);
    int pins = 0, segments = 0;
    for (const auto& fam : bf) {
        if (fam.name.rfind("pinned-", 0) == 0) ++pins;
        if (fam.name.rfind("blown-orbit-", 0) == 0) ++segments;
    }
    CHECK(pins == 4);
    CHECK(segments == 3);
}

TEST_CASE("field json round trip") {
    std::vector<FieldPtr> fields;
    fields.push_back(std::make_shared<LinearField>(1.0, kPhi));
    fields.push_back(std::make_shared<HamiltonianBandField>());
    fields.push_back(std::make_shared<LimitCycleBandField>(0.8));
    fields.push_back(std::make_shared<BlownUpField>(1.0, kPhi, small_schedule()));
    fields.push_back(suspend(std::make_shared<RotationMap>(kPhi)));
    fields.push_back(std::make_shared<HolonomyModifiedField>(1.0, FlowBox{{0.5, 0.5}, 0.2, 0.1}, 3));
    for (const FieldPtr& f : fields) {
        FieldPtr back = field_from_json(f->to_json());
        CHECK(back->variant() == f->variant());
        for (TorusPoint p : {TorusPoint{0.15, 0.3}, TorusPoint{0.8, 0.66}}) {
            TorusVector v1 = f->velocity(p);
            TorusVector v2 = back->velocity(p);
            CHECK(v1.dx == doctest::Approx(v2.dx).epsilon(1e-12));
            CHECK(v1.dy == doctest::Approx(v2.dy).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(field_from_json({{"variant", "nope"}}), std::invalid_argument);
}

TEST_CASE("visitor can stop a trace") {
    LinearField f(1.0, kPhi);
    struct Stopper final : OrbitVisitor {
        int seen = 0;
        bool sample(double, const TorusPoint&) override { return ++seen < 10; }
    };
    Stopper st;
    Termination r = f.trace({0.0, 0.0}, +1, 100.0, kParams, 1.0 / 64, st);
    CHECK(r == Termination::stopped);
    CHECK(st.seen == 10);
}
