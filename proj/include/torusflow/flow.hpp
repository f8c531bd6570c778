#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusflow/circle_map.hpp"
#include "torusflow/geometry.hpp"

namespace torusflow {

struct IntegrationParams {
    double tol_local = 1e-9;  // per-step local error bound
    double max_step = 1e-2;
    double min_step = 1e-12;
    double v_trap = 1e-7;     // speed threshold of the singularity trap
    double t_trap = 50.0;     // flow time below v_trap before trapping
    double c_slow = 0.1;      // spatial displacement cap per step
    double return_horizon = 1e3;
};

enum class Termination { horizon, singularity_trap, step_underflow, stopped };

struct Trajectory {
    TorusPoint seed;
    int direction = +1; // +1 forward, -1 backward
    std::vector<double> times;  // elapsed (unsigned) flow time, times[0] = 0
    std::vector<TorusPoint> points;
    Termination terminated_by = Termination::horizon;

    const TorusPoint& endpoint() const { return points.back(); }
    double elapsed() const { return times.back(); }
};

/// Receives orbit samples in order of elapsed time. Consecutive samples
/// are spaced at most `h` apart on the torus, so cell-level statistics
/// can be read off the sample stream.
class OrbitVisitor {
public:
    virtual ~OrbitVisitor() = default;
    /// Return false to stop the trace early (Termination::stopped).
    virtual bool sample(double t, const TorusPoint& p) = 0;
};

/// A seed plus further points known to lie on orbits of the same class.
/// Used to represent designed measure-zero sets (singular points,
/// blown-up orbits, invariant circles) that a uniform grid misses.
struct SeedFamily {
    std::string name;
    TorusPoint representative;
    std::vector<TorusPoint> samples;
};

/// Smooth vector field on the torus. Evaluation is Z^2-periodic by
/// construction. Each family also knows how to trace its own orbits
/// exactly (or semi-analytically); the adaptive Runge-Kutta reference
/// integrator in the base class is retained for cross-validation and
/// benchmarks.
class VectorField {
public:
    virtual ~VectorField() = default;

    virtual TorusVector velocity(const TorusPoint& p) const = 0;
    virtual std::string variant() const = 0;
    virtual nlohmann::json to_json() const = 0;

    /// Designed structure exposed for grid seeding. `spacing` bounds the
    /// gap between consecutive samples along designed curves.
    virtual std::vector<SeedFamily> seed_families(double spacing) const {
        (void)spacing;
        return {};
    }

    /// Isolated designed zeros of the field (empty for singular curves,
    /// which appear via seed_families instead).
    virtual std::vector<TorusPoint> designed_singular_points() const { return {}; }

    /// Trace the orbit of `seed` for elapsed flow time T in direction
    /// dir (+1/-1), emitting samples spaced at most `h` apart, starting
    /// at (0, seed) and ending at the termination time. Default:
    /// reference integrator; families override with exact kernels.
    virtual Termination trace(const TorusPoint& seed, int dir, double T,
                              const IntegrationParams& params, double h,
                              OrbitVisitor& vis) const;

    /// Embedded Runge-Kutta(4,5) with per-step error control, step caps
    /// max_step and c_slow/|v|, and the slow-speed singularity trap.
    Termination trace_reference(const TorusPoint& seed, int dir, double T,
                                const IntegrationParams& params, double h,
                                OrbitVisitor& vis) const;
};

using FieldPtr = std::shared_ptr<const VectorField>;

/// Record a full trajectory (wrapper over trace).
Trajectory integrate(const VectorField& field, const TorusPoint& seed, int dir,
                     double T, const IntegrationParams& params, double h = 1.0 / 256);

/// Point reached after elapsed time t in direction dir.
TorusPoint flow_at(const VectorField& field, const TorusPoint& seed, int dir,
                   double t, const IntegrationParams& params);

// ---------------------------------------------------------------- fields

class LinearField final : public VectorField {
public:
    LinearField(double a, double b) : a_(a), b_(b) {}
    TorusVector velocity(const TorusPoint&) const override { return {a_, b_}; }
    std::string variant() const override { return "linear"; }
    nlohmann::json to_json() const override;
    Termination trace(const TorusPoint&, int, double, const IntegrationParams&,
                      double, OrbitVisitor&) const override;
    double a() const { return a_; }
    double b() const { return b_; }

private:
    double a_, b_;
};

/// (2*pi*sin(2*pi*y), 0): horizontal circles, with two circles of
/// singular points at y = 0 and y = 1/2.
class HamiltonianBandField final : public VectorField {
public:
    TorusVector velocity(const TorusPoint& p) const override;
    std::string variant() const override { return "hamiltonian-band"; }
    nlohmann::json to_json() const override;
    std::vector<SeedFamily> seed_families(double spacing) const override;
    Termination trace(const TorusPoint&, int, double, const IntegrationParams&,
                      double, OrbitVisitor&) const override;
};

/// (1, -lambda*sin(2*pi*y)): attracting periodic circle at y = 0,
/// repelling one at y = 1/2, wandering band orbits between them.
class LimitCycleBandField final : public VectorField {
public:
    explicit LimitCycleBandField(double lambda);
    TorusVector velocity(const TorusPoint& p) const override;
    std::string variant() const override { return "limit-cycle-band"; }
    nlohmann::json to_json() const override;
    std::vector<SeedFamily> seed_families(double spacing) const override;
    Termination trace(const TorusPoint&, int, double, const IntegrationParams&,
                      double, OrbitVisitor&) const override;
    double lambda() const { return lambda_; }

private:
    double lambda_;
};

/// Damping schedule of the blow-up construction: points p_i on one
/// orbit of the base linear flow, accumulating geometrically at p_0,
/// with pairwise disjoint bump supports B(p_i, r_i).
struct BlowUpSchedule {
    TorusPoint p0;
    double slope_a = 1.0, slope_b = 0.0;
    std::vector<double> times;   // t_i, index i = -N..N at slot i+N, t_0 = 0
    std::vector<TorusPoint> points;
    std::vector<double> radii;
    int order = 0;               // N
    double r_margin = 0.0;

    const TorusPoint& point(int i) const { return points[i + order]; }
    double radius(int i) const { return radii[i + order]; }
    double time(int i) const { return times[i + order]; }
};

/// Base linear field scaled by the product of (1 - bump_i); zero exactly
/// at the scheduled points p_i, i != 0.
class BlownUpField final : public VectorField {
public:
    BlownUpField(double a, double b, BlowUpSchedule schedule);
    TorusVector velocity(const TorusPoint& p) const override;
    /// Damping factor in [0,1]; 1 outside every bump support.
    double damping(const TorusPoint& p) const;
    std::string variant() const override { return "blownup"; }
    nlohmann::json to_json() const override;
    std::vector<SeedFamily> seed_families(double spacing) const override;
    std::vector<TorusPoint> designed_singular_points() const override;
    Termination trace(const TorusPoint&, int, double, const IntegrationParams&,
                      double, OrbitVisitor&) const override;
    const BlowUpSchedule& schedule() const { return schedule_; }

private:
    double a_, b_;
    BlowUpSchedule schedule_;
    double speed_;
    // coarse mask over a fine grid: true where a bump support may intersect
    int mask_n_ = 0;
    std::vector<std::uint8_t> mask_;
    bool masked(const TorusPoint& p) const;
    friend class BlowupTracer;
};

/// Suspension of a circle map: unit vertical speed; the first-return map
/// on y = 0 equals the circle map. Fibers are interpolated between id
/// and the map by a C-infinity ramp that is flat at both ends.
class SuspensionField final : public VectorField {
public:
    explicit SuspensionField(CircleMapPtr map);
    TorusVector velocity(const TorusPoint& p) const override;
    std::string variant() const override { return "suspension"; }
    nlohmann::json to_json() const override;
    /// For Denjoy base maps: the minimal-set orbit through the inserted
    /// interval endpoints, which a uniform grid almost surely misses.
    std::vector<SeedFamily> seed_families(double spacing) const override;
    Termination trace(const TorusPoint&, int, double, const IntegrationParams&,
                      double, OrbitVisitor&) const override;
    const CircleMap& map() const { return *map_; }
    CircleMapPtr map_ptr() const { return map_; }

    /// C-infinity ramp s with s(0)=0, s(1)=1, flat at the ends.
    static double ramp(double y);
    static double ramp_derivative(double y);

    /// Fiber coordinate of (x, y): the xi with x = xi + s(y)*(F(xi)-xi).
    double fiber_coordinate(double x, double y) const;

private:
    CircleMapPtr map_;
    // max arc length per unit of vertical travel, from the actual shear
    // bound of the map; sets the sample grid density in trace()
    double shear_factor_ = 2.5;
};

/// Axis-aligned flow box for the crossing-map surgery; u runs along the
/// flow (half_length), w across it (half_width), both in box units.
struct FlowBox {
    TorusPoint center;
    double half_length = 0.2;
    double half_width = 0.1;
};

/// Horizontal linear base field reshaped inside one flow box so the
/// induced crossing map in box coordinates is w -> w^exponent.
class HolonomyModifiedField final : public VectorField {
public:
    HolonomyModifiedField(double base_a, FlowBox box, int exponent);
    TorusVector velocity(const TorusPoint& p) const override;
    std::string variant() const override { return "holonomy-modified"; }
    nlohmann::json to_json() const override;
    Termination trace(const TorusPoint&, int, double, const IntegrationParams&,
                      double, OrbitVisitor&) const override;
    const FlowBox& box() const { return box_; }
    int exponent() const { return exponent_; }
    double base_a() const { return base_a_; }

    /// Transverse blend: w(u) for entry coordinate w0, u in [-1,1].
    double blend(double u, double w0) const;
    /// Inverse of blend in w0 for fixed u.
    double blend_inverse(double u, double w) const;

private:
    double base_a_;
    FlowBox box_;
    int exponent_;
};

// ----------------------------------------------------------- sections

/// Axis-aligned transversal circle. Construction verifies that the
/// normal component of the field is bounded away from zero at 2048
/// sample points on the circle.
struct TransversalCircle {
    enum class Axis { horizontal, vertical }; // horizontal: y = offset
    Axis axis = Axis::vertical;
    double offset = 0.0;

    TransversalCircle(Axis axis_, double offset_, const VectorField& field);

    /// Coordinate along the circle of a point on it.
    double coordinate(const TorusPoint& p) const;
    TorusPoint point_at(double coord) const;
    /// Signed distance of p from the circle (shortest wrap).
    double signed_normal(const TorusPoint& p) const;
};

struct PoincareReturn {
    TorusPoint point;
    double return_time = 0.0;
};

class NoReturnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// First return to the circle in the given direction, crossing time
/// refined to 1e-10 in the circle coordinate.
PoincareReturn poincare_return(const VectorField& field, const TransversalCircle& circle,
                               const TorusPoint& p, int dir, const IntegrationParams& params);

/// Suspension flow whose first-return map on y = 0 is `map`.
FieldPtr suspend(CircleMapPtr map);

FieldPtr field_from_json(const nlohmann::json& j);

} // namespace torusflow
