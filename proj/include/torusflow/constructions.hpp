#pragma once

#include <stdexcept>
#include <vector>

#include "torusflow/circle_map.hpp"
#include "torusflow/flow.hpp"

namespace torusflow {

/// A requested construction cannot be realized with the given
/// parameters (e.g. bump supports would overlap at this margin).
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schedule of pinned points accumulating at p0 along the base orbit.
/// Return times are picked among continued-fraction denominators of the
/// slope ratio so that the i-th point lands within 2^-|i| * r_margin of
/// p0; negative indices mirror to backward time. Radii are a quarter of
/// the smallest gap, which keeps all bump supports pairwise disjoint
/// and p0 outside every support.
BlowUpSchedule make_schedule(double slope_a, double slope_b, const TorusPoint& p0, int order,
                             double r_margin);

/// Product of (1 - bump_i) over the pinned points; 0 exactly at each
/// pinned point, 1 outside every support.
double damping_factor(const BlowUpSchedule& schedule, const TorusPoint& p);

/// Linear field with the scheduled orbit blown up into pinned points.
FieldPtr build_blowup(double slope_a, double slope_b, const TorusPoint& p0, int order,
                      double r_margin);

/// Denjoy-style circle map with rotation number rho and inserted
/// intervals of length weight_scale/(k^2+4) at orbit indices |k| <= n.
CircleMapPtr build_denjoy(double rho, int n, double weight_scale);

/// Reshape a horizontal linear field inside one flow box so the
/// crossing map in box coordinates becomes w -> w^3.
FieldPtr apply_x3_holonomy(const FieldPtr& base, const FlowBox& box);

/// Empirical conjugacy of a degree-one circle map to the rigid rotation
/// by its rotation number.
struct ConjugacyEstimate {
    std::vector<double> h;          // conjugacy values at j/m, j = 0..m-1
    double rho = 0.0;               // rotation number used (exact p/q if rational)
    bool rational = false;
    long period = 0;                // q when rational, else 0
    double residual = 0.0;          // max circle-dist of h(f(x)) - h(x) - rho
    double injectivity_defect = 0.0; // widest x-stretch on which h is flat
};

/// Irrational case: h(x) = fraction of the forward orbit of x lying
/// below x (empirical distribution function). Rational case: h is the
/// piecewise-linear map sending a periodic orbit onto the rational
/// rotation orbit. A large residual is data, not an error.
ConjugacyEstimate conjugate_to_rotation(const CircleMap& map, long iterates, int grid);

} // namespace torusflow
