#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "torusflow/classify.hpp"
#include "torusflow/geometry.hpp"

namespace torusflow {

enum class Verdict { pass, fail, inconclusive };

std::string verdict_name(Verdict v);

/// A named theorem-shaped predicate evaluated on a grid partition,
/// with numeric evidence and the (n, T) scope the claim is made at.
/// `anchor` states the predicate being checked in mathematical form.
struct Certificate {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    std::map<std::string, double> evidence;
    std::vector<int> flagged_cells; // counterexample cells, when any
    int scope_n = 0;
    double scope_T = 0.0;
    std::string anchor;

    bool passed() const { return verdict == Verdict::pass; }
    nlohmann::json to_json() const;
};

/// closure(LD u Per) u Sing covers the surface (up to delta_cover); the
/// fraction of seeds returning to their own cell is cross-evidence.
Certificate certify_nonwandering(const GridPartition& partition, const ClassifyParams& params);

/// No exceptional suspects when the flow certifies as non-wandering.
Certificate certify_no_exceptional(const GridPartition& partition, const Certificate& nonwandering);

/// Per is open: every Per cell away from singular seeds is surrounded
/// by Per cells. Inconclusive unless the flow is non-wandering.
Certificate certify_per_open(const GridPartition& partition, const Certificate& nonwandering);

/// P u Sing = { x : omega(x) u alpha(x) inside Sing }, seed by seed.
Certificate certify_P_characterization(const VectorField& field, const GridPartition& partition,
                                       const Certificate& nonwandering,
                                       const ClassifyParams& params);

/// Equivalence of the transitivity conditions:
/// C1 a dense orbit exists; C2 non-wandering + co-connected (P u Sing)
/// + empty interior of (Per u Sing); C4 co-connected (P u Sing) + empty
/// interiors of Sing, Per, P separately. C3 coincides with C2's
/// connectedness clause at grid scale and is reported as such.
Certificate certify_transitive(const VectorField& field, const GridPartition& partition,
                               const ClassifyParams& params);

/// Suspected exceptional cells are separated from closure(Sing u Per u
/// LD) and sit inside the closure of P. Inconclusive without suspects.
Certificate certify_separation(const GridPartition& partition, const ClassifyParams& params);

/// Quasi-minimal-set count bounded by the genus (orientable surfaces
/// only; non-orientable input throws std::invalid_argument).
Certificate maier_bound_check(const GridPartition& partition, const SurfaceDescriptor& surface,
                              const ClassifyParams& params);

/// Every Per component is the whole surface or an annulus (Euler
/// characteristic 0). Inconclusive unless non-wandering.
Certificate per_component_shape(const GridPartition& partition, const Certificate& nonwandering,
                                const ClassifyParams& params);

/// Rare-species density: the closure of the proper-orbit set and the
/// locally dense cells both cover at least 95% of the grid.
Certificate rare_species_check(const GridPartition& partition, const ClassifyParams& params);

/// All applicable certificates, in a fixed order.
std::vector<Certificate> certify_all(const VectorField& field, const GridPartition& partition,
                                     const ClassifyParams& params,
                                     const SurfaceDescriptor& surface = {});

} // namespace torusflow
