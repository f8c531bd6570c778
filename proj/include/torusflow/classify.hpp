#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "torusflow/flow.hpp"
#include "torusflow/geometry.hpp"

namespace torusflow {

/// Scope and tolerances of the grid classification. The (resolution,
/// horizon) pair is part of every downstream claim: density, interior
/// and closure are decided at exactly this scale.
struct ClassifyParams {
    int resolution = 64;
    double horizon = 2000.0;
    double tau_tail = 0.5;       // tail fraction of samples kept for omega/alpha
    double tol_per = 1e-6;       // periodic-return distance
    double tol_sing = 1e-8;      // singular-speed threshold
    double delta_closure = 0.05; // closure-identity tolerance (symmetric diff)
    double delta_cover = 0.01;   // coverage slack for density predicates
    int workers = 0;             // 0 = machine parallelism
    bool use_reference = false;  // classify via the serial reference integrator
    IntegrationParams integration;
};

struct LimitSetEstimate {
    CellSet omega_cells;
    CellSet alpha_cells;
    bool omega_in_sing = false;
    bool alpha_in_sing = false;
};

enum class OrbitClass : std::uint8_t {
    Sing = 0,
    Per = 1,
    P = 2,
    LD = 3,
    ExceptionalSuspect = 4,
};

std::string orbit_class_name(OrbitClass c);

struct OrbitClassLabel {
    OrbitClass value = OrbitClass::P;
    double period = 0.0; // meaningful only when value == Per

    bool operator==(const OrbitClassLabel& o) const {
        return value == o.value && period == o.period;
    }
};

/// Requesting the orbit class of a seed that is not nontrivially
/// recurrent (Sing/Per/P labels).
class WrongLabelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The finite stand-in for the decomposition of the surface: one label
/// per grid cell, plus the per-seed closure and limit-set estimates the
/// certificates consume. Injected seeds (designed measure-zero sets)
/// override grid labels by class priority.
struct GridPartition {
    int resolution = 0;
    double horizon = 0.0;
    std::vector<OrbitClassLabel> labels;       // n*n, by cell index
    std::vector<CellSet> closures;             // visited-cell closure per seed
    std::vector<LimitSetEstimate> limit_sets;  // per seed
    std::vector<std::uint8_t> returns_to_cell; // forward orbit re-enters its seed cell
    CellSet extra_seed_cells;                  // cells holding injected seeds
    std::vector<std::string> diagnostics;

    int cell_count() const { return resolution * resolution; }
    CellSet cells_with(OrbitClass c) const;
    int count(OrbitClass c) const;

    nlohmann::json to_json() const;
    /// Restores labels and scope (closures and limit sets are not
    /// serialized; portrait rendering only needs the labels).
    static GridPartition from_json(const nlohmann::json& j);
};

struct OrbitClassEstimate {
    TorusPoint representative;
    CellSet class_cells; // seeds whose closure estimate matches
    CellSet closure;
};

struct QuasiMinimalSet {
    CellSet closure;
    TorusPoint witness;
};

struct LimitCycleEstimate {
    CellSet cells;
    double period = 0.0;
    bool boundary_of_intP = false;
};

/// True iff the field speed at p is below tol_sing and the orbit of p
/// stays within 10*tol_sing of p over one unit of flow time.
bool detect_singular(const VectorField& field, const TorusPoint& p, double tol_sing,
                     const IntegrationParams& integration);

/// Smallest return time t* in (0, horizon] with
/// torus_distance(v_{t*}(seed), seed) < tol_per and direction cosine
/// above 0.999, refined to the local distance minimum.
std::optional<double> detect_periodic(const VectorField& field, const TorusPoint& seed,
                                      const ClassifyParams& params);

/// Tail-window cell estimates of the omega and alpha limit sets.
LimitSetEstimate estimate_limit_sets(const VectorField& field, const TorusPoint& x,
                                     const ClassifyParams& params);

/// Decision procedure: Sing, then Per, then the recurrence/interior
/// tests distinguishing LD, ExceptionalSuspect and P.
OrbitClassLabel classify_orbit(const VectorField& field, const TorusPoint& seed,
                               const ClassifyParams& params);

/// Classify the n x n cell centers plus all designed seeds of the field.
GridPartition decompose(const VectorField& field, int n, const ClassifyParams& params);

/// Orbit class of a nontrivially recurrent point: all seeds whose
/// closure estimate matches x's up to delta_closure.
OrbitClassEstimate orbit_class(const VectorField& field, const TorusPoint& x,
                               const GridPartition& partition, const ClassifyParams& params);

/// Deduplicated closures of all LD / ExceptionalSuspect seeds.
std::vector<QuasiMinimalSet> quasi_minimal_sets(const GridPartition& partition,
                                                const ClassifyParams& params);

/// Periodic orbits that are the omega or alpha limit set of some seed
/// not on them, each tested against the grid-scale boundary of int P.
std::vector<LimitCycleEstimate> limit_cycles(const VectorField& field,
                                             const GridPartition& partition,
                                             const ClassifyParams& params);

} // namespace torusflow
