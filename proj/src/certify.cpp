#include "torusflow/certify.hpp"

#include <algorithm>
#include <stdexcept>

namespace torusflow {

namespace {

Certificate base_certificate(const std::string& name, const GridPartition& partition,
                             const std::string& anchor) {
    Certificate c;
    c.name = name;
    c.scope_n = partition.resolution;
    c.scope_T = partition.horizon;
    c.anchor = anchor;
    return c;
}

/// Union of the closure estimates of all seeds carrying one of the
/// given labels.
CellSet closure_union(const GridPartition& partition, std::initializer_list<OrbitClass> labels) {
    CellSet out(partition.resolution);
    for (int i = 0; i < partition.cell_count(); ++i) {
        OrbitClass lab = partition.labels[i].value;
        bool wanted = false;
        for (OrbitClass l : labels) wanted = wanted || l == lab;
        if (wanted && !partition.closures[i].empty()) out = out.united(partition.closures[i]);
    }
    return out;
}

} // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

nlohmann::json Certificate::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["verdict"] = verdict_name(verdict);
    j["evidence"] = nlohmann::json::object();
    for (const auto& [k, v] : evidence) j["evidence"][k] = v;
    j["flagged_cells"] = flagged_cells;
    j["scope"] = {{"n", scope_n}, {"T", scope_T}};
    j["anchor"] = anchor;
    return j;
}

Certificate certify_nonwandering(const GridPartition& partition, const ClassifyParams& params) {
    Certificate c =
        base_certificate("nonwandering", partition, "closure(LD u Per) u Sing = M");
    CellSet ld = partition.cells_with(OrbitClass::LD);
    CellSet per = partition.cells_with(OrbitClass::Per);
    CellSet sing = partition.cells_with(OrbitClass::Sing);
    CellSet covered = ld.united(per).dilated().united(sing);
    double uncovered = 1.0 - covered.coverage();
    long returns = 0;
    for (std::uint8_t r : partition.returns_to_cell) returns += r;
    c.evidence["uncovered_fraction"] = uncovered;
    c.evidence["ld_cells"] = ld.size();
    c.evidence["per_cells"] = per.size();
    c.evidence["sing_cells"] = sing.size();
    c.evidence["own_cell_return_fraction"] = double(returns) / double(partition.cell_count());
    c.verdict = uncovered <= params.delta_cover ? Verdict::pass : Verdict::fail;
    return c;
}

Certificate certify_no_exceptional(const GridPartition& partition,
                                   const Certificate& nonwandering) {
    Certificate c =
        base_certificate("no-exceptional", partition, "non-wandering implies E is empty");
    CellSet suspects = partition.cells_with(OrbitClass::ExceptionalSuspect);
    c.evidence["suspect_cells"] = suspects.size();
    c.evidence["nonwandering_passed"] = nonwandering.passed() ? 1 : 0;
    if (!nonwandering.passed() || suspects.empty()) {
        c.verdict = Verdict::pass;
    } else {
        c.verdict = Verdict::fail;
        c.flagged_cells = suspects.members();
    }
    return c;
}

Certificate certify_per_open(const GridPartition& partition, const Certificate& nonwandering) {
    Certificate c = base_certificate("per-open", partition, "Per(v) is open");
    if (!nonwandering.passed()) {
        c.verdict = Verdict::inconclusive;
        c.evidence["nonwandering_passed"] = 0;
        return c;
    }
    CellSet per = partition.cells_with(OrbitClass::Per);
    CellSet sing_injected =
        partition.cells_with(OrbitClass::Sing).intersected(partition.extra_seed_cells);
    CellSet near_sing = sing_injected.dilated();
    CellSet near_extra = partition.extra_seed_cells.dilated();
    int violations = 0;
    for (int idx : per.members()) {
        if (near_sing.contains(idx)) continue;
        bool surrounded = true;
        for (int nb : per.neighbors(idx)) surrounded = surrounded && per.contains(nb);
        if (!surrounded && !near_extra.contains(idx)) {
            ++violations;
            c.flagged_cells.push_back(idx);
        }
    }
    c.evidence["violating_cells"] = violations;
    c.verdict = violations == 0 ? Verdict::pass : Verdict::fail;
    return c;
}

Certificate certify_P_characterization(const VectorField& field, const GridPartition& partition,
                                       const Certificate& nonwandering,
                                       const ClassifyParams& params) {
    (void)field;
    (void)params;
    Certificate c = base_certificate(
        "p-characterization", partition,
        "P u Sing = { x : omega(x) u alpha(x) contained in Sing }");
    if (!nonwandering.passed()) {
        c.verdict = Verdict::inconclusive;
        c.evidence["nonwandering_passed"] = 0;
        return c;
    }
    int label_without_trap = 0, trap_without_label = 0;
    for (int i = 0; i < partition.cell_count(); ++i) {
        OrbitClass lab = partition.labels[i].value;
        bool lhs = lab == OrbitClass::P || lab == OrbitClass::Sing;
        const LimitSetEstimate& ls = partition.limit_sets[i];
        bool rhs = ls.omega_in_sing && ls.alpha_in_sing;
        if (lhs && !rhs) {
            ++label_without_trap;
            c.flagged_cells.push_back(i);
        } else if (rhs && !lhs) {
            ++trap_without_label;
            c.flagged_cells.push_back(i);
        }
    }
    c.evidence["label_without_trapped_limits"] = label_without_trap;
    c.evidence["trapped_limits_without_label"] = trap_without_label;
    c.verdict = (label_without_trap == 0 && trap_without_label == 0) ? Verdict::pass
                                                                    : Verdict::fail;
    return c;
}

Certificate certify_transitive(const VectorField& field, const GridPartition& partition,
                               const ClassifyParams& params) {
    Certificate c = base_certificate(
        "transitive-equivalence", partition,
        "dense orbit <=> non-wandering & co-connected(P u Sing) & int(Per u Sing) empty "
        "<=> co-connected(P u Sing) & int Sing, int Per, int P all empty");
    (void)field;

    double max_cover = 0.0;
    for (const CellSet& cl : partition.closures)
        if (!cl.empty()) max_cover = std::max(max_cover, cl.coverage());
    bool c1 = max_cover >= 1.0 - params.delta_cover;

    Certificate nw = certify_nonwandering(partition, params);
    CellSet p = partition.cells_with(OrbitClass::P);
    CellSet per = partition.cells_with(OrbitClass::Per);
    CellSet sing = partition.cells_with(OrbitClass::Sing);
    bool co_conn = is_coconnected(p.united(sing));
    bool int_per_sing_empty = per.united(sing).interior().empty();
    bool int_sing_empty = sing.interior().empty();
    bool int_per_empty = per.interior().empty();
    bool int_p_empty = p.interior().empty();
    bool c2 = nw.passed() && co_conn && int_per_sing_empty;
    bool c4 = co_conn && int_sing_empty && int_per_empty && int_p_empty;

    // consequence check: in the transitive case every locally dense
    // orbit must itself be dense
    int ld_nondense = 0;
    for (int i = 0; i < partition.cell_count(); ++i)
        if (partition.labels[i].value == OrbitClass::LD &&
            partition.closures[i].coverage() < 1.0 - params.delta_cover)
            ++ld_nondense;

    c.evidence["c1"] = c1 ? 1 : 0;
    c.evidence["c2"] = c2 ? 1 : 0;
    c.evidence["c3"] = c2 ? 1 : 0; // definitionally c2's connectedness clause at grid scale
    c.evidence["c4"] = c4 ? 1 : 0;
    c.evidence["max_closure_coverage"] = max_cover;
    c.evidence["co_connected_p_sing"] = co_conn ? 1 : 0;
    c.evidence["int_per_sing_empty"] = int_per_sing_empty ? 1 : 0;
    c.evidence["int_sing_empty"] = int_sing_empty ? 1 : 0;
    c.evidence["int_per_empty"] = int_per_empty ? 1 : 0;
    c.evidence["int_p_empty"] = int_p_empty ? 1 : 0;
    c.evidence["ld_nondense_count"] = ld_nondense;
    c.evidence["nonwandering_passed"] = nw.passed() ? 1 : 0;

    bool agree = c1 == c2 && c2 == c4;
    bool consequence_ok = !c1 || ld_nondense == 0;
    c.verdict = agree && consequence_ok ? Verdict::pass : Verdict::fail;
    if (!agree) {
        c.evidence["disagree_c1_c2"] = c1 != c2 ? 1 : 0;
        c.evidence["disagree_c2_c4"] = c2 != c4 ? 1 : 0;
    }
    return c;
}

Certificate certify_separation(const GridPartition& partition, const ClassifyParams& params) {
    (void)params;
    Certificate c = base_certificate(
        "separation", partition,
        "closure(Sing u Per u LD) meets E nowhere; E inside int closure(P)");
    CellSet suspects = partition.cells_with(OrbitClass::ExceptionalSuspect);
    c.evidence["suspect_cells"] = suspects.size();
    if (suspects.empty()) {
        c.verdict = Verdict::inconclusive;
        return c;
    }
    CellSet others =
        closure_union(partition, {OrbitClass::Sing, OrbitClass::Per, OrbitClass::LD});
    CellSet p_interior = partition.cells_with(OrbitClass::P).dilated().interior();
    CellSet touching = suspects.intersected(others.dilated());
    CellSet outside = suspects.minus(p_interior);
    c.evidence["suspects_near_other_closures"] = touching.size();
    c.evidence["suspects_outside_p_closure"] = outside.size();
    if (touching.empty() && outside.empty()) {
        c.verdict = Verdict::pass;
    } else {
        c.verdict = Verdict::fail;
        for (int i : touching.united(outside).members()) c.flagged_cells.push_back(i);
    }
    return c;
}

Certificate maier_bound_check(const GridPartition& partition, const SurfaceDescriptor& surface,
                              const ClassifyParams& params) {
    if (!surface.orientable)
        throw std::invalid_argument(
            "maier_bound_check: only orientable surfaces are supported");
    Certificate c = base_certificate("maier-bound", partition,
                                     "number of quasi-minimal sets <= genus");
    std::size_t count = quasi_minimal_sets(partition, params).size();
    c.evidence["quasi_minimal_sets"] = double(count);
    c.evidence["genus"] = surface.genus;
    c.verdict = count <= std::size_t(surface.genus) ? Verdict::pass : Verdict::fail;
    return c;
}

Certificate per_component_shape(const GridPartition& partition, const Certificate& nonwandering,
                                const ClassifyParams& params) {
    Certificate c = base_certificate(
        "per-component-shape", partition,
        "each Per component is the whole surface or an open annulus");
    if (!nonwandering.passed()) {
        c.verdict = Verdict::inconclusive;
        c.evidence["nonwandering_passed"] = 0;
        return c;
    }
    CellSet per = partition.cells_with(OrbitClass::Per);
    std::vector<CellSet> comps = connected_components(per);
    c.evidence["components"] = double(comps.size());
    bool ok = true;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        bool whole = comps[i].coverage() >= 1.0 - params.delta_cover;
        int chi = euler_characteristic(comps[i]);
        bool annulus = !whole && chi == 0 && comps[i].coverage() < 1.0;
        c.evidence["component_" + std::to_string(i) + "_cells"] = comps[i].size();
        c.evidence["component_" + std::to_string(i) + "_chi"] = chi;
        c.evidence["component_" + std::to_string(i) + "_whole"] = whole ? 1 : 0;
        if (!whole && !annulus) {
            ok = false;
            c.flagged_cells.push_back(comps[i].members().front());
        }
    }
    c.verdict = ok ? Verdict::pass : Verdict::fail;
    return c;
}

Certificate rare_species_check(const GridPartition& partition, const ClassifyParams& params) {
    (void)params;
    Certificate c = base_certificate("rare-species", partition,
                                     "closure(P) = closure(LD) = the whole surface");
    CellSet p_cells = partition.cells_with(OrbitClass::P);
    CellSet ld = partition.cells_with(OrbitClass::LD);
    c.evidence["p_cells"] = p_cells.size();
    c.evidence["ld_cells"] = ld.size();
    if (p_cells.empty() || ld.empty()) {
        // the predicate is about flows carrying both species at once
        c.verdict = Verdict::inconclusive;
        return c;
    }
    CellSet p_closure = closure_union(partition, {OrbitClass::P}).dilated();
    c.evidence["p_closure_cover"] = p_closure.coverage();
    c.evidence["ld_cover"] = ld.coverage();
    c.verdict = (p_closure.coverage() >= 0.95 && ld.coverage() >= 0.95) ? Verdict::pass
                                                                        : Verdict::fail;
    return c;
}

std::vector<Certificate> certify_all(const VectorField& field, const GridPartition& partition,
                                     const ClassifyParams& params,
                                     const SurfaceDescriptor& surface) {
    std::vector<Certificate> out;
    Certificate nw = certify_nonwandering(partition, params);
    out.push_back(nw);
    out.push_back(certify_no_exceptional(partition, nw));
    out.push_back(certify_per_open(partition, nw));
    out.push_back(certify_P_characterization(field, partition, nw, params));
    out.push_back(certify_transitive(field, partition, params));
    out.push_back(certify_separation(partition, params));
    out.push_back(maier_bound_check(partition, surface, params));
    out.push_back(per_component_shape(partition, nw, params));
    out.push_back(rare_species_check(partition, params));
    return out;
}

} // namespace torusflow
