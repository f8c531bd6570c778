#include "torusflow/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace torusflow {

namespace {

double fold(double d) {
    if (d >= 0.5) return d - 1.0;
    if (d < -0.5) return d + 1.0;
    return d;
}

int priority(OrbitClass c) {
    switch (c) {
        case OrbitClass::Sing: return 4;
        case OrbitClass::ExceptionalSuspect: return 3;
        case OrbitClass::P: return 2;
        case OrbitClass::Per: return 1;
        case OrbitClass::LD: return 0;
    }
    return 0;
}

int raw_cell(const TorusPoint& p, int n) {
    int cx = static_cast<int>(p.x * n);
    int cy = static_cast<int>(p.y * n);
    if (cx >= n) cx = n - 1;
    if (cy >= n) cy = n - 1;
    return cy * n + cx;
}

/// One pass over an orbit: visited cells, the run-length sequence of
/// cells (for the tail window), own-cell return, and - on forward
/// passes - the near-return monitor that detects periodicity and stops
/// the trace as soon as a return is confirmed.
class SeedScan final : public OrbitVisitor {
public:
    SeedScan(const VectorField& field, const ClassifyParams& params, const TorusPoint& seed,
             int dir, bool monitor)
        : cells(params.resolution),
          field_(field),
          prm_(params),
          seed_(seed),
          dir_(dir),
          monitor_(monitor),
          n_(params.resolution) {
        double h = 0.5 / n_;
        near2_ = (1.5 * h) * (1.5 * h);
        seed_cell_ = raw_cell(seed, n_);
        seed_cx_ = seed_cell_ % n_;
        seed_cy_ = seed_cell_ / n_;
        arm_cells_ = std::max(2, n_ / 8);
    }

    CellSet cells;
    std::vector<std::pair<int, double>> runs; // (cell, entry time)
    double final_time = 0.0;
    bool returned_to_seed_cell = false;
    std::optional<double> period;

    bool sample(double t, const TorusPoint& p) override {
        int cx = static_cast<int>(p.x * n_);
        int cy = static_cast<int>(p.y * n_);
        if (cx >= n_) cx = n_ - 1;
        if (cy >= n_) cy = n_ - 1;
        int c = cy * n_ + cx;
        if (c != last_cell_) {
            cells.insert(c);
            runs.emplace_back(c, t);
            last_cell_ = c;
            if (c != seed_cell_) left_ = true;
            else if (left_) returned_to_seed_cell = true;
        }
        final_time = t;

        if (monitor_) {
            // cheap gate on the cell distance to the seed: the exact
            // distance math only matters within a few cells of it, and
            // arming just needs evidence the orbit genuinely left
            int ddx = std::abs(cx - seed_cx_);
            ddx = std::min(ddx, n_ - ddx);
            int ddy = std::abs(cy - seed_cy_);
            ddy = std::min(ddy, n_ - ddy);
            int cheb = std::max(ddx, ddy);
            if (!armed_) {
                if (cheb >= arm_cells_) armed_ = true;
            } else if (cheb <= 4 || in_gate_) {
                if (!in_gate_ && cheb <= 4) {
                    // fresh entry: the rolling triple needs two in-gate
                    // samples before a minimum can be bracketed
                    have2_ = false;
                    seen_ = 0;
                    d2_0_ = d2_1_ = 1e9;
                }
                in_gate_ = cheb <= 4;
                double dx = fold(p.x - seed_.x);
                double dy = fold(p.y - seed_.y);
                double d2 = dx * dx + dy * dy;
                if (have2_ && d2_1_ < d2_0_ && d2_1_ <= d2 && d2_1_ < near2_) {
                    // keep the search window symmetric around the minimal
                    // sample even when the kernel's elapsed time jumps by
                    // whole periods between samples
                    double width = (t1_ - t0_) + std::min(t - t1_, t1_ - t0_);
                    if (refine(t0_, p0_, width)) return false;
                }
                t0_ = t1_;
                p0_ = p1_;
                d2_0_ = d2_1_;
                t1_ = t;
                p1_ = p;
                d2_1_ = d2;
                if (seen_ >= 1) have2_ = true;
                ++seen_;
            }
        }
        return true;
    }

    /// Cells visited during the last tau_tail fraction of the elapsed
    /// flow time. Time (not sample count) is the right weighting: the
    /// omega limit is the intersection of the closures of late-time
    /// tails, and sample density depends on the parametrization (a
    /// trapped orbit spends most of its time crawling near the zero).
    CellSet tail_cells(double window = std::numeric_limits<double>::infinity()) const {
        CellSet out(n_);
        double thr = std::max((1.0 - prm_.tau_tail) * final_time, final_time - window);
        for (std::size_t i = runs.size(); i-- > 0;) {
            double end = (i + 1 < runs.size()) ? runs[i + 1].second : final_time;
            if (end <= thr && !out.empty()) break;
            out.insert(runs[i].first);
        }
        return out;
    }

private:
    const VectorField& field_;
    const ClassifyParams& prm_;
    TorusPoint seed_;
    int dir_;
    bool monitor_;
    int n_;
    double near2_ = 0.0;
    int seed_cell_ = 0;
    int last_cell_ = -1;
    bool left_ = false;

    int seed_cx_ = 0, seed_cy_ = 0;
    int arm_cells_ = 2;
    bool armed_ = false;
    bool in_gate_ = false;
    bool have2_ = false;
    int seen_ = 0;
    double t0_ = 0.0, t1_ = 0.0;
    TorusPoint p0_, p1_;
    double d2_0_ = 1e9, d2_1_ = 1e9;

    /// Golden-section refinement of the distance minimum inside the
    /// three-sample window starting at (t_base, p_base).
    bool refine(double t_base, const TorusPoint& p_base, double width) {
        if (!(width > 0.0)) return false;
        auto dist2_at = [&](double dt) {
            TorusPoint q = flow_at(field_, p_base, dir_, dt, prm_.integration);
            double dx = fold(q.x - seed_.x);
            double dy = fold(q.y - seed_.y);
            return dx * dx + dy * dy;
        };
        const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
        // Lipschitz bound for early abandonment: the distance to the seed
        // changes no faster than the flow speed, so once the best value
        // seen cannot reach tol_per anywhere in the bracket, the trigger
        // was a near miss and the search can stop. Generous factor so a
        // speed rise inside the window cannot cause a false abandon.
        const double lip = 4.0 * (1.0 + field_.velocity(p_base).norm());
        double a = 0.0, b = width;
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        double fc = dist2_at(c), fd = dist2_at(d);
        for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
            double reach = prm_.tol_per + lip * (b - a);
            if (std::min(fc, fd) > reach * reach) return false;
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = dist2_at(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = dist2_at(d);
            }
        }
        double dt_best = 0.5 * (a + b);
        TorusPoint q = flow_at(field_, p_base, dir_, dt_best, prm_.integration);
        if (torus_distance(q, seed_) >= prm_.tol_per) return false;
        TorusVector vs = field_.velocity(seed_);
        TorusVector vq = field_.velocity(q);
        double ns = vs.norm(), nq = vq.norm();
        if (ns == 0.0 || nq == 0.0) return false;
        double cosine = (vs.dx * vq.dx + vs.dy * vq.dy) / (ns * nq);
        if (cosine <= 0.999) return false;
        period = t_base + dt_best;
        return true;
    }
};

Termination run_trace(const VectorField& field, const TorusPoint& seed, int dir,
                      const ClassifyParams& params, double T, OrbitVisitor& vis) {
    // About one sample per cell width, but deliberately incommensurate
    // with the cell size: a loop of length exactly 1 (a horizontal circle
    // row) would otherwise phase-lock the samples onto the same subset of
    // cells on every revolution. The slight drift per loop fills in the
    // cells a single pass clips at corners; the near-return monitor keeps
    // its 0.75-cell radius, so a true return still lands a sample inside
    // it. Periodic orbits get their closure from a fine single-period
    // retrace instead (see cycle_cells).
    double h = 0.98 / params.resolution;
    if (params.use_reference)
        return field.trace_reference(seed, dir, T, params.integration, h, vis);
    return field.trace(seed, dir, T, params.integration, h, vis);
}

bool cell_contains_singular(const VectorField& field, int idx, const CellSet& designed_cells,
                            const ClassifyParams& params) {
    if (designed_cells.resolution() > 0 && designed_cells.contains(idx)) return true;
    int n = params.resolution;
    double w = 1.0 / n;
    TorusPoint c = cell_center(idx, n);
    double x0 = c.x - 0.5 * w, y0 = c.y - 0.5 * w;
    const TorusPoint probes[5] = {c, wrap(x0, y0), wrap(x0 + w, y0), wrap(x0, y0 + w),
                                  wrap(x0 + w, y0 + w)};
    for (const TorusPoint& p : probes)
        if (detect_singular(field, p, params.tol_sing, params.integration)) return true;
    return false;
}

/// Tail window for the omega/alpha estimate. A trap-terminated direction
/// converges to the zero it stalled at, so its limit estimate is the
/// final slow creep (the last t_trap of flow time), not the long
/// transient that came before it; otherwise the whole tau_tail fraction
/// of the elapsed time counts.
double tail_window(Termination term, const ClassifyParams& params) {
    return term == Termination::singularity_trap ? params.integration.t_trap
                                                 : std::numeric_limits<double>::infinity();
}

bool tail_in_sing(const VectorField& field, Termination term, const CellSet& tail,
                  const CellSet& designed_cells, const ClassifyParams& params) {
    if (term == Termination::singularity_trap) return true;
    for (int idx : tail.members())
        if (!cell_contains_singular(field, idx, designed_cells, params)) return false;
    return !tail.empty();
}

/// Cells of a confirmed periodic orbit, from a fine retrace of exactly
/// one period (the scan that found the period stops at the first
/// confirmed return and samples too coarsely to cover every cell the
/// loop crosses).
CellSet cycle_cells(const VectorField& field, const TorusPoint& seed, double period,
                    const ClassifyParams& params) {
    struct Collect final : OrbitVisitor {
        CellSet cells;
        int n;
        explicit Collect(int n_) : cells(n_), n(n_) {}
        bool sample(double, const TorusPoint& p) override {
            cells.insert(raw_cell(p, n));
            return true;
        }
    } col(params.resolution);
    double h = 0.45 / params.resolution;
    if (params.use_reference)
        field.trace_reference(seed, +1, period, params.integration, h, col);
    else
        field.trace(seed, +1, period, params.integration, h, col);
    return col.cells;
}

struct Classified {
    OrbitClassLabel label;
    CellSet closure;
    LimitSetEstimate ls;
    bool returns = false;
    bool underflow = false;
};

Classified make_singular_record(int cell, int n) {
    Classified c;
    c.label = {OrbitClass::Sing, 0.0};
    c.closure = CellSet(n);
    c.closure.insert(cell);
    c.ls.omega_cells = c.closure;
    c.ls.alpha_cells = c.closure;
    c.ls.omega_in_sing = true;
    c.ls.alpha_in_sing = true;
    c.returns = true;
    return c;
}

CellSet designed_singular_cells(const VectorField& field, int n) {
    CellSet out(n);
    for (const TorusPoint& p : field.designed_singular_points()) out.insert(cell_index(p, n));
    return out;
}

Classified classify_seed(const VectorField& field, const TorusPoint& seed,
                         const ClassifyParams& params, const CellSet& designed_cells) {
    int n = params.resolution;
    if (detect_singular(field, seed, params.tol_sing, params.integration))
        return make_singular_record(raw_cell(seed, n), n);

    auto fwd_scan = std::make_unique<SeedScan>(field, params, seed, +1, true);
    Termination term_f = run_trace(field, seed, +1, params, params.horizon, *fwd_scan);
    if (fwd_scan->period && *fwd_scan->period > params.horizon - params.tol_per) {
        // a return found only at the very end of the window could be a
        // slow near-return; settle it with a doubled horizon
        fwd_scan = std::make_unique<SeedScan>(field, params, seed, +1, true);
        term_f = run_trace(field, seed, +1, params, 2.0 * params.horizon, *fwd_scan);
    }
    SeedScan& fwd = *fwd_scan;
    if (fwd.period) {
        Classified c;
        c.label = {OrbitClass::Per, *fwd.period};
        c.closure = cycle_cells(field, seed, *fwd.period, params);
        c.ls.omega_cells = c.closure;
        c.ls.alpha_cells = c.closure;
        c.returns = true;
        return c;
    }

    SeedScan bwd(field, params, seed, -1, false);
    Termination term_b = run_trace(field, seed, -1, params, params.horizon, bwd);

    Classified c;
    c.underflow =
        term_f == Termination::step_underflow || term_b == Termination::step_underflow;
    c.ls.omega_cells = fwd.tail_cells(tail_window(term_f, params));
    c.ls.alpha_cells = bwd.tail_cells(tail_window(term_b, params));
    c.ls.omega_in_sing = tail_in_sing(field, term_f, c.ls.omega_cells, designed_cells, params);
    c.ls.alpha_in_sing = tail_in_sing(field, term_b, c.ls.alpha_cells, designed_cells, params);
    c.closure = fwd.cells.united(bwd.cells);
    c.returns = fwd.returned_to_seed_cell;

    int seed_cell = raw_cell(seed, n);
    bool recurrent =
        c.ls.omega_cells.contains(seed_cell) || c.ls.alpha_cells.contains(seed_cell);
    bool interior_nonempty = !c.closure.interior().empty();
    if (recurrent)
        c.label = {interior_nonempty ? OrbitClass::LD : OrbitClass::ExceptionalSuspect, 0.0};
    else
        c.label = {OrbitClass::P, 0.0};
    return c;
}

bool closures_match(const CellSet& a, const CellSet& b, double delta) {
    return a.symmetric_difference_fraction(b) <= delta;
}

/// A cycle "appears in" a limit-set estimate when the two cell sets
/// agree up to one ring of dilation each way (a converging orbit can
/// land in the cell row adjacent to the cycle's own row).
bool cycle_matches_limit_set(const CellSet& cycle, const CellSet& limit) {
    if (limit.empty()) return false;
    return limit.minus(cycle.dilated()).empty() && cycle.minus(limit.dilated()).empty();
}

} // namespace

std::string orbit_class_name(OrbitClass c) {
    switch (c) {
        case OrbitClass::Sing: return "Sing";
        case OrbitClass::Per: return "Per";
        case OrbitClass::P: return "P";
        case OrbitClass::LD: return "LD";
        case OrbitClass::ExceptionalSuspect: return "ExceptionalSuspect";
    }
    return "?";
}

CellSet GridPartition::cells_with(OrbitClass c) const {
    CellSet out(resolution);
    for (int i = 0; i < cell_count(); ++i)
        if (labels[i].value == c) out.insert(i);
    return out;
}

int GridPartition::count(OrbitClass c) const {
    int k = 0;
    for (const OrbitClassLabel& l : labels)
        if (l.value == c) ++k;
    return k;
}

nlohmann::json GridPartition::to_json() const {
    nlohmann::json j;
    j["resolution"] = resolution;
    j["horizon"] = horizon;
    std::vector<int> lab;
    lab.reserve(labels.size());
    for (const OrbitClassLabel& l : labels) lab.push_back(static_cast<int>(l.value));
    j["labels"] = lab;
    j["diagnostics"] = diagnostics;
    return j;
}

GridPartition GridPartition::from_json(const nlohmann::json& j) {
    GridPartition part;
    part.resolution = j.at("resolution").get<int>();
    part.horizon = j.at("horizon").get<double>();
    for (int v : j.at("labels").get<std::vector<int>>()) {
        if (v < 0 || v > 4) throw std::invalid_argument("GridPartition: bad label value");
        part.labels.push_back({static_cast<OrbitClass>(v), 0.0});
    }
    if (static_cast<int>(part.labels.size()) != part.cell_count())
        throw std::invalid_argument("GridPartition: label count does not match resolution");
    if (j.contains("diagnostics"))
        part.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    part.extra_seed_cells = CellSet(part.resolution);
    return part;
}

bool detect_singular(const VectorField& field, const TorusPoint& p, double tol_sing,
                     const IntegrationParams& integration) {
    (void)integration;
    if (field.velocity(p).norm() >= tol_sing) return false;
    // near-zero speed at p: confirm the orbit stays put over one unit
    // of flow time (classical RK4, fixed steps; speeds this small make
    // the scheme exact to far below the threshold)
    const int steps = 16;
    const double dt = 1.0 / steps;
    double x = p.x, y = p.y;
    for (int i = 0; i < steps; ++i) {
        TorusVector k1 = field.velocity(wrap(x, y));
        TorusVector k2 = field.velocity(wrap(x + 0.5 * dt * k1.dx, y + 0.5 * dt * k1.dy));
        TorusVector k3 = field.velocity(wrap(x + 0.5 * dt * k2.dx, y + 0.5 * dt * k2.dy));
        TorusVector k4 = field.velocity(wrap(x + dt * k3.dx, y + dt * k3.dy));
        x += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
        y += dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
        if (torus_distance(wrap(x, y), p) >= 10.0 * tol_sing) return false;
    }
    return true;
}

std::optional<double> detect_periodic(const VectorField& field, const TorusPoint& seed,
                                      const ClassifyParams& params) {
    SeedScan scan(field, params, seed, +1, true);
    run_trace(field, seed, +1, params, params.horizon, scan);
    if (scan.period && *scan.period > params.horizon - params.tol_per) {
        SeedScan retry(field, params, seed, +1, true);
        run_trace(field, seed, +1, params, 2.0 * params.horizon, retry);
        return retry.period;
    }
    return scan.period;
}

LimitSetEstimate estimate_limit_sets(const VectorField& field, const TorusPoint& x,
                                     const ClassifyParams& params) {
    CellSet designed = designed_singular_cells(field, params.resolution);
    SeedScan fwd(field, params, x, +1, false);
    Termination term_f = run_trace(field, x, +1, params, params.horizon, fwd);
    SeedScan bwd(field, params, x, -1, false);
    Termination term_b = run_trace(field, x, -1, params, params.horizon, bwd);
    if (term_f == Termination::step_underflow || term_b == Termination::step_underflow)
        throw std::runtime_error("estimate_limit_sets: integrator step underflow");
    LimitSetEstimate ls;
    ls.omega_cells = fwd.tail_cells(tail_window(term_f, params));
    ls.alpha_cells = bwd.tail_cells(tail_window(term_b, params));
    ls.omega_in_sing = tail_in_sing(field, term_f, ls.omega_cells, designed, params);
    ls.alpha_in_sing = tail_in_sing(field, term_b, ls.alpha_cells, designed, params);
    return ls;
}

OrbitClassLabel classify_orbit(const VectorField& field, const TorusPoint& seed,
                               const ClassifyParams& params) {
    CellSet designed = designed_singular_cells(field, params.resolution);
    return classify_seed(field, seed, params, designed).label;
}

GridPartition decompose(const VectorField& field, int n, const ClassifyParams& params_in) {
    if (n < 16) throw std::invalid_argument("decompose: resolution must be at least 16");
    ClassifyParams params = params_in;
    params.resolution = n;
    const int m = n * n;

    GridPartition part;
    part.resolution = n;
    part.horizon = params.horizon;
    part.labels.assign(m, {});
    part.closures.assign(m, CellSet());
    part.limit_sets.assign(m, LimitSetEstimate{});
    part.returns_to_cell.assign(m, 0);
    part.extra_seed_cells = CellSet(n);

    CellSet designed = designed_singular_cells(field, n);
    std::vector<std::string> errors(m);

    auto store = [&](int idx, const Classified& c) {
        part.labels[idx] = c.label;
        part.closures[idx] = c.closure;
        part.limit_sets[idx] = c.ls;
        part.returns_to_cell[idx] = c.returns ? 1 : 0;
        if (c.underflow) errors[idx] += "step underflow during classification; ";
    };

#ifdef _OPENMP
    int nthreads = params.workers > 0 ? params.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
#endif
    for (int idx = 0; idx < m; ++idx) {
        try {
            store(idx, classify_seed(field, cell_center(idx, n), params, designed));
        } catch (const std::exception& e) {
            errors[idx] = e.what();
            Classified fallback;
            fallback.closure = CellSet(n);
            part.labels[idx] = fallback.label;
            part.closures[idx] = fallback.closure;
        }
    }
    for (int idx = 0; idx < m; ++idx)
        if (!errors[idx].empty())
            part.diagnostics.push_back("cell " + std::to_string(idx) + ": " + errors[idx]);

    // injected seeds override grid labels (designed measure-zero sets
    // are invisible to cell centers); among injected writers the more
    // specific class wins
    std::vector<std::uint8_t> injected(m, 0);
    auto inject = [&](const TorusPoint& p, const Classified& c) {
        int idx = raw_cell(p, n);
        part.extra_seed_cells.insert(idx);
        if (injected[idx] && priority(c.label.value) <= priority(part.labels[idx].value))
            return;
        injected[idx] = 1;
        store(idx, c);
    };

    for (const TorusPoint& p : field.designed_singular_points()) {
        if (detect_singular(field, p, params.tol_sing, params.integration)) {
            inject(p, make_singular_record(raw_cell(p, n), n));
        } else {
            part.diagnostics.push_back("designed singular point (" + std::to_string(p.x) + "," +
                                       std::to_string(p.y) + ") failed the singular test");
        }
    }
    for (const SeedFamily& fam : field.seed_families(0.5 / n)) {
        try {
            Classified rep = classify_seed(field, fam.representative, params, designed);
            for (const TorusPoint& p : fam.samples) inject(p, rep);
            OrbitClass rl = rep.label.value;
            if (rl == OrbitClass::LD || rl == OrbitClass::ExceptionalSuspect) {
                // a recurrent family's invariant set meets every cell of its
                // closure estimate, not only the cells holding the section
                // samples; stamp the whole footprint with the shared record
                // so all of its witnesses report one closure
                for (int idx : rep.closure.members()) inject(cell_center(idx, n), rep);
            }
        } catch (const std::exception& e) {
            part.diagnostics.push_back("seed family " + fam.name + ": " + e.what());
        }
    }
    return part;
}

OrbitClassEstimate orbit_class(const VectorField& field, const TorusPoint& x,
                               const GridPartition& partition, const ClassifyParams& params_in) {
    ClassifyParams params = params_in;
    params.resolution = partition.resolution;
    params.horizon = partition.horizon;
    int idx = raw_cell(x, partition.resolution);
    OrbitClass lab = partition.labels[idx].value;
    if (lab != OrbitClass::LD && lab != OrbitClass::ExceptionalSuspect)
        throw WrongLabelError("orbit_class: seed labeled " + orbit_class_name(lab) +
                              "; a nontrivially recurrent (LD/ExceptionalSuspect) seed is required");
    CellSet designed = designed_singular_cells(field, partition.resolution);
    Classified cx = classify_seed(field, x, params, designed);
    OrbitClassEstimate est;
    est.representative = x;
    est.closure = cx.closure;
    est.class_cells = CellSet(partition.resolution);
    for (int j = 0; j < partition.cell_count(); ++j)
        if (!partition.closures[j].empty() &&
            closures_match(partition.closures[j], cx.closure, params.delta_closure))
            est.class_cells.insert(j);
    est.class_cells.insert(idx);
    return est;
}

std::vector<QuasiMinimalSet> quasi_minimal_sets(const GridPartition& partition,
                                                const ClassifyParams& params) {
    std::vector<QuasiMinimalSet> out;
    for (int idx = 0; idx < partition.cell_count(); ++idx) {
        OrbitClass lab = partition.labels[idx].value;
        if (lab != OrbitClass::LD && lab != OrbitClass::ExceptionalSuspect) continue;
        const CellSet& C = partition.closures[idx];
        if (C.empty()) continue;
        bool known = false;
        for (const QuasiMinimalSet& q : out)
            if (closures_match(q.closure, C, params.delta_closure)) {
                known = true;
                break;
            }
        if (!known) out.push_back({C, cell_center(idx, partition.resolution)});
    }
    return out;
}

std::vector<LimitCycleEstimate> limit_cycles(const VectorField& field,
                                             const GridPartition& partition,
                                             const ClassifyParams& params) {
    (void)field;
    std::vector<LimitCycleEstimate> cands;
    for (int idx = 0; idx < partition.cell_count(); ++idx) {
        if (partition.labels[idx].value != OrbitClass::Per) continue;
        const CellSet& C = partition.closures[idx];
        if (C.empty()) continue;
        bool known = false;
        for (const LimitCycleEstimate& c : cands)
            if (closures_match(c.cells, C, params.delta_closure)) {
                known = true;
                break;
            }
        if (!known) cands.push_back({C, partition.labels[idx].period, false});
    }

    CellSet p_cells = partition.cells_with(OrbitClass::P);
    CellSet int_p = p_cells.interior();
    CellSet near_int_p = int_p.dilated().dilated();

    std::vector<LimitCycleEstimate> out;
    for (LimitCycleEstimate& cand : cands) {
        bool is_limit = false;
        for (int idx = 0; idx < partition.cell_count() && !is_limit; ++idx) {
            OrbitClass lab = partition.labels[idx].value;
            if (lab == OrbitClass::Per || lab == OrbitClass::Sing) continue;
            const LimitSetEstimate& ls = partition.limit_sets[idx];
            if (cycle_matches_limit_set(cand.cells, ls.omega_cells) ||
                cycle_matches_limit_set(cand.cells, ls.alpha_cells))
                is_limit = true;
        }
        if (!is_limit) continue;
        // grid-scale boundary of int P: outside the interior, but within
        // two rings of it (the cycle's own row is excluded from P by the
        // label partition, hence the two-ring allowance)
        cand.boundary_of_intP = !int_p.empty() && cand.cells.intersected(int_p).empty() &&
                                cand.cells.minus(near_int_p).empty();
        out.push_back(cand);
    }
    return out;
}

} // namespace torusflow
