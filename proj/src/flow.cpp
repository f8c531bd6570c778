#include "torusflow/flow.hpp"

#include "torusflow/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace torusflow {

namespace {

double frac(double v) {
    double f = v - std::floor(v);
    return f >= 1.0 ? f - 1.0 : f;
}

constexpr double kPi = 3.14159265358979323846;

/// Constant-velocity trace: the workhorse for the linear field and the
/// invariant rows of the band fields. If a period is supplied and the
/// horizon is much longer, only the first and last period are sampled
/// (the intermediate windings repeat the same set of points).
Termination trace_line(const TorusPoint& seed, double vx, double vy, double T,
                       const IntegrationParams& P, double h, OrbitVisitor& vis,
                       double known_period = 0.0) {
    if (!vis.sample(0.0, seed)) return Termination::stopped;
    if (T <= 0.0) return Termination::horizon;

    const double speed = std::hypot(vx, vy);
    double t_end = T;
    Termination term = Termination::horizon;
    if (speed < P.v_trap && P.t_trap < T) {
        t_end = P.t_trap;
        term = Termination::singularity_trap;
    }

    auto at = [&](double t) { return wrap(seed.x + vx * t, seed.y + vy * t); };
    // emit samples over (t0, t1]; returns false on visitor stop
    auto span = [&](double t0, double t1) -> bool {
        double dt = (speed > 0.0) ? h / speed : (t1 - t0);
        if (!(dt > 0.0)) dt = t1 - t0;
        if (!(dt > 0.0)) return true;
        long steps = static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9));
        if (steps < 1) steps = 1;
        for (long k = 1; k <= steps; ++k) {
            double t = std::min(t1, t0 + k * dt);
            if (!vis.sample(t, at(t))) return false;
        }
        return true;
    };

    if (known_period > 0.0 && t_end > 2.0 * known_period) {
        if (!span(0.0, known_period)) return Termination::stopped;
        // skip whole windings: a jump by a multiple of the period lands on
        // the same point, so the spatial spacing contract is preserved
        double tail_start = known_period * std::floor((t_end - known_period) / known_period);
        if (!vis.sample(tail_start, at(tail_start))) return Termination::stopped;
        if (!span(tail_start, t_end)) return Termination::stopped;
    } else {
        if (!span(0.0, t_end)) return Termination::stopped;
    }
    return term;
}

double signed_pow(double w, int e) {
    double r = std::pow(std::fabs(w), e);
    return w < 0.0 ? -r : r;
}

/// xi with map(xi) = x on the circle, by bisection of the lift.
double invert_apply(const CircleMap& m, double x) {
    double g0 = m.lift(0.0);
    double target = x + std::ceil(g0 - x);
    if (target < g0) target += 1.0;
    if (target >= g0 + 1.0) target -= 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 54; ++i) {
        double mid = 0.5 * (lo + hi);
        if (m.lift(mid) < target) lo = mid;
        else hi = mid;
    }
    return frac(0.5 * (lo + hi));
}

} // namespace

// ------------------------------------------------------------- reference

Termination VectorField::trace(const TorusPoint& seed, int dir, double T,
                               const IntegrationParams& params, double h,
                               OrbitVisitor& vis) const {
    return trace_reference(seed, dir, T, params, h, vis);
}

Termination VectorField::trace_reference(const TorusPoint& seed, int dir, double T,
                                         const IntegrationParams& P, double h,
                                         OrbitVisitor& vis) const {
    // Cash-Karp embedded Runge-Kutta(4,5)
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
    static constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
    static constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                            a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
    static constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
    static constexpr double d1 = b1 - 2825.0 / 27648, d3 = b3 - 18575.0 / 48384,
                            d4 = b4 - 13525.0 / 55296, d5 = -277.0 / 14336, d6 = b6 - 1.0 / 4;

    double X = seed.x, Y = seed.y;
    double t = 0.0, slow = 0.0;
    if (!vis.sample(0.0, wrap(X, Y))) return Termination::stopped;
    if (T <= 0.0) return Termination::horizon;

    auto f = [&](double x, double y, double& dx, double& dy) {
        TorusVector v = velocity(wrap(x, y));
        dx = dir * v.dx;
        dy = dir * v.dy;
    };

    double h_acc = P.max_step;
    while (t < T) {
        double k1x, k1y;
        f(X, Y, k1x, k1y);
        double vn = std::hypot(k1x, k1y);
        double cap = P.max_step;
        if (vn > 0.0) cap = std::min({P.max_step, P.c_slow / vn, h / vn});

        double accepted = 0.0;
        double nX = X, nY = Y;
        for (;;) {
            double ht = std::min({h_acc, cap, T - t});
            double k2x, k2y, k3x, k3y, k4x, k4y, k5x, k5y, k6x, k6y;
            f(X + ht * a21 * k1x, Y + ht * a21 * k1y, k2x, k2y);
            f(X + ht * (a31 * k1x + a32 * k2x), Y + ht * (a31 * k1y + a32 * k2y), k3x, k3y);
            f(X + ht * (a41 * k1x + a42 * k2x + a43 * k3x),
              Y + ht * (a41 * k1y + a42 * k2y + a43 * k3y), k4x, k4y);
            f(X + ht * (a51 * k1x + a52 * k2x + a53 * k3x + a54 * k4x),
              Y + ht * (a51 * k1y + a52 * k2y + a53 * k3y + a54 * k4y), k5x, k5y);
            f(X + ht * (a61 * k1x + a62 * k2x + a63 * k3x + a64 * k4x + a65 * k5x),
              Y + ht * (a61 * k1y + a62 * k2y + a63 * k3y + a64 * k4y + a65 * k5y), k6x, k6y);
            double ex = ht * (d1 * k1x + d3 * k3x + d4 * k4x + d5 * k5x + d6 * k6x);
            double ey = ht * (d1 * k1y + d3 * k3y + d4 * k4y + d5 * k5y + d6 * k6y);
            double err = std::max(std::fabs(ex), std::fabs(ey));
            if (err <= P.tol_local) {
                nX = X + ht * (b1 * k1x + b3 * k3x + b4 * k4x + b6 * k6x);
                nY = Y + ht * (b1 * k1y + b3 * k3y + b4 * k4y + b6 * k6y);
                accepted = ht;
                h_acc = (err > 0.0)
                            ? ht * std::min(5.0, 0.9 * std::pow(P.tol_local / err, 0.2))
                            : ht * 5.0;
                break;
            }
            h_acc = ht * std::max(0.1, 0.9 * std::pow(P.tol_local / err, 0.25));
            if (h_acc < P.min_step) return Termination::step_underflow;
        }
        X = nX;
        Y = nY;
        t += accepted;
        if (vn < P.v_trap) {
            slow += accepted;
            if (slow > P.t_trap) {
                vis.sample(t, wrap(X, Y));
                return Termination::singularity_trap;
            }
        } else {
            slow = 0.0;
        }
        if (!vis.sample(t, wrap(X, Y))) return Termination::stopped;
    }
    return Termination::horizon;
}

Trajectory integrate(const VectorField& field, const TorusPoint& seed, int dir,
                     double T, const IntegrationParams& params, double h) {
    struct Recorder final : OrbitVisitor {
        Trajectory* tr;
        bool sample(double t, const TorusPoint& p) override {
            tr->times.push_back(t);
            tr->points.push_back(p);
            return true;
        }
    };
    Trajectory tr;
    tr.seed = seed;
    tr.direction = dir;
    Recorder rec;
    rec.tr = &tr;
    tr.terminated_by = field.trace(seed, dir, T, params, h, rec);
    return tr;
}

TorusPoint flow_at(const VectorField& field, const TorusPoint& seed, int dir,
                   double t, const IntegrationParams& params) {
    struct Last final : OrbitVisitor {
        TorusPoint p;
        bool sample(double, const TorusPoint& q) override {
            p = q;
            return true;
        }
    };
    Last last;
    field.trace(seed, dir, t, params, 1.0 / 256, last);
    return last.p;
}

// ---------------------------------------------------------------- linear

nlohmann::json LinearField::to_json() const {
    return {{"variant", "linear"}, {"a", a_}, {"b", b_}};
}

Termination LinearField::trace(const TorusPoint& seed, int dir, double T,
                               const IntegrationParams& params, double h,
                               OrbitVisitor& vis) const {
    return trace_line(seed, dir * a_, dir * b_, T, params, h, vis);
}

// ------------------------------------------------------ hamiltonian band

TorusVector HamiltonianBandField::velocity(const TorusPoint& p) const {
    return {2.0 * kPi * std::sin(2.0 * kPi * p.y), 0.0};
}

nlohmann::json HamiltonianBandField::to_json() const {
    return {{"variant", "hamiltonian-band"}};
}

std::vector<SeedFamily> HamiltonianBandField::seed_families(double spacing) const {
    std::vector<SeedFamily> fams;
    int m = std::max(1, static_cast<int>(std::ceil(1.0 / spacing)));
    for (double row : {0.0, 0.5}) {
        SeedFamily fam;
        fam.name = row == 0.0 ? "sing-circle-0" : "sing-circle-half";
        fam.representative = {0.0, row};
        for (int j = 0; j < m; ++j) fam.samples.push_back({double(j) / m, row});
        fams.push_back(std::move(fam));
    }
    return fams;
}

Termination HamiltonianBandField::trace(const TorusPoint& seed, int dir, double T,
                                        const IntegrationParams& params, double h,
                                        OrbitVisitor& vis) const {
    double vx = dir * 2.0 * kPi * std::sin(2.0 * kPi * seed.y);
    double period = std::fabs(vx) >= params.v_trap ? 1.0 / std::fabs(vx) : 0.0;
    return trace_line(seed, vx, 0.0, T, params, h, vis, period);
}

// ------------------------------------------------------ limit cycle band

LimitCycleBandField::LimitCycleBandField(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("LimitCycleBandField: lambda must be positive");
}

TorusVector LimitCycleBandField::velocity(const TorusPoint& p) const {
    return {1.0, -lambda_ * std::sin(2.0 * kPi * p.y)};
}

nlohmann::json LimitCycleBandField::to_json() const {
    return {{"variant", "limit-cycle-band"}, {"lambda", lambda_}};
}

std::vector<SeedFamily> LimitCycleBandField::seed_families(double spacing) const {
    std::vector<SeedFamily> fams;
    int m = std::max(1, static_cast<int>(std::ceil(1.0 / spacing)));
    for (double row : {0.0, 0.5}) {
        SeedFamily fam;
        fam.name = row == 0.0 ? "cycle-bottom" : "cycle-top";
        fam.representative = {0.0, row};
        for (int j = 0; j < m; ++j) fam.samples.push_back({double(j) / m, row});
        fams.push_back(std::move(fam));
    }
    return fams;
}

Termination LimitCycleBandField::trace(const TorusPoint& seed, int dir, double T,
                                       const IntegrationParams& params, double h,
                                       OrbitVisitor& vis) const {
    double y0 = seed.y;
    if (std::fabs(std::sin(2.0 * kPi * y0)) < 1e-12)
        return trace_line(seed, dir * 1.0, 0.0, T, params, h, vis, 1.0);

    // In tau = tan(pi*y) the vertical motion is linear:
    // tau(t) = tau0 * exp(-2*pi*lambda*t).
    if (!vis.sample(0.0, seed)) return Termination::stopped;
    if (T <= 0.0) return Termination::horizon;

    const double dt = h / std::sqrt(1.0 + lambda_ * lambda_);
    const double rate = -2.0 * kPi * lambda_ * dir;
    const double decay = std::exp(rate * dt);
    double tau = std::tan(kPi * y0);
    double t = 0.0;
    long k = 0;
    bool settled = false;
    double y_settle = 0.0;

    for (;;) {
        bool last = false;
        double step = dt;
        if ((k + 1) * dt >= T) {
            step = T - t;
            last = true;
        }
        ++k;
        t = last ? T : k * dt;
        double y;
        if (!settled) {
            tau *= last ? std::exp(rate * step) : decay;
            if (std::fabs(tau) < 1e-13) {
                settled = true;
                y_settle = 0.0;
            } else if (std::fabs(tau) > 1e13) {
                settled = true;
                y_settle = 0.5;
            }
        }
        if (settled) {
            y = y_settle;
        } else {
            y = std::atan(tau) / kPi;
            if (y < 0.0) y += 1.0;
        }
        if (!vis.sample(t, wrap(seed.x + dir * t, y))) return Termination::stopped;
        if (last) return Termination::horizon;
    }
}

// --------------------------------------------------------------- blow-up

BlownUpField::BlownUpField(double a, double b, BlowUpSchedule schedule)
    : a_(a), b_(b), schedule_(std::move(schedule)) {
    speed_ = std::hypot(a_, b_);
    if (!(speed_ > 0.0)) throw std::invalid_argument("BlownUpField: zero base field");
    if (schedule_.points.size() != schedule_.radii.size() ||
        schedule_.points.size() != std::size_t(2 * schedule_.order + 1))
        throw std::invalid_argument("BlownUpField: malformed schedule");

    // Coarse rejection mask: cells whose inflated box may meet a bump
    // support. The inflation absorbs the tracing step (<= 0.02) plus a
    // mask cell diagonal, so an unmasked step segment never meets a bump.
    mask_n_ = 512;
    mask_.assign(std::size_t(mask_n_) * mask_n_, 0);
    for (int i = -schedule_.order; i <= schedule_.order; ++i) {
        if (i == 0) continue;
        const TorusPoint& c = schedule_.point(i);
        double R = schedule_.radius(i) + 0.03;
        int lo_x = static_cast<int>(std::floor((c.x - R) * mask_n_));
        int hi_x = static_cast<int>(std::floor((c.x + R) * mask_n_));
        int lo_y = static_cast<int>(std::floor((c.y - R) * mask_n_));
        int hi_y = static_cast<int>(std::floor((c.y + R) * mask_n_));
        for (int cy = lo_y; cy <= hi_y; ++cy)
            for (int cx = lo_x; cx <= hi_x; ++cx) {
                int wx = ((cx % mask_n_) + mask_n_) % mask_n_;
                int wy = ((cy % mask_n_) + mask_n_) % mask_n_;
                mask_[std::size_t(wy) * mask_n_ + wx] = 1;
            }
    }
}

bool BlownUpField::masked(const TorusPoint& p) const {
    int cx = static_cast<int>(p.x * mask_n_);
    int cy = static_cast<int>(p.y * mask_n_);
    if (cx >= mask_n_) cx = mask_n_ - 1;
    if (cy >= mask_n_) cy = mask_n_ - 1;
    return mask_[std::size_t(cy) * mask_n_ + cx] != 0;
}

double BlownUpField::damping(const TorusPoint& p) const {
    return damping_factor(schedule_, p);
}

TorusVector BlownUpField::velocity(const TorusPoint& p) const {
    double d = damping(p);
    return {a_ * d, b_ * d};
}

std::vector<TorusPoint> BlownUpField::designed_singular_points() const {
    std::vector<TorusPoint> pts;
    for (int i = -schedule_.order; i <= schedule_.order; ++i)
        if (i != 0) pts.push_back(schedule_.point(i));
    return pts;
}

std::vector<SeedFamily> BlownUpField::seed_families(double spacing) const {
    std::vector<SeedFamily> fams;
    const int N = schedule_.order;
    auto orbit_at = [&](double t) {
        return wrap(schedule_.p0.x + schedule_.slope_a * t, schedule_.p0.y + schedule_.slope_b * t);
    };
    for (int i = -N; i <= N; ++i) {
        if (i == 0) continue;
        SeedFamily fam;
        fam.name = "pinned-" + std::to_string(i);
        fam.representative = schedule_.point(i);
        fam.samples.push_back(schedule_.point(i));
        fams.push_back(std::move(fam));
    }
    // Orbit segments between consecutive pinned points. The segment
    // through t = 0 is a single orbit (p0 itself is not pinned). The
    // segments are dense lines; sampling them wholesale would paint the
    // entire grid, so each family carries only a short witness window
    // around its mid-segment representative (the class of the whole
    // segment is decided from the representative anyway).
    std::vector<int> idx;
    for (int i = -N; i <= N; ++i)
        if (i != 0) idx.push_back(i);
    double dtp = spacing / speed_;
    // Keep the witness windows short: the pinned times grow like a
    // Fibonacci sequence, so the fractional positions of the segment
    // midpoints cluster around a couple of spots on the torus, and long
    // windows from different families would stack into a thick patch
    // there instead of staying on a one-cell-thin strand.
    double half_window = spacing / speed_;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        double ta = schedule_.time(idx[k]);
        double tb = schedule_.time(idx[k + 1]);
        double tm = 0.5 * (ta + tb);
        double hw = std::min(half_window, 0.45 * (tb - ta));
        SeedFamily fam;
        fam.name = "blown-orbit-" + std::to_string(idx[k]);
        fam.representative = orbit_at(tm);
        for (double t = tm - hw; t <= tm + hw + 0.5 * dtp; t += dtp)
            fam.samples.push_back(orbit_at(t));
        fams.push_back(std::move(fam));
    }
    return fams;
}

/// Exact tracer for the blown-up field: the path is the straight base
/// line through the seed; only the time parametrization changes inside
/// bump supports, where it is rebuilt by adaptive quadrature of 1/speed.
class BlowupTracer {
public:
    BlowupTracer(const BlownUpField& f, const TorusPoint& seed, int dir, double T,
                 const IntegrationParams& P, double h, OrbitVisitor& vis)
        : f_(f), seed_(seed), T_(T), P_(P), vis_(vis) {
        ux_ = dir * f.a_ / f.speed_;
        uy_ = dir * f.b_ / f.speed_;
        ds_ = std::min(h, 0.02);
        for (int i = -f.schedule_.order; i <= f.schedule_.order; ++i) {
            if (i == 0) continue;
            centers_.push_back(f.schedule_.point(i));
            radii_.push_back(f.schedule_.radius(i));
        }
    }

    Termination run() {
        if (!vis_.sample(0.0, seed_)) return Termination::stopped;
        if (T_ <= 0.0) return Termination::horizon;
        double s = 0.0;
        // The mask is inflated by more than one march step beyond every
        // support, so a segment can only touch a support when at least one
        // of its endpoints is masked; checking endpoints (cached across
        // steps) avoids a midpoint probe per step.
        bool m1 = f_.masked(seed_);
        for (;;) {
            double s2 = s + ds_;
            TorusPoint p2 = pos(s2);
            bool m2 = f_.masked(p2);
            if (!m1 && !m2) {
                double dt = ds_ / f_.speed_;
                slow_ = 0.0;
                if (t_ + dt >= T_) {
                    vis_.sample(T_, pos(s + (T_ - t_) * f_.speed_));
                    return Termination::horizon;
                }
                t_ += dt;
                if (!vis_.sample(t_, p2)) return Termination::stopped;
            } else {
                Termination r = refine(s, s2, speed_at(s), speed_at(s2));
                if (done_) return r;
            }
            s = s2;
            m1 = m2;
        }
    }

private:
    const BlownUpField& f_;
    TorusPoint seed_;
    double T_;
    const IntegrationParams& P_;
    OrbitVisitor& vis_;
    double ux_, uy_, ds_;
    double t_ = 0.0, slow_ = 0.0;
    bool done_ = false;
    std::vector<TorusPoint> centers_;
    std::vector<double> radii_;

    TorusPoint pos(double s) const { return wrap(seed_.x + s * ux_, seed_.y + s * uy_); }
    double speed_at(double s) const { return f_.speed_ * f_.damping(pos(s)); }

    static double min_image(double d) {
        d -= std::floor(d + 0.5);
        return d;
    }

    /// Width at which the segment [s1, s1+width] resolves any bump zero it
    /// passes near; infinity when it stays clear of every support. Endpoint
    /// speeds alone cannot detect a zero sitting strictly inside a
    /// subsegment, since the supports can be far smaller than the march
    /// step, so the subdivision is forced down to the closest-approach
    /// distance (the speed then varies slowly at that scale).
    double resolve_width(double s1, double width) const {
        TorusPoint a = pos(s1);
        double need = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            double dx = min_image(centers_[i].x - a.x);
            double dy = min_image(centers_[i].y - a.y);
            double tc = std::clamp(dx * ux_ + dy * uy_, 0.0, width);
            double ex = dx - tc * ux_;
            double ey = dy - tc * uy_;
            double d = std::hypot(ex, ey);
            if (d < radii_[i]) need = std::min(need, std::max(1e-12, 0.5 * d));
        }
        return need;
    }

    Termination refine(double s1, double s2, double v1, double v2) {
        double width = s2 - s1;
        double inv1 = v1 > 1e-300 ? 1.0 / v1 : std::numeric_limits<double>::infinity();
        double inv2 = v2 > 1e-300 ? 1.0 / v2 : std::numeric_limits<double>::infinity();
        double dt = width * 0.5 * (inv1 + inv2);
        bool rough = dt > 0.25 || std::fabs(v1 - v2) > 0.2 * (std::min(v1, v2) + 1e-30);
        if (width > 1e-12 && (rough || width > resolve_width(s1, width))) {
            double sm = 0.5 * (s1 + s2);
            double vm = speed_at(sm);
            Termination r = refine(s1, sm, v1, vm);
            if (done_) return r;
            return refine(sm, s2, vm, v2);
        }
        if (std::max(v1, v2) < P_.v_trap) {
            double trap_in = P_.t_trap - slow_;
            if (dt >= trap_in && t_ + trap_in <= T_) {
                vis_.sample(t_ + trap_in, pos(s1));
                done_ = true;
                return Termination::singularity_trap;
            }
            slow_ += dt;
        } else {
            slow_ = 0.0;
        }
        if (t_ + dt >= T_) {
            double fr = std::isfinite(dt) && dt > 0.0 ? (T_ - t_) / dt : 0.0;
            vis_.sample(T_, pos(s1 + fr * width));
            done_ = true;
            return Termination::horizon;
        }
        t_ += dt;
        if (!vis_.sample(t_, pos(s2))) {
            done_ = true;
            return Termination::stopped;
        }
        return Termination::horizon; // not final; done_ is false
    }
};

Termination BlownUpField::trace(const TorusPoint& seed, int dir, double T,
                                const IntegrationParams& params, double h,
                                OrbitVisitor& vis) const {
    BlowupTracer tracer(*this, seed, dir, T, params, h, vis);
    return tracer.run();
}

nlohmann::json BlownUpField::to_json() const {
    return {{"variant", "blownup"},
            {"a", a_},
            {"b", b_},
            {"schedule",
             {{"p0", {schedule_.p0.x, schedule_.p0.y}},
              {"times", schedule_.times},
              {"radii", schedule_.radii},
              {"order", schedule_.order},
              {"r_margin", schedule_.r_margin}}}};
}

// ------------------------------------------------------------ suspension

SuspensionField::SuspensionField(CircleMapPtr map) : map_(std::move(map)) {
    if (!map_) throw std::invalid_argument("SuspensionField: null circle map");
    // Arc length per unit of vertical travel is sqrt(1 + (s'(y) d)^2)
    // with d = F(xi) - xi; bound both factors by scanning, with margin.
    double rp_max = 0.0;
    for (int i = 0; i <= 2048; ++i)
        rp_max = std::max(rp_max, ramp_derivative(double(i) / 2048.0));
    double d_max = 0.0;
    for (int i = 0; i < 4096; ++i) {
        double xi = double(i) / 4096.0;
        d_max = std::max(d_max, std::fabs(map_->lift(xi) - xi));
    }
    shear_factor_ = std::sqrt(1.0 + 1.21 * (rp_max * d_max) * (rp_max * d_max));
}

double SuspensionField::ramp(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    double f = std::exp(-1.0 / y);
    double g = std::exp(-1.0 / (1.0 - y));
    return f / (f + g);
}

double SuspensionField::ramp_derivative(double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    double f = std::exp(-1.0 / y);
    double g = std::exp(-1.0 / (1.0 - y));
    double sum = f + g;
    return f * g * (1.0 / (y * y) + 1.0 / ((1.0 - y) * (1.0 - y))) / (sum * sum);
}

double SuspensionField::fiber_coordinate(double x, double y) const {
    double s = ramp(y);
    if (s <= 0.0) return frac(x);
    // invert xi -> (1-s)*xi + s*lift(xi), a strictly increasing lift
    double g0 = s * map_->lift(0.0);
    double target = x + std::ceil(g0 - x);
    if (target < g0) target += 1.0;
    if (target >= g0 + 1.0) target -= 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 54; ++i) {
        double mid = 0.5 * (lo + hi);
        double val = (1.0 - s) * mid + s * map_->lift(mid);
        if (val < target) lo = mid;
        else hi = mid;
    }
    return frac(0.5 * (lo + hi));
}

TorusVector SuspensionField::velocity(const TorusPoint& p) const {
    double xi = fiber_coordinate(p.x, p.y);
    double d = map_->lift(xi) - xi;
    return {ramp_derivative(p.y) * d, 1.0};
}

Termination SuspensionField::trace(const TorusPoint& seed, int dir, double T,
                                   const IntegrationParams& /*params*/, double h,
                                   OrbitVisitor& vis) const {
    if (!vis.sample(0.0, seed)) return Termination::stopped;
    if (T <= 0.0) return Termination::horizon;

    // Vertical speed is 1; a y-step of h/shear_factor_ keeps samples
    // within h of arc length along the orbit.
    const int m = std::max(4, static_cast<int>(std::ceil(shear_factor_ / h)));
    double xi = fiber_coordinate(seed.x, seed.y);
    double d = map_->lift(xi) - xi;
    double t = 0.0;
    double ycur = seed.y;

    auto point = [&](double y) { return wrap(xi + ramp(y) * d, y); };

    // Samples land on the fixed y-grid k/m on every revolution, so the
    // ramp values there can be tabulated once per trace instead of paying
    // two exponentials per sample. Only worth it for traces spanning
    // several revolutions; the short probes issued by return-map
    // refinement would be dominated by building the table.
    const bool tab = T >= 4.0;
    std::vector<double> rtab;
    if (tab) {
        rtab.resize(m + 1);
        for (int i = 0; i <= m; ++i) rtab[i] = ramp(double(i) / m);
    }
    auto ramp_at = [&](int idx) { return tab ? rtab[idx] : ramp(double(idx) / m); };

    if (dir >= 0) {
        int k = static_cast<int>(std::floor(ycur * m)) + 1;
        for (;;) {
            double ytgt = (k >= m) ? 1.0 : double(k) / m;
            double dt = ytgt - ycur;
            if (dt > 0.0) {
                if (t + dt >= T) {
                    vis.sample(T, point(ycur + (T - t)));
                    return Termination::horizon;
                }
                t += dt;
                ycur = ytgt;
                if (!vis.sample(t, wrap(xi + ramp_at(std::min(k, m)) * d, ycur)))
                    return Termination::stopped;
            } else {
                ycur = ytgt;
            }
            if (k >= m) {
                xi = frac(xi + d);
                d = map_->lift(xi) - xi;
                ycur = 0.0;
                k = 1;
            } else {
                ++k;
            }
        }
    }
    int k = static_cast<int>(std::ceil(ycur * m)) - 1;
    for (;;) {
        double ytgt = (k <= 0) ? 0.0 : double(k) / m;
        double dt = ycur - ytgt;
        if (dt > 0.0) {
            if (t + dt >= T) {
                vis.sample(T, point(ycur - (T - t)));
                return Termination::horizon;
            }
            t += dt;
            ycur = ytgt;
            if (!vis.sample(t, wrap(xi + ramp_at(std::max(k, 0)) * d, ycur)))
                return Termination::stopped;
        } else {
            ycur = ytgt;
        }
        if (k <= 0) {
            xi = invert_apply(*map_, xi);
            d = map_->lift(xi) - xi;
            ycur = 1.0;
            k = m - 1;
        } else {
            --k;
        }
    }
}

nlohmann::json SuspensionField::to_json() const {
    return {{"variant", "suspension"}, {"map", map_->to_json()}};
}

std::vector<SeedFamily> SuspensionField::seed_families(double spacing) const {
    (void)spacing; // the minimal set is not a curve; one section point per
                   // interval endpoint already meets any spacing request
    const auto* dj = dynamic_cast<const DenjoyMap*>(map_.get());
    if (!dj) return {};
    SeedFamily fam;
    fam.name = "denjoy-minimal-set";
    for (int k = -dj->truncation(); k <= dj->truncation(); ++k) {
        auto [a, b] = dj->interval(k);
        fam.samples.push_back(wrap(a, 0.0));
        fam.samples.push_back(wrap(b, 0.0));
    }
    // a generic endpoint away from the collapse coordinate of 0
    fam.representative = wrap(dj->interval(5).first, 0.0);
    return {fam};
}

FieldPtr suspend(CircleMapPtr map) { return std::make_shared<SuspensionField>(std::move(map)); }

// ----------------------------------------------------- holonomy surgery

HolonomyModifiedField::HolonomyModifiedField(double base_a, FlowBox box, int exponent)
    : base_a_(base_a), box_(box), exponent_(exponent) {
    if (!(base_a > 0.0)) throw std::invalid_argument("HolonomyModifiedField: base speed must be positive");
    if (exponent < 3 || exponent % 2 == 0)
        throw std::invalid_argument("HolonomyModifiedField: exponent must be odd and >= 3");
    if (!(box.half_length > 0.0) || box.half_length >= 0.45 || !(box.half_width > 0.0) ||
        box.half_width >= 0.45)
        throw std::invalid_argument("HolonomyModifiedField: box half-sizes must lie in (0, 0.45)");
}

double HolonomyModifiedField::blend(double u, double w0) const {
    double q = SuspensionField::ramp(0.5 * (u + 1.0));
    return (1.0 - q) * w0 + q * signed_pow(w0, exponent_);
}

double HolonomyModifiedField::blend_inverse(double u, double w) const {
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 90; ++i) {
        double mid = 0.5 * (lo + hi);
        if (blend(u, mid) < w) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

TorusVector HolonomyModifiedField::velocity(const TorusPoint& p) const {
    TorusVector delta = torus_delta(box_.center, p);
    double u = delta.dx / box_.half_length;
    double w = delta.dy / box_.half_width;
    if (std::fabs(u) >= 1.0 || std::fabs(w) >= 1.0) return {base_a_, 0.0};
    double w0 = blend_inverse(u, w);
    double dq_du = 0.5 * SuspensionField::ramp_derivative(0.5 * (u + 1.0));
    double dw_du = dq_du * (signed_pow(w0, exponent_) - w0);
    return {base_a_, box_.half_width * dw_du * base_a_ / box_.half_length};
}

Termination HolonomyModifiedField::trace(const TorusPoint& seed, int dir, double T,
                                         const IntegrationParams& /*params*/, double h,
                                         OrbitVisitor& vis) const {
    if (!vis.sample(0.0, seed)) return Termination::stopped;
    if (T <= 0.0) return Termination::horizon;

    const double hl = box_.half_length, hw = box_.half_width;
    const double dt = h / (base_a_ * (1.0 + 2.5 * hw / hl));
    double X = seed.x;
    double t = 0.0;
    double y_out = seed.y;
    bool inside = false;
    double w0 = 0.0;

    {
        TorusVector delta = torus_delta(box_.center, seed);
        if (std::fabs(delta.dx) < hl && std::fabs(delta.dy) < hw) {
            inside = true;
            w0 = blend_inverse(delta.dx / hl, delta.dy / hw);
        }
    }

    auto u_at = [&](double x_raw) {
        TorusPoint px = wrap(x_raw, 0.0);
        return torus_delta({box_.center.x, 0.0}, px).dx / hl;
    };

    for (;;) {
        bool last = t + dt >= T;
        double step = last ? T - t : dt;
        X += dir * base_a_ * step;
        t = last ? T : t + step;
        double u = u_at(X);
        double y;
        if (inside) {
            if (std::fabs(u) < 1.0) {
                y = box_.center.y + hw * blend(u, w0);
            } else {
                inside = false;
                y_out = box_.center.y + hw * blend(dir > 0 ? 1.0 : -1.0, w0);
                y = y_out;
            }
        } else {
            y = y_out;
            if (std::fabs(u) < 1.0) {
                double w_ent = torus_delta({0.0, box_.center.y}, {0.0, y_out}).dy / hw;
                if (std::fabs(w_ent) < 1.0) {
                    inside = true;
                    w0 = blend_inverse(u, w_ent);
                    y = box_.center.y + hw * blend(u, w0);
                }
            }
        }
        if (!vis.sample(t, wrap(X, y))) return Termination::stopped;
        if (last) return Termination::horizon;
    }
}

nlohmann::json HolonomyModifiedField::to_json() const {
    return {{"variant", "holonomy-modified"},
            {"a", base_a_},
            {"box",
             {{"center", {box_.center.x, box_.center.y}},
              {"half_length", box_.half_length},
              {"half_width", box_.half_width}}},
            {"exponent", exponent_}};
}

// --------------------------------------------------------------- section

TransversalCircle::TransversalCircle(Axis axis_in, double offset_in, const VectorField& field)
    : axis(axis_in), offset(frac(offset_in)) {
    const int samples = 2048;
    for (int j = 0; j < samples; ++j) {
        TorusPoint p = point_at(double(j) / samples);
        TorusVector v = field.velocity(p);
        double normal = axis == Axis::vertical ? v.dx : v.dy;
        if (std::fabs(normal) < 1e-6)
            throw std::invalid_argument("TransversalCircle: field is not uniformly transversal");
    }
}

double TransversalCircle::coordinate(const TorusPoint& p) const {
    return axis == Axis::vertical ? p.y : p.x;
}

TorusPoint TransversalCircle::point_at(double coord) const {
    return axis == Axis::vertical ? wrap(offset, coord) : wrap(coord, offset);
}

double TransversalCircle::signed_normal(const TorusPoint& p) const {
    double d = axis == Axis::vertical ? p.x - offset : p.y - offset;
    d -= std::round(d);
    return d;
}

PoincareReturn poincare_return(const VectorField& field, const TransversalCircle& circle,
                               const TorusPoint& p, int dir, const IntegrationParams& params) {
    struct CrossingVisitor final : OrbitVisitor {
        const TransversalCircle* circle = nullptr;
        bool armed = false, found = false, has_prev = false;
        double prev_t = 0.0, prev_sn = 0.0;
        TorusPoint prev_p;
        double t1 = 0.0, t2 = 0.0, sn1 = 0.0;
        TorusPoint p1;

        bool sample(double t, const TorusPoint& q) override {
            double sn = circle->signed_normal(q);
            if (has_prev) {
                if (!armed) {
                    if (std::fabs(sn) > 0.02) armed = true;
                } else if (((prev_sn < 0.0 && sn >= 0.0) || (prev_sn > 0.0 && sn <= 0.0)) &&
                           std::fabs(sn - prev_sn) < 0.25) {
                    found = true;
                    t1 = prev_t;
                    t2 = t;
                    sn1 = prev_sn;
                    p1 = prev_p;
                    return false;
                }
            }
            prev_t = t;
            prev_p = q;
            prev_sn = sn;
            has_prev = true;
            return true;
        }
    };

    CrossingVisitor cv;
    cv.circle = &circle;
    field.trace(p, dir, params.return_horizon, params, 1.0 / 256, cv);
    if (!cv.found) throw NoReturnError("no return to the section within the horizon");

    // bisect the crossing inside the bracketing sample interval
    double lo = 0.0, hi = cv.t2 - cv.t1;
    double dmid = 0.5 * hi;
    TorusPoint best = cv.p1;
    for (int i = 0; i < 80; ++i) {
        dmid = 0.5 * (lo + hi);
        TorusPoint pm = flow_at(field, cv.p1, dir, dmid, params);
        double g = circle.signed_normal(pm);
        best = pm;
        if (std::fabs(g) < 1e-12) break;
        if ((g < 0.0) == (cv.sn1 < 0.0)) lo = dmid;
        else hi = dmid;
    }
    return {circle.point_at(circle.coordinate(best)), cv.t1 + dmid};
}

// ------------------------------------------------------------------ json

FieldPtr field_from_json(const nlohmann::json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "linear")
        return std::make_shared<LinearField>(j.at("a").get<double>(), j.at("b").get<double>());
    if (variant == "hamiltonian-band") return std::make_shared<HamiltonianBandField>();
    if (variant == "limit-cycle-band")
        return std::make_shared<LimitCycleBandField>(j.at("lambda").get<double>());
    if (variant == "blownup") {
        double a = j.at("a").get<double>();
        double b = j.at("b").get<double>();
        const auto& js = j.at("schedule");
        BlowUpSchedule sched;
        auto p0 = js.at("p0");
        sched.p0 = wrap(p0.at(0).get<double>(), p0.at(1).get<double>());
        sched.slope_a = a;
        sched.slope_b = b;
        sched.times = js.at("times").get<std::vector<double>>();
        sched.radii = js.at("radii").get<std::vector<double>>();
        sched.order = js.at("order").get<int>();
        sched.r_margin = js.at("r_margin").get<double>();
        for (double t : sched.times)
            sched.points.push_back(wrap(sched.p0.x + a * t, sched.p0.y + b * t));
        return std::make_shared<BlownUpField>(a, b, std::move(sched));
    }
    if (variant == "suspension") return suspend(circle_map_from_json(j.at("map")));
    if (variant == "holonomy-modified") {
        const auto& jb = j.at("box");
        FlowBox box;
        auto c = jb.at("center");
        box.center = wrap(c.at(0).get<double>(), c.at(1).get<double>());
        box.half_length = jb.at("half_length").get<double>();
        box.half_width = jb.at("half_width").get<double>();
        return std::make_shared<HolonomyModifiedField>(j.at("a").get<double>(), box,
                                                       j.at("exponent").get<int>());
    }
    throw std::invalid_argument("unknown field variant: " + variant);
}

} // namespace torusflow
