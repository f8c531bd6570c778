#include "torusflow/constructions.hpp"

#include <algorithm>
#include <cmath>

namespace torusflow {

namespace {

double frac(double v) {
    double f = v - std::floor(v);
    return f >= 1.0 ? f - 1.0 : f;
}

double circ(double v) { return std::fabs(v - std::round(v)); }

// denominators of the continued-fraction convergents of r, ascending
std::vector<double> cf_denominators(double r, double q_max) {
    std::vector<double> qs;
    double x = frac(std::fabs(r));
    if (x < 1e-15 || x > 1.0 - 1e-15) return qs;
    double v = x;
    double q_prev = 0.0, q_cur = 1.0; // q_0 = 1 for a_0 = 0
    for (int iter = 0; iter < 60; ++iter) {
        double a = std::floor(1.0 / v);
        double q_next = a * q_cur + q_prev;
        qs.push_back(q_next);
        if (q_next > q_max) break;
        double rem = 1.0 / v - a;
        if (rem < 1e-14) break;
        v = rem;
        q_prev = q_cur;
        q_cur = q_next;
    }
    return qs;
}

} // namespace

BlowUpSchedule make_schedule(double slope_a, double slope_b, const TorusPoint& p0, int order,
                             double r_margin) {
    if (order < 3) throw ConstructionError("make_schedule: order must be at least 3");
    if (!(r_margin > 0.0) || r_margin > 0.2)
        throw ConstructionError("make_schedule: r_margin must lie in (0, 0.2]");
    if (slope_a == 0.0)
        throw ConstructionError("make_schedule: horizontal slope component must be nonzero");

    const double ratio = slope_b / slope_a;
    auto qs = cf_denominators(ratio, 1e13);

    BlowUpSchedule s;
    s.p0 = wrap(p0);
    s.slope_a = slope_a;
    s.slope_b = slope_b;
    s.order = order;
    s.r_margin = r_margin;
    s.times.assign(2 * order + 1, 0.0);
    s.points.assign(2 * order + 1, s.p0);
    s.radii.assign(2 * order + 1, 0.0);

    // pick return times among the convergent denominators: the orbit
    // after time q/|a| has moved by an integer in x and by q*ratio in y
    double q_prev = 0.0;
    for (int i = 1; i <= order; ++i) {
        double target = r_margin * std::pow(2.0, -i);
        double chosen = 0.0;
        for (double q : qs) {
            if (q > q_prev && circ(q * ratio) <= target) {
                chosen = q;
                break;
            }
        }
        if (chosen == 0.0)
            throw ConstructionError(
                "make_schedule: no return time reaches the requested accuracy "
                "(slope ratio too close to rational for this order)");
        q_prev = chosen;
        double t = chosen / std::fabs(slope_a);
        s.times[order + i] = t;
        s.times[order - i] = -t;
        s.points[order + i] = wrap(s.p0.x + t * slope_a, s.p0.y + t * slope_b);
        s.points[order - i] = wrap(s.p0.x - t * slope_a, s.p0.y - t * slope_b);
    }

    for (int i = -order; i <= order; ++i) {
        if (i == 0) continue;
        double gap = 1.0;
        for (int j = -order; j <= order; ++j) {
            if (j == i) continue;
            gap = std::min(gap, torus_distance(s.point(i), s.point(j)));
        }
        double r = std::min(gap, r_margin * std::pow(2.0, -std::abs(i))) / 4.0;
        if (!(r > 0.0))
            throw ConstructionError("make_schedule: coincident pinned points (r_margin too large)");
        s.radii[order + i] = r;
    }

    for (int i = -order; i <= order; ++i) {
        if (i == 0) continue;
        for (int j = i + 1; j <= order; ++j) {
            if (j == 0) continue;
            if (torus_distance(s.point(i), s.point(j)) <= s.radius(i) + s.radius(j))
                throw ConstructionError("make_schedule: bump supports overlap (r_margin too large)");
        }
    }
    return s;
}

double damping_factor(const BlowUpSchedule& schedule, const TorusPoint& p) {
    double prod = 1.0;
    for (int i = -schedule.order; i <= schedule.order; ++i) {
        if (i == 0) continue;
        double r = schedule.radius(i);
        double d = torus_distance(p, schedule.point(i));
        if (d < r) {
            double ss = (d / r) * (d / r);
            prod *= 1.0 - std::exp(1.0 - 1.0 / (1.0 - ss));
        }
    }
    return prod;
}

FieldPtr build_blowup(double slope_a, double slope_b, const TorusPoint& p0, int order,
                      double r_margin) {
    BlowUpSchedule sched = make_schedule(slope_a, slope_b, p0, order, r_margin);
    return std::make_shared<BlownUpField>(slope_a, slope_b, std::move(sched));
}

CircleMapPtr build_denjoy(double rho, int n, double weight_scale) {
    if (n < 50) throw ConstructionError("build_denjoy: truncation order must be at least 50");
    if (!(weight_scale > 0.0))
        throw ConstructionError("build_denjoy: weight scale must be positive");
    std::vector<double> weights;
    weights.reserve(2 * n + 1);
    // flat-top profile: the central ~9 intervals get near-equal lengths
    // and the rest fall off very steeply. After normalization the widest
    // gaps of the complementary Cantor set are then comparable to each
    // other while every remaining gap is far below them, which keeps the
    // invariant set nowhere dense at moderate grid resolutions instead
    // of hiding all its gaps below one cell.
    for (int k = -n; k <= n; ++k) {
        double r = std::abs(double(k)) / 4.5;
        weights.push_back(weight_scale / (1.0 + std::pow(r, 40.0)));
    }
    return std::make_shared<DenjoyMap>(rho, std::move(weights));
}

FieldPtr apply_x3_holonomy(const FieldPtr& base, const FlowBox& box) {
    const auto* lin = dynamic_cast<const LinearField*>(base.get());
    if (!lin || lin->b() != 0.0 || !(lin->a() > 0.0))
        throw ConstructionError(
            "apply_x3_holonomy: base must be a horizontal linear field with positive speed");
    try {
        return std::make_shared<HolonomyModifiedField>(lin->a(), box, 3);
    } catch (const std::invalid_argument& e) {
        throw ConstructionError(std::string("apply_x3_holonomy: ") + e.what());
    }
}

ConjugacyEstimate conjugate_to_rotation(const CircleMap& map, long iterates, int grid) {
    if (iterates < 100)
        throw std::invalid_argument("conjugate_to_rotation: need at least 100 iterates");
    if (grid < 8) throw std::invalid_argument("conjugate_to_rotation: need at least 8 grid points");

    const long K = iterates;
    const int m = grid;
    ConjugacyEstimate out;
    out.h.assign(m, 0.0);

    double rho = rotation_number(map, K).value;

    // rational candidate: a convergent p/q of the estimate whose quality
    // beats the estimator's error band and whose denominator is small
    // enough that an irrational could not fake it at this budget. The
    // candidate is only accepted if f^q actually has a periodic point.
    const double q_limit = std::max(1.0, std::cbrt(double(K)));
    long rat_p = 0, rat_q = 0;
    {
        double v = rho;
        double p_prev = 1, q_prev = 0, p_cur = 0, q_cur = 1; // convergent 0/1
        if (std::fabs(rho) <= 2.0 / K || std::fabs(rho - 1.0) <= 2.0 / K) {
            rat_p = 0;
            rat_q = 1;
        }
        for (int iter = 0; iter < 40 && rat_q == 0 && v > 1e-12; ++iter) {
            double a = std::floor(1.0 / v);
            double p_next = a * p_cur + p_prev;
            double q_next = a * q_cur + q_prev;
            if (q_next > q_limit) break;
            if (std::fabs(rho - p_next / q_next) <= 2.0 / K) {
                rat_p = static_cast<long>(p_next);
                rat_q = static_cast<long>(q_next);
                break;
            }
            v = 1.0 / v - a;
            p_prev = p_cur;
            q_prev = q_cur;
            p_cur = p_next;
            q_cur = q_next;
        }
    }

    bool did_rational = false;
    if (rat_q > 0) {
        const long p = rat_p, q = rat_q;

        auto lift_q = [&](double x) {
            double v = x;
            for (long j = 0; j < q; ++j) v = map.lift(v);
            return v;
        };
        auto gq = [&](double x) { return lift_q(x) - x - double(p); };

        // locate a periodic point: sign change of gq, else its minimum
        const int scan = 4096;
        double x_star = 0.0, best = std::fabs(gq(0.0));
        double g_prev = gq(0.0);
        bool bracketed = false;
        for (int sidx = 1; sidx <= scan; ++sidx) {
            double x = double(sidx) / scan;
            double g = gq(x);
            if (std::fabs(g) < best) {
                best = std::fabs(g);
                x_star = x;
            }
            if ((g_prev <= 0.0 && g >= 0.0) || (g_prev >= 0.0 && g <= 0.0)) {
                double lo = double(sidx - 1) / scan, hi = x;
                double glo = g_prev;
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double gm = gq(mid);
                    if ((gm < 0.0) == (glo < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                    }
                }
                x_star = 0.5 * (lo + hi);
                bracketed = true;
                break;
            }
            g_prev = g;
        }

        did_rational = bracketed || best <= 1e-9;
        if (did_rational) {
        out.rational = true;
        out.period = q;
        out.rho = double(p) / double(q);

        // orbit nodes and their rotation images
        std::vector<std::pair<double, double>> nodes;
        double th = frac(x_star);
        for (long j = 0; j < q; ++j) {
            nodes.push_back({th, frac(x_star + double(j) * double(p) / double(q))});
            th = map.apply(th);
        }
        std::sort(nodes.begin(), nodes.end());
        // drop coincident orbit points (orbit of smaller true period)
        nodes.erase(std::unique(nodes.begin(), nodes.end(),
                                [](const auto& a, const auto& b) {
                                    return std::fabs(a.first - b.first) < 1e-12;
                                }),
                    nodes.end());
        const int nq = static_cast<int>(nodes.size());
        // lift the assigned values: they wrap past 1 exactly once along
        // the sorted nodes; clamp any residual inversions flat
        std::vector<double> theta(nq), val(nq);
        for (int j = 0; j < nq; ++j) {
            theta[j] = nodes[j].first;
            val[j] = nodes[j].second + (j > 0 && nodes[j].second < nodes[0].second ? 1.0 : 0.0);
        }
        for (int j = 1; j < nq; ++j) val[j] = std::max(val[j], val[j - 1]);

        auto h_eval = [&](double x) {
            x = frac(x);
            if (nq == 1) return frac(x - theta[0] + val[0]);
            int j = static_cast<int>(std::upper_bound(theta.begin(), theta.end(), x) -
                                     theta.begin()) - 1;
            double t0, t1, v0, v1;
            if (j < 0) { // before the first node: wrap the last one back
                t0 = theta[nq - 1] - 1.0;
                v0 = val[nq - 1] - 1.0;
                t1 = theta[0];
                v1 = val[0];
            } else if (j == nq - 1) {
                t0 = theta[nq - 1];
                v0 = val[nq - 1];
                t1 = theta[0] + 1.0;
                v1 = val[0] + 1.0;
            } else {
                t0 = theta[j];
                v0 = val[j];
                t1 = theta[j + 1];
                v1 = val[j + 1];
            }
            return frac(v0 + (x - t0) * (v1 - v0) / (t1 - t0));
        };

        double res = 0.0;
        for (int j = 0; j < m; ++j) {
            double x = double(j) / m;
            out.h[j] = h_eval(x);
            double d = h_eval(map.apply(x)) - out.h[j] - out.rho;
            res = std::max(res, circ(d));
        }
        out.residual = res;
        }
    }
    if (!did_rational) {
        out.rho = rho;
        std::vector<double> hfx(m);
        for (int j = 0; j < m; ++j) {
            double x = double(j) / m;
            double u = x, fx = 0.0;
            long below_x = 0, below_fx = 0;
            for (long k = 1; k <= K; ++k) {
                u = map.apply(u);
                if (k == 1) fx = u;
                if (k <= K - 1 && u < x) ++below_x;
                if (u < fx) ++below_fx;
            }
            out.h[j] = double(below_x) / double(K);
            hfx[j] = double(below_fx) / double(K);
        }
        double res = 0.0;
        for (int j = 0; j < m; ++j) res = std::max(res, circ(hfx[j] - out.h[j] - rho));
        out.residual = res;
    }

    // widest stretch over which h fails to grow beyond estimator noise
    {
        double thr = out.rational ? 1e-9 : 3.0 / double(K);
        std::vector<double> run_max(m);
        double mx = -1.0;
        for (int j = 0; j < m; ++j) {
            mx = std::max(mx, out.h[j]);
            run_max[j] = mx;
        }
        double defect = 0.0;
        int j2 = 0;
        for (int j1 = 0; j1 < m; ++j1) {
            if (j2 < j1) j2 = j1;
            while (j2 + 1 < m && run_max[j2 + 1] - out.h[j1] <= thr) ++j2;
            defect = std::max(defect, double(j2 - j1) / m);
        }
        out.injectivity_defect = defect;
    }
    return out;
}

} // namespace torusflow
