#include "torusflow/suite.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>

#include "torusflow/certify.hpp"
#include "torusflow/classify.hpp"
#include "torusflow/constructions.hpp"
#include "torusflow/presets.hpp"

namespace torusflow {

namespace {

const double kPhi = 0.5 * (std::sqrt(5.0) - 1.0);
const double kTwoPi = 2.0 * 3.14159265358979323846;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

const std::vector<std::string>& corpus_names() {
    static const std::vector<std::string> names = {
        "linear-irrational",        "linear-rational",
        "hamiltonian-band",         "limit-cycle-band",
        "blowup-phi-N8",            "rotation-half-suspension",
        "rotation-phi-suspension",  "denjoy-suspension",
    };
    return names;
}

/// Cached per-preset artifacts so criteria sharing a preset do not
/// re-run the decomposition; each criterion still accounts for the
/// decomposition time of every preset it relies on.
struct CorpusRun {
    FieldPtr field;
    GridPartition partition;
    ClassifyParams params;
    double decompose_seconds = 0.0;
    std::optional<Certificate> nonwandering;
};

class Corpus {
public:
    explicit Corpus(const SuiteConfig& cfg) : cfg_(cfg) {}

    CorpusRun& at(const std::string& name, int resolution = 0) {
        int n = resolution > 0 ? resolution : cfg_.resolution;
        std::string key = name + "@" + std::to_string(n);
        auto it = runs_.find(key);
        if (it != runs_.end()) return it->second;
        CorpusRun run;
        run.field = make_preset(name);
        run.params.resolution = n;
        run.params.horizon = cfg_.horizon;
        double t0 = now_seconds();
        run.partition = decompose(*run.field, n, run.params);
        run.decompose_seconds = now_seconds() - t0;
        return runs_.emplace(key, std::move(run)).first->second;
    }

    const Certificate& nonwandering(const std::string& name) {
        CorpusRun& run = at(name);
        if (!run.nonwandering)
            run.nonwandering = certify_nonwandering(run.partition, run.params);
        return *run.nonwandering;
    }

private:
    SuiteConfig cfg_;
    std::map<std::string, CorpusRun> runs_;
};

CriterionResult timed(int id, const std::string& name,
                      const std::function<std::pair<bool, nlohmann::json>()>& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    double t0 = now_seconds();
    try {
        auto [ok, details] = body();
        r.passed = ok;
        r.details = std::move(details);
    } catch (const std::exception& e) {
        r.passed = false;
        r.details = {{"error", e.what()}};
    }
    r.seconds = now_seconds() - t0;
    return r;
}

// ------------------------------------------------------------ criteria

CriterionResult rare_species_density(Corpus& corpus) {
    return timed(1, "rare-species-density", [&] {
        CorpusRun& run = corpus.at("blowup-phi-N8");
        Certificate rs = rare_species_check(run.partition, run.params);
        double p_cover = rs.evidence.count("p_closure_cover") ? rs.evidence.at("p_closure_cover") : 0.0;
        double ld_cover = rs.evidence.count("ld_cover") ? rs.evidence.at("ld_cover") : 0.0;
        bool runtime_ok = run.decompose_seconds <= 60.0;
        bool ok = p_cover >= 0.95 && ld_cover >= 0.95 && runtime_ok;
        return std::make_pair(ok, nlohmann::json{{"p_closure_cover", p_cover},
                                                 {"ld_cover", ld_cover},
                                                 {"runtime_ok", runtime_ok}});
    });
}

CriterionResult p_characterization(Corpus& corpus) {
    return timed(2, "P-characterization", [&] {
        CorpusRun& run = corpus.at("blowup-phi-N8");
        double t0 = now_seconds();
        Certificate pc = certify_P_characterization(*run.field, run.partition,
                                                    corpus.nonwandering("blowup-phi-N8"),
                                                    run.params);
        double check_seconds = now_seconds() - t0;
        double label_no_limits = pc.evidence.count("label_without_trapped_limits")
                                     ? pc.evidence.at("label_without_trapped_limits")
                                     : -1.0;
        double limits_no_label = pc.evidence.count("trapped_limits_without_label")
                                     ? pc.evidence.at("trapped_limits_without_label")
                                     : -1.0;
        bool runtime_ok = run.decompose_seconds + check_seconds <= 90.0;
        bool ok = pc.passed() && label_no_limits == 0.0 && limits_no_label == 0.0 && runtime_ok;
        return std::make_pair(ok,
                              nlohmann::json{{"label_without_trapped_limits", label_no_limits},
                                             {"trapped_limits_without_label", limits_no_label},
                                             {"runtime_ok", runtime_ok}});
    });
}

CriterionResult transitivity_equivalence(Corpus& corpus) {
    return timed(3, "transitivity-equivalence", [&] {
        const std::map<std::string, bool> expected = {
            {"linear-irrational", true},       {"blowup-phi-N8", true},
            {"rotation-phi-suspension", true}, {"hamiltonian-band", false},
            {"rotation-half-suspension", false}, {"limit-cycle-band", false},
            {"linear-rational", false},        {"denjoy-suspension", false},
        };
        int disagreements = 0;
        int wrong_truth = 0;
        double corpus_seconds = 0.0;
        nlohmann::json per;
        for (const std::string& name : corpus_names()) {
            CorpusRun& run = corpus.at(name);
            corpus_seconds += run.decompose_seconds;
            double t0 = now_seconds();
            Certificate tr = certify_transitive(*run.field, run.partition, run.params);
            corpus_seconds += now_seconds() - t0;
            double c1 = tr.evidence.at("c1");
            double c2 = tr.evidence.at("c2");
            double c4 = tr.evidence.at("c4");
            if (c1 != c2 || c2 != c4) ++disagreements;
            bool truth = c1 != 0.0;
            if (truth != expected.at(name)) ++wrong_truth;
            per[name] = {{"c1", c1}, {"c2", c2}, {"c4", c4}, {"expected", expected.at(name)}};
        }
        bool runtime_ok = corpus_seconds <= 300.0;
        bool ok = disagreements == 0 && wrong_truth == 0 && runtime_ok;
        return std::make_pair(ok, nlohmann::json{{"disagreements", disagreements},
                                                 {"wrong_truth_values", wrong_truth},
                                                 {"runtime_ok", runtime_ok},
                                                 {"presets", per}});
    });
}

CriterionResult no_exceptional(Corpus& corpus) {
    return timed(4, "no-exceptional-under-nonwandering", [&] {
        int violations = 0;
        nlohmann::json per;
        for (const std::string& name : corpus_names()) {
            CorpusRun& run = corpus.at(name);
            const Certificate& nw = corpus.nonwandering(name);
            int suspects = run.partition.count(OrbitClass::ExceptionalSuspect);
            if (nw.passed() && suspects != 0) ++violations;
            per[name] = {{"nonwandering", nw.passed()}, {"suspects", suspects}};
        }
        CorpusRun& denjoy = corpus.at("denjoy-suspension");
        bool denjoy_ok = !corpus.nonwandering("denjoy-suspension").passed() &&
                         denjoy.partition.count(OrbitClass::ExceptionalSuspect) >= 1;
        bool ok = violations == 0 && denjoy_ok;
        return std::make_pair(
            ok, nlohmann::json{{"violations", violations}, {"denjoy_ok", denjoy_ok}, {"presets", per}});
    });
}

CriterionResult limit_cycle_boundary(Corpus& corpus, const SuiteConfig& cfg) {
    return timed(5, "limit-cycles-in-boundary-of-intP", [&] {
        bool ok = true;
        nlohmann::json per;
        for (int n : {cfg.resolution, 2 * cfg.resolution}) {
            CorpusRun& run = corpus.at("limit-cycle-band", n);
            auto cycles = limit_cycles(*run.field, run.partition, run.params);
            bool all_boundary = !cycles.empty();
            for (const LimitCycleEstimate& c : cycles) all_boundary = all_boundary && c.boundary_of_intP;
            if (cycles.size() != 2 || !all_boundary) ok = false;
            per["n" + std::to_string(n)] = {{"cycles", cycles.size()},
                                            {"all_boundary_of_intP", all_boundary}};
        }
        return std::make_pair(ok, per);
    });
}

CriterionResult per_open_and_shape(Corpus& corpus) {
    return timed(6, "per-open-and-component-shape", [&] {
        CorpusRun& run = corpus.at("hamiltonian-band");
        const Certificate& nw = corpus.nonwandering("hamiltonian-band");
        Certificate po = certify_per_open(run.partition, nw);
        Certificate shape = per_component_shape(run.partition, nw, run.params);
        double components =
            shape.evidence.count("components") ? shape.evidence.at("components") : -1.0;
        bool annuli = components == 2.0;
        for (int i = 0; i < static_cast<int>(components); ++i) {
            std::string key = "component_" + std::to_string(i) + "_chi";
            annuli = annuli && shape.evidence.count(key) && shape.evidence.at(key) == 0.0;
        }
        bool ok = po.passed() && shape.passed() && annuli;
        return std::make_pair(ok, nlohmann::json{{"per_open", po.passed()},
                                                 {"shape", shape.passed()},
                                                 {"components", components},
                                                 {"annuli_chi_zero", annuli}});
    });
}

CriterionResult maier_bound(Corpus& corpus) {
    return timed(7, "maier-bound", [&] {
        bool ok = true;
        nlohmann::json per;
        for (const std::string& name : corpus_names()) {
            CorpusRun& run = corpus.at(name);
            int count = static_cast<int>(quasi_minimal_sets(run.partition, run.params).size());
            if (count > 1) ok = false;
            if (name == "linear-irrational" && count != 1) ok = false;
            if (name == "denjoy-suspension" && count != 1) ok = false;
            if (name == "hamiltonian-band" && count != 0) ok = false;
            per[name] = count;
        }
        return std::make_pair(ok, per);
    });
}

/// Smooth circle diffeomorphism used to conjugate the rigid rotation;
/// strictly increasing with g(x+1) = g(x) + 1.
double smooth_diffeo(double x) { return x + 0.15 * std::sin(kTwoPi * x) / kTwoPi; }

double smooth_diffeo_inverse(double y) {
    double lo = y - 0.5, hi = y + 0.5;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        if (smooth_diffeo(mid) < y) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

CriterionResult conjugacy_to_rotation(Corpus&) {
    return timed(8, "conjugacy-to-rotation", [&] {
        const int m = 512;
        const long iterates = 100000;
        // smooth conjugate of the golden rotation, tabulated as a
        // monotone lift: f = g . R_phi . g^{-1}
        std::vector<double> values(m);
        for (int i = 0; i < m; ++i)
            values[i] = smooth_diffeo(smooth_diffeo_inverse(double(i) / m) + kPhi);
        MonotoneMap monotone(values);
        ConjugacyEstimate smooth = conjugate_to_rotation(monotone, iterates, m);

        CircleMapPtr denjoy = build_denjoy(kPhi, 60, 30.0);
        ConjugacyEstimate wild = conjugate_to_rotation(*denjoy, iterates, m);

        bool ok = smooth.residual < 1e-2 && wild.injectivity_defect > 0.0;
        return std::make_pair(ok, nlohmann::json{{"monotone_residual", smooth.residual},
                                                 {"denjoy_injectivity_defect",
                                                  wild.injectivity_defect}});
    });
}

CriterionResult rotation_number_convergence(Corpus&) {
    return timed(9, "rotation-number-convergence", [&] {
        bool ok = true;
        nlohmann::json per;
        const double rhos[] = {kPhi, 1.0 / 7.0, 0.123456789};
        for (double rho : rhos) {
            RotationMap map(rho);
            for (long K : {1000L, 10000L, 100000L}) {
                double est = rotation_number(map, K).value;
                double err = std::fabs(est - rho);
                err = std::min(err, 1.0 - err);
                if (!(err <= 2.0 / double(K))) ok = false;
            }
            per.push_back(rho);
        }
        return std::make_pair(ok, nlohmann::json{{"rotations", per}, {"bound", "2/K"}});
    });
}

CriterionResult x3_holonomy(Corpus&) {
    return timed(10, "x3-holonomy-surgery", [&] {
        FieldPtr field = make_preset("x3-box-demo");
        const auto* mod = dynamic_cast<const HolonomyModifiedField*>(field.get());
        if (!mod) return std::make_pair(false, nlohmann::json{{"error", "unexpected field type"}});
        const FlowBox& box = mod->box();
        TransversalCircle exit(TransversalCircle::Axis::vertical,
                               box.center.x + box.half_length, *field);
        IntegrationParams ip;
        double worst = 0.0;
        for (int k = 0; k <= 40; ++k) {
            double w0 = -1.0 + 2.0 * k / 40.0;
            TorusPoint entry = wrap(box.center.x - box.half_length,
                                    box.center.y + w0 * box.half_width);
            PoincareReturn ret = poincare_return(*field, exit, entry, +1, ip);
            double dy = ret.point.y - box.center.y;
            dy -= std::round(dy);
            double w1 = dy / box.half_width;
            worst = std::max(worst, std::fabs(w1 - w0 * w0 * w0));
        }
        bool ok = worst <= 1e-4;
        return std::make_pair(ok, nlohmann::json{{"max_deviation", worst}, {"points", 41}});
    });
}

/// Plain flood fill, independent of the union-find implementation the
/// library uses.
std::vector<std::vector<int>> bfs_components(const CellSet& s) {
    int n = s.resolution();
    std::vector<std::uint8_t> seen(std::size_t(n) * n, 0);
    std::vector<std::vector<int>> out;
    for (int start = 0; start < n * n; ++start) {
        if (!s.contains(start) || seen[start]) continue;
        std::vector<int> comp;
        std::queue<int> q;
        q.push(start);
        seen[start] = 1;
        while (!q.empty()) {
            int c = q.front();
            q.pop();
            comp.push_back(c);
            int cx = c % n, cy = c / n;
            const int nbr[4] = {cy * n + (cx + 1) % n, cy * n + (cx + n - 1) % n,
                                ((cy + 1) % n) * n + cx, ((cy + n - 1) % n) * n + cx};
            for (int b : nbr) {
                if (s.contains(b) && !seen[b]) {
                    seen[b] = 1;
                    q.push(b);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

CriterionResult oracle_equivalence(Corpus&) {
    return timed(11, "component-oracle-equivalence", [&] {
        std::mt19937 rng(0);
        int mismatches = 0;
        for (int trial = 0; trial < 200; ++trial) {
            int n = 8 + int(rng() % 25); // 8..32
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            double density = 0.2 + 0.6 * unif(rng);
            CellSet s(n);
            for (int i = 0; i < n * n; ++i)
                if (unif(rng) < density) s.insert(i);

            auto lib = connected_components(s);
            auto ora = bfs_components(s);
            bool same = lib.size() == ora.size();
            if (same) {
                for (std::size_t i = 0; i < lib.size(); ++i) {
                    if (lib[i].members() != ora[i]) {
                        same = false;
                        break;
                    }
                }
            }
            bool cc_lib = is_coconnected(s);
            bool cc_ora = bfs_components(s.complement()).size() <= 1;
            if (!same || cc_lib != cc_ora) ++mismatches;
        }
        return std::make_pair(mismatches == 0,
                              nlohmann::json{{"trials", 200}, {"mismatches", mismatches}});
    });
}

CriterionResult determinism(const SuiteConfig& cfg) {
    return timed(12, "report-determinism", [&] {
        SuiteConfig reduced;
        reduced.resolution = std::min(16, cfg.resolution);
        reduced.horizon = std::min(300.0, cfg.horizon);
        reduced.include_determinism = false;
        std::string a = run_acceptance_suite(reduced).to_json().dump();
        std::string b = run_acceptance_suite(reduced).to_json().dump();
        bool ok = a == b;
        return std::make_pair(ok, nlohmann::json{{"reduced_resolution", reduced.resolution},
                                                 {"byte_identical", ok}});
    });
}

} // namespace

bool SuiteReport::all_passed() const {
    for (const CriterionResult& c : criteria)
        if (!c.passed) return false;
    return true;
}

nlohmann::json SuiteReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const CriterionResult& c : criteria)
        rows.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed},
                        {"details", c.details}});
    return {{"scope", {{"n", config.resolution}, {"T", config.horizon}}},
            {"criteria", rows},
            {"all_passed", all_passed()}};
}

SuiteReport run_acceptance_suite(const SuiteConfig& config) {
    SuiteReport report;
    report.config = config;
    Corpus corpus(config);
    report.criteria.push_back(rare_species_density(corpus));
    report.criteria.push_back(p_characterization(corpus));
    report.criteria.push_back(transitivity_equivalence(corpus));
    report.criteria.push_back(no_exceptional(corpus));
    report.criteria.push_back(limit_cycle_boundary(corpus, config));
    report.criteria.push_back(per_open_and_shape(corpus));
    report.criteria.push_back(maier_bound(corpus));
    report.criteria.push_back(conjugacy_to_rotation(corpus));
    report.criteria.push_back(rotation_number_convergence(corpus));
    report.criteria.push_back(x3_holonomy(corpus));
    report.criteria.push_back(oracle_equivalence(corpus));
    if (config.include_determinism) report.criteria.push_back(determinism(config));
    return report;
}

} // namespace torusflow
