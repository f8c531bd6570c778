// Command-line front end: classify | certify | portrait | suite | construct.
// Exit codes: 0 ok, 1 certificate/criterion failure, 2 config error,
// 3 construction failure, 4 I/O error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "torusflow/certify.hpp"
#include "torusflow/classify.hpp"
#include "torusflow/constructions.hpp"
#include "torusflow/portrait.hpp"
#include "torusflow/presets.hpp"
#include "torusflow/suite.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCertificateFailure = 1;
constexpr int kConfigError = 2;
constexpr int kConstructionFailure = 3;
constexpr int kIoError = 4;

struct Options {
    std::string flow;
    std::string partition_file; // portrait only: reuse an existing partition
    int resolution = 64;
    double horizon = 2000.0;
    std::string out = ".";
    int workers = 0;
    unsigned seed = 0; // reserved: the pipeline is deterministic
    double tol_per = 1e-6;
    double tol_sing = 1e-8;
    double delta_cover = 0.01;
    double delta_closure = 0.05;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

torusflow::ClassifyParams params_from(const Options& opt) {
    if (opt.resolution < 16) throw ConfigError("resolution must be at least 16");
    if (!(opt.horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(opt.tol_per > 0.0) || !(opt.tol_sing > 0.0) || !(opt.delta_cover > 0.0) ||
        !(opt.delta_closure > 0.0))
        throw ConfigError("tolerance overrides must be positive");
    torusflow::ClassifyParams p;
    p.resolution = opt.resolution;
    p.horizon = opt.horizon;
    p.tol_per = opt.tol_per;
    p.tol_sing = opt.tol_sing;
    p.delta_cover = opt.delta_cover;
    p.delta_closure = opt.delta_closure;
    p.workers = opt.workers;
    return p;
}

bool looks_like_file(const std::string& src) {
    return src.size() > 5 && src.rfind(".json") == src.size() - 5;
}

torusflow::FieldPtr load_field(const std::string& src) {
    if (src.empty()) throw ConfigError("--flow is required");
    if (looks_like_file(src) || std::filesystem::exists(src)) {
        std::ifstream in(src);
        if (!in) throw ConfigError("cannot read flow spec '" + src + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("invalid flow spec '" + src + "': " + e.what());
        }
        return torusflow::field_from_json(j); // may throw ConstructionError
    }
    try {
        return torusflow::make_preset(src);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::filesystem::path ensure_out_dir(const Options& opt) {
    std::filesystem::path dir(opt.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + opt.out + "': " + ec.message());
    return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void print_summary(const torusflow::GridPartition& part) {
    using torusflow::OrbitClass;
    std::printf("n=%d T=%g cells=%d\n", part.resolution, part.horizon, part.cell_count());
    for (OrbitClass c : {OrbitClass::Sing, OrbitClass::Per, OrbitClass::P, OrbitClass::LD,
                         OrbitClass::ExceptionalSuspect})
        std::printf("%-18s %d\n", torusflow::orbit_class_name(c).c_str(), part.count(c));
    if (!part.diagnostics.empty())
        std::printf("diagnostics          %zu\n", part.diagnostics.size());
}

int cmd_classify(const Options& opt) {
    torusflow::ClassifyParams params = params_from(opt);
    torusflow::FieldPtr field = load_field(opt.flow);
    torusflow::GridPartition part = torusflow::decompose(*field, params.resolution, params);
    auto dir = ensure_out_dir(opt);
    write_text(dir / "partition.json", part.to_json().dump(2) + "\n");
    print_summary(part);
    return kOk;
}

int cmd_certify(const Options& opt) {
    torusflow::ClassifyParams params = params_from(opt);
    torusflow::FieldPtr field = load_field(opt.flow);
    torusflow::GridPartition part = torusflow::decompose(*field, params.resolution, params);
    auto certs = torusflow::certify_all(*field, part, params);
    nlohmann::json report = nlohmann::json::array();
    bool any_failed = false;
    for (const torusflow::Certificate& c : certs) {
        report.push_back(c.to_json());
        if (c.verdict == torusflow::Verdict::fail) {
            any_failed = true;
            std::printf("FAIL %s\n", c.name.c_str());
        } else {
            std::printf("%s %s\n", c.verdict == torusflow::Verdict::pass ? "pass" : "inconclusive",
                        c.name.c_str());
        }
    }
    auto dir = ensure_out_dir(opt);
    write_text(dir / "certificates.json", report.dump(2) + "\n");
    return any_failed ? kCertificateFailure : kOk;
}

int cmd_portrait(const Options& opt) {
    torusflow::GridPartition part;
    if (!opt.partition_file.empty()) {
        std::ifstream in(opt.partition_file);
        if (!in) throw ConfigError("cannot read partition '" + opt.partition_file + "'");
        nlohmann::json j;
        try {
            in >> j;
            part = torusflow::GridPartition::from_json(j);
        } catch (const std::exception& e) {
            throw ConfigError("invalid partition '" + opt.partition_file + "': " + e.what());
        }
    } else {
        torusflow::ClassifyParams params = params_from(opt);
        torusflow::FieldPtr field = load_field(opt.flow);
        part = torusflow::decompose(*field, params.resolution, params);
    }
    auto dir = ensure_out_dir(opt);
    try {
        torusflow::write_portrait_ppm(part, (dir / "portrait.ppm").string());
        torusflow::write_portrait_svg(part, (dir / "portrait.svg").string());
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
    std::printf("wrote %s and %s\n", (dir / "portrait.ppm").string().c_str(),
                (dir / "portrait.svg").string().c_str());
    return kOk;
}

int cmd_suite(const Options& opt) {
    if (opt.resolution < 16) throw ConfigError("resolution must be at least 16");
    if (!(opt.horizon > 0.0)) throw ConfigError("horizon must be positive");
    torusflow::SuiteConfig cfg;
    cfg.resolution = opt.resolution;
    cfg.horizon = opt.horizon;
    torusflow::SuiteReport report = torusflow::run_acceptance_suite(cfg);
    for (const torusflow::CriterionResult& c : report.criteria)
        std::printf("criterion %2d %-32s %s (%.1fs)\n", c.id, c.name.c_str(),
                    c.passed ? "pass" : "FAIL", c.seconds);
    auto dir = ensure_out_dir(opt);
    write_text(dir / "suite_report.json", report.to_json().dump(2) + "\n");
    return report.all_passed() ? kOk : kCertificateFailure;
}

int cmd_construct(const Options& opt) {
    torusflow::FieldPtr field = load_field(opt.flow);
    auto dir = ensure_out_dir(opt);
    write_text(dir / "flow.json", field->to_json().dump(2) + "\n");
    std::printf("wrote %s\n", (dir / "flow.json").string().c_str());
    return kOk;
}

void add_common(CLI::App* sub, Options& opt, bool needs_flow) {
    if (needs_flow) sub->add_option("--flow", opt.flow, "preset name or flow-spec JSON path");
    sub->add_option("--resolution", opt.resolution, "grid resolution n (>= 16)");
    sub->add_option("--horizon", opt.horizon, "integration horizon T");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--workers", opt.workers, "worker threads (0 = machine parallelism)");
    sub->add_option("--seed", opt.seed, "reserved; runs are deterministic");
    sub->add_option("--tol-per", opt.tol_per, "periodic-return tolerance");
    sub->add_option("--tol-sing", opt.tol_sing, "singular-speed tolerance");
    sub->add_option("--delta-cover", opt.delta_cover, "coverage slack");
    sub->add_option("--delta-closure", opt.delta_closure, "closure-identity tolerance");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"torus flow decomposition and certification"};
    app.require_subcommand(1);
    Options opt;

    CLI::App* classify = app.add_subcommand("classify", "decompose a flow into orbit classes");
    add_common(classify, opt, true);
    CLI::App* certify = app.add_subcommand("certify", "run all applicable certificates");
    add_common(certify, opt, true);
    CLI::App* portrait = app.add_subcommand("portrait", "render the orbit-class portrait");
    add_common(portrait, opt, true);
    portrait->add_option("--partition", opt.partition_file, "reuse an existing partition JSON");
    CLI::App* suite = app.add_subcommand("suite", "run the acceptance suite");
    add_common(suite, opt, false);
    CLI::App* construct = app.add_subcommand("construct", "build a flow and write its spec");
    add_common(construct, opt, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (app.got_subcommand(classify)) return cmd_classify(opt);
        if (app.got_subcommand(certify)) return cmd_certify(opt);
        if (app.got_subcommand(portrait)) return cmd_portrait(opt);
        if (app.got_subcommand(suite)) return cmd_suite(opt);
        if (app.got_subcommand(construct)) return cmd_construct(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const torusflow::ConstructionError& e) {
        std::cerr << "construction error: " << e.what() << "\n";
        return kConstructionFailure;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
