#include "torusflow/presets.hpp"

#include <cmath>
#include <stdexcept>

#include "torusflow/constructions.hpp"

namespace torusflow {

namespace {

const double kPhi = 0.5 * (std::sqrt(5.0) - 1.0);

double parse_slope(const std::string& tok) {
    if (tok == "phi") return kPhi;
    if (tok == "-phi") return -kPhi;
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("linear preset: cannot parse slope '" + tok + "'");
    }
}

} // namespace

FieldPtr make_preset(const std::string& raw) {
    std::string name = raw;
    if (name.rfind("preset:", 0) == 0) name = name.substr(7);

    if (name.rfind("linear:", 0) == 0) {
        std::string args = name.substr(7);
        std::size_t comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("linear preset: expected linear:a,b");
        return std::make_shared<LinearField>(parse_slope(args.substr(0, comma)),
                                             parse_slope(args.substr(comma + 1)));
    }
    if (name == "linear-irrational") return std::make_shared<LinearField>(1.0, kPhi);
    if (name == "linear-rational") return std::make_shared<LinearField>(2.0, 1.0);
    if (name == "hamiltonian-band") return std::make_shared<HamiltonianBandField>();
    if (name == "limit-cycle-band") return std::make_shared<LimitCycleBandField>(1.0);
    if (name == "blowup-phi-N8") return build_blowup(1.0, kPhi, {0.0, 0.0}, 8, 0.05);
    // rotation number 1/(4+phi): a noble number, so orbits equidistribute
    // as evenly as possible and near-returns stay well above tol_per; its
    // moderate size keeps the suspension's shear small enough that the
    // invariant Cantor set stays nowhere dense at the working resolution
    if (name == "denjoy-suspension") return suspend(build_denjoy(1.0 / (4.0 + kPhi), 60, 5.0));
    if (name == "rotation-half-suspension") return suspend(std::make_shared<RotationMap>(0.5));
    if (name == "rotation-phi-suspension") return suspend(std::make_shared<RotationMap>(kPhi));
    if (name == "x3-box-demo")
        return apply_x3_holonomy(std::make_shared<LinearField>(1.0, 0.0),
                                 FlowBox{{0.5, 0.5}, 0.2, 0.1});
    throw std::invalid_argument("unknown preset '" + raw + "'");
}

std::vector<std::string> preset_names() {
    return {"linear-irrational",        "linear-rational",
            "hamiltonian-band",         "limit-cycle-band",
            "blowup-phi-N8",            "denjoy-suspension",
            "rotation-half-suspension", "rotation-phi-suspension",
            "x3-box-demo"};
}

} // namespace torusflow
