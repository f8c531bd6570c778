// End-to-end checks of the command-line tool: exit-code contract, output
// files, and the partition JSON round trip, all at small scope.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "torusflow/classify.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TORUSFLOW_CLI;

int run(const std::string& args) {
    int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("torusflow_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("classify writes a partition that round-trips through JSON") {
    fs::path dir = fresh_dir("classify");
    CHECK(run("classify --flow linear-rational --resolution 16 --horizon 50 --out " +
              dir.string()) == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(dir / "partition.json"));
    torusflow::GridPartition part = torusflow::GridPartition::from_json(j);
    CHECK(part.resolution == 16);
    CHECK(part.count(torusflow::OrbitClass::Per) == 256);
    CHECK(part.to_json().at("labels") == j.at("labels"));
}

TEST_CASE("portrait emits a P6 image with matching dimensions and an SVG") {
    fs::path dir = fresh_dir("portrait");
    CHECK(run("portrait --flow rotation-half-suspension --resolution 16 --horizon 50 --out " +
              dir.string()) == 0);
    std::string ppm = slurp(dir / "portrait.ppm");
    CHECK(ppm.rfind("P6\n16 16\n255\n", 0) == 0);
    CHECK(ppm.size() == 13 + 3u * 16 * 16);
    std::string svg = slurp(dir / "portrait.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("viewBox=\"0 0 16 16\"") != std::string::npos);
}

TEST_CASE("portrait can reuse a saved partition instead of integrating") {
    fs::path dir = fresh_dir("portrait_reuse");
    REQUIRE(run("classify --flow linear-rational --resolution 16 --horizon 50 --out " +
                dir.string()) == 0);
    CHECK(run("portrait --partition " + (dir / "partition.json").string() + " --out " +
              dir.string()) == 0);
    CHECK(slurp(dir / "portrait.ppm").rfind("P6\n16 16\n255\n", 0) == 0);
}

TEST_CASE("construct round-trips a flow spec through a JSON file") {
    fs::path dir = fresh_dir("construct");
    CHECK(run("construct --flow limit-cycle-band --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "flow.json"));
    CHECK(run("classify --flow " + (dir / "flow.json").string() +
              " --resolution 16 --horizon 50 --out " + dir.string()) == 0);
}

TEST_CASE("certify reports certificate failures through the exit code") {
    fs::path dir = fresh_dir("certify");
    // rigid rational suspension: everything periodic, all certificates hold
    CHECK(run("certify --flow rotation-half-suspension --resolution 16 --horizon 50 --out " +
              dir.string()) == 0);
    nlohmann::json ok = nlohmann::json::parse(slurp(dir / "certificates.json"));
    CHECK(ok.is_array());
    CHECK(!ok.empty());
    // the wandering suspension must trip at least one certificate
    CHECK(run("certify --flow denjoy-suspension --resolution 16 --horizon 300 --out " +
              dir.string()) == 1);
}

TEST_CASE("config errors exit with status 2") {
    fs::path dir = fresh_dir("config");
    CHECK(run("classify --flow no-such-preset --out " + dir.string()) == 2);
    CHECK(run("classify --flow " + (dir / "missing.json").string() + " --out " + dir.string()) ==
          2);
    CHECK(run("classify --flow linear-rational --resolution 8 --out " + dir.string()) == 2);
    CHECK(run("classify --flow linear:phi --resolution 16 --out " + dir.string()) == 2);
    CHECK(run("nonsense-verb") == 2);
}

TEST_CASE("linear slope tokens and --seed are accepted") {
    fs::path dir = fresh_dir("linear");
    CHECK(run("classify --flow linear:1,phi --resolution 16 --horizon 50 --seed 7 --out " +
              dir.string()) == 0);
}
