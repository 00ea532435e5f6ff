#include "glomix/cli_runner.hpp"
#include "glomix/errors.hpp"
#include "glomix/parallel.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace glomix;
namespace fs = std::filesystem;

namespace {

const std::string kMaps = std::string(GLOMIX_DATA_DIR) + "/maps/";

std::string tmp(const std::string& name) {
    fs::path p = fs::path(GLOMIX_TEST_TMP) / name;
    fs::remove_all(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_quiet(const RunConfig& c) {
    std::ostringstream log, err;
    return run(c, log, err);
}

int shell(const std::string& args) {
    std::string cmd = std::string(GLOMIX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("check on LSV p=1 passes six reports") {
    RunConfig c;
    c.command = Command::Check;
    c.map_path = kMaps + "lsv_p1.json";
    c.output_dir = tmp("check_ok");
    CHECK(run_quiet(c) == 0);
    Json reports = read_json_file(c.output_dir + "/reports.json");
    REQUIRE(reports.size() == 6);
    for (const auto& r : reports) CHECK(r["passed"].get<bool>());
    Json manifest = read_json_file(c.output_dir + "/manifest.json");
    CHECK(manifest["exit_status"] == 0);
    CHECK(manifest["map"]["family"] == "StandardLSV");
}

TEST_CASE("inconsistent a_1 surfaces as a failed A1 check with exit 2") {
    RunConfig c;
    c.command = Command::Check;
    c.map_path = kMaps + "lsv_bad_endpoint.json";
    c.output_dir = tmp("check_bad");
    CHECK(run_quiet(c) == 2);
    Json reports = read_json_file(c.output_dir + "/reports.json");
    REQUIRE(reports.size() == 1);
    CHECK(reports[0]["assumption_id"] == "A1");
    CHECK_FALSE(reports[0]["passed"].get<bool>());
    CHECK(reports[0]["witness"].get<double>() == doctest::Approx(0.6));
    // the same map fails every other command the same way
    c.command = Command::Orbit;
    c.output_dir = tmp("orbit_bad");
    CHECK(run_quiet(c) == 2);
}

TEST_CASE("internal errors exit 1") {
    fs::create_directories(GLOMIX_TEST_TMP);
    std::string bad = std::string(GLOMIX_TEST_TMP) + "/malformed.json";
    std::ofstream(bad) << "{\"family\": \"GeneralizedPM\", ";
    RunConfig c;
    c.command = Command::Check;
    c.map_path = bad;
    c.output_dir = tmp("malformed");
    CHECK(run_quiet(c) == 1);
    c.map_path = kMaps + "does_not_exist.json";
    CHECK(run_quiet(c) == 1);
    c.map_path = kMaps + "lsv_p1.json";
    c.command = Command::Mix;
    c.measure = "bogus";
    CHECK(run_quiet(c) == 1);
}

TEST_CASE("overrides edit the map document before building") {
    RunConfig c;
    c.command = Command::Orbit;
    c.map_path = kMaps + "lsv_p1.json";
    c.overrides["p"] = "2";
    c.x0 = 0.25;
    c.n = 1;
    c.output_dir = tmp("override");
    CHECK(run_quiet(c) == 0);
    Json manifest = read_json_file(c.output_dir + "/manifest.json");
    CHECK(manifest["map"]["p"] == 2);
    // LSV p=2: x (1 + 4 x^2) at x = 1/4
    CHECK(slurp(c.output_dir + "/orbit.csv") == "k,x\n0,0.25\n1,0.3125\n");
}

TEST_CASE("mix outputs are reproducible from the manifest and across thread counts") {
    RunConfig c;
    c.command = Command::Mix;
    c.map_path = kMaps + "lsv_p1.json";
    c.n = 8;
    c.grid = 4000;
    std::string t1 = tmp("mix_t1"), t4 = tmp("mix_t4"), again = tmp("mix_replay");
    c.output_dir = t1;
    set_worker_count(1);
    REQUIRE(run_quiet(c) == 0);
    set_worker_count(4);
    c.output_dir = t4;
    REQUIRE(run_quiet(c) == 0);
    std::ostringstream log, err;
    REQUIRE(replay(t1 + "/manifest.json", again, log, err) == 0);
    set_worker_count(0);
    std::string csv = slurp(t1 + "/mix.csv");
    CHECK(csv.rfind("n,c_n,target,residual,method,se\n0,", 0) == 0);
    CHECK(csv == slurp(t4 + "/mix.csv"));
    CHECK(csv == slurp(again + "/mix.csv"));
    Json rep = read_json_file(t1 + "/mix_report.json");
    CHECK(rep["duality_ok"].get<bool>());
}

TEST_CASE("Monte Carlo runs depend only on the seed") {
    RunConfig c;
    c.command = Command::Mix;
    c.map_path = kMaps + "lsv_p1.json";
    c.method = "montecarlo";
    c.samples = 5000;
    c.n = 4;
    c.seed = 9;
    std::string a = tmp("mc_a"), b = tmp("mc_b");
    c.output_dir = a;
    set_worker_count(1);
    REQUIRE(run_quiet(c) == 0);
    set_worker_count(4);
    c.output_dir = b;
    REQUIRE(run_quiet(c) == 0);
    set_worker_count(0);
    CHECK(slurp(a + "/mix.csv") == slurp(b + "/mix.csv"));
}

TEST_CASE("counterexample demo needs no map") {
    RunConfig c;
    c.command = Command::DemoCounterexample;
    c.n_max = 10;
    c.output_dir = tmp("demo");
    CHECK(run_quiet(c) == 0);
    std::string csv = slurp(c.output_dir + "/counterexample.csv");
    CHECK(csv.find("\n3,0.19230769230769232,0.60377358490566035,") != std::string::npos);
    Json exact = read_json_file(c.output_dir + "/counterexample_exact.json");
    CHECK(exact[1]["leb_at_alpha"] == "5/26");
    c.n_max = 500;
    CHECK(run_quiet(c) == 1);
}

TEST_CASE("density and conjugate artifacts") {
    RunConfig c;
    c.command = Command::Density;
    c.map_path = kMaps + "pm_k1_p1.json";
    c.grid = 2000;
    c.output_dir = tmp("density");
    CHECK(run_quiet(c) == 0);
    Json rep = read_json_file(c.output_dir + "/density_report.json");
    CHECK(rep["converged"].get<bool>());
    c.command = Command::Conjugate;
    c.map_path = kMaps + "lsv_p1.json";
    c.at = {0.5, 2.0};
    c.output_dir = tmp("conjugate");
    CHECK(run_quiet(c) == 0);
    std::string csv = slurp(c.output_dir + "/conjugate.csv");
    CHECK(csv.rfind("y,branch,T_o,psi_inv,P_one\n0.5,1,2.0000000000000", 0) == 0);
}

TEST_CASE("configuration round trip") {
    RunConfig c;
    c.command = Command::Mix;
    c.seed = 77;
    c.at = {1.0, 2.0};
    c.overrides["kappa"] = "3";
    RunConfig back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"command":"explode"})")), ConfigError);
}

TEST_CASE("measure specs") {
    IntervalMap T = build_standard_lsv(2.0);
    CHECK(parse_measure("nu_p", T).p() == 2.0);
    CHECK(parse_measure("nu_p:1", T).p() == 1.0);
    CHECK(parse_measure("lambda_q:0.5", T).q() == 0.5);
    CHECK(parse_measure("leb", T).kind() == MeasureKind::Lebesgue);
    CHECK(parse_measure("leb_o", T).space() == Space::HalfLine);
    CHECK_THROWS_AS(parse_measure("lambda_q", T), ConfigError);
    CHECK_THROWS_AS(parse_measure("nu_p:x", T), ConfigError);
}

TEST_CASE("command-line binary exit codes") {
    CHECK(shell("check --map " + kMaps + "lsv_p1.json --grid 2000 --out " + tmp("bin_ok")) == 0);
    CHECK(shell("check --map " + kMaps + "lsv_bad_endpoint.json --out " + tmp("bin_bad")) == 2);
    CHECK(shell("check --map " + kMaps + "missing.json --out " + tmp("bin_missing")) == 1);
    CHECK(shell("frobnicate") == 1);
    CHECK(shell("orbit --map " + kMaps + "lsv_p1.json --set p=3 --x0 0.2 --n 3 --out " + tmp("bin_orbit")) == 0);
    CHECK(shell("replay --manifest " + std::string(GLOMIX_TEST_TMP) + "/bin_orbit/manifest.json --out " +
                tmp("bin_replay")) == 0);
    CHECK(slurp(std::string(GLOMIX_TEST_TMP) + "/bin_orbit/orbit.csv") ==
          slurp(std::string(GLOMIX_TEST_TMP) + "/bin_replay/orbit.csv"));
}
