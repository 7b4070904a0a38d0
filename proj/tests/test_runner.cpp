#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "opfpz/runner.hpp"

using namespace opfpz;
namespace fs = std::filesystem;

namespace {

const std::string case_path = std::string(OPFPZ_DATA_DIR) + "/ieee30_pz.case";

RunConfig quick_config(const std::string& method, const std::string& dir) {
    RunConfig cfg;
    cfg.case_path = case_path;
    cfg.method = method;
    cfg.output_dir = dir;
    cfg.pso.swarm_size = 10;
    cfg.pso.max_iterations = 6;
    cfg.local.max_iter = 25;
    return cfg;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("opfpz_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("run writes results, summary and traces", "[runner]") {
    const auto dir = fresh_dir("pso");
    auto cfg = quick_config("pso", dir.string());
    cfg.runs = 2;
    cfg.seed = 11;
    std::ostringstream log;
    REQUIRE(run(cfg, log) == 0);

    const auto results = nlohmann::json::parse(slurp(dir / "results.json"));
    REQUIRE(results.is_array());
    REQUIRE(results.size() == 2);
    CHECK(results[0]["method_tag"] == "pso");
    CHECK(results[0]["seed"] == 11);
    CHECK(results[1]["seed"] == 12);
    CHECK(results[0]["dispatch"].size() == 5);
    CHECK(results[0]["trace"].size() == 7);

    const auto summary = slurp(dir / "summary.csv");
    CHECK(summary.rfind("method,pz_mode,best_cost,median_cost,worst_cost,"
                        "total_gen_MW,feasible,evals\n", 0) == 0);
    CHECK(summary.find("pso,product,") != std::string::npos);

    // one trace file per seed, with iterations+1 data rows, non-increasing
    for (const auto seed : {"11", "12"}) {
        std::ifstream trace(dir / ("trace_pso_" + std::string(seed) + ".csv"));
        REQUIRE(trace.good());
        std::string header;
        std::getline(trace, header);
        CHECK(header == "iteration,best_fitness");
        double prev = std::numeric_limits<double>::infinity();
        int rows = 0;
        std::string line;
        while (std::getline(trace, line)) {
            const auto comma = line.find(',');
            REQUIRE(comma != std::string::npos);
            CHECK(std::stoi(line.substr(0, comma)) == rows);
            const double f = std::stod(line.substr(comma + 1));
            CHECK(f <= prev);
            prev = f;
            ++rows;
        }
        CHECK(rows == 7);
    }
}

TEST_CASE("run with method=all emits four summary rows", "[runner]") {
    const auto dir = fresh_dir("all");
    auto cfg = quick_config("all", dir.string());
    cfg.runs = 1;
    std::ostringstream log;
    REQUIRE(run(cfg, log) == 0);
    const auto summary = slurp(dir / "summary.csv");
    int rows = 0;
    for (const char c : summary)
        if (c == '\n') ++rows;
    CHECK(rows == 5);  // header + local, local-flapc, pso, apso
    for (const auto* m : {"local,", "local-flapc,", "pso,", "apso,"})
        CHECK(summary.find(m) != std::string::npos);
}

TEST_CASE("run is byte-deterministic apart from wall_time", "[runner]") {
    const auto dir_a = fresh_dir("det_a");
    const auto dir_b = fresh_dir("det_b");
    std::ostringstream log;
    auto cfg = quick_config("apso", dir_a.string());
    cfg.runs = 2;
    REQUIRE(run(cfg, log) == 0);
    cfg.output_dir = dir_b.string();
    REQUIRE(run(cfg, log) == 0);

    auto scrub = [](const fs::path& p) {
        auto j = nlohmann::json::parse(slurp(p / "results.json"));
        for (auto& r : j) r["wall_time"] = 0.0;
        return j.dump(2);
    };
    CHECK(scrub(dir_a) == scrub(dir_b));
    CHECK(slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv"));
}

TEST_CASE("run validates method and zone-mode combinations", "[runner]") {
    const auto dir = fresh_dir("bad");
    std::ostringstream log;
    auto cfg = quick_config("enum", dir.string());
    cfg.pz_mode = "product";
    CHECK(run(cfg, log) == 2);
    cfg = quick_config("pso", dir.string());
    cfg.pz_mode = "traditional";
    CHECK(run(cfg, log) == 2);
    cfg = quick_config("pso", dir.string());
    cfg.runs = 0;
    CHECK(run(cfg, log) == 2);
    cfg = quick_config("frobnicate", dir.string());
    CHECK(run(cfg, log) == 2);
    cfg = quick_config("pso", dir.string());
    cfg.case_path = "/nonexistent/nowhere.case";
    CHECK(run(cfg, log) == 2);
}

TEST_CASE("enumeration run reports the sub-problem count", "[runner]") {
    const auto dir = fresh_dir("enum");
    auto cfg = quick_config("enum", dir.string());
    cfg.pz_mode = "off";
    cfg.local.max_iter = 20;
    std::ostringstream log;
    REQUIRE(run(cfg, log) == 0);
    const auto results = nlohmann::json::parse(slurp(dir / "results.json"));
    CHECK(results[0]["subproblems"] == 1);
    CHECK(results[0]["method_tag"] == "enum");
}

TEST_CASE("validate_case prints the case survey", "[runner]") {
    std::ostringstream out;
    REQUIRE(validate_case(case_path, out) == 0);
    const std::string s = out.str();
    CHECK(s.find("buses: 30") != std::string::npos);
    CHECK(s.find("branches: 41") != std::string::npos);
    CHECK(s.find("generators: 6") != std::string::npos);
    CHECK(s.find("total load: 283.4 MW") != std::string::npos);
    CHECK(s.find("N_r (zone combinations): 243") != std::string::npos);
    CHECK(s.find("1.8033") != std::string::npos);  // unit 8 FLAPC
    CHECK(validate_case("/nonexistent/nowhere.case", out) == 2);

    // an empty file is a parse error, reported as such
    const auto dir = fresh_dir("empty");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "empty.case") << "";
    CHECK(validate_case((dir / "empty.case").string(), out) == 2);
}

TEST_CASE("pz-free variant of the case has a single combination", "[runner]") {
    auto cs = load_case_file(case_path);
    std::ostringstream out;
    // strip the zones: every unit keeps one feasible interval
    for (auto& g : cs.generators) g.zones = FeasibleZones{{{g.p_min, g.p_max}}};
    const auto dir = fresh_dir("nopz");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "nopz.case") << serialize_case(cs);
    REQUIRE(validate_case((dir / "nopz.case").string(), out) == 0);
    CHECK(out.str().find("N_r (zone combinations): 1") != std::string::npos);
}

TEST_CASE("run exits 3 when every run diverges", "[runner]") {
    // a load far beyond the line's deliverable power: the power flow cannot
    // converge anywhere in the dispatch box
    const auto dir = fresh_dir("diverge");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.case") <<
        "BASE 100\n"
        "BUS 1 2 0 0 1.06 0.9 1.2 0 0\n"
        "BUS 2 0 1000 0 1.0 0.9 1.2 0 0\n"
        "BUS 3 1 0 0 1.0 0.9 1.2 0 0\n"
        "BRANCH 1 2 0 0.1 0 1.0\n"
        "BRANCH 2 3 0 0.1 0 1.0\n"
        "GEN 1 0 50 -9999 9999 0.01 2 10\n"
        "GEN 3 0 50 -9999 9999 0.01 2 10\n";
    RunConfig cfg;
    cfg.case_path = (dir / "bad.case").string();
    cfg.method = "local";
    cfg.runs = 2;
    cfg.output_dir = (dir / "out").string();
    cfg.local.max_iter = 5;
    std::ostringstream log;
    CHECK(run(cfg, log) == 3);
}
