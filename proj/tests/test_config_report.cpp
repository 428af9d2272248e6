#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "phtess/config.hpp"
#include "phtess/report.hpp"
#include "phtess/validate.hpp"

using namespace phtess;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(PHTESS_CLI_BIN) + " " + args + " 2> cli_stderr.log";
    int ret = std::system(cmd.c_str());
    return WEXITSTATUS(ret);
}

const char* atoms_config = R"({
  "dimension": 2,
  "intensity": 1.5,
  "distribution": {
    "kind": "atoms",
    "atoms": [
      {"direction": [1.0, 0.0], "weight": 0.4},
      {"direction": [0.0, 1.0], "weight": 0.35},
      {"direction": [0.70710678118654752, 0.70710678118654752], "weight": 0.25}
    ]
  },
  "k": [1, 2],
  "moments": [[0, 0], [1, 2]],
  "simulation": {"replicates": 250, "seed": 5, "workers": 2}
})";

} // namespace

TEST_SUITE("config parsing") {
    TEST_CASE("canonical serialization round-trips") {
        RunConfig a = parse_config(atoms_config);
        std::string canon = canonical_json(a);
        RunConfig b = parse_config(canon);
        CHECK(canonical_json(b) == canon);
        CHECK(b.dimension == a.dimension);
        CHECK(b.moments == a.moments);
        CHECK(b.simulation->seed == a.simulation->seed);
    }

    TEST_CASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "cuboid"}, "typo": 1})"),
                        ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "cuboid", "n": 5}})"),
                        ConfigError);
    }

    TEST_CASE("atom weights must sum to one") {
        CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "atoms", "atoms": [
              {"direction": [1.0, 0.0], "weight": 0.5},
              {"direction": [0.0, 1.0], "weight": 0.4}]}})"),
                        ConfigError);
    }

    TEST_CASE("bad simulation block") {
        CHECK_THROWS_AS(parse_config(R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "cuboid"},
            "simulation": {"replicates": 0}})"),
                        ConfigError);
    }

    TEST_CASE("moment orders must respect k") {
        CHECK_THROWS_AS(parse_config(R"({"dimension": 3, "intensity": 1.0,
            "distribution": {"kind": "cuboid"}, "k": [1], "moments": [[0, 2]]})"),
                        ConfigError);
    }

    TEST_CASE("closed-form kind cannot be simulated") {
        RunConfig cfg = parse_config(R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "isotropic-closed-form"}})");
        CHECK_THROWS_AS(make_distribution(cfg), ConfigError);
    }
}

TEST_SUITE("report formatting") {
    TEST_CASE("csv layout") {
        EstimateSummary es;
        es.k = 2;
        es.r = 0;
        es.s = 1;
        es.mean = 1.5;
        es.std_error = 0.25;
        es.replicates = 100;
        es.has_oracle = true;
        es.oracle_value = 1.0;
        es.z_score = 2.0;
        es.estimator_id = "origin_faces";
        std::string csv = csv_report({es}, "");
        CHECK(csv == std::string(csv_header()) +
                         "\n2,0,1,1,1.5,0.25,2,origin_faces,100,\n");
        EstimateSummary blank = es;
        blank.has_oracle = false;
        std::string csv2 = csv_report({blank}, "");
        CHECK(csv2.find(",,1.5,0.25,,origin_faces") != std::string::npos);
    }

    TEST_CASE("moment table text is stable") {
        auto t = build_moment_table(cuboid_distribution(2, 2.0), 2);
        std::string a = moment_table_text(t);
        std::string b = moment_table_text(build_moment_table(cuboid_distribution(2, 2.0), 2));
        CHECK(a == b);
        CHECK(a.find("cell_intensity 1\n") != std::string::npos);
    }

    TEST_CASE("wrong constant in the bound is caught") {
        auto dist = isotropic_discretized_2d(96, 1.0);
        auto rep = variance_bounds(dist, 2);
        CHECK(variance_within_bounds(rep.variance, rep.upper));
        // inject a bound computed with kappa_2 = 3 instead of pi
        double wrong_upper = 8.0 * (0.5 + 1.0 + 9.0 / 16.0) - 16.0;
        CHECK(!variance_within_bounds(rep.variance, wrong_upper));
    }
}

TEST_SUITE("cli") {
    TEST_CASE("simulate is byte-stable across runs and worker counts") {
        std::filesystem::create_directories("cli_tmp");
        write_file("cli_tmp/config.json", atoms_config);
        REQUIRE(run_cli("simulate --config cli_tmp/config.json --out cli_tmp/run1") == 0);
        REQUIRE(run_cli("simulate --config cli_tmp/config.json --out cli_tmp/run2") == 0);
        REQUIRE(run_cli("simulate --config cli_tmp/config.json --out cli_tmp/run3 --workers 1") == 0);
        std::string a = slurp("cli_tmp/run1/report.csv");
        std::string b = slurp("cli_tmp/run2/report.csv");
        std::string c = slurp("cli_tmp/run3/report.csv");
        CHECK(a == b);
        CHECK(a == c);
        CHECK(a.rfind(csv_header(), 0) == 0);
        // changing the seed changes the report
        REQUIRE(run_cli("simulate --config cli_tmp/config.json --out cli_tmp/run4 --seed 99") == 0);
        CHECK(slurp("cli_tmp/run4/report.csv") != a);
    }

    TEST_CASE("oracle writes moment tables and bounds") {
        std::filesystem::create_directories("cli_tmp");
        write_file("cli_tmp/config.json", atoms_config);
        REQUIRE(run_cli("oracle --config cli_tmp/config.json --out cli_tmp/oracle") == 0);
        std::string table = slurp("cli_tmp/oracle/moments_k2.txt");
        CHECK(table.find("second_moments") != std::string::npos);
        std::string bounds = slurp("cli_tmp/oracle/bounds_k2.txt");
        CHECK(bounds.find("within_bounds 1") != std::string::npos);
    }

    TEST_CASE("closed-form oracle differs from discretized only by the atomization") {
        std::filesystem::create_directories("cli_tmp");
        write_file("cli_tmp/iso_cf.json", R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "isotropic-closed-form"}, "k": [2]})");
        REQUIRE(run_cli("oracle --config cli_tmp/iso_cf.json --out cli_tmp/iso_cf") == 0);
        std::string table = slurp("cli_tmp/iso_cf/moments_k2.txt");
        CHECK(table.find("# typical k-face moment table") == 0);
    }

    TEST_CASE("validate passes on the shipped cuboid configs") {
        REQUIRE(run_cli(std::string("validate --config ") + PHTESS_CONFIG_DIR +
                        "/cuboid_d2.json --realizations 10") == 0);
    }

    TEST_CASE("bounds reports the stability interval at k = d") {
        std::filesystem::create_directories("cli_tmp");
        write_file("cli_tmp/config.json", atoms_config);
        REQUIRE(run_cli("bounds --config cli_tmp/config.json --out cli_tmp/bounds > cli_tmp/bounds.txt") == 0);
        std::string text = slurp("cli_tmp/bounds/bounds_k2.txt");
        CHECK(text.find("phi ") != std::string::npos);
        CHECK(text.find("within_bounds 1") != std::string::npos);
    }

    TEST_CASE("config errors exit with code 2") {
        std::filesystem::create_directories("cli_tmp");
        write_file("cli_tmp/bad.json", R"({"dimension": 2})");
        CHECK(run_cli("oracle --config cli_tmp/bad.json") == 2);
        write_file("cli_tmp/bad2.json", R"({"dimension": 2, "intensity": 1.0,
            "distribution": {"kind": "atoms", "atoms": [
              {"direction": [1.0, 0.0], "weight": 0.5},
              {"direction": [0.0, 1.0], "weight": 0.4}]}})");
        CHECK(run_cli("oracle --config cli_tmp/bad2.json") == 2);
        CHECK(run_cli("simulate --config cli_tmp/bad.json") == 2);
    }
}
