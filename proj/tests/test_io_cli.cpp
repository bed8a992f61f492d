#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

#include "interplab/calculus.hpp"
#include "interplab/czd.hpp"
#include "interplab/io.hpp"
#include "interplab/kfun.hpp"
#include "interplab/space.hpp"
#include "interplab/util.hpp"
#include "oracle_helpers.hpp"

using namespace interplab;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    fs::path dir = fs::temp_directory_path() / "interplab_io_cli_tests";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(INTERPLAB_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("space file round trip is exact") {
    fs::path p = scratch() / "roundtrip_space.json";
    Space sp = build_grid({5, 3}, 0.3, WeightProfile::power(1.3));
    save_space(sp, p.string());
    Space back = load_space(p.string());
    CHECK(back.ids == sp.ids);
    CHECK(back.weights == sp.weights);
    CHECK(back.dist == sp.dist);
    CHECK(back.coords == sp.coords);
    CHECK(back.neighbor_radius == sp.neighbor_radius);
}

TEST_CASE("space loader rejects malformed inputs") {
    auto write_and_try = [](const char* name, const std::string& body) {
        fs::path p = scratch() / name;
        write_text_file(p.string(), body);
        CHECK_THROWS_AS(load_space(p.string()), validation_error);
    };
    write_and_try("bad_json.json", "{ not json");
    write_and_try("dup_id.json", R"({"points":[{"id":"a","weight":1},{"id":"a","weight":1}],
        "dist":{"type":"matrix","values":[[0,1],[1,0]]}})");
    write_and_try("bad_weight.json", R"({"points":[{"id":"a","weight":0},{"id":"b","weight":1}],
        "dist":{"type":"matrix","values":[[0,1],[1,0]]}})");
    write_and_try("asym.json", R"({"points":[{"id":"a","weight":1},{"id":"b","weight":1}],
        "dist":{"type":"matrix","values":[[0,1],[2,0]]}})");
    write_and_try("diag.json", R"({"points":[{"id":"a","weight":1},{"id":"b","weight":1}],
        "dist":{"type":"matrix","values":[[1,1],[1,0]]}})");
    write_and_try("triangle.json", R"({"points":[{"id":"a","weight":1},{"id":"b","weight":1},
        {"id":"c","weight":1}],
        "dist":{"type":"matrix","values":[[0,1,5],[1,0,1],[5,1,0]]}})");
    write_and_try("disconnected.json", R"({"points":[{"id":"a","weight":1},{"id":"b","weight":1}],
        "dist":{"type":"graph","edges":[]}})");
}

TEST_CASE("graph distances close under shortest paths") {
    fs::path p = scratch() / "graph_space.json";
    write_text_file(p.string(), R"({"points":[{"id":"a","weight":1},{"id":"b","weight":1},
        {"id":"c","weight":2}],
        "dist":{"type":"graph","edges":[{"a":"a","b":"b","len":1},{"a":"b","b":"c","len":1.5}]}})");
    Space sp = load_space(p.string());
    CHECK(sp.d(0, 1) == 1.0);
    CHECK(sp.d(1, 2) == 1.5);
    CHECK(sp.d(0, 2) == 2.5);  // through b
}

TEST_CASE("field csv round trip is exact") {
    fs::path sp_path = scratch() / "field_space.json";
    fs::path f_path = scratch() / "field.csv";
    Space sp = build_grid({6}, 0.25);
    save_space(sp, sp_path.string());
    ScalarField f{1.0 / 3.0, -2.5e-30, 0.0, 1e300, -7.125, 0.1};
    save_field(sp, f, f_path.string());
    ScalarField back = load_field(sp, f_path.string());
    CHECK(back == f);
}

TEST_CASE("field loader rejects mismatched files") {
    Space sp = build_grid({3}, 0.5);
    auto write_and_try = [&](const char* name, const std::string& body) {
        fs::path p = scratch() / name;
        write_text_file(p.string(), body);
        CHECK_THROWS_AS(load_field(sp, p.string()), validation_error);
    };
    write_and_try("no_header.csv", "p0,1\np1,2\np2,3\n");
    write_and_try("missing_point.csv", "id,value\np0,1\np1,2\n");
    write_and_try("unknown_point.csv", "id,value\np0,1\np1,2\np2,3\nzz,4\n");
    write_and_try("dup_point.csv", "id,value\np0,1\np1,2\np1,3\n");
    write_and_try("bad_number.csv", "id,value\np0,1\np1,x2\np2,3\n");
}

TEST_CASE("step function csv layout") {
    fs::path p = scratch() / "steps.csv";
    Space sp = testref::make_line({0.0, 1.0, 2.0}, {1.0, 1.0, 2.0});
    StepFunction sf = decreasing_rearrangement(sp, {3.0, 1.0, 2.0});
    save_step_function(sf, p.string());
    std::string text = read_text_file(p.string());
    // trailing row closes the graph at (total_mass, 0)
    CHECK(text == "t_break,value\n1,3\n3,2\n4,1\n4,0\n");
}

TEST_CASE("decomposition artifact carries its certificate") {
    fs::path p = scratch() / "dec.json";
    Space sp = build_grid({12}, 1.0 / 12.0);
    ScalarField f = random_smooth_field(sp, 7);
    double alpha = alpha_of_t(sp, f, 1.0, 0.4 * sp.mu());
    Decomposition dec = czd_global(sp, f, 1.0, 2.0, alpha);
    save_decomposition(sp, dec, p.string());

    auto j = nlohmann::json::parse(read_text_file(p.string()));
    CHECK(j["schema"] == "interplab.czd/1");
    CHECK(j["variant"] == "global");
    CHECK(j["alpha"].get<double>() == alpha);
    CHECK(j["mu_omega"].get<double>() == dec.mu_omega);
    REQUIRE(j["omega"].size() == dec.omega.size());
    for (size_t k = 0; k < dec.omega.size(); ++k)
        CHECK(j["omega"][k] == sp.ids[static_cast<size_t>(dec.omega[k])]);
    CHECK(j["certificate"].size() == dec.cert.clauses.size());
    CHECK(j["pieces"].size() == dec.pieces.size());
}

TEST_CASE("file digests separate contents") {
    fs::path a = scratch() / "dig_a.txt";
    fs::path b = scratch() / "dig_b.txt";
    write_text_file(a.string(), "hello\n");
    write_text_file(b.string(), "hello!\n");
    CHECK(digest_file(a.string()) == digest_file(a.string()));
    CHECK(digest_file(a.string()) != digest_file(b.string()));
    CHECK(digest_file(a.string()).size() == 16);
}

TEST_CASE("cli end to end: artifacts, determinism, exit codes") {
    fs::path dir = scratch();
    std::string space = (dir / "cli_line.json").string();
    std::string fn = (dir / "cli_fn.csv").string();

    REQUIRE(run_cli("space build --grid 24 --spacing 0.04 -o " + space) == 0);
    Space sp = load_space(space);
    CHECK(sp.n() == 24);
    ScalarField f = random_smooth_field(sp, 11);
    save_field(sp, f, fn);

    SUBCASE("repeat runs are byte identical") {
        std::string out1 = (dir / "kc1.csv").string();
        std::string out2 = (dir / "kc2.csv").string();
        // identical flag sets except the output path, which lives only in the sidecar
        REQUIRE(run_cli("kfun --space " + space + " --fn " + fn + " --r 1 --q 1 --grid 17 -o " + out1) == 0);
        REQUIRE(run_cli("kfun --space " + space + " --fn " + fn + " --r 1 --q 1 --grid 17 -o " + out2) == 0);
        CHECK(read_text_file(out1) == read_text_file(out2));
        // 17 rows plus the header
        std::string text = read_text_file(out1);
        CHECK(std::count(text.begin(), text.end(), '\n') == 18);
    }
    SUBCASE("verify suites pass on a healthy pair") {
        CHECK(run_cli("verify --suite all --space " + space + " --fn " + fn) == 0);
        CHECK(run_cli("verify --suite czd --space " + space + " --fn " + fn + " --t 0.3") == 0);
    }
    SUBCASE("validation failures exit 2") {
        CHECK(run_cli("space check --space " + (dir / "missing.json").string()) == 2);
        CHECK(run_cli("czd --space " + space + " --fn " + fn + " -o " + (dir / "x.json").string()) == 2);
        std::string bad = (dir / "bad_space.json").string();
        write_text_file(bad, "{}");
        CHECK(run_cli("maximal --space " + bad + " --fn " + fn + " -o " + (dir / "y.csv").string()) == 2);
    }
    SUBCASE("usage failures exit 64") {
        CHECK(run_cli("frobnicate") == 64);
        CHECK(run_cli("maximal --space " + space + " --fn " + fn + " --nope 1 -o " +
                      (dir / "z.csv").string()) == 64);
        CHECK(run_cli("rearrange --space " + space) == 64);  // missing required flags
    }
    SUBCASE("help exits zero") {
        CHECK(run_cli("--help") == 0);
        CHECK(run_cli("kfun --help") == 0);
    }
}
