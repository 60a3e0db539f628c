#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sip/errors.hpp"
#include "sip/scenario.hpp"

using namespace sip;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json fig2_params() {
    return json{{"b0", 2},  {"r", 0.7},  {"e0", 0.5}, {"K", 8},   {"a0", 0.3},
                {"a1", 0.4}, {"a2", 0.8}, {"d0", 0.6}, {"d1", 0.7}, {"d2", 0.3},
                {"d3", 0.5}, {"k1", 2.8}, {"k2", 1.8}};
}

fs::path scenario_dir() { return fs::path(SIPDYN_SOURCE_DIR) / "scenarios"; }

fs::path fresh_tmp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("sipdyn-tests-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("scenario parsing rejects malformed documents") {
    json good{{"name", "x"}, {"action", "simulate"}, {"params", fig2_params()},
              {"options", {{"x0", {1, 1, 1}}}}};
    CHECK_NOTHROW((void)parse_scenario(good));

    json bad = good;
    bad["action"] = "";
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
    bad = good;
    bad["action"] = "explode";
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
    bad = good;
    bad.erase("params");
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
    bad = good;
    bad["params"].erase("k2");
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
    bad = good;
    bad["params"]["extra"] = 1.0;
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
    bad = good;
    bad["params"]["b0"] = -1.0;
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
    bad = good;
    bad.erase("name");
    CHECK_THROWS_AS((void)parse_scenario(bad), ConfigError);
}

TEST_CASE("sweep grid validation") {
    SweepGrid g;
    CHECK_THROWS_AS(g.validate(), ConfigError); // no parameter
    g.param1 = "nope";
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.param1 = "k1";
    g.steps1 = 0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.steps1 = 3;
    g.min1 = 1.0;
    g.max1 = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.max1 = 2.0;
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("two-parameter sweep stays rectangular and row-major") {
    const ParamSet p = params_from_json(fig2_params());
    SweepGrid g;
    g.param1 = "k1";
    g.values1 = {0.5, 2.8};
    g.param2 = "d1";
    g.values2 = {0.8, 6.0};
    const SweepResult r = sweep(p, g, {0.8, 0.9, 1.1}, 300.0);
    REQUIRE(r.tags.size() == 4);
    for (const auto& tag : r.tags) CHECK_FALSE(tag.empty());
    // row-major: cell (param1 = 2.8, param2 = 6.0) is last; high attack rate
    // removes the infection regardless of k1.
    CHECK(r.tags[3] == "converged-E3");
    CHECK(r.tags[1] == "converged-E3");

    std::ostringstream os;
    write_sweep_csv(os, r);
    CHECK(os.str().rfind("k1,d1,outcome\n", 0) == 0);
}

TEST_CASE("degenerate 1x1 sweep equals a single classified run") {
    const ParamSet p = params_from_json(fig2_params());
    SweepGrid g;
    g.param1 = "k2";
    g.values1 = {1.8};
    const State x0{0.8, 0.9, 1.1};
    const SweepResult r = sweep(p, g, x0, 500.0);
    REQUIRE(r.tags.size() == 1);

    const Trajectory tr = integrate(p, x0, 500.0);
    const Event ep = classify_endpoint(p, tr);
    CHECK(r.tags[0] == "converged-" + ep.detail);
}

TEST_CASE("golden mismatch is reported, not thrown") {
    ScenarioSpec spec;
    spec.name = "mismatch-probe";
    spec.params = params_from_json(fig2_params());
    spec.action = "equilibria";
    spec.goldens = json::array({json{{"check", "equilibrium"},
                                     {"kind", "E3"},
                                     {"state", {9.9, 0.0, 9.9}},
                                     {"tol", 1e-3},
                                     {"label", "impossible"}}});
    RunConfig cfg;
    cfg.out_dir = fresh_tmp_dir("golden");
    const ScenarioResult res = run_scenario(spec, cfg);
    CHECK_FALSE(res.ok);
    REQUIRE(res.goldens.size() == 1);
    CHECK_FALSE(res.goldens[0].pass);
}

TEST_CASE("tolerance overrides apply by label") {
    ScenarioSpec spec;
    spec.name = "tol-probe";
    spec.params = params_from_json(fig2_params());
    spec.action = "equilibria";
    spec.goldens = json::array({json{{"check", "equilibrium"},
                                     {"kind", "E1"},
                                     {"state", {6.9, 0.0, 0.0}},
                                     {"tol", 1e-3},
                                     {"label", "loose-me"}}});
    RunConfig cfg;
    cfg.out_dir = fresh_tmp_dir("tol");
    CHECK_FALSE(run_scenario(spec, cfg).ok); // E1 sits at S = 6.8
    cfg.tol_overrides["loose-me"] = 0.2;
    CHECK(run_scenario(spec, cfg).ok);
}

TEST_CASE("identical scenarios produce byte-identical outputs") {
    const ScenarioSpec spec = load_scenario_file(scenario_dir() / "fig5-fte.json");
    RunConfig a, b;
    a.out_dir = fresh_tmp_dir("det-a");
    b.out_dir = fresh_tmp_dir("det-b");
    const ScenarioResult ra = run_scenario(spec, a);
    const ScenarioResult rb = run_scenario(spec, b);
    REQUIRE(ra.files_written.size() == 1);
    REQUIRE(rb.files_written.size() == 1);
    CHECK(slurp(ra.files_written[0]) == slurp(rb.files_written[0]));
    CHECK(!slurp(ra.files_written[0]).empty());
}

TEST_CASE("json mirror carries the csv field names") {
    const ScenarioSpec spec = load_scenario_file(scenario_dir() / "fig1b-sn-k2.json");
    RunConfig cfg;
    cfg.out_dir = fresh_tmp_dir("jsonfmt");
    cfg.format = "json";
    const ScenarioResult res = run_scenario(spec, cfg);
    REQUIRE(res.files_written.size() == 1);
    const json doc = json::parse(slurp(res.files_written[0]));
    REQUIRE(doc.contains("points"));
    const auto& row = doc["points"][0];
    for (const char* field : {"k2", "S", "I", "P", "psi1", "psi2", "psi3", "stable"})
        CHECK(row.contains(field));
}

TEST_CASE("catalog: unique names, figure coverage, full parameter sets") {
    REQUIRE(fs::is_directory(scenario_dir()));
    std::vector<std::string> names;
    bool fig[7] = {};
    for (const auto& entry : fs::directory_iterator(scenario_dir())) {
        if (entry.path().extension() != ".json") continue;
        const ScenarioSpec spec = load_scenario_file(entry.path()); // parses + validates
        CHECK(spec.name == entry.path().stem().string());
        names.push_back(spec.name);
        for (int i = 1; i <= 6; ++i)
            if (spec.name.rfind("fig" + std::to_string(i), 0) == 0) fig[i] = true;
    }
    std::sort(names.begin(), names.end());
    CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());
    for (int i = 1; i <= 6; ++i) CHECK(fig[i]);
    CHECK(names.size() >= 12);
}

} // TEST_SUITE
