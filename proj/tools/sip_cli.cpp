// Command-line front end: single runs, branch continuations, sweeps, and the
// scenario catalog with golden-value checks.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sip/errors.hpp"
#include "sip/export.hpp"
#include "sip/scenario.hpp"
#include "sip/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitGolden = 3;
constexpr int kExitNumerical = 4;

sip::ParamSet load_params(const std::string& file, const std::vector<std::string>& overrides) {
    std::ifstream in(file);
    if (!in) throw sip::ConfigError("cannot open params file: " + file);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw sip::ConfigError(std::string("params parse error: ") + e.what());
    }
    json pj = doc.contains("params") ? doc.at("params") : doc;
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw sip::ConfigError("--set expects name=value: " + kv);
        pj[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    return sip::params_from_json(pj);
}

std::vector<double> parse_csv_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

int finish_scenario(const sip::ScenarioResult& res) {
    for (const auto& g : res.goldens)
        std::cout << "  [" << (g.pass ? "PASS" : "FAIL") << "] " << g.label << ": " << g.detail
                  << '\n';
    for (const auto& f : res.files_written) std::cout << "  wrote " << f.string() << '\n';
    std::cout << res.summary << '\n';
    return res.ok ? kExitOk : kExitGolden;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sipdyn: equilibria, stability, bifurcation and simulation toolkit "
                 "for a susceptible-infectious-predator model with dual fear effects"};
    app.require_subcommand(1);

    sip::RunConfig cfg;
    if (const char* env = std::getenv(sip::kOutDirEnvVar)) cfg.out_dir = env;
    std::string tol_overrides;
    app.add_option("--out-dir", cfg.out_dir, "Directory for emitted files");
    app.add_option("--format", cfg.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--tol-overrides", tol_overrides,
                   "Comma-separated label=tol pairs overriding golden tolerances");

    std::string params_file;
    std::vector<std::string> sets;
    std::string name = "run";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--params", params_file, "JSON file with the 13 model parameters")
            ->required();
        sub->add_option("--set", sets, "Override a parameter, e.g. --set k1=0.2");
        sub->add_option("--name", name, "Base name for emitted files");
    };

    auto* sim = app.add_subcommand("simulate", "Integrate the model from an initial state");
    std::string x0_str = "1,1,1";
    double t_max = 500.0;
    int samples = 2000;
    double eps_ext = 1e-6;
    bool after_fte = false, stop_conv = false;
    add_common(sim);
    sim->add_option("--x0", x0_str, "Initial state S,I,P")->required();
    sim->add_option("--t-max", t_max, "Integration horizon");
    sim->add_option("--samples", samples, "Number of output samples");
    sim->add_option("--eps-ext", eps_ext, "Numerical extinction threshold for S");
    sim->add_flag("--continue-after-fte", after_fte, "Continue on the reduced subsystem");
    sim->add_flag("--stop-on-converged", stop_conv, "Stop once converged onto an equilibrium");

    auto* eq = app.add_subcommand("equilibria", "List all equilibria with residuals");
    add_common(eq);

    auto* cls = app.add_subcommand("classify", "Stability report for an equilibrium");
    std::string kind = "E4";
    int index = 0;
    add_common(cls);
    cls->add_option("--kind", kind, "Equilibrium kind: E1, E2, E3 or E4");
    cls->add_option("--index", index, "Root index for multi-root kinds");

    auto* c1 = app.add_subcommand("continue1", "One-parameter equilibrium continuation");
    std::string free1, range_str, seed_kind = "E4";
    double seed_at = 0.0;
    bool seed_at_given = false;
    int seed_index = 0;
    add_common(c1);
    c1->add_option("--free", free1, "Free parameter name")->required();
    c1->add_option("--range", range_str, "Parameter range lo:hi")->required();
    c1->add_option("--seed-kind", seed_kind, "Seed equilibrium kind (E3 or E4)");
    c1->add_option("--seed-at", seed_at, "Free-parameter value at which to seed")
        ->each([&](const std::string&) { seed_at_given = true; });
    c1->add_option("--seed-index", seed_index, "Seed root index");

    auto* c2 = app.add_subcommand("continue2", "Two-parameter fold-curve continuation");
    std::string free2, seed_free, seed_range;
    add_common(c2);
    c2->add_option("--free", free2, "Two free parameters, e.g. k2,K")->required();
    c2->add_option("--seed-free", seed_free, "Parameter for the seeding fold search")->required();
    c2->add_option("--seed-range", seed_range, "Range lo:hi for the seeding fold search")
        ->required();
    c2->add_option("--seed-kind", seed_kind, "Seed equilibrium kind");
    c2->add_option("--seed-at", seed_at, "Seed parameter value")
        ->each([&](const std::string&) { seed_at_given = true; });
    c2->add_option("--seed-index", seed_index, "Seed root index");

    auto* sw = app.add_subcommand("sweep", "Grid sweep with endpoint classification");
    std::string p1, p2, v1_str, v2_str;
    double min1 = 0, max1 = 0, min2 = 0, max2 = 0;
    int steps1 = 1, steps2 = 1;
    add_common(sw);
    sw->add_option("--param1", p1, "First sweep parameter")->required();
    sw->add_option("--values1", v1_str, "Explicit values for param1, comma separated");
    sw->add_option("--min1", min1, "Axis 1 minimum");
    sw->add_option("--max1", max1, "Axis 1 maximum");
    sw->add_option("--steps1", steps1, "Axis 1 steps");
    sw->add_option("--param2", p2, "Second sweep parameter");
    sw->add_option("--values2", v2_str, "Explicit values for param2");
    sw->add_option("--min2", min2, "Axis 2 minimum");
    sw->add_option("--max2", max2, "Axis 2 maximum");
    sw->add_option("--steps2", steps2, "Axis 2 steps");
    sw->add_option("--x0", x0_str, "Initial state S,I,P")->required();
    sw->add_option("--t-max", t_max, "Integration horizon per cell");

    auto* sc = app.add_subcommand("scenario", "Run a named scenario (or --all) from the catalog");
    std::string scenario_name;
    bool all = false;
    std::string scenario_dir = "scenarios";
    sc->add_option("name", scenario_name, "Scenario name (file name without .json)");
    sc->add_flag("--all", all, "Run every scenario in the catalog");
    sc->add_option("--dir", scenario_dir, "Scenario catalog directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!tol_overrides.empty()) {
            std::stringstream ss(tol_overrides);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const auto eq_pos = tok.find('=');
                if (eq_pos == std::string::npos)
                    throw sip::ConfigError("--tol-overrides expects label=value pairs");
                cfg.tol_overrides[tok.substr(0, eq_pos)] = std::stod(tok.substr(eq_pos + 1));
            }
        }

        if (sc->parsed()) {
            std::vector<fs::path> files;
            if (all) {
                if (!fs::is_directory(scenario_dir))
                    throw sip::ConfigError("scenario directory not found: " + scenario_dir);
                for (const auto& e : fs::directory_iterator(scenario_dir))
                    if (e.path().extension() == ".json") files.push_back(e.path());
                std::sort(files.begin(), files.end());
                if (files.empty()) throw sip::ConfigError("no scenarios in " + scenario_dir);
            } else {
                if (scenario_name.empty())
                    throw sip::ConfigError("scenario requires a name or --all");
                files.push_back(fs::path(scenario_dir) / (scenario_name + ".json"));
            }
            bool all_ok = true;
            for (const auto& f : files) {
                const sip::ScenarioSpec spec = sip::load_scenario_file(f);
                std::cout << "== " << spec.name << '\n';
                all_ok &= finish_scenario(sip::run_scenario(spec, cfg)) == kExitOk;
            }
            return all_ok ? kExitOk : kExitGolden;
        }

        const sip::ParamSet params = load_params(params_file, sets);

        if (cls->parsed()) {
            sip::Equilibrium e;
            if (kind == "E1") {
                e = sip::equilibrium_E1(params);
            } else if (kind == "E2") {
                e = sip::equilibrium_E2(params);
            } else if (kind == "E3") {
                e = sip::equilibrium_E3(params).at(static_cast<std::size_t>(index));
            } else if (kind == "E4") {
                e = sip::equilibrium_E4(params).at(static_cast<std::size_t>(index));
            } else {
                throw sip::ConfigError("unknown equilibrium kind: " + kind);
            }
            const sip::StabilityReport rep = sip::classify(params, e);
            std::cout << sip::to_string(e.kind) << " at (" << sip::format_double(e.location.S)
                      << ", " << sip::format_double(e.location.I) << ", "
                      << sip::format_double(e.location.P) << ")\n"
                      << "residual " << sip::format_double(e.residual) << '\n';
            for (const auto& ev : rep.eigenvalues)
                std::cout << "lambda = " << sip::format_double(ev.real()) << " + "
                          << sip::format_double(ev.imag()) << "i\n";
            std::cout << "psi = (" << sip::format_double(rep.psi1) << ", "
                      << sip::format_double(rep.psi2) << ", " << sip::format_double(rep.psi3)
                      << ")\nverdict: " << sip::to_string(rep.verdict) << '\n';
            return kExitOk;
        }

        sip::ScenarioSpec spec;
        spec.name = name;
        spec.params = params;
        json& o = spec.options;
        if (sim->parsed()) {
            spec.action = "simulate";
            o["x0"] = parse_csv_doubles(x0_str);
            o["t_max"] = t_max;
            o["samples"] = samples;
            o["eps_ext"] = eps_ext;
            o["continue_after_fte"] = after_fte;
            o["stop_on_converged"] = stop_conv;
        } else if (eq->parsed()) {
            spec.action = "equilibria";
        } else if (c1->parsed()) {
            spec.action = "continue1";
            const auto colon = range_str.find(':');
            if (colon == std::string::npos) throw sip::ConfigError("--range expects lo:hi");
            o["free"] = free1;
            o["range"] = {std::stod(range_str.substr(0, colon)),
                          std::stod(range_str.substr(colon + 1))};
            o["seed"] = {{"kind", seed_kind}, {"index", seed_index}};
            if (seed_at_given) o["seed_at"] = seed_at;
        } else if (c2->parsed()) {
            spec.action = "continue2";
            const auto comma = free2.find(',');
            if (comma == std::string::npos) throw sip::ConfigError("--free expects p1,p2");
            o["free"] = {free2.substr(0, comma), free2.substr(comma + 1)};
            const auto colon = seed_range.find(':');
            if (colon == std::string::npos) throw sip::ConfigError("--seed-range expects lo:hi");
            json sb;
            sb["free"] = seed_free;
            sb["range"] = {std::stod(seed_range.substr(0, colon)),
                           std::stod(seed_range.substr(colon + 1))};
            sb["seed"] = {{"kind", seed_kind}, {"index", seed_index}};
            if (seed_at_given) sb["seed_at"] = seed_at;
            o["seed_branch"] = sb;
        } else if (sw->parsed()) {
            spec.action = "sweep";
            o["param1"] = p1;
            if (!v1_str.empty()) o["values1"] = parse_csv_doubles(v1_str);
            o["min1"] = min1;
            o["max1"] = max1;
            o["steps1"] = steps1;
            if (!p2.empty()) {
                o["param2"] = p2;
                if (!v2_str.empty()) o["values2"] = parse_csv_doubles(v2_str);
                o["min2"] = min2;
                o["max2"] = max2;
                o["steps2"] = steps2;
            }
            o["x0"] = parse_csv_doubles(x0_str);
            o["t_max"] = t_max;
        } else {
            throw sip::ConfigError("no subcommand selected");
        }
        return finish_scenario(sip::run_scenario(spec, cfg));
    } catch (const sip::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sip::GoldenMismatchError& e) {
        std::cerr << "golden mismatch: " << e.what() << '\n';
        return kExitGolden;
    } catch (const sip::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
