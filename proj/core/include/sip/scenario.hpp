#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sip/continuation.hpp"
#include "sip/dynamics.hpp"

namespace sip {

/// One reproducible experiment: a full parameter set (no hidden defaults),
/// an action, action-specific options, and optional golden values with
/// tolerances against which the run is checked.
struct ScenarioSpec {
    std::string name;
    ParamSet params{};
    std::string action; ///< simulate | equilibria | continue1 | continue2 | sweep
    nlohmann::json options;
    nlohmann::json goldens; ///< array; empty means nothing to check
};

/// Parses and validates a scenario document. Throws ConfigError on missing or
/// malformed fields (unknown action, incomplete parameter set, bad ranges).
ScenarioSpec parse_scenario(const nlohmann::json& doc);
ScenarioSpec load_scenario_file(const std::filesystem::path& file);

struct RunConfig {
    std::filesystem::path out_dir = ".";
    std::string format = "csv"; ///< csv | json
    std::map<std::string, double> tol_overrides;
};

struct GoldenOutcome {
    std::string label;
    bool pass;
    std::string detail;
};

struct ScenarioResult {
    bool ok = true;
    std::vector<GoldenOutcome> goldens;
    std::vector<std::filesystem::path> files_written;
    std::string summary;
};

/// Dispatches to the owning module, writes outputs under cfg.out_dir and
/// compares any golden values. Numerical failures propagate as exceptions;
/// golden mismatches are reported in the result (callers decide the exit
/// status).
ScenarioResult run_scenario(const ScenarioSpec& spec, const RunConfig& cfg);

/// Rectangular two-parameter sweep evaluated by integrating from x0 and
/// classifying the endpoint of each cell.
struct SweepGrid {
    std::string param1, param2;
    double min1 = 0.0, max1 = 0.0;
    int steps1 = 2;
    double min2 = 0.0, max2 = 0.0;
    int steps2 = 2;
    /// Explicit axis values override min/max/steps when nonempty; the grid
    /// stays rectangular either way.
    std::vector<double> values1, values2;

    void validate() const; ///< ConfigError on bad names, ranges or step counts
};

struct SweepResult {
    SweepGrid grid;
    std::vector<std::string> tags; ///< row-major, steps1 x steps2 outcome tags
};

SweepResult sweep(const ParamSet& p, const SweepGrid& grid, const State& x0,
                  double t_max = 500.0);

void write_sweep_csv(std::ostream& os, const SweepResult& r);
std::string sweep_json(const SweepResult& r);

/// Environment variable consulted when no --out-dir flag is given.
inline constexpr const char* kOutDirEnvVar = "SIPDYN_OUT_DIR";

ParamSet params_from_json(const nlohmann::json& j); ///< all 13 fields required

} // namespace sip
