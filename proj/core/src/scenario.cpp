#include "sip/scenario.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "sip/errors.hpp"
#include "sip/export.hpp"

namespace sip {

using nlohmann::json;

ParamSet params_from_json(const json& j) {
    static constexpr const char* kNames[] = {"b0", "r",  "e0", "K",  "a0", "a1", "a2",
                                             "d0", "d1", "d2", "d3", "k1", "k2"};
    if (!j.is_object()) throw ConfigError("params must be an object");
    ParamSet p{};
    for (const char* name : kNames) {
        if (!j.contains(name) || !j.at(name).is_number())
            throw ConfigError(std::string("params missing numeric field: ") + name);
        param_set(p, name, j.at(name).get<double>());
    }
    for (const auto& [key, _] : j.items())
        if (!param_exists(key)) throw ConfigError("unknown parameter in params: " + key);
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid params: ") + e.what());
    }
    return p;
}

ScenarioSpec parse_scenario(const json& doc) {
    if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
    ScenarioSpec spec;
    if (!doc.contains("name") || !doc.at("name").is_string() || doc.at("name").get<std::string>().empty())
        throw ConfigError("scenario requires a nonempty name");
    spec.name = doc.at("name").get<std::string>();
    if (!doc.contains("action") || !doc.at("action").is_string())
        throw ConfigError("scenario requires an action");
    spec.action = doc.at("action").get<std::string>();
    static const char* kActions[] = {"simulate", "equilibria", "continue1", "continue2", "sweep"};
    bool known = false;
    for (const char* a : kActions) known |= spec.action == a;
    if (!known) throw ConfigError("unknown action: " + spec.action);
    if (!doc.contains("params")) throw ConfigError("scenario requires explicit params");
    spec.params = params_from_json(doc.at("params"));
    spec.options = doc.value("options", json::object());
    spec.goldens = doc.value("goldens", json::array());
    if (!spec.goldens.is_array()) throw ConfigError("goldens must be an array");
    return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open scenario file: " + file.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("scenario parse error in " + file.string() + ": " + e.what());
    }
    return parse_scenario(doc);
}

void SweepGrid::validate() const {
    auto check_axis = [](const std::string& name, int steps, double lo, double hi,
                         const std::vector<double>& values) {
        if (!values.empty()) return;
        if (name.empty()) return;
        if (steps < 1) throw ConfigError("sweep steps must be >= 1");
        if (steps > 1 && !(hi > lo)) throw ConfigError("sweep range must be increasing");
    };
    if (param1.empty()) throw ConfigError("sweep requires at least one parameter");
    if (!param_exists(param1)) throw ConfigError("unknown sweep parameter: " + param1);
    if (!param2.empty() && !param_exists(param2))
        throw ConfigError("unknown sweep parameter: " + param2);
    check_axis(param1, steps1, min1, max1, values1);
    check_axis(param2, steps2, min2, max2, values2);
}

namespace {

std::vector<double> axis_values(double lo, double hi, int steps,
                                const std::vector<double>& explicit_values) {
    if (!explicit_values.empty()) return explicit_values;
    std::vector<double> v;
    if (steps <= 1) {
        v.push_back(lo);
        return v;
    }
    for (int i = 0; i < steps; ++i)
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    return v;
}

std::string outcome_tag(const ParamSet& p, const Trajectory& traj) {
    try {
        const Event ev = classify_endpoint(p, traj);
        switch (ev.kind) {
            case EventKind::Converged: return "converged-" + ev.detail;
            case EventKind::FTE: return "fte";
            case EventKind::IExtinct: return "i-extinct";
            case EventKind::Oscillatory: return ev.detail;
            case EventKind::BoundViolation: return "bound-violation";
        }
    } catch (const AmbiguousEndpointError&) {
        return "error:ambiguous";
    }
    return "unknown";
}

} // namespace

SweepResult sweep(const ParamSet& p, const SweepGrid& grid, const State& x0, double t_max) {
    grid.validate();
    SweepResult out;
    out.grid = grid;
    const auto v1 = axis_values(grid.min1, grid.max1, grid.steps1, grid.values1);
    const auto v2 = grid.param2.empty()
                        ? std::vector<double>{0.0}
                        : axis_values(grid.min2, grid.max2, grid.steps2, grid.values2);
    for (double a : v1) {
        for (double b : v2) {
            ParamSet q = p;
            param_set(q, grid.param1, a);
            if (!grid.param2.empty()) param_set(q, grid.param2, b);
            std::string tag;
            try {
                const Trajectory traj = integrate(q, x0, t_max);
                tag = outcome_tag(q, traj);
            } catch (const Error& e) {
                tag = std::string("error:") + e.what();
            }
            out.tags.push_back(tag);
        }
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    const auto v1 = axis_values(r.grid.min1, r.grid.max1, r.grid.steps1, r.grid.values1);
    const auto v2 = r.grid.param2.empty()
                        ? std::vector<double>{0.0}
                        : axis_values(r.grid.min2, r.grid.max2, r.grid.steps2, r.grid.values2);
    os << r.grid.param1;
    if (!r.grid.param2.empty()) os << ',' << r.grid.param2;
    os << ",outcome\n";
    std::size_t idx = 0;
    for (double a : v1)
        for (double b : v2) {
            os << format_double(a);
            if (!r.grid.param2.empty()) os << ',' << format_double(b);
            os << ',' << r.tags[idx++] << '\n';
        }
}

std::string sweep_json(const SweepResult& r) {
    const auto v1 = axis_values(r.grid.min1, r.grid.max1, r.grid.steps1, r.grid.values1);
    const auto v2 = r.grid.param2.empty()
                        ? std::vector<double>{0.0}
                        : axis_values(r.grid.min2, r.grid.max2, r.grid.steps2, r.grid.values2);
    json j;
    j["cells"] = json::array();
    std::size_t idx = 0;
    for (double a : v1)
        for (double b : v2) {
            json cell{{r.grid.param1, a}, {"outcome", r.tags[idx++]}};
            if (!r.grid.param2.empty()) cell[r.grid.param2] = b;
            j["cells"].push_back(cell);
        }
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// scenario dispatch
// ---------------------------------------------------------------------------

namespace {

struct ActionOutput {
    std::optional<Trajectory> traj;
    std::vector<Branch> branches;
    std::vector<Equilibrium> equilibria;
    std::optional<SweepResult> sweep_result;
    std::optional<SelectivePredationCheck> predation;
    ParamSet params{};
};

State x0_from_options(const json& opts) {
    if (!opts.contains("x0") || !opts.at("x0").is_array() || opts.at("x0").size() != 3)
        throw ConfigError("options.x0 must be an array of three densities");
    const State x0{opts.at("x0")[0].get<double>(), opts.at("x0")[1].get<double>(),
                   opts.at("x0")[2].get<double>()};
    if (!x0.nonnegative()) throw ConfigError("options.x0 must be nonnegative");
    return x0;
}

Equilibrium seed_from_options(const ParamSet& p, const json& seed) {
    const std::string kind = seed.value("kind", "E4");
    const int index = seed.value("index", 0);
    if (kind == "E3") {
        auto roots = equilibrium_E3(p);
        if (index < 0 || static_cast<std::size_t>(index) >= roots.size())
            throw ConfigError("seed index out of range for E3 roots");
        return roots[static_cast<std::size_t>(index)];
    }
    if (kind == "E4") {
        auto roots = equilibrium_E4(p);
        if (index < 0 || static_cast<std::size_t>(index) >= roots.size())
            throw ConfigError("seed index out of range for E4 roots");
        return roots[static_cast<std::size_t>(index)];
    }
    throw ConfigError("seed kind must be E3 or E4");
}

std::pair<double, double> range_from(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be [lo, hi]");
    const double lo = j[0].get<double>(), hi = j[1].get<double>();
    if (!(hi > lo)) throw ConfigError(std::string(what) + " must be increasing");
    return {lo, hi};
}

Branch run_continue1(const ParamSet& base, const json& branch_opts) {
    const std::string free = branch_opts.value("free", "");
    if (free.empty()) throw ConfigError("continue1 requires options.free");
    const auto range = range_from(branch_opts.at("range"), "range");
    ParamSet p = base;
    if (branch_opts.contains("seed_at"))
        param_set(p, free, branch_opts.at("seed_at").get<double>());
    const Equilibrium seed = seed_from_options(p, branch_opts.value("seed", json::object()));
    return continue_branch(p, free, range, seed);
}

ActionOutput dispatch(const ScenarioSpec& spec) {
    ActionOutput out;
    out.params = spec.params;
    const json& o = spec.options;

    if (spec.action == "simulate") {
        const State x0 = x0_from_options(o);
        const double t_max = o.value("t_max", 500.0);
        IntegrateOptions iopts;
        iopts.output_samples = o.value("samples", 2000);
        iopts.eps_ext = o.value("eps_ext", 1e-6);
        iopts.continue_after_fte = o.value("continue_after_fte", false);
        iopts.stop_on_converged = o.value("stop_on_converged", false);
        out.traj = integrate(spec.params, x0, t_max, iopts);
        out.predation = check_selective_predation_threshold(spec.params);
        return out;
    }
    if (spec.action == "equilibria") {
        out.equilibria = all_equilibria(spec.params);
        return out;
    }
    if (spec.action == "continue1") {
        if (o.contains("branches")) {
            for (const auto& b : o.at("branches")) out.branches.push_back(run_continue1(spec.params, b));
        } else {
            out.branches.push_back(run_continue1(spec.params, o));
        }
        return out;
    }
    if (spec.action == "continue2") {
        if (!o.contains("seed_branch")) throw ConfigError("continue2 requires options.seed_branch");
        const Branch seed_branch = run_continue1(spec.params, o.at("seed_branch"));
        const BifurcationPoint* sn = nullptr;
        for (const auto& bp : seed_branch.bif_points)
            if (bp.kind == BifKind::SN) {
                sn = &bp;
                break;
            }
        if (!sn) throw SeedResidualError("no SN point found on the seed branch");
        if (!o.contains("free") || !o.at("free").is_array() || o.at("free").size() != 2)
            throw ConfigError("continue2 requires options.free = [p1, p2]");
        const std::array<std::string, 2> free{o.at("free")[0].get<std::string>(),
                                              o.at("free")[1].get<std::string>()};
        ParamSet p = spec.params;
        param_set(p, sn->free_names[0], sn->params[0]);
        out.branches.push_back(continue_fold_curve(p, free, *sn));
        return out;
    }
    if (spec.action == "sweep") {
        SweepGrid grid;
        grid.param1 = o.value("param1", "");
        grid.param2 = o.value("param2", "");
        grid.min1 = o.value("min1", 0.0);
        grid.max1 = o.value("max1", 0.0);
        grid.steps1 = o.value("steps1", 1);
        grid.min2 = o.value("min2", 0.0);
        grid.max2 = o.value("max2", 0.0);
        grid.steps2 = o.value("steps2", 1);
        if (o.contains("values1")) grid.values1 = o.at("values1").get<std::vector<double>>();
        if (o.contains("values2")) grid.values2 = o.at("values2").get<std::vector<double>>();
        out.sweep_result = sweep(spec.params, grid, x0_from_options(o), o.value("t_max", 500.0));
        return out;
    }
    throw ConfigError("unhandled action: " + spec.action);
}

// --------------------------- golden evaluation ----------------------------

bool state_within(const State& got, const json& want, double tol) {
    return std::fabs(got.S - want[0].get<double>()) <= tol &&
           std::fabs(got.I - want[1].get<double>()) <= tol &&
           std::fabs(got.P - want[2].get<double>()) <= tol;
}

std::string state_str(const State& x) {
    std::ostringstream os;
    os << '(' << format_double(x.S) << ", " << format_double(x.I) << ", " << format_double(x.P)
       << ')';
    return os.str();
}

GoldenOutcome check_bifurcation(const ActionOutput& out, const json& g, const std::string& label) {
    const std::string kind_s = g.at("kind").get<std::string>();
    std::string best_detail = "no " + kind_s + " point detected";
    for (const auto& branch : out.branches) {
        for (const auto& bp : branch.bif_points) {
            if (std::string(to_string(bp.kind)) != kind_s) continue;
            std::ostringstream det;
            det << kind_s << " at " << format_double(bp.params[0]);
            if (bp.n_params == 2) det << ", " << format_double(bp.params[1]);
            det << " state " << state_str(bp.location);
            bool ok = std::fabs(bp.params[0] - g.at("value").get<double>()) <=
                      g.at("tol").get<double>();
            if (g.contains("value2"))
                ok = ok && bp.n_params == 2 &&
                     std::fabs(bp.params[1] - g.at("value2").get<double>()) <=
                         g.value("tol2", g.at("tol").get<double>());
            if (ok && g.contains("state"))
                ok = state_within(bp.location, g.at("state"), g.value("state_tol", 1e-2));
            if (ok && g.contains("omega")) {
                det << " omega " << format_double(bp.omega);
                ok = std::fabs(bp.omega - g.at("omega").get<double>()) <= g.value("omega_tol", 0.02);
            }
            if (ok && g.contains("l1_sign")) {
                det << " l1 " << format_double(bp.lyapunov_l1);
                ok = bp.lyapunov_valid &&
                     bp.lyapunov_l1 * g.at("l1_sign").get<double>() > 0.0;
            }
            if (ok && g.contains("zero_eig_tol")) {
                double min_abs = 1e300;
                for (const auto& ev : bp.eigenvalues) min_abs = std::min(min_abs, std::abs(ev));
                ok = min_abs <= g.at("zero_eig_tol").get<double>();
            }
            if (ok && g.contains("i_tol"))
                ok = std::fabs(bp.location.I) <= g.at("i_tol").get<double>();
            if (ok) return {label, true, det.str()};
            best_detail = det.str();
        }
    }
    return {label, false, best_detail};
}

GoldenOutcome check_one(const ActionOutput& out, const json& g) {
    const std::string check = g.value("check", "");
    const std::string label = g.value("label", check);
    if (check == "bifurcation") return check_bifurcation(out, g, label);
    if (check == "event") {
        if (!out.traj) return {label, false, "no trajectory produced"};
        const std::string kind_s = g.at("kind").get<std::string>();
        for (const auto& ev : out.traj->events) {
            if (std::string(to_string(ev.kind)) != kind_s) continue;
            const bool ok = std::fabs(ev.time - g.at("time").get<double>()) <=
                            g.at("tol").get<double>();
            return {label, ok, kind_s + " at t = " + format_double(ev.time)};
        }
        return {label, false, "no " + kind_s + " event"};
    }
    if (check == "endpoint") {
        if (!out.traj) return {label, false, "no trajectory produced"};
        Event ev;
        try {
            ev = classify_endpoint(out.params, *out.traj);
        } catch (const AmbiguousEndpointError& e) {
            return {label, false, e.what()};
        }
        std::string cls;
        switch (ev.kind) {
            case EventKind::Converged: cls = ev.detail; break;
            case EventKind::Oscillatory: cls = ev.detail; break;
            default: cls = to_string(ev.kind);
        }
        bool ok = cls == g.at("class").get<std::string>();
        if (ok && g.contains("state"))
            ok = state_within(ev.state, g.at("state"), g.value("tol", 1e-3));
        return {label, ok, "endpoint " + cls + " at " + state_str(ev.state)};
    }
    if (check == "threshold") {
        if (!out.predation) return {label, false, "no threshold computed"};
        const bool ok = std::fabs(out.predation->threshold - g.at("value").get<double>()) <=
                        g.value("tol", 0.0);
        GoldenOutcome res{label, ok, "threshold = " + format_double(out.predation->threshold)};
        if (g.contains("predicted_extinct") && res.pass)
            res.pass = out.predation->predicted_extinct == g.at("predicted_extinct").get<bool>();
        return res;
    }
    if (check == "equilibrium") {
        const std::string kind_s = g.at("kind").get<std::string>();
        for (const auto& e : out.equilibria) {
            if (std::string(to_string(e.kind)) != kind_s) continue;
            if (state_within(e.location, g.at("state"), g.value("tol", 1e-2)))
                return {label, true, kind_s + " at " + state_str(e.location)};
        }
        return {label, false, "no matching " + kind_s};
    }
    if (check == "tags") {
        if (!out.sweep_result) return {label, false, "no sweep result"};
        const auto want = g.at("values").get<std::vector<std::string>>();
        const bool ok = want == out.sweep_result->tags;
        std::string got;
        for (const auto& t : out.sweep_result->tags) got += t + ";";
        return {label, ok, "tags = " + got};
    }
    throw ConfigError("unknown golden check kind: " + check);
}

} // namespace

ScenarioResult run_scenario(const ScenarioSpec& spec, const RunConfig& cfg) {
    if (spec.action.empty()) throw ConfigError("scenario action empty");
    const ActionOutput out = dispatch(spec);

    ScenarioResult result;
    std::filesystem::create_directories(cfg.out_dir);
    auto emit = [&](const std::string& suffix, auto&& csv_writer, const std::string& json_text) {
        if (cfg.format == "json") {
            const auto path = cfg.out_dir / (spec.name + "-" + suffix + ".json");
            std::ofstream f(path);
            f << json_text << '\n';
            result.files_written.push_back(path);
        } else {
            const auto path = cfg.out_dir / (spec.name + "-" + suffix + ".csv");
            std::ofstream f(path);
            csv_writer(f);
            result.files_written.push_back(path);
        }
    };

    if (out.traj)
        emit("trajectory", [&](std::ostream& os) { write_trajectory_csv(os, *out.traj); },
             trajectory_json(*out.traj));
    for (std::size_t i = 0; i < out.branches.size(); ++i) {
        const std::string suffix =
            out.branches.size() == 1 ? "branch" : "branch" + std::to_string(i);
        emit(suffix, [&](std::ostream& os) { write_branch_csv(os, out.branches[i]); },
             branch_json(out.branches[i]));
    }
    if (!out.equilibria.empty()) {
        emit("equilibria",
             [&](std::ostream& os) {
                 os << "kind,S,I,P,residual\n";
                 for (const auto& e : out.equilibria)
                     os << to_string(e.kind) << ',' << format_double(e.location.S) << ','
                        << format_double(e.location.I) << ',' << format_double(e.location.P)
                        << ',' << format_double(e.residual) << '\n';
             },
             [&] {
                 json j = json::array();
                 for (const auto& e : out.equilibria)
                     j.push_back({{"kind", to_string(e.kind)},
                                  {"S", e.location.S},
                                  {"I", e.location.I},
                                  {"P", e.location.P},
                                  {"residual", e.residual}});
                 return j.dump(2);
             }());
    }
    if (out.sweep_result)
        emit("sweep", [&](std::ostream& os) { write_sweep_csv(os, *out.sweep_result); },
             sweep_json(*out.sweep_result));

    for (const auto& g : spec.goldens) {
        json gg = g;
        const auto it = cfg.tol_overrides.find(gg.value("label", gg.value("check", "")));
        if (it != cfg.tol_overrides.end()) gg["tol"] = it->second;
        GoldenOutcome oc = check_one(out, gg);
        result.ok = result.ok && oc.pass;
        result.goldens.push_back(std::move(oc));
    }
    std::ostringstream sum;
    sum << spec.name << ": " << (result.ok ? "ok" : "GOLDEN MISMATCH") << " ("
        << result.goldens.size() << " checks, " << result.files_written.size() << " files)";
    result.summary = sum.str();
    return result;
}

} // namespace sip
