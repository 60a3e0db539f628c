#include "sip/export.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace sip {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,S,I,P\n";
    for (const auto& [t, x] : traj.samples)
        os << format_double(t) << ',' << format_double(x.S) << ',' << format_double(x.I) << ','
           << format_double(x.P) << '\n';
    for (const auto& ev : traj.events)
        os << "# event," << to_string(ev.kind) << ',' << format_double(ev.time) << ','
           << format_double(ev.state.S) << ',' << format_double(ev.state.I) << ','
           << format_double(ev.state.P) << '\n';
}

void write_branch_csv(std::ostream& os, const Branch& branch) {
    const bool two = branch.free_params.size() == 2;
    os << branch.free_params[0];
    if (two) os << ',' << branch.free_params[1];
    os << ",S,I,P,psi1,psi2,psi3,stable\n";
    for (const auto& pt : branch.points) {
        os << format_double(pt.params[0]);
        if (two) os << ',' << format_double(pt.params[1]);
        os << ',' << format_double(pt.eq.location.S) << ',' << format_double(pt.eq.location.I)
           << ',' << format_double(pt.eq.location.P) << ',' << format_double(pt.stab.psi1)
           << ',' << format_double(pt.stab.psi2) << ',' << format_double(pt.stab.psi3) << ','
           << (pt.stab.verdict == Verdict::Stable ? 1 : 0) << '\n';
    }
    for (const auto& bp : branch.bif_points) {
        os << "# bif," << to_string(bp.kind) << ',' << format_double(bp.params[0]);
        if (bp.n_params == 2) os << ',' << format_double(bp.params[1]);
        os << ',' << format_double(bp.location.S) << ',' << format_double(bp.location.I) << ','
           << format_double(bp.location.P) << '\n';
    }
}

namespace {

nlohmann::json event_json(const Event& ev) {
    return {{"kind", to_string(ev.kind)},
            {"t", ev.time},
            {"S", ev.state.S},
            {"I", ev.state.I},
            {"P", ev.state.P},
            {"detail", ev.detail}};
}

} // namespace

std::string trajectory_json(const Trajectory& traj) {
    nlohmann::json j;
    j["samples"] = nlohmann::json::array();
    for (const auto& [t, x] : traj.samples)
        j["samples"].push_back({{"t", t}, {"S", x.S}, {"I", x.I}, {"P", x.P}});
    j["events"] = nlohmann::json::array();
    for (const auto& ev : traj.events) j["events"].push_back(event_json(ev));
    j["terminated_by"] = to_string(traj.terminated_by);
    return j.dump(2);
}

std::string branch_json(const Branch& branch) {
    nlohmann::json j;
    j["free_params"] = branch.free_params;
    j["points"] = nlohmann::json::array();
    const bool two = branch.free_params.size() == 2;
    for (const auto& pt : branch.points) {
        nlohmann::json row{{branch.free_params[0], pt.params[0]},
                           {"S", pt.eq.location.S},
                           {"I", pt.eq.location.I},
                           {"P", pt.eq.location.P},
                           {"psi1", pt.stab.psi1},
                           {"psi2", pt.stab.psi2},
                           {"psi3", pt.stab.psi3},
                           {"stable", pt.stab.verdict == Verdict::Stable ? 1 : 0}};
        if (two) row[branch.free_params[1]] = pt.params[1];
        j["points"].push_back(row);
    }
    j["bif_points"] = nlohmann::json::array();
    for (const auto& bp : branch.bif_points) {
        nlohmann::json row{{"kind", to_string(bp.kind)},
                           {"S", bp.location.S},
                           {"I", bp.location.I},
                           {"P", bp.location.P}};
        for (int i = 0; i < bp.n_params; ++i)
            row[bp.free_names[static_cast<std::size_t>(i)].empty()
                    ? ("param" + std::to_string(i + 1))
                    : bp.free_names[static_cast<std::size_t>(i)]] = bp.params[static_cast<std::size_t>(i)];
        if (bp.kind == BifKind::Hopf) {
            row["omega"] = bp.omega;
            if (bp.lyapunov_valid) row["l1"] = bp.lyapunov_l1;
        }
        if (bp.kind == BifKind::ZH) row["omega"] = bp.omega;
        j["bif_points"].push_back(row);
    }
    return j.dump(2);
}

} // namespace sip
