#pragma once

#include <iosfwd>
#include <string>

#include "sip/continuation.hpp"
#include "sip/dynamics.hpp"

namespace sip {

/// Trajectory CSV: header `t,S,I,P`, one row per sample, events appended as
/// comment lines `# event,<kind>,<t>,<S>,<I>,<P>`. Deterministic formatting.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Branch CSV: `param1[,param2],S,I,P,psi1,psi2,psi3,stable`, bifurcation
/// points as comment rows `# bif,<kind>,<params>,<S>,<I>,<P>`.
void write_branch_csv(std::ostream& os, const Branch& branch);

/// JSON mirrors with field names identical to the CSV columns.
std::string trajectory_json(const Trajectory& traj);
std::string branch_json(const Branch& branch);

/// Shared numeric formatting for all emitted files (12 significant digits).
std::string format_double(double v);

} // namespace sip
