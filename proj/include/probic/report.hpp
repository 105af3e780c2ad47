#pragma once

// Plain key=value run summary shared by the CLI and the tests.

#include <sstream>
#include <string>

#include "probic/engine.hpp"

namespace probic {

inline std::string format_run_report(const check_result& r, double wall_time_ms) {
    std::ostringstream os;
    auto bound = [](const rational& v) {
        std::ostringstream b;
        b << rat_to_string(v) << " (" << rat_to_double(v) << ")";
        return b.str();
    };
    os << "verdict=" << verdict_name(r.verdict) << "\n"
       << "termination_kind=" << termination_name(r.kind) << "\n"
       << "l_init=" << bound(r.l_init) << "\n"
       << "u_init=" << bound(r.u_init) << "\n"
       << "frames=" << r.stats.frames_used << "\n"
       << "ctis=" << r.stats.cti_count << "\n"
       << "ledger_states=" << r.stats.ledger_states << "\n"
       << "ledger_edges=" << r.stats.ledger_edges << "\n"
       << "sat_queries=" << r.stats.sat_queries << "\n"
       << "wall_time_ms=" << wall_time_ms << "\n";
    return os.str();
}

}  // namespace probic
