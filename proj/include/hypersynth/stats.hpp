#pragma once
// Machine-readable run reports.
//
// Schema "hypersynth-stats/1": a flat object of run fields plus `atoms` (per ground atom
// bounds at the root family) and `witness` (per-controller state -> action tables).
// Family sizes are decimal strings because they routinely exceed 2^64.

#include <string>

#include "hypersynth/synthesis.hpp"

namespace hypersynth {

inline constexpr const char* kStatsSchema = "hypersynth-stats/1";

struct RunInfo {
    std::string command = "synth";
    std::string method = "ar";
    Mode mode = Mode::Feasibility;
};

std::string write_stats(const Problem& p, const SynthesisOutcome& outcome, const RunInfo& info);

}  // namespace hypersynth
