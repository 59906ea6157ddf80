#pragma once

#include <filesystem>
#include <string>

#include "mflqg/model_io.hpp"
#include "mflqg/sim.hpp"

namespace mflqg {

// Per-agent rows: t, agent, x0.., u0.., and y0.. in noisy mode. Values use
// 17 significant digits so files round-trip doubles exactly.
std::string agents_csv(const SimulationTrace& trace);

// Per-step rows: t, z0.., uz0.., cost.
std::string meanfield_csv(const SimulationTrace& trace);

Json trace_summary(const SimulationTrace& trace);

// Adds `offset` to every state, mean-field and (if present) estimate entry.
// Used to report traces in shifted coordinates; costs are left untouched.
SimulationTrace shifted_trace(const SimulationTrace& trace, const Vector& offset);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mflqg
