#pragma once

// Drives the forward solvers to produce synthetic acquisition sessions from
// a simulation config (phantoms, frame counts, modulation, noise).

#include <string>

#include "dbar/forward.hpp"
#include "dbar/geometry.hpp"
#include "dbar/io.hpp"

namespace dbar {

/// Builtin geometry names ("disk", "chest") or a boundary fixture path.
NormalizedDomain<double> resolve_geometry(const std::string& name, int boundary_points,
                                          int electrodes, std::optional<double> area);

SyntheticSession simulate_session(const SimulateConfig& cfg);

}  // namespace dbar
