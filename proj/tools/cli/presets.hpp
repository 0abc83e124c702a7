#pragma once

#include <cstdint>

#include "bbmnet/network.hpp"
#include "scenario.hpp"

namespace bbmnet::cli {

/// Initial data for a scenario:
///   zero      - u = 0
///   gaussian  - amplitude * exp(-((x - center)/width)^2) on one edge, minus its
///               linear interpolant between the edge end values
///   eigenmode - amplitude * Re y for the selected imaginary-axis mode
///   random    - uniform in [-amplitude, amplitude] at every DOF, seeded
NetworkFunction make_initial_condition(const ScenarioConfig& config, MeshPtr mesh, std::uint64_t seed);

}  // namespace bbmnet::cli
