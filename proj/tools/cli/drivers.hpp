#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bbmnet/evolve.hpp"
#include "bbmnet/spectral.hpp"
#include "scenario.hpp"

namespace bbmnet::cli {

struct RunOptions {
    std::filesystem::path out_dir;
    std::uint64_t seed = 0;
    /// Progress and wall time go here unless null.
    std::ostream* log = nullptr;
};

struct SimulateOutcome {
    SimulationResult result;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double total_dissipation = 0.0;
    double max_identity_residual = 0.0;
    double wall_seconds = 0.0;
    std::filesystem::path trace_path;
    std::filesystem::path summary_path;
};

struct SpectrumOutcome {
    StabilityReport stability;
    std::vector<Eigenmode> modes;
    SpectrumReport spectrum;
    std::filesystem::path report_path;
    std::filesystem::path eigenvalues_path;
};

struct ConvergenceRow {
    int level = 0;
    /// Cells per edge (spatial studies) or dt (time studies).
    double resolution = 0.0;
    double error = 0.0;
    std::optional<double> order;
};

struct ConvergenceOutcome {
    std::string study;
    std::vector<ConvergenceRow> rows;
    /// Mean of the observed orders.
    double mean_order = 0.0;
    std::filesystem::path report_path;
};

/// Manufactured problem on N = 2, l = (pi, pi) with w_j = (-1)^j sin x; the
/// L2 error of the homogeneous elliptic solve for m = base_cells * 2^k.
ConvergenceOutcome elliptic_convergence_study(int levels, int base_cells);

/// Self-convergence in dt: error at level k is the energy-norm difference of
/// the final states computed with dt/2^k and dt/2^(k+1).
ConvergenceOutcome time_convergence_study(const BbmDynamics& dyn, const NetworkFunction& u0, Scheme scheme,
                                          double dt, double t_end, int levels);

SimulateOutcome run_simulate(const ScenarioConfig& config, const RunOptions& options);
SpectrumOutcome run_spectrum(const ScenarioConfig& config, const RunOptions& options);
StabilityReport run_stability(const ScenarioConfig& config, const RunOptions& options);
ConvergenceOutcome run_convergence(const ScenarioConfig& config, const RunOptions& options);

}  // namespace bbmnet::cli
