#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bbmnet/assembly.hpp"
#include "bbmnet/elliptic.hpp"

namespace bbmnet {

/// An implicit step whose inner iteration did not converge.
class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, int iterations, std::size_t step_index = 0)
        : std::runtime_error(what), iterations_(iterations), step_index_(step_index) {}

    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    [[nodiscard]] std::size_t step_index() const noexcept { return step_index_; }

private:
    int iterations_;
    std::size_t step_index_;
};

/// The Picard map failed to contract on the requested window.
class NonContractionError : public std::runtime_error {
public:
    NonContractionError(const std::string& what, double window, int iterations)
        : std::runtime_error(what), window_(window), iterations_(iterations) {}

    [[nodiscard]] double window() const noexcept { return window_; }
    [[nodiscard]] int iterations() const noexcept { return iterations_; }

private:
    double window_;
    int iterations_;
};

/// Semidiscrete BBM / linearized BBM on a star mesh:
///
///   A_H u' = -C u - n(u) - a(u_c) e_c,   a = alpha u_c [+ (N/3) u_c^2]
///
/// so that u^T A_H u' = -(alpha - N/2) u_c^2. With CenterCondition::Pinned the
/// central value is held at zero and no feedback acts (the comparison system
/// with a Dirichlet center).
class BbmDynamics {
public:
    BbmDynamics(MeshPtr mesh, Model model, CenterCondition center = CenterCondition::Flux);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *matrices_->mesh; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return matrices_->mesh; }
    [[nodiscard]] const SystemMatrices& matrices() const noexcept { return *matrices_; }
    [[nodiscard]] const EllipticSolver& solver() const noexcept { return solver_; }
    [[nodiscard]] Model model() const noexcept { return model_; }
    [[nodiscard]] CenterCondition center_condition() const noexcept { return center_; }

    [[nodiscard]] Vector time_derivative(const Vector& u) const;
    [[nodiscard]] NetworkFunction time_derivative(const NetworkFunction& u) const;

    /// E = 1/2 u^T A_H u.
    [[nodiscard]] double energy(const Vector& u) const;
    /// sqrt(u^T A_H u).
    [[nodiscard]] double energy_norm(const Vector& u) const;

    /// Instantaneous energy loss (alpha - N/2) u_c^2; zero with a pinned center.
    [[nodiscard]] double dissipation_rate(double center_value) const noexcept;

    /// Flux sum implied by the central row of the weak form at (u, u').
    [[nodiscard]] double center_flux(const Vector& u, const Vector& du) const;

private:
    std::shared_ptr<const SystemMatrices> matrices_;
    EllipticSolver solver_;
    Model model_;
    CenterCondition center_;
};

double energy(const Vector& u, const SystemMatrices& mats);

Vector step_rk4(const BbmDynamics& dyn, const Vector& u, double dt);

struct MidpointOptions {
    double tolerance = 1e-12;
    int max_iterations = 100;
};

struct MidpointStep {
    Vector state;
    int iterations = 0;
};

/// u+ = u + dt f((u + u+)/2) by fixed-point iteration, stopped once the energy-norm
/// update is below tolerance * ||u||. dt may be negative.
MidpointStep step_midpoint(const BbmDynamics& dyn, const Vector& u, double dt,
                           const MidpointOptions& options = {});

struct PicardOptions {
    double tolerance = 1e-12;
    int max_iterations = 60;
    double window = 0.1;
    /// simulate() halves the window at most this many times on non-contraction.
    int max_retries = 4;
};

/// Fixed point of u(t) = u0 + int_0^t f(u(s)) ds on a uniform grid of the
/// window, trapezoidal quadrature in time.
struct PicardWindow {
    double dt = 0.0;
    std::vector<Vector> states;
    /// sup over grid points of the energy-norm change, one entry per iteration.
    std::vector<double> differences;
    double scale = 0.0;

    [[nodiscard]] int iterations() const noexcept { return static_cast<int>(differences.size()); }
    /// Geometric-fit ratio d_{k+1}/d_k over iterations above the rounding floor.
    [[nodiscard]] double contraction_ratio() const;
};

PicardWindow picard_window(const BbmDynamics& dyn, const Vector& u0, double window, double dt,
                           const PicardOptions& options = {});

enum class Scheme { Rk4, ImplicitMidpoint, Picard };

struct SimulationConfig {
    Scheme scheme = Scheme::ImplicitMidpoint;
    double dt = 1e-2;
    double t_end = 1.0;
    Model model = Model::Linear;
    bool limit_system = false;
    MidpointOptions midpoint;
    PicardOptions picard;
    /// Store every k-th state; 0 disables snapshots.
    int snapshot_stride = 0;

    void validate() const;
};

struct TraceSample {
    double time = 0.0;
    double energy = 0.0;
    double center_value = 0.0;
    double cumulative_dissipation = 0.0;
    /// E_{k+1} - E_k + dt (alpha - N/2) u_{m,c}^2 with u_{m,c} the step's midpoint
    /// central value; zero for the initial sample.
    double identity_residual = 0.0;
};

struct EnergyTrace {
    std::vector<TraceSample> samples;

    [[nodiscard]] double max_abs_identity_residual() const;
    [[nodiscard]] bool is_nonincreasing() const;
};

struct Snapshot {
    double time;
    Vector state;
};

struct SimulationResult {
    EnergyTrace trace;
    std::vector<Snapshot> snapshots;
    Vector final_state;
    int max_inner_iterations = 0;
    int picard_windows = 0;
    double final_picard_window = 0.0;
    /// Largest |flux sum| at the center over the run (pinned-center diagnostic).
    double max_center_flux = 0.0;
};

SimulationResult simulate(const BbmDynamics& dyn, const NetworkFunction& u0, const SimulationConfig& config);

/// Builds the dynamics from the config (model, limit-system flag) and runs it.
SimulationResult simulate(MeshPtr mesh, const NetworkFunction& u0, const SimulationConfig& config);

}  // namespace bbmnet
