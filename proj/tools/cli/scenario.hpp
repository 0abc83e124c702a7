#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbmnet/evolve.hpp"
#include "bbmnet/network.hpp"

namespace bbmnet::cli {

/// Invalid scenario file. `field` is the dotted key path (e.g. "network.alpha"),
/// `line` is 1-based or 0 when unknown.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, int line, const std::string& message);

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    std::string field_;
    int line_;
};

struct NetworkBlock {
    std::vector<double> lengths;
    /// Lengths exactly as written (e.g. "sqrt(2)"), kept for reports.
    std::vector<std::string> length_text;
    double alpha = 0.0;
    bool conservative = false;
};

struct MeshBlock {
    std::optional<double> h;
    /// One entry (applied to all edges) or one per edge.
    std::vector<int> cells_per_edge;
};

struct TimeBlock {
    Scheme scheme = Scheme::ImplicitMidpoint;
    double dt = 1e-2;
    double t_end = 1.0;
    bool linear = true;
    bool limit_system = false;
    MidpointOptions midpoint;
    PicardOptions picard;
};

struct InitialBlock {
    std::string preset = "zero";
    /// 1-based edge for the gaussian preset.
    int edge = 1;
    /// Bump center; default is mid-edge.
    std::optional<double> center;
    /// Bump width sigma; default is l/10.
    std::optional<double> width;
    double amplitude = 1.0;
    /// 1-based index into the list of imaginary-axis modes.
    int mode = 1;
};

struct OutputBlock {
    std::string directory = "out";
    int snapshot_stride = 0;
};

struct SpectralBlock {
    long long q_max = 1000;
    double tolerance = 1e-9;
    int m_max = 5;
    double delta = 0.05;
    double points_per_wavelength = 8.0;
};

struct ConvergenceBlock {
    std::string study = "elliptic";
    int levels = 4;
    int base_cells = 8;
    double dt = 0.2;
    double t_end = 2.0;
};

struct ScenarioConfig {
    NetworkBlock network;
    std::optional<MeshBlock> mesh;
    std::optional<TimeBlock> time;
    InitialBlock initial;
    OutputBlock output;
    SpectralBlock spectral;
    ConvergenceBlock convergence;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kPresets[] = {"zero", "gaussian", "eigenmode", "random"};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

StarNetwork make_network(const ScenarioConfig& config);
/// Throws ConfigError when the mesh block is absent.
MeshPtr make_mesh(const ScenarioConfig& config);
/// Throws ConfigError when the time block is absent.
SimulationConfig make_simulation_config(const ScenarioConfig& config);
RationalSearch make_rational_search(const ScenarioConfig& config);

/// Resolved configuration (defaults filled in) as YAML text.
std::string resolved_config_yaml(const ScenarioConfig& config);

std::string_view to_string(Scheme scheme) noexcept;

}  // namespace bbmnet::cli
