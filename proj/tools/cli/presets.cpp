#include "presets.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "bbmnet/spectral.hpp"

namespace bbmnet::cli {

NetworkFunction make_initial_condition(const ScenarioConfig& config, MeshPtr mesh, std::uint64_t seed) {
    const InitialBlock& ic = config.initial;
    if (ic.preset == "zero") return NetworkFunction(std::move(mesh));

    if (ic.preset == "gaussian") {
        const auto edge = static_cast<std::size_t>(ic.edge - 1);
        const double l = mesh->network().length(edge);
        const double x0 = ic.center.value_or(0.5 * l);
        const double sigma = ic.width.value_or(0.1 * l);
        const double a = ic.amplitude;
        auto bump = [&](double x) { return a * std::exp(-std::pow((x - x0) / sigma, 2)); };
        const double g0 = bump(0.0);
        const double gl = bump(l);
        return NetworkFunction::interpolate(std::move(mesh), [&](std::size_t j, double x) {
            if (j != edge) return 0.0;
            return bump(x) - (g0 * (1.0 - x / l) + gl * x / l);
        });
    }

    if (ic.preset == "eigenmode") {
        const auto modes =
            imaginary_axis_modes(mesh->network(), make_rational_search(config), config.spectral.m_max);
        if (modes.empty()) {
            throw ConfigError("initial.preset", 0,
                              "the network has no imaginary-axis modes (edge lengths are pairwise incommensurable)");
        }
        if (static_cast<std::size_t>(ic.mode) > modes.size()) {
            throw ConfigError("initial.mode", 0, fmt::format("only {} modes are available", modes.size()));
        }
        return mode_real_part(std::move(mesh), modes[static_cast<std::size_t>(ic.mode - 1)], ic.amplitude);
    }

    if (ic.preset == "random") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-ic.amplitude, ic.amplitude);
        NetworkFunction u(std::move(mesh));
        for (Eigen::Index i = 0; i < u.coefficients().size(); ++i) u.coefficients()[i] = dist(rng);
        return u;
    }

    throw ConfigError("initial.preset", 0, "unknown preset '" + ic.preset + "'");
}

}  // namespace bbmnet::cli
