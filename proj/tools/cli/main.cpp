#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "drivers.hpp"
#include "scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalFlags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool quiet = false;
};

void add_global_flags(CLI::App& app, GlobalFlags& flags) {
    app.add_option("--config", flags.config, "Scenario file (YAML)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", flags.out, "Output directory (overrides output.directory)");
    app.add_option("--seed", flags.seed, "Seed for randomized presets (overrides seed)")
        ->each([&](const std::string&) { flags.seed_given = true; });
    app.add_flag("--quiet", flags.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-element BBM dynamics on star-shaped networks"};
    app.require_subcommand(1);
    GlobalFlags flags;

    auto* simulate = app.add_subcommand("simulate", "Time integration with energy trace");
    auto* spectrum = app.add_subcommand("spectrum", "Analytic imaginary-axis modes and discrete spectrum");
    auto* stability = app.add_subcommand("stability", "Rational-ratio stability classification");
    auto* convergence = app.add_subcommand("convergence", "Refinement study");
    for (auto* sub : {simulate, spectrum, stability, convergence}) add_global_flags(*sub, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    using namespace bbmnet::cli;
    try {
        ScenarioConfig config = load_scenario(flags.config);
        RunOptions options;
        options.out_dir = flags.out;
        options.seed = flags.seed_given ? flags.seed : config.seed;
        options.log = flags.quiet ? nullptr : &std::cout;

        if (simulate->parsed()) {
            run_simulate(config, options);
        } else if (spectrum->parsed()) {
            run_spectrum(config, options);
        } else if (stability->parsed()) {
            run_stability(config, options);
        } else {
            run_convergence(config, options);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return kExitConfig;
    } catch (const bbmnet::StepFailure& e) {
        std::cerr << fmt::format("numerical failure at step {} after {} iterations: {}\n", e.step_index(),
                                 e.iterations(), e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}
