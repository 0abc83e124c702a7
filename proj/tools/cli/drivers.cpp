#include "drivers.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "presets.hpp"

namespace bbmnet::cli {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

YAML::Emitter& begin_report(YAML::Emitter& e, const ScenarioConfig& config, std::string_view command) {
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "command" << YAML::Value << std::string(command);
    e << YAML::Key << "config" << YAML::Value << YAML::Load(resolved_config_yaml(config));
    return e;
}

void write_report(const fs::path& path, const YAML::Emitter& e) {
    auto out = open_output(path);
    out << e.c_str() << '\n';
}

void write_config_comment(std::ostream& out, const ScenarioConfig& config) {
    std::istringstream lines(resolved_config_yaml(config));
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
}

fs::path out_dir(const ScenarioConfig& config, const RunOptions& options) {
    return options.out_dir.empty() ? fs::path(config.output.directory) : options.out_dir;
}

ScenarioConfig with_seed(ScenarioConfig config, const RunOptions& options) {
    config.seed = options.seed;
    return config;
}

void emit_pairs(YAML::Emitter& e, const StabilityReport& report) {
    e << YAML::Key << "classification" << YAML::Value << std::string(to_string(report.classification));
    e << YAML::Key << "denominator_bound" << YAML::Value << report.search.denominator_bound;
    e << YAML::Key << "tolerance" << YAML::Value << report.search.tolerance;
    e << YAML::Key << "rational_pairs" << YAML::Value << YAML::BeginSeq;
    for (const auto& pr : report.rational_pairs) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "edge_i" << YAML::Value << pr.edge_i + 1;
        e << YAML::Key << "edge_j" << YAML::Value << pr.edge_j + 1;
        e << YAML::Key << "p" << YAML::Value << pr.p;
        e << YAML::Key << "q" << YAML::Value << pr.q;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
}

double elliptic_l2_error(const NetworkFunction& w, const std::function<double(std::size_t, double)>& exact) {
    // Three-point Gauss on each cell.
    static const double g = std::sqrt(0.6);
    static const double nodes[3] = {-g, 0.0, g};
    static const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const Mesh& mesh = w.mesh();
    double sum = 0.0;
    for (std::size_t j = 0; j < mesh.edge_count(); ++j) {
        const double h = mesh.spacing(j);
        for (int c = 0; c < mesh.cells(j); ++c) {
            const auto a = mesh.dof(j, c);
            const auto b = mesh.dof(j, c + 1);
            const double ua = a ? w.coefficients()[static_cast<Eigen::Index>(*a)] : 0.0;
            const double ub = b ? w.coefficients()[static_cast<Eigen::Index>(*b)] : 0.0;
            for (int q = 0; q < 3; ++q) {
                const double t = 0.5 * (1.0 + nodes[q]);
                const double x = (c + t) * h;
                const double diff = (1.0 - t) * ua + t * ub - exact(j, x);
                sum += 0.5 * h * weights[q] * diff * diff;
            }
        }
    }
    return std::sqrt(sum);
}

void fill_orders(ConvergenceOutcome& out) {
    double total = 0.0;
    int count = 0;
    for (std::size_t k = 1; k < out.rows.size(); ++k) {
        const double o = std::log2(out.rows[k - 1].error / out.rows[k].error);
        out.rows[k].order = o;
        total += o;
        ++count;
    }
    out.mean_order = count > 0 ? total / count : 0.0;
}

}  // namespace

ConvergenceOutcome elliptic_convergence_study(int levels, int base_cells) {
    if (levels < 3) throw std::invalid_argument("elliptic_convergence_study: need >= 3 levels");
    if (base_cells < 2) throw std::invalid_argument("elliptic_convergence_study: base_cells must be >= 2");
    const double pi = std::numbers::pi;
    const StarNetwork net({pi, pi}, 2.0);
    auto exact = [](std::size_t j, double x) { return (j == 0 ? -1.0 : 1.0) * std::sin(x); };
    ConvergenceOutcome out;
    out.study = "elliptic";
    for (int k = 0; k < levels; ++k) {
        const int m = base_cells << k;
        const MeshPtr mesh = build_mesh(net, m);
        const EllipticSolver solver(assemble(mesh));
        const auto q = NetworkFunction::interpolate(mesh, [&](std::size_t j, double x) { return 2.0 * exact(j, x); });
        const NetworkFunction w = solver.solve_homogeneous(q);
        out.rows.push_back({k, static_cast<double>(m), elliptic_l2_error(w, exact), std::nullopt});
    }
    fill_orders(out);
    return out;
}

ConvergenceOutcome time_convergence_study(const BbmDynamics& dyn, const NetworkFunction& u0, Scheme scheme,
                                          double dt, double t_end, int levels) {
    if (levels < 3) throw std::invalid_argument("time_convergence_study: need >= 3 levels");
    std::vector<Vector> finals;
    for (int k = 0; k < levels; ++k) {
        SimulationConfig cfg;
        cfg.scheme = scheme;
        cfg.dt = dt / std::pow(2.0, k);
        cfg.t_end = t_end;
        finals.push_back(simulate(dyn, u0, cfg).final_state);
    }
    ConvergenceOutcome out;
    out.study = scheme == Scheme::Rk4 ? "rk4" : "midpoint";
    for (int k = 0; k + 1 < levels; ++k) {
        out.rows.push_back({k, dt / std::pow(2.0, k), dyn.energy_norm(finals[k] - finals[k + 1]), std::nullopt});
    }
    fill_orders(out);
    return out;
}

SimulateOutcome run_simulate(const ScenarioConfig& config_in, const RunOptions& options) {
    const ScenarioConfig config = with_seed(config_in, options);
    const MeshPtr mesh = make_mesh(config);
    const SimulationConfig sim = make_simulation_config(config);
    const NetworkFunction u0 = make_initial_condition(config, mesh, config.seed);

    const auto start = std::chrono::steady_clock::now();
    SimulateOutcome out;
    out.result = simulate(mesh, u0, sim);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto& samples = out.result.trace.samples;
    out.initial_energy = samples.front().energy;
    out.final_energy = samples.back().energy;
    out.total_dissipation = samples.back().cumulative_dissipation;
    out.max_identity_residual = out.result.trace.max_abs_identity_residual();

    const fs::path dir = out_dir(config, options);
    out.trace_path = dir / "trace.csv";
    out.summary_path = dir / "summary.txt";
    {
        auto f = open_output(out.trace_path);
        write_config_comment(f, config);
        f << "t,E,u_center,cumulative_dissipation,identity_residual\n";
        for (const auto& s : samples) {
            f << num(s.time) << ',' << num(s.energy) << ',' << num(s.center_value) << ','
              << num(s.cumulative_dissipation) << ',' << num(s.identity_residual) << '\n';
        }
    }
    if (!out.result.snapshots.empty()) {
        auto f = open_output(dir / "snapshots.csv");
        write_config_comment(f, config);
        f << "t,dof,value\n";
        for (const auto& snap : out.result.snapshots) {
            for (Eigen::Index i = 0; i < snap.state.size(); ++i) {
                f << num(snap.time) << ',' << i << ',' << num(snap.state[i]) << '\n';
            }
        }
    }

    YAML::Emitter e;
    begin_report(e, config, "simulate");
    e << YAML::Key << "dof_count" << YAML::Value << mesh->dof_count();
    e << YAML::Key << "steps" << YAML::Value << samples.size() - 1;
    e << YAML::Key << "final_time" << YAML::Value << samples.back().time;
    e << YAML::Key << "initial_energy" << YAML::Value << out.initial_energy;
    e << YAML::Key << "final_energy" << YAML::Value << out.final_energy;
    e << YAML::Key << "energy_ratio" << YAML::Value
      << (out.initial_energy > 0.0 ? out.final_energy / out.initial_energy : 1.0);
    e << YAML::Key << "total_dissipation" << YAML::Value << out.total_dissipation;
    e << YAML::Key << "max_identity_residual" << YAML::Value << out.max_identity_residual;
    e << YAML::Key << "relative_identity_residual" << YAML::Value
      << (out.initial_energy > 0.0 ? out.max_identity_residual / out.initial_energy : 0.0);
    e << YAML::Key << "energy_nonincreasing" << YAML::Value << out.result.trace.is_nonincreasing();
    e << YAML::Key << "max_inner_iterations" << YAML::Value << out.result.max_inner_iterations;
    if (sim.scheme == Scheme::Picard) {
        e << YAML::Key << "picard_windows" << YAML::Value << out.result.picard_windows;
        e << YAML::Key << "final_picard_window" << YAML::Value << out.result.final_picard_window;
    }
    if (sim.limit_system) {
        e << YAML::Key << "max_center_flux_residual" << YAML::Value << out.result.max_center_flux;
    }
    e << YAML::EndMap;
    write_report(out.summary_path, e);

    if (options.log) {
        *options.log << fmt::format("simulate: {} steps, E(0) = {:.10g}, E(T) = {:.10g}, ratio = {:.10g}\n",
                                    samples.size() - 1, out.initial_energy, out.final_energy,
                                    out.initial_energy > 0.0 ? out.final_energy / out.initial_energy : 1.0);
        *options.log << fmt::format("simulate: max identity residual {:.3e}, wall time {:.3f} s\n",
                                    out.max_identity_residual, out.wall_seconds);
        *options.log << "wrote " << out.trace_path.string() << " and " << out.summary_path.string() << '\n';
    }
    return out;
}

SpectrumOutcome run_spectrum(const ScenarioConfig& config_in, const RunOptions& options) {
    const ScenarioConfig config = with_seed(config_in, options);
    const MeshPtr mesh = make_mesh(config);
    const StarNetwork& net = mesh->network();
    const RationalSearch search = make_rational_search(config);

    SpectrumOutcome out;
    out.stability = classify_stability(net, search);
    out.modes = imaginary_axis_modes(net, search, config.spectral.m_max);
    const SystemMatrices mats = assemble(mesh);
    const Eigen::MatrixXd g = discrete_generator(mats, net.alpha());
    SpectrumOptions opts;
    opts.delta = config.spectral.delta;
    opts.resolved_min_modulus = resolved_modulus_threshold(*mesh, config.spectral.points_per_wavelength);
    out.spectrum = discrete_spectrum(g, mats.energy, out.modes, opts);

    const fs::path dir = out_dir(config, options);
    out.report_path = dir / "spectrum.txt";
    out.eigenvalues_path = dir / "eigenvalues.csv";

    YAML::Emitter e;
    begin_report(e, config, "spectrum");
    e << YAML::Key << "dof_count" << YAML::Value << mesh->dof_count();
    emit_pairs(e, out.stability);
    e << YAML::Key << "analytic_modes" << YAML::Value << YAML::BeginSeq;
    for (std::size_t k = 0; k < out.modes.size(); ++k) {
        const Eigenmode& m = out.modes[k];
        const ModeMatch& match = out.spectrum.matches[k];
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "edge_i" << YAML::Value << m.edge_i + 1;
        e << YAML::Key << "edge_j" << YAML::Value << m.edge_j + 1;
        e << YAML::Key << "p" << YAML::Value << m.p;
        e << YAML::Key << "q" << YAML::Value << m.q;
        e << YAML::Key << "multiplier" << YAML::Value << m.multiplier;
        e << YAML::Key << "beta" << YAML::Value << m.beta;
        e << YAML::Key << "discrete_re" << YAML::Value << match.eigenvalue.real();
        e << YAML::Key << "discrete_im" << YAML::Value << match.eigenvalue.imag();
        e << YAML::Key << "distance" << YAML::Value << match.distance;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "eigenvalue_count" << YAML::Value << out.spectrum.eigenvalues.size();
    e << YAML::Key << "zero_threshold" << YAML::Value << opts.zero_threshold;
    e << YAML::Key << "resolved_min_modulus" << YAML::Value << opts.resolved_min_modulus;
    e << YAML::Key << "resolved_count" << YAML::Value << out.spectrum.resolved_count;
    e << YAML::Key << "abscissa" << YAML::Value << out.spectrum.abscissa;
    e << YAML::Key << "resolved_abscissa" << YAML::Value << out.spectrum.resolved_abscissa;
    e << YAML::Key << "resolved_margin" << YAML::Value << -out.spectrum.resolved_abscissa;
    e << YAML::EndMap;
    write_report(out.report_path, e);

    {
        auto f = open_output(out.eigenvalues_path);
        write_config_comment(f, config);
        f << "re,im\n";
        for (const Complex& z : out.spectrum.eigenvalues) f << num(z.real()) << ',' << num(z.imag()) << '\n';
    }
    if (options.log) {
        *options.log << fmt::format("spectrum: {} eigenvalues, {} analytic modes, resolved abscissa {:.6e}\n",
                                    out.spectrum.eigenvalues.size(), out.modes.size(), out.spectrum.resolved_abscissa);
        *options.log << "wrote " << out.report_path.string() << '\n';
    }
    return out;
}

StabilityReport run_stability(const ScenarioConfig& config_in, const RunOptions& options) {
    const ScenarioConfig config = with_seed(config_in, options);
    const StarNetwork net = make_network(config);
    const StabilityReport report = classify_stability(net, make_rational_search(config));

    YAML::Emitter e;
    begin_report(e, config, "stability");
    emit_pairs(e, report);
    e << YAML::EndMap;
    const fs::path path = out_dir(config, options) / "stability.txt";
    write_report(path, e);
    if (options.log) {
        *options.log << "stability: " << to_string(report.classification) << " (" << report.rational_pairs.size()
                     << " rational pairs)\nwrote " << path.string() << '\n';
    }
    return report;
}

ConvergenceOutcome run_convergence(const ScenarioConfig& config_in, const RunOptions& options) {
    const ScenarioConfig config = with_seed(config_in, options);
    const ConvergenceBlock& cb = config.convergence;
    if (cb.levels < 3) throw ConfigError("convergence.levels", 0, "need >= 3 refinement levels");

    ConvergenceOutcome out;
    if (cb.study == "elliptic") {
        out = elliptic_convergence_study(cb.levels, cb.base_cells);
    } else {
        const MeshPtr mesh = make_mesh(config);
        const Model model = (config.time && !config.time->linear) ? Model::Nonlinear : Model::Linear;
        const bool pinned = config.time && config.time->limit_system;
        const BbmDynamics dyn(mesh, model, pinned ? CenterCondition::Pinned : CenterCondition::Flux);
        const NetworkFunction u0 = make_initial_condition(config, mesh, config.seed);
        out = time_convergence_study(dyn, u0, cb.study == "rk4" ? Scheme::Rk4 : Scheme::ImplicitMidpoint, cb.dt,
                                     cb.t_end, cb.levels);
    }

    YAML::Emitter e;
    begin_report(e, config, "convergence");
    e << YAML::Key << "study" << YAML::Value << out.study;
    e << YAML::Key << "resolution_kind" << YAML::Value << (cb.study == "elliptic" ? "cells_per_edge" : "dt");
    e << YAML::Key << "levels" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : out.rows) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "level" << YAML::Value << row.level;
        e << YAML::Key << "resolution" << YAML::Value << row.resolution;
        e << YAML::Key << "error" << YAML::Value << row.error;
        if (row.order) e << YAML::Key << "order" << YAML::Value << *row.order;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::Key << "mean_order" << YAML::Value << out.mean_order;
    e << YAML::EndMap;
    out.report_path = out_dir(config, options) / "convergence.txt";
    write_report(out.report_path, e);
    if (options.log) {
        *options.log << fmt::format("convergence ({}): mean observed order {:.4f}\n", out.study, out.mean_order);
        *options.log << "wrote " << out.report_path.string() << '\n';
    }
    return out;
}

}  // namespace bbmnet::cli
