#include "bbmnet/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bbmnet {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

Eigen::Index center(const BbmDynamics& dyn) { return static_cast<Eigen::Index>(dyn.matrices().center_index); }

void require_size(const BbmDynamics& dyn, const Vector& u, const char* what) {
    if (static_cast<std::size_t>(u.size()) != dyn.mesh().dof_count()) {
        throw std::invalid_argument(std::string(what) + ": state size does not match mesh");
    }
}

}  // namespace

// --- BbmDynamics -----------------------------------------------------------

BbmDynamics::BbmDynamics(MeshPtr mesh, Model model, CenterCondition center)
    : matrices_(std::make_shared<const SystemMatrices>(assemble(std::move(mesh)))),
      solver_(*matrices_, center),
      model_(model),
      center_(center) {}

Vector BbmDynamics::time_derivative(const Vector& u) const {
    require_size(*this, u, "time_derivative");
    const SystemMatrices& m = *matrices_;
    Vector rhs = -(m.convection * u);
    if (model_ == Model::Nonlinear) rhs -= nonlinear_load(m, u);
    if (center_ == CenterCondition::Flux) {
        const auto c = static_cast<Eigen::Index>(m.center_index);
        const StarNetwork& net = m.mesh->network();
        rhs[c] -= boundary_load(u[c], net.alpha(), net.edge_count(), model_);
    }
    return solver_.solve(rhs);
}

NetworkFunction BbmDynamics::time_derivative(const NetworkFunction& u) const {
    require_same_mesh(mesh(), u.mesh(), "time_derivative");
    return NetworkFunction(mesh_ptr(), time_derivative(u.coefficients()));
}

double BbmDynamics::energy(const Vector& u) const { return bbmnet::energy(u, *matrices_); }

double BbmDynamics::energy_norm(const Vector& u) const { return std::sqrt(2.0 * energy(u)); }

double BbmDynamics::dissipation_rate(double center_value) const noexcept {
    if (center_ == CenterCondition::Pinned) return 0.0;
    return mesh().network().dissipation_coefficient() * center_value * center_value;
}

double BbmDynamics::center_flux(const Vector& u, const Vector& du) const {
    const SystemMatrices& m = *matrices_;
    const auto c = static_cast<Eigen::Index>(m.center_index);
    double row = m.energy.row(c).dot(du) + m.convection.row(c).dot(u);
    if (model_ == Model::Nonlinear) row += nonlinear_load(m, u)[c];
    return -row;
}

double energy(const Vector& u, const SystemMatrices& mats) {
    if (static_cast<std::size_t>(u.size()) != mats.mesh->dof_count()) {
        throw std::invalid_argument("energy: state size does not match mesh");
    }
    return 0.5 * u.dot(mats.energy * u);
}

// --- one-step schemes ------------------------------------------------------

Vector step_rk4(const BbmDynamics& dyn, const Vector& u, double dt) {
    const Vector k1 = dyn.time_derivative(u);
    const Vector k2 = dyn.time_derivative(u + 0.5 * dt * k1);
    const Vector k3 = dyn.time_derivative(u + 0.5 * dt * k2);
    const Vector k4 = dyn.time_derivative(u + dt * k3);
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

MidpointStep step_midpoint(const BbmDynamics& dyn, const Vector& u, double dt, const MidpointOptions& options) {
    require_size(dyn, u, "step_midpoint");
    const double threshold = options.tolerance * std::max(dyn.energy_norm(u), kTiny);
    Vector next = u + dt * dyn.time_derivative(u);
    double diff = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= options.max_iterations; ++it) {
        Vector candidate = u + dt * dyn.time_derivative(0.5 * (u + next));
        diff = dyn.energy_norm(candidate - next);
        next = std::move(candidate);
        if (diff <= threshold) return {std::move(next), it};
    }
    throw StepFailure("implicit midpoint: inner iteration did not converge in " +
                          std::to_string(options.max_iterations) + " iterations (last update " +
                          std::to_string(diff) + ")",
                      options.max_iterations);
}

// --- Picard / integral-form iteration --------------------------------------

double PicardWindow::contraction_ratio() const {
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(scale, kTiny);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < differences.size(); ++k) {
        if (differences[k] > floor) pts.emplace_back(static_cast<double>(k), std::log(differences[k]));
    }
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return std::exp(slope);
}

PicardWindow picard_window(const BbmDynamics& dyn, const Vector& u0, double window, double dt,
                           const PicardOptions& options) {
    require_size(dyn, u0, "picard_window");
    if (!(window > 0.0) || !(dt > 0.0)) {
        throw std::invalid_argument("picard_window: window and dt must be positive");
    }
    const auto steps = std::max<long long>(1, std::llround(window / dt));
    PicardWindow out;
    out.dt = dt;
    out.scale = dyn.energy_norm(u0);
    out.states.assign(static_cast<std::size_t>(steps) + 1, u0);
    const double threshold = options.tolerance * std::max(out.scale, kTiny);

    std::vector<Vector> rates(out.states.size());
    for (int it = 1; it <= options.max_iterations; ++it) {
        for (std::size_t i = 0; i < out.states.size(); ++i) rates[i] = dyn.time_derivative(out.states[i]);
        double diff = 0.0;
        Vector acc = u0;
        for (std::size_t i = 1; i < out.states.size(); ++i) {
            acc += 0.5 * dt * (rates[i - 1] + rates[i]);
            diff = std::max(diff, dyn.energy_norm(acc - out.states[i]));
            out.states[i] = acc;
        }
        out.differences.push_back(diff);
        if (diff <= threshold) return out;
        const auto& d = out.differences;
        if (d.size() >= 3 && d[d.size() - 1] > d[d.size() - 2] && d[d.size() - 2] > d[d.size() - 3]) {
            throw NonContractionError("Picard iteration diverging on window " + std::to_string(window), window, it);
        }
    }
    throw NonContractionError("Picard iteration exceeded " + std::to_string(options.max_iterations) +
                                  " iterations on window " + std::to_string(window) +
                                  "; the window is too long for the map to contract",
                              window, options.max_iterations);
}

// --- simulation driver ------------------------------------------------------

void SimulationConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("SimulationConfig: dt must be positive");
    if (!(t_end >= dt)) throw std::invalid_argument("SimulationConfig: t_end must be >= dt");
    if (snapshot_stride < 0) throw std::invalid_argument("SimulationConfig: snapshot_stride must be >= 0");
    if (!(midpoint.tolerance > 0.0) || midpoint.max_iterations < 1) {
        throw std::invalid_argument("SimulationConfig: invalid implicit-midpoint iteration parameters");
    }
    if (scheme == Scheme::Picard &&
        (!(picard.tolerance > 0.0) || picard.max_iterations < 1 || !(picard.window > 0.0) || picard.max_retries < 0)) {
        throw std::invalid_argument("SimulationConfig: invalid Picard parameters");
    }
}

double EnergyTrace::max_abs_identity_residual() const {
    double r = 0.0;
    for (const auto& s : samples) r = std::max(r, std::abs(s.identity_residual));
    return r;
}

bool EnergyTrace::is_nonincreasing() const {
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (samples[k].energy > samples[k - 1].energy) return false;
    }
    return true;
}

namespace {

class TraceRecorder {
public:
    TraceRecorder(const BbmDynamics& dyn, const SimulationConfig& config, SimulationResult& result)
        : dyn_(dyn), config_(config), result_(result) {}

    void start(const Vector& u) {
        const double e = dyn_.energy(u);
        result_.trace.samples.push_back({0.0, e, u[center(dyn_)], 0.0, 0.0});
        observe_flux(u);
        if (config_.snapshot_stride > 0) result_.snapshots.push_back({0.0, u});
    }

    void record(std::size_t step, const Vector& u) {
        const TraceSample& prev = result_.trace.samples.back();
        const double dt = config_.dt;
        const double uc = u[center(dyn_)];
        const double mid_center = 0.5 * (prev.center_value + uc);
        const double loss = dt * dyn_.dissipation_rate(mid_center);
        const double e = dyn_.energy(u);
        TraceSample s;
        s.time = static_cast<double>(step) * dt;
        s.energy = e;
        s.center_value = uc;
        s.cumulative_dissipation = prev.cumulative_dissipation + loss;
        s.identity_residual = (e - prev.energy) + loss;
        result_.trace.samples.push_back(s);
        observe_flux(u);
        if (config_.snapshot_stride > 0 && step % static_cast<std::size_t>(config_.snapshot_stride) == 0) {
            result_.snapshots.push_back({s.time, u});
        }
    }

private:
    void observe_flux(const Vector& u) {
        if (dyn_.center_condition() != CenterCondition::Pinned) return;
        const double a = dyn_.center_flux(u, dyn_.time_derivative(u));
        result_.max_center_flux = std::max(result_.max_center_flux, std::abs(a));
    }

    const BbmDynamics& dyn_;
    const SimulationConfig& config_;
    SimulationResult& result_;
};

}  // namespace

SimulationResult simulate(const BbmDynamics& dyn, const NetworkFunction& u0, const SimulationConfig& config) {
    config.validate();
    require_same_mesh(dyn.mesh(), u0.mesh(), "simulate");
    const auto steps = static_cast<std::size_t>(std::llround(config.t_end / config.dt));

    SimulationResult result;
    result.trace.samples.reserve(steps + 1);
    TraceRecorder recorder(dyn, config, result);

    Vector u = u0.coefficients();
    if (dyn.center_condition() == CenterCondition::Pinned) u[center(dyn)] = 0.0;
    recorder.start(u);

    if (config.scheme == Scheme::Picard) {
        auto window_steps = std::max<long long>(1, std::llround(config.picard.window / config.dt));
        int retries = 0;
        std::size_t step = 0;
        while (step < steps) {
            const auto n = std::min<long long>(window_steps, static_cast<long long>(steps - step));
            PicardWindow w;
            try {
                w = picard_window(dyn, u, static_cast<double>(n) * config.dt, config.dt, config.picard);
            } catch (const NonContractionError& e) {
                if (retries >= config.picard.max_retries || window_steps == 1) {
                    throw NonContractionError(std::string(e.what()) + " (at step " + std::to_string(step) +
                                                  " after " + std::to_string(retries) + " window halvings)",
                                              e.window(), e.iterations());
                }
                window_steps = std::max<long long>(1, window_steps / 2);
                ++retries;
                continue;
            }
            result.max_inner_iterations = std::max(result.max_inner_iterations, w.iterations());
            ++result.picard_windows;
            for (std::size_t i = 1; i < w.states.size(); ++i) recorder.record(step + i, w.states[i]);
            step += static_cast<std::size_t>(n);
            u = w.states.back();
        }
        result.final_picard_window = static_cast<double>(window_steps) * config.dt;
    } else {
        for (std::size_t k = 1; k <= steps; ++k) {
            if (config.scheme == Scheme::Rk4) {
                u = step_rk4(dyn, u, config.dt);
            } else {
                try {
                    auto s = step_midpoint(dyn, u, config.dt, config.midpoint);
                    result.max_inner_iterations = std::max(result.max_inner_iterations, s.iterations);
                    u = std::move(s.state);
                } catch (const StepFailure& e) {
                    throw StepFailure(std::string(e.what()) + " at step " + std::to_string(k), e.iterations(), k);
                }
            }
            if (!u.allFinite()) {
                throw StepFailure("non-finite state at step " + std::to_string(k), 0, k);
            }
            recorder.record(k, u);
        }
    }
    result.final_state = std::move(u);
    return result;
}

SimulationResult simulate(MeshPtr mesh, const NetworkFunction& u0, const SimulationConfig& config) {
    const BbmDynamics dyn(std::move(mesh), config.model,
                          config.limit_system ? CenterCondition::Pinned : CenterCondition::Flux);
    return simulate(dyn, u0, config);
}

}  // namespace bbmnet
