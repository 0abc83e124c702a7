// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "bbmnet/bbmnet.hpp"
#include "drivers.hpp"
#include "presets.hpp"
#include "scenario.hpp"
#include "test_support.hpp"

using namespace bbmnet;

namespace {

struct Outcome {
    bool pass;
    std::string measured;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o{false, ""};
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    fmt::print("[{}] {}: {} measured={}\n", o.pass ? "PASS" : "FAIL", id, name, o.measured);
    std::fflush(stdout);
}

const std::vector<double> kIrrational3 = {1.0, std::sqrt(2.0), std::sqrt(3.0)};

SimulationConfig midpoint_run(Model model, double dt, double t_end) {
    SimulationConfig cfg;
    cfg.scheme = Scheme::ImplicitMidpoint;
    cfg.model = model;
    cfg.dt = dt;
    cfg.t_end = t_end;
    return cfg;
}

// Per-step |E_{k+1} - E_k + dt (alpha - N/2) ((c_k + c_{k+1}) / 2)^2| from the trace columns.
double max_step_defect(const EnergyTrace& trace, double dt, double dissipation_coefficient) {
    double worst = 0.0;
    for (std::size_t k = 1; k < trace.samples.size(); ++k) {
        const auto& a = trace.samples[k - 1];
        const auto& b = trace.samples[k];
        const double mid = 0.5 * (a.center_value + b.center_value);
        worst = std::max(worst, std::abs(b.energy - a.energy + dt * dissipation_coefficient * mid * mid));
    }
    return worst;
}

Outcome criterion1() {
    const StarNetwork net(kIrrational3, 2.0);
    const auto mesh = build_mesh(net, 100);
    const auto u0 = testutil::smooth_state(mesh);
    double worst = 0.0;
    for (auto model : {Model::Linear, Model::Nonlinear}) {
        const BbmDynamics dyn(mesh, model);
        const auto result = simulate(dyn, u0, midpoint_run(model, 1e-2, 10.0));
        const double e0 = result.trace.samples.front().energy;
        worst = std::max(worst, max_step_defect(result.trace, 1e-2, 2.0 - 1.5) / e0);
    }
    return {worst <= 1e-12, fmt::format("{:.3e} (max per-step defect / E(0), both models)", worst)};
}

Outcome criterion2() {
    const auto net = StarNetwork::conservative(kIrrational3);
    const auto mesh = build_mesh(net, 100);
    const auto u0 = testutil::smooth_state(mesh);
    double worst = 0.0;
    std::size_t steps = 0;
    for (auto model : {Model::Linear, Model::Nonlinear}) {
        const auto result = simulate(BbmDynamics(mesh, model), u0, midpoint_run(model, 1e-2, 100.0));
        const double e0 = result.trace.samples.front().energy;
        worst = std::max(worst, std::abs(result.trace.samples.back().energy - e0) / e0);
        steps = result.trace.samples.size() - 1;
    }
    return {worst <= 1e-11 && steps == 10000, fmt::format("{:.3e} (|E(T)-E(0)|/E(0), {} steps)", worst, steps)};
}

Outcome criterion3() {
    const auto study = cli::elliptic_convergence_study(4, 8);
    bool ok = study.rows.size() == 4;
    std::string orders;
    for (const auto& row : study.rows) {
        if (!row.order) continue;
        ok = ok && std::abs(*row.order - 2.0) <= 0.2;
        orders += fmt::format("{}{:.3f}", orders.empty() ? "" : ",", *row.order);
    }
    return {ok, fmt::format("orders [{}]", orders)};
}

Outcome criterion4() {
    const auto cfg = cli::parse_scenario(R"(network:
  lengths: [1, 1, sqrt(2)]
  alpha: 2
mesh:
  cells_per_edge: 200
time:
  dt: 0.01
  t_end: 20
initial:
  preset: eigenmode
)");
    const auto mesh = cli::make_mesh(cfg);
    const auto modes = imaginary_axis_modes(mesh->network(), {1000, 1e-9}, 1);
    if (modes.empty()) return {false, "no analytic mode"};
    const double beta = modes.front().beta;
    const auto mats = assemble(mesh);
    const auto spectrum = discrete_spectrum(discrete_generator(mats, 2.0), mats.energy, modes);
    const auto& match = spectrum.matches.front();
    const bool spectral_ok = std::abs(beta - 0.1516572) <= 5e-8 && match.distance <= 1e-3 &&
                             std::abs(match.eigenvalue.real()) <= 1e-6;

    const auto u0 = cli::make_initial_condition(cfg, mesh, 0);
    const auto result = simulate(BbmDynamics(mesh, Model::Linear), u0, midpoint_run(Model::Linear, 0.01, 20.0));
    const double ratio = result.trace.samples.back().energy / result.trace.samples.front().energy;
    return {spectral_ok && ratio >= 0.999,
            fmt::format("beta={:.7f} distance={:.3e} |Re|={:.3e} E(20)/E(0)={:.6f}", beta, match.distance,
                        std::abs(match.eigenvalue.real()), ratio)};
}

Outcome criterion5() {
    const StarNetwork net(kIrrational3, 2.0);
    const auto mesh = build_mesh(net, 100);
    const auto mats = assemble(mesh);
    SpectrumOptions opts;
    opts.resolved_min_modulus = resolved_modulus_threshold(*mesh);
    const auto spectrum = discrete_spectrum(discrete_generator(mats, 2.0), mats.energy, {}, opts);
    const bool spectral_ok = spectrum.resolved_count > 0 && spectrum.resolved_abscissa < 0.0;

    const auto cfg = cli::parse_scenario(R"(network:
  lengths: [1, sqrt(2), sqrt(3)]
  alpha: 2
mesh:
  cells_per_edge: 100
time:
  dt: 0.01
  t_end: 50
initial:
  preset: gaussian
  edge: 2
)");
    const auto gmesh = cli::make_mesh(cfg);
    const auto u0 = cli::make_initial_condition(cfg, gmesh, 0);
    const auto result = simulate(BbmDynamics(gmesh, Model::Linear), u0, midpoint_run(Model::Linear, 0.01, 50.0));
    const auto& s = result.trace.samples;
    // Bitwise nonincreasing every step, strictly decreasing across each unit of time.
    bool strict = result.trace.is_nonincreasing();
    for (std::size_t k = 100; k < s.size(); k += 100) strict = strict && s[k].energy < s[k - 100].energy;
    const double ratio = s.back().energy / s.front().energy;
    return {spectral_ok && strict && ratio < 1.0,
            fmt::format("resolved_abscissa={:.3e} ({} resolved) E(50)/E(0)={:.6f} monotone={}",
                        spectrum.resolved_abscissa, spectrum.resolved_count, ratio, strict)};
}

Outcome criterion6() {
    const std::vector<std::vector<double>> networks = {
        {1.0, 1.0, std::sqrt(2.0)}, {1.0, 2.0, std::sqrt(2.0)}, {1.5, 2.5, M_PI}, {1.0, 3.0, 2.0}};
    double worst_ode = 0.0;
    double worst_boundary = 0.0;
    bool sums_exact = true;
    std::size_t count = 0;
    for (const auto& l : networks) {
        for (const auto& mode : imaginary_axis_modes(StarNetwork(l, 2.0), {1000, 1e-9}, 5)) {
            ++count;
            Complex sum{0.0, 0.0};
            for (const Complex& a : mode.amplitudes) sum += a;
            sums_exact = sums_exact && sum == Complex(0.0, 0.0);
            const Complex ib{0.0, mode.beta};
            // Eighth-order central differences of the closed form, independent of the derivative formulas.
            static constexpr double d1[] = {1.0 / 280, -4.0 / 105, 1.0 / 5, -4.0 / 5, 0.0,
                                            4.0 / 5,   -1.0 / 5,   4.0 / 105, -1.0 / 280};
            static constexpr double d2[] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72,
                                            8.0 / 5,    -1.0 / 5,  8.0 / 315, -1.0 / 560};
            const double h = 0.02 / (1.0 / (2.0 * mode.beta) + mode.wavenumber());
            for (std::size_t e = 0; e < l.size(); ++e) {
                worst_boundary = std::max({worst_boundary, std::abs(mode_eval(mode, e, 0.0)), std::abs(mode_eval(mode, e, l[e]))});
                if (mode.amplitudes[e] == Complex(0.0, 0.0)) continue;
                double max_y = 0.0;
                double max_res = 0.0;
                for (int s = 0; s < 400; ++s) {
                    const double x = 4.5 * h + (l[e] - 9.0 * h) * s / 399.0;
                    Complex first{0, 0};
                    Complex second{0, 0};
                    for (int t = -4; t <= 4; ++t) {
                        const Complex y = mode_eval(mode, e, x + t * h);
                        first += d1[t + 4] * y;
                        second += d2[t + 4] * y;
                    }
                    first /= h;
                    second /= h * h;
                    max_y = std::max(max_y, std::abs(mode_eval(mode, e, x)));
                    max_res = std::max(max_res, std::abs(ib * mode_eval(mode, e, x) - ib * second + first));
                }
                worst_ode = std::max(worst_ode, max_res / max_y);
            }
        }
    }
    return {count > 0 && worst_ode <= 1e-6 && worst_boundary <= 1e-12 && sums_exact,
            fmt::format("{} modes, ode={:.3e} boundary={:.3e} sum_exact={}", count, worst_ode, worst_boundary, sums_exact)};
}

Outcome criterion7() {
    const auto cfg = cli::parse_scenario(R"(network:
  lengths: [1, sqrt(2)]
  alpha: 2
mesh:
  cells_per_edge: 40
time:
  scheme: picard
  linear: false
  dt: 0.001
  t_end: 0.5
  picard:
    window: 0.1
initial:
  preset: gaussian
)");
    const auto mesh = cli::make_mesh(cfg);
    const auto u0 = cli::make_initial_condition(cfg, mesh, 0);
    const BbmDynamics dyn(mesh, Model::Nonlinear);
    const auto w = picard_window(dyn, u0.coefficients(), 0.1, 1e-3);
    const double ratio = w.contraction_ratio();

    SimulationConfig sim = midpoint_run(Model::Nonlinear, 1e-3, 0.5);
    sim.scheme = Scheme::Picard;
    sim.picard.window = 0.1;
    const auto picard = simulate(dyn, u0, sim);
    sim.scheme = Scheme::ImplicitMidpoint;
    const auto midpoint = simulate(dyn, u0, sim);
    const double gap = dyn.energy_norm(picard.final_state - midpoint.final_state);
    // The single window against 100 midpoint steps of the same dt.
    Vector u = u0.coefficients();
    for (int k = 0; k < 100; ++k) u = step_midpoint(dyn, u, 1e-3).state;
    const double window_gap = dyn.energy_norm(w.states.back() - u);
    return {ratio < 0.9 && gap <= 1e-6 && window_gap <= 1e-6,
            fmt::format("ratio={:.3f} ({} iterations) window_gap={:.3e} run_gap={:.3e}", ratio, w.iterations(),
                        window_gap, gap)};
}

Outcome criterion8() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> len(0.2, 5.0);
    std::uniform_int_distribution<int> edges(2, 6);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double worst_slope = 0.0;
    double worst_line = 0.0;
    bool center_exact = true;
    bool ends_zero = true;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> l(static_cast<std::size_t>(edges(rng)));
        for (double& x : l) x = len(rng);
        const auto mesh = build_mesh(StarNetwork(l, 0.5 * static_cast<double>(l.size()) + 1.0), Spacing{0.05});
        const auto phi = lifting_phi(mesh);
        double s = 0.0;
        for (double x : l) s += 1.0 / x;
        const double c = -1.0 / s;
        center_exact = center_exact && phi.center_value() == c;
        // phi is affine per edge, so its slope is the chord over the whole edge; a
        // first-cell difference would lose digits to cancellation.
        double slope_sum = 0.0;
        for (std::size_t e = 0; e < l.size(); ++e) {
            ends_zero = ends_zero && phi(e, l[e]) == 0.0 && phi(e, 0.0) == c;
            const double slope = (phi(e, l[e]) - phi(e, 0.0)) / l[e];
            slope_sum += slope;
            const int m = mesh->cells(e);
            for (int i = 1; i < m; ++i) {
                const double x = l[e] * i / m;
                const double node = phi.coefficients()[static_cast<Eigen::Index>(*mesh->dof(e, i))];
                worst_line = std::max(worst_line, std::abs(node - (c + slope * x)) / (eps * std::abs(c)));
            }
        }
        worst_slope = std::max(worst_slope, std::abs(slope_sum - 1.0) / eps);
    }
    // "Exactly one" read as agreement to rounding of the N-term sum: a few ulps.
    return {center_exact && ends_zero && worst_slope <= 8.0 && worst_line <= 8.0,
            fmt::format("center_exact={} ends_zero={} slope_sum_defect={:.1f} ulp affine_defect={:.1f} ulp", center_exact,
                        ends_zero, worst_slope, worst_line)};
}

Outcome criterion9() {
    std::mt19937_64 rng(777);
    double worst_c = 0.0;
    double worst_n = 0.0;
    const std::vector<std::vector<double>> networks = {{1.0, 2.0}, kIrrational3, {0.5, 1.0, 2.0, M_PI, 3.3}};
    for (const auto& l : networks) {
        for (int m : {3, 17, 100}) {
            const auto mesh = build_mesh(StarNetwork(l, 0.5 * static_cast<double>(l.size()) + 1.0), m);
            const auto mats = assemble(mesh);
            const double n = static_cast<double>(l.size());
            for (int trial = 0; trial < 100; ++trial) {
                const Vector u = testutil::random_vector(static_cast<Eigen::Index>(mesh->dof_count()), rng);
                const double uc = u[0];
                const double scale2 = u.squaredNorm();
                const double scale3 = u.cwiseAbs().array().cube().sum() + std::pow(u.norm(), 3);
                worst_c = std::max(worst_c, std::abs(u.dot(mats.convection * u) + 0.5 * n * uc * uc) / scale2);
                worst_n = std::max(worst_n, std::abs(u.dot(nonlinear_load(mats, u)) + n / 3.0 * uc * uc * uc) / scale3);
            }
        }
    }
    return {worst_c <= 1e-12 && worst_n <= 1e-12, fmt::format("convection={:.3e} cubic={:.3e}", worst_c, worst_n)};
}

}  // namespace

int main() {
    report(1, "midpoint energy identity, linear and nonlinear", criterion1);
    report(2, "conservation at alpha = N/2", criterion2);
    report(3, "elliptic L2 order 2", criterion3);
    report(4, "rational network keeps an undamped mode", criterion4);
    report(5, "irrational network decays", criterion5);
    report(6, "analytic eigenmode residuals", criterion6);
    report(7, "Picard contraction and midpoint agreement", criterion7);
    report(8, "lifting function identities", criterion8);
    report(9, "convection and cubic identities", criterion9);
    fmt::print("{} of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
