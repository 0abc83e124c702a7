#include "bbmnet/spectral.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace bbmnet {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_edge_point(const Eigenmode& mode, std::size_t edge, double x) {
    if (edge >= mode.lengths.size()) throw std::invalid_argument("mode_eval: edge index out of range");
    if (!(x >= 0.0 && x <= mode.lengths[edge])) throw std::invalid_argument("mode_eval: x outside [0, l_j]");
}

}  // namespace

double Eigenmode::wavenumber() const { return std::sqrt(1.0 / (4.0 * beta * beta) - 1.0); }

std::vector<Eigenmode> imaginary_axis_modes(const StarNetwork& network, const RationalSearch& search, int m_max) {
    if (m_max < 1) throw std::invalid_argument("imaginary_axis_modes: m_max must be >= 1");
    const StabilityReport report = classify_stability(network, search);
    std::vector<Eigenmode> modes;
    const double pi = std::numbers::pi;
    for (const RationalPair& pair : report.rational_pairs) {
        const double li = network.length(pair.edge_i);
        for (int m = 1; m <= m_max; ++m) {
            const double mp_pi = static_cast<double>(m) * static_cast<double>(pair.p) * pi;
            Eigenmode mode;
            mode.beta = li / (2.0 * std::sqrt(mp_pi * mp_pi + li * li));
            mode.edge_i = pair.edge_i;
            mode.edge_j = pair.edge_j;
            mode.amplitudes.assign(network.edge_count(), Complex{0.0, 0.0});
            mode.amplitudes[pair.edge_i] = 1.0;
            mode.amplitudes[pair.edge_j] = -1.0;
            mode.p = pair.p;
            mode.q = pair.q;
            mode.multiplier = m;
            mode.lengths = network.lengths();
            modes.push_back(std::move(mode));
        }
    }
    return modes;
}

Complex mode_derivative(const Eigenmode& mode, std::size_t edge, double x, int order) {
    check_edge_point(mode, edge, x);
    if (order < 0 || order > 2) throw std::invalid_argument("mode_derivative: order must be 0, 1 or 2");
    const Complex a = mode.amplitudes[edge];
    if (a == Complex{0.0, 0.0}) return {0.0, 0.0};
    const double omega = 1.0 / (2.0 * mode.beta);
    const double k = mode.wavenumber();
    const Complex e = std::exp(-kI * omega * x);
    const double s = std::sin(k * x);
    const double c = std::cos(k * x);
    switch (order) {
        case 0:
            return kI * a * e * s;
        case 1:
            return kI * a * e * (-kI * omega * s + k * c);
        default:
            return kI * a * e * ((-omega * omega - k * k) * s - 2.0 * kI * omega * k * c);
    }
}

Complex mode_eval(const Eigenmode& mode, std::size_t edge, double x) { return mode_derivative(mode, edge, x, 0); }

NetworkFunction mode_real_part(MeshPtr mesh, const Eigenmode& mode, double amplitude) {
    if (mode.lengths != mesh->network().lengths()) {
        throw std::invalid_argument("mode_real_part: mode belongs to a different network");
    }
    return NetworkFunction::interpolate(std::move(mesh), [&](std::size_t edge, double x) {
        return amplitude * mode_eval(mode, edge, x).real();
    });
}

HighBetaReport verify_no_high_beta(const StarNetwork& network, std::span<const double> beta_samples) {
    HighBetaReport report;
    report.min_determinant = std::numeric_limits<double>::infinity();
    for (double beta : beta_samples) {
        if (!(std::abs(beta) >= 0.5)) {
            throw std::invalid_argument("verify_no_high_beta: samples must satisfy |beta| >= 1/2");
        }
        const double omega = 1.0 / (2.0 * beta);
        const double kappa2 = 1.0 - omega * omega;
        const double kappa = std::sqrt(std::max(kappa2, 0.0));
        const bool degenerate = kappa2 <= 0.0;
        // Basis of the characteristic ODE: exp(-i omega x) times {sinh(kappa x), cosh(kappa x)},
        // or {x, 1} when the characteristic root is double.
        auto basis = [&](double x) -> std::array<Complex, 2> {
            const Complex e = std::exp(-kI * omega * x);
            if (degenerate) return {e * x, e};
            return {e * std::sinh(kappa * x), e * std::cosh(kappa * x)};
        };
        HighBetaSample sample{beta, 1.0, std::numeric_limits<double>::infinity()};
        for (double l : network.lengths()) {
            const auto at0 = basis(0.0);
            const auto atl = basis(l);
            const Complex det = at0[0] * atl[1] - at0[1] * atl[0];
            sample.determinant_magnitude *= std::abs(det);
            sample.min_edge_determinant = std::min(sample.min_edge_determinant, std::abs(det));
        }
        report.min_determinant = std::min(report.min_determinant, sample.determinant_magnitude);
        report.only_trivial = report.only_trivial && sample.min_edge_determinant > 0.0;
        report.samples.push_back(sample);
    }
    if (beta_samples.empty()) report.min_determinant = 0.0;
    return report;
}

Eigen::MatrixXd discrete_generator(const SystemMatrices& mats, double alpha, std::size_t max_dofs) {
    const std::size_t n = mats.mesh->dof_count();
    if (n > max_dofs) {
        throw ResourceError("discrete_generator: " + std::to_string(n) + " DOFs exceed the dense limit of " +
                            std::to_string(max_dofs));
    }
    Eigen::MatrixXd b = Eigen::MatrixXd(mats.convection);
    const auto c = static_cast<Eigen::Index>(mats.center_index);
    b(c, c) += alpha;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(mats.energy);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("discrete_generator: A_H factorization failed");
    return -ldlt.solve(b);
}

double resolved_modulus_threshold(const Mesh& mesh, double points_per_wavelength) {
    const double k = 2.0 * std::numbers::pi / (points_per_wavelength * mesh.max_spacing());
    return 1.0 / (2.0 * std::sqrt(k * k + 1.0));
}

SpectrumReport discrete_spectrum(const Eigen::MatrixXd& generator, const SparseMatrix& energy_matrix,
                                 std::span<const Eigenmode> modes, const SpectrumOptions& options) {
    const Eigen::Index n = generator.rows();
    if (generator.cols() != n || energy_matrix.rows() != n || energy_matrix.cols() != n) {
        throw std::invalid_argument("discrete_spectrum: generator and A_H sizes differ");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(energy_matrix)};
    if (llt.info() != Eigen::Success) throw std::runtime_error("discrete_spectrum: A_H is not positive definite");
    const Eigen::MatrixXd lower = llt.matrixL();
    // L^T G L^{-T}: similar to G and close to normal in the Euclidean inner product.
    const Eigen::MatrixXd right = lower.triangularView<Eigen::Lower>().solve(generator.transpose()).transpose();
    const Eigen::MatrixXd similar = lower.transpose() * right;

    Eigen::EigenSolver<Eigen::MatrixXd> es(similar, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("discrete_spectrum: eigensolver did not converge");

    SpectrumReport report;
    report.options = options;
    report.eigenvalues.assign(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(report.eigenvalues.begin(), report.eigenvalues.end(), [](const Complex& a, const Complex& b) {
        if (a.imag() != b.imag()) return a.imag() < b.imag();
        return a.real() < b.real();
    });

    report.abscissa = -std::numeric_limits<double>::infinity();
    report.resolved_abscissa = -std::numeric_limits<double>::infinity();
    for (const Complex& z : report.eigenvalues) {
        if (std::abs(z) <= options.zero_threshold) continue;
        report.abscissa = std::max(report.abscissa, z.real());
        if (std::abs(z) >= options.resolved_min_modulus && std::abs(z.imag()) < 0.5 - options.delta) {
            report.resolved_abscissa = std::max(report.resolved_abscissa, z.real());
            ++report.resolved_count;
        }
    }

    for (const Eigenmode& mode : modes) {
        const Complex target{0.0, mode.beta};
        ModeMatch best{mode.beta, {}, std::numeric_limits<double>::infinity()};
        for (const Complex& z : report.eigenvalues) {
            const double d = std::abs(z - target);
            if (d < best.distance) best = {mode.beta, z, d};
        }
        report.matches.push_back(best);
    }
    return report;
}

}  // namespace bbmnet
