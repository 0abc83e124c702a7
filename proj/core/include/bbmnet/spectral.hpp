#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "bbmnet/assembly.hpp"
#include "bbmnet/network.hpp"

namespace bbmnet {

using Complex = std::complex<double>;

class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Undamped eigenpair i*beta of the linearized generator supported on two edges
/// of commensurable length:
///
///   y_k(x) = i A_k exp(-i x / (2 beta)) sin(x sqrt(1/(4 beta^2) - 1)),
///
/// with A_i = 1, A_j = -1, all other amplitudes zero. The central value
/// vanishes, so the feedback does not damp it.
struct Eigenmode {
    double beta = 0.0;
    std::size_t edge_i = 0;
    std::size_t edge_j = 0;
    std::vector<Complex> amplitudes;
    long long p = 0;
    long long q = 0;
    int multiplier = 1;
    std::vector<double> lengths;

    /// sqrt(1/(4 beta^2) - 1) = multiplier * p * pi / l_i.
    [[nodiscard]] double wavenumber() const;
};

/// One mode per rational pair and multiplier m = 1..m_max:
/// beta = l_i / (2 sqrt(m^2 p^2 pi^2 + l_i^2)). Empty iff the lengths are
/// pairwise incommensurable within the search bounds.
std::vector<Eigenmode> imaginary_axis_modes(const StarNetwork& network, const RationalSearch& search = {},
                                            int m_max = 5);

/// Closed-form y_edge(x); zero on edges outside the mode's support.
Complex mode_eval(const Eigenmode& mode, std::size_t edge, double x);
/// First and second x-derivatives of y_edge, closed form.
Complex mode_derivative(const Eigenmode& mode, std::size_t edge, double x, int order);

/// Nodal interpolant of Re y on the mesh.
NetworkFunction mode_real_part(MeshPtr mesh, const Eigenmode& mode, double amplitude = 1.0);

struct HighBetaSample {
    double beta;
    /// |det| of the 2N x 2N Dirichlet system y_j(0) = y_j(l_j) = 0 in the
    /// general-solution basis.
    double determinant_magnitude;
    /// Smallest per-edge |det| (|sinh(kappa l_j)|, or l_j at |beta| = 1/2).
    double min_edge_determinant;
};

struct HighBetaReport {
    std::vector<HighBetaSample> samples;
    double min_determinant = 0.0;
    bool only_trivial = true;
};

/// For each |beta| >= 1/2 confirms that the eigen-equation admits only y = 0.
HighBetaReport verify_no_high_beta(const StarNetwork& network, std::span<const double> beta_samples);

/// Dense G = -A_H^{-1} (C + alpha e_c e_c^T); the linear semidiscrete system is u' = G u.
Eigen::MatrixXd discrete_generator(const SystemMatrices& mats, double alpha, std::size_t max_dofs = 5000);

struct SpectrumOptions {
    /// Eigenvalues with |lambda| at or below this count as the zero cluster.
    double zero_threshold = 1e-10;
    /// Only |Im lambda| < 1/2 - delta enters the resolved abscissa.
    double delta = 0.05;
    /// Smallest |lambda| the mesh resolves (see resolved_modulus_threshold).
    double resolved_min_modulus = 0.0;
};

/// Eigenvalue modulus of a continuum mode at wavenumber pi / (points/2 * h_max),
/// i.e. the smallest |beta| the mesh samples with `points_per_wavelength` nodes.
double resolved_modulus_threshold(const Mesh& mesh, double points_per_wavelength = 8.0);

struct ModeMatch {
    double beta;
    Complex eigenvalue;
    double distance;
};

struct SpectrumReport {
    std::vector<Complex> eigenvalues;
    std::vector<ModeMatch> matches;
    /// max Re lambda over eigenvalues outside the zero cluster.
    double abscissa = 0.0;
    /// max Re lambda over resolved eigenvalues outside the zero cluster.
    double resolved_abscissa = 0.0;
    std::size_t resolved_count = 0;
    SpectrumOptions options;
};

/// Eigenvalues of G via the similar matrix L^T G L^{-T}, A_H = L L^T, and the
/// nearest discrete eigenvalue to each analytic i*beta.
SpectrumReport discrete_spectrum(const Eigen::MatrixXd& generator, const SparseMatrix& energy_matrix,
                                 std::span<const Eigenmode> modes, const SpectrumOptions& options = {});

}  // namespace bbmnet
