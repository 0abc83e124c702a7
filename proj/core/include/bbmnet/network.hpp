#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace bbmnet {

using Vector = Eigen::VectorXd;

/// N edges [0, l_j] joined at x = 0, homogeneous Dirichlet data at x = l_j and
/// a feedback coefficient alpha acting on the central node.
///
/// A damped network requires alpha > N/2. The borderline alpha = N/2, for
/// which the energy is conserved, is only reachable through conservative().
class StarNetwork {
public:
    StarNetwork(std::vector<double> lengths, double alpha);

    /// Network with alpha = N/2 exactly (zero net dissipation).
    static StarNetwork conservative(std::vector<double> lengths);

    [[nodiscard]] std::size_t edge_count() const noexcept { return lengths_.size(); }
    [[nodiscard]] const std::vector<double>& lengths() const noexcept { return lengths_; }
    [[nodiscard]] double length(std::size_t edge) const;
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] bool is_conservative() const noexcept { return conservative_; }

    /// alpha - N/2.
    [[nodiscard]] double dissipation_coefficient() const noexcept;

    /// Same network with every length multiplied by factor > 0.
    [[nodiscard]] StarNetwork scaled(double factor) const;

    bool operator==(const StarNetwork&) const = default;

private:
    StarNetwork(std::vector<double> lengths, double alpha, bool conservative);

    std::vector<double> lengths_;
    double alpha_;
    bool conservative_;
};

struct Spacing {
    double h;
};
using CellCounts = std::vector<int>;
using MeshResolution = std::variant<Spacing, CellCounts>;

/// Uniform grid on each edge. Global DOF 0 is the shared central node; edge j
/// owns the m_j - 1 interior nodes; the external node x = l_j carries no DOF.
class Mesh {
public:
    Mesh(StarNetwork network, std::vector<int> cells_per_edge);

    [[nodiscard]] const StarNetwork& network() const noexcept { return network_; }
    [[nodiscard]] std::size_t edge_count() const noexcept { return cells_.size(); }
    [[nodiscard]] int cells(std::size_t edge) const { return cells_.at(edge); }
    [[nodiscard]] const std::vector<int>& cells_per_edge() const noexcept { return cells_; }
    [[nodiscard]] double spacing(std::size_t edge) const { return spacing_.at(edge); }
    [[nodiscard]] double max_spacing() const noexcept;
    [[nodiscard]] std::size_t dof_count() const noexcept { return dof_count_; }
    [[nodiscard]] static constexpr std::size_t center_index() noexcept { return 0; }

    /// Global DOF of grid node `node` in [0, m_j] on `edge`; nullopt for the
    /// eliminated external node.
    [[nodiscard]] std::optional<std::size_t> dof(std::size_t edge, int node) const;
    [[nodiscard]] double node_position(std::size_t edge, int node) const;

    bool operator==(const Mesh&) const = default;

private:
    StarNetwork network_;
    std::vector<int> cells_;
    std::vector<double> spacing_;
    std::vector<std::size_t> offsets_;
    std::size_t dof_count_ = 0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Target spacing h gives m_j = max(2, ceil(l_j / h)) cells on edge j.
MeshPtr build_mesh(const StarNetwork& network, const MeshResolution& resolution);
MeshPtr build_mesh(const StarNetwork& network, int cells_per_edge);

/// Throws std::invalid_argument when the two meshes differ.
void require_same_mesh(const Mesh& expected, const Mesh& actual, std::string_view what);

/// Continuous piecewise-linear function on a mesh, stored by its DOF values.
class NetworkFunction {
public:
    explicit NetworkFunction(MeshPtr mesh);
    NetworkFunction(MeshPtr mesh, Vector coefficients);

    /// Nodal interpolant of f(edge, x). The central value is taken from edge 0.
    static NetworkFunction interpolate(MeshPtr mesh,
                                       const std::function<double(std::size_t, double)>& f);

    [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
    [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
    [[nodiscard]] const Vector& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] Vector& coefficients() noexcept { return coefficients_; }
    [[nodiscard]] double center_value() const { return coefficients_[Mesh::center_index()]; }

    /// Linear interpolation between grid values; x must lie in [0, l_edge].
    [[nodiscard]] double operator()(std::size_t edge, double x) const;

private:
    MeshPtr mesh_;
    Vector coefficients_;
};

inline double eval_function(const NetworkFunction& f, std::size_t edge, double x) { return f(edge, x); }

// --- length-ratio classification -------------------------------------------

enum class Stability { StronglyStable, NonStable };
std::string_view to_string(Stability s) noexcept;

struct RationalSearch {
    long long denominator_bound = 1000;
    double tolerance = 1e-9;
};

/// l_i / l_j ~ p / q in lowest terms.
struct RationalPair {
    std::size_t edge_i;
    std::size_t edge_j;
    long long p;
    long long q;

    bool operator==(const RationalPair&) const = default;
};

struct StabilityReport {
    Stability classification = Stability::StronglyStable;
    std::vector<RationalPair> rational_pairs;
    RationalSearch search;
};

/// First continued-fraction convergent p/q of ratio >= 1 with q <= bound and
/// |ratio - p/q| <= tolerance.
std::optional<std::pair<long long, long long>> rational_approximation(double ratio,
                                                                      const RationalSearch& search);

/// Examines every unordered edge pair. The ratio is taken as longer/shorter so
/// the search is symmetric; the reported (p, q) is oriented as l_i / l_j with i < j.
StabilityReport classify_stability(const StarNetwork& network, const RationalSearch& search = {});

}  // namespace bbmnet
