#include "bbmnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bbmnet {

namespace {

void check_lengths(const std::vector<double>& lengths) {
    if (lengths.size() < 2) {
        throw std::invalid_argument("StarNetwork: at least two edges are required");
    }
    for (double l : lengths) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw std::invalid_argument("StarNetwork: edge lengths must be positive and finite");
        }
    }
}

}  // namespace

StarNetwork::StarNetwork(std::vector<double> lengths, double alpha)
    : StarNetwork(std::move(lengths), alpha, false) {}

StarNetwork::StarNetwork(std::vector<double> lengths, double alpha, bool conservative)
    : lengths_(std::move(lengths)), alpha_(alpha), conservative_(conservative) {
    check_lengths(lengths_);
    const double half_n = 0.5 * static_cast<double>(lengths_.size());
    if (!conservative_ && !(alpha_ > half_n)) {
        throw std::invalid_argument("StarNetwork: damping requires alpha > N/2 (got alpha = " +
                                    std::to_string(alpha_) + ", N/2 = " + std::to_string(half_n) +
                                    "); use StarNetwork::conservative for alpha = N/2");
    }
}

StarNetwork StarNetwork::conservative(std::vector<double> lengths) {
    const double half_n = 0.5 * static_cast<double>(lengths.size());
    return StarNetwork(std::move(lengths), half_n, true);
}

double StarNetwork::length(std::size_t edge) const { return lengths_.at(edge); }

double StarNetwork::dissipation_coefficient() const noexcept {
    return alpha_ - 0.5 * static_cast<double>(lengths_.size());
}

StarNetwork StarNetwork::scaled(double factor) const {
    if (!(factor > 0.0)) {
        throw std::invalid_argument("StarNetwork::scaled: factor must be positive");
    }
    std::vector<double> l = lengths_;
    for (double& x : l) x *= factor;
    return StarNetwork(std::move(l), alpha_, conservative_);
}

// --- Mesh ------------------------------------------------------------------

Mesh::Mesh(StarNetwork network, std::vector<int> cells_per_edge)
    : network_(std::move(network)), cells_(std::move(cells_per_edge)) {
    if (cells_.size() != network_.edge_count()) {
        throw std::invalid_argument("Mesh: one cell count per edge is required");
    }
    spacing_.reserve(cells_.size());
    offsets_.reserve(cells_.size());
    std::size_t next = 1;  // DOF 0 is the center
    for (std::size_t j = 0; j < cells_.size(); ++j) {
        if (cells_[j] < 2) {
            throw std::invalid_argument("Mesh: every edge needs at least 2 cells (edge " +
                                        std::to_string(j) + " has " + std::to_string(cells_[j]) + ")");
        }
        spacing_.push_back(network_.length(j) / cells_[j]);
        offsets_.push_back(next);
        next += static_cast<std::size_t>(cells_[j] - 1);
    }
    dof_count_ = next;
}

double Mesh::max_spacing() const noexcept { return *std::max_element(spacing_.begin(), spacing_.end()); }

std::optional<std::size_t> Mesh::dof(std::size_t edge, int node) const {
    const int m = cells_.at(edge);
    if (node < 0 || node > m) {
        throw std::out_of_range("Mesh::dof: node index outside edge");
    }
    if (node == 0) return center_index();
    if (node == m) return std::nullopt;
    return offsets_[edge] + static_cast<std::size_t>(node - 1);
}

double Mesh::node_position(std::size_t edge, int node) const {
    if (node == cells_.at(edge)) return network_.length(edge);
    return node * spacing_.at(edge);
}

MeshPtr build_mesh(const StarNetwork& network, const MeshResolution& resolution) {
    std::vector<int> cells;
    if (const auto* s = std::get_if<Spacing>(&resolution)) {
        if (!(s->h > 0.0) || !std::isfinite(s->h)) {
            throw std::invalid_argument("build_mesh: spacing h must be positive");
        }
        for (double l : network.lengths()) {
            // The small slack keeps l/h = 4 from becoming 5 through rounding.
            const double m = std::ceil(l / s->h - 1e-9);
            if (m > static_cast<double>(std::numeric_limits<int>::max())) {
                throw std::invalid_argument("build_mesh: spacing too small");
            }
            cells.push_back(std::max(2, static_cast<int>(m)));
        }
    } else {
        cells = std::get<CellCounts>(resolution);
        for (int m : cells) {
            if (m < 2) throw std::invalid_argument("build_mesh: cell counts must be >= 2");
        }
    }
    return std::make_shared<const Mesh>(network, std::move(cells));
}

MeshPtr build_mesh(const StarNetwork& network, int cells_per_edge) {
    return build_mesh(network, CellCounts(network.edge_count(), cells_per_edge));
}

void require_same_mesh(const Mesh& expected, const Mesh& actual, std::string_view what) {
    if (&expected != &actual && !(expected == actual)) {
        throw std::invalid_argument(std::string(what) + ": function lives on a different mesh");
    }
}

// --- NetworkFunction -------------------------------------------------------

NetworkFunction::NetworkFunction(MeshPtr mesh) : mesh_(std::move(mesh)) {
    if (!mesh_) throw std::invalid_argument("NetworkFunction: null mesh");
    coefficients_ = Vector::Zero(static_cast<Eigen::Index>(mesh_->dof_count()));
}

NetworkFunction::NetworkFunction(MeshPtr mesh, Vector coefficients)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients)) {
    if (!mesh_) throw std::invalid_argument("NetworkFunction: null mesh");
    if (static_cast<std::size_t>(coefficients_.size()) != mesh_->dof_count()) {
        throw std::invalid_argument("NetworkFunction: coefficient vector does not match DOF count");
    }
}

NetworkFunction NetworkFunction::interpolate(MeshPtr mesh,
                                             const std::function<double(std::size_t, double)>& f) {
    NetworkFunction out(std::move(mesh));
    const Mesh& m = out.mesh();
    out.coefficients_[Mesh::center_index()] = f(0, 0.0);
    for (std::size_t j = 0; j < m.edge_count(); ++j) {
        for (int i = 1; i < m.cells(j); ++i) {
            out.coefficients_[static_cast<Eigen::Index>(*m.dof(j, i))] = f(j, m.node_position(j, i));
        }
    }
    return out;
}

double NetworkFunction::operator()(std::size_t edge, double x) const {
    const Mesh& m = *mesh_;
    if (edge >= m.edge_count()) {
        throw std::invalid_argument("eval_function: edge index out of range");
    }
    const double l = m.network().length(edge);
    if (!(x >= 0.0 && x <= l)) {
        throw std::invalid_argument("eval_function: x outside [0, l_j]");
    }
    const int cells = m.cells(edge);
    const double h = m.spacing(edge);
    int cell = std::min(static_cast<int>(x / h), cells - 1);
    const double t = std::clamp((x - cell * h) / h, 0.0, 1.0);
    auto value = [&](int node) {
        const auto d = m.dof(edge, node);
        return d ? coefficients_[static_cast<Eigen::Index>(*d)] : 0.0;
    };
    if (x == l) return 0.0;
    if (t == 0.0) return value(cell);
    if (t == 1.0) return value(cell + 1);
    return (1.0 - t) * value(cell) + t * value(cell + 1);
}

// --- stability classification ----------------------------------------------

std::string_view to_string(Stability s) noexcept {
    return s == Stability::StronglyStable ? "strongly-stable" : "non-stable";
}

std::optional<std::pair<long long, long long>> rational_approximation(double ratio,
                                                                      const RationalSearch& search) {
    if (search.denominator_bound < 1) {
        throw std::invalid_argument("rational_approximation: denominator bound must be >= 1");
    }
    if (!(search.tolerance > 0.0)) {
        throw std::invalid_argument("rational_approximation: tolerance must be positive");
    }
    if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
        throw std::invalid_argument("rational_approximation: ratio must be finite and >= 1");
    }
    const double bound = static_cast<double>(search.denominator_bound);
    // Convergent recurrences h_k = a_k h_{k-1} + h_{k-2}, k_k likewise.
    long long h_prev = 1, h_prev2 = 0;
    long long k_prev = 0, k_prev2 = 1;
    double x = ratio;
    for (int iter = 0; iter < 64; ++iter) {
        const double a_real = std::floor(x);
        if (a_real * static_cast<double>(k_prev) + static_cast<double>(k_prev2) > bound) break;
        if (a_real > 9.0e15) break;
        const auto a = static_cast<long long>(a_real);
        const long long h = a * h_prev + h_prev2;
        const long long k = a * k_prev + k_prev2;
        if (std::abs(ratio - static_cast<double>(h) / static_cast<double>(k)) <= search.tolerance) {
            return std::make_pair(h, k);
        }
        const double frac = x - a_real;
        if (frac <= 0.0) break;
        x = 1.0 / frac;
        h_prev2 = h_prev;
        h_prev = h;
        k_prev2 = k_prev;
        k_prev = k;
    }
    return std::nullopt;
}

StabilityReport classify_stability(const StarNetwork& network, const RationalSearch& search) {
    StabilityReport report;
    report.search = search;
    const auto& l = network.lengths();
    for (std::size_t i = 0; i < l.size(); ++i) {
        for (std::size_t j = i + 1; j < l.size(); ++j) {
            const bool i_longer = l[i] >= l[j];
            const double ratio = i_longer ? l[i] / l[j] : l[j] / l[i];
            if (auto pq = rational_approximation(ratio, search)) {
                const auto [num, den] = *pq;
                report.rational_pairs.push_back(
                    i_longer ? RationalPair{i, j, num, den} : RationalPair{i, j, den, num});
            }
        }
    }
    report.classification =
        report.rational_pairs.empty() ? Stability::StronglyStable : Stability::NonStable;
    return report;
}

}  // namespace bbmnet
