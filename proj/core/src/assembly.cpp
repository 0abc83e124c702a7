#include "bbmnet/assembly.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace bbmnet {

namespace {

using Triplet = Eigen::Triplet<double>;

// Visits every cell with the global DOFs of its left and right nodes.
template <class F>
void for_each_cell(const Mesh& mesh, F&& f) {
    for (std::size_t j = 0; j < mesh.edge_count(); ++j) {
        const double h = mesh.spacing(j);
        for (int c = 0; c < mesh.cells(j); ++c) {
            f(j, h, mesh.dof(j, c), mesh.dof(j, c + 1));
        }
    }
}

SparseMatrix from_element(const Mesh& mesh, auto&& element) {
    std::vector<Triplet> triplets;
    triplets.reserve(4 * mesh.dof_count() + 8);
    for_each_cell(mesh, [&](std::size_t, double h, std::optional<std::size_t> a,
                            std::optional<std::size_t> b) {
        const std::array<std::optional<std::size_t>, 2> nodes{a, b};
        const std::array<std::array<double, 2>, 2> local = element(h);
        for (int r = 0; r < 2; ++r) {
            if (!nodes[r]) continue;
            for (int c = 0; c < 2; ++c) {
                if (!nodes[c]) continue;
                triplets.emplace_back(static_cast<int>(*nodes[r]), static_cast<int>(*nodes[c]), local[r][c]);
            }
        }
    });
    const auto n = static_cast<Eigen::Index>(mesh.dof_count());
    SparseMatrix m(n, n);
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

}  // namespace

SystemMatrices assemble(MeshPtr mesh) {
    if (!mesh) throw std::invalid_argument("assemble: null mesh");
    SystemMatrices out;
    out.mesh = mesh;
    out.mass = from_element(*mesh, [](double h) {
        return std::array<std::array<double, 2>, 2>{{{2.0 * h / 6.0, h / 6.0}, {h / 6.0, 2.0 * h / 6.0}}};
    });
    out.stiffness = from_element(*mesh, [](double h) {
        return std::array<std::array<double, 2>, 2>{{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}}};
    });
    // Row = test function, column = trial derivative; independent of h.
    out.convection = from_element(*mesh, [](double) {
        return std::array<std::array<double, 2>, 2>{{{-0.5, 0.5}, {-0.5, 0.5}}};
    });
    out.energy = out.mass + out.stiffness;
    out.center_index = Mesh::center_index();
    return out;
}

Vector nonlinear_load(const SystemMatrices& mats, const NetworkFunction& u) {
    require_same_mesh(*mats.mesh, u.mesh(), "nonlinear_load");
    return nonlinear_load(mats, u.coefficients());
}

Vector nonlinear_load(const SystemMatrices& mats, const Vector& u) {
    const Mesh& mesh = *mats.mesh;
    if (static_cast<std::size_t>(u.size()) != mesh.dof_count()) {
        throw std::invalid_argument("nonlinear_load: vector size does not match mesh");
    }
    static const double g = 1.0 / std::sqrt(3.0);
    static const std::array<double, 2> t_gauss{0.5 * (1.0 - g), 0.5 * (1.0 + g)};

    Vector out = Vector::Zero(u.size());
    for_each_cell(mesh, [&](std::size_t, double h, std::optional<std::size_t> a,
                            std::optional<std::size_t> b) {
        const double ua = a ? u[static_cast<Eigen::Index>(*a)] : 0.0;
        const double ub = b ? u[static_cast<Eigen::Index>(*b)] : 0.0;
        const double slope = (ub - ua) / h;
        double na = 0.0, nb = 0.0;
        for (double t : t_gauss) {
            const double w = 0.5 * h;
            const double uq = (1.0 - t) * ua + t * ub;
            na += w * uq * slope * (1.0 - t);
            nb += w * uq * slope * t;
        }
        if (a) out[static_cast<Eigen::Index>(*a)] += na;
        if (b) out[static_cast<Eigen::Index>(*b)] += nb;
    });
    return out;
}

double boundary_load(double u_center, double alpha, std::size_t edge_count, Model model) noexcept {
    double a = alpha * u_center;
    if (model == Model::Nonlinear) {
        a += static_cast<double>(edge_count) / 3.0 * u_center * u_center;
    }
    return a;
}

NetworkFunction lifting_phi(MeshPtr mesh) {
    double inv_sum = 0.0;
    for (double l : mesh->network().lengths()) inv_sum += 1.0 / l;
    const double scale = 1.0 / inv_sum;
    NetworkFunction phi(mesh);
    phi.coefficients()[Mesh::center_index()] = -scale;
    for (std::size_t j = 0; j < mesh->edge_count(); ++j) {
        const double l = mesh->network().length(j);
        for (int i = 1; i < mesh->cells(j); ++i) {
            const double x = mesh->node_position(j, i);
            phi.coefficients()[static_cast<Eigen::Index>(*mesh->dof(j, i))] = (x - l) / l * scale;
        }
    }
    return phi;
}

std::vector<double> center_slopes(const NetworkFunction& v) {
    const Mesh& mesh = v.mesh();
    std::vector<double> slopes;
    slopes.reserve(mesh.edge_count());
    for (std::size_t j = 0; j < mesh.edge_count(); ++j) {
        const double h = mesh.spacing(j);
        const auto first = mesh.dof(j, 1);
        const double v1 = first ? v.coefficients()[static_cast<Eigen::Index>(*first)] : 0.0;
        slopes.push_back((v1 - v.center_value()) / h);
    }
    return slopes;
}

}  // namespace bbmnet
