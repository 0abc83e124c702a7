#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bbmnet/bbmnet.hpp"

namespace bbmnet::testutil {

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng, double amplitude = 1.0) {
    std::uniform_real_distribution<double> dist(-amplitude, amplitude);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

/// Nodal interpolation of a smooth bump on every edge, vanishing at the ends.
inline NetworkFunction smooth_state(const MeshPtr& mesh, double amplitude = 0.5) {
    return NetworkFunction::interpolate(mesh, [&](std::size_t j, double x) {
        const double l = mesh->network().length(j);
        return amplitude * (1.0 + 0.3 * static_cast<double>(j)) * std::cos(0.5 * M_PI * x / l) *
               std::cos(0.5 * M_PI * x / l) * (1.0 + x);
    });
}

/// Value and slope of u on cell c of edge j, read straight from the coefficients.
struct CellData {
    double left;
    double right;
    double h;
};

inline CellData cell_data(const Mesh& mesh, const Vector& u, std::size_t j, int c) {
    const auto a = mesh.dof(j, c);
    const auto b = mesh.dof(j, c + 1);
    return {a ? u[static_cast<Eigen::Index>(*a)] : 0.0, b ? u[static_cast<Eigen::Index>(*b)] : 0.0,
            mesh.spacing(j)};
}

/// Composite Simpson over every cell of int g(u, u') dx; exact when g is a
/// polynomial of degree <= 3 in x on each cell.
template <class G>
double simpson_integral(const Mesh& mesh, const Vector& u, G&& g) {
    double sum = 0.0;
    for (std::size_t j = 0; j < mesh.edge_count(); ++j) {
        for (int c = 0; c < mesh.cells(j); ++c) {
            const CellData d = cell_data(mesh, u, j, c);
            const double slope = (d.right - d.left) / d.h;
            const double mid = 0.5 * (d.left + d.right);
            sum += d.h / 6.0 * (g(d.left, slope) + 4.0 * g(mid, slope) + g(d.right, slope));
        }
    }
    return sum;
}

/// Dense generator built from scratch with a dense LU, independent of the
/// library's generator.
inline Eigen::MatrixXd dense_generator(const StarNetwork& net, const MeshPtr& mesh) {
    const SystemMatrices mats = assemble(mesh);
    const Eigen::MatrixXd a = Eigen::MatrixXd(mats.energy);
    Eigen::MatrixXd rhs = -Eigen::MatrixXd(mats.convection);
    rhs(0, 0) -= net.alpha();
    return a.partialPivLu().solve(rhs);
}

}  // namespace bbmnet::testutil
