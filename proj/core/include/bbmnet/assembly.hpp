#pragma once

#include <cstddef>

#include <Eigen/SparseCore>

#include "bbmnet/network.hpp"

namespace bbmnet {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Model { Linear, Nonlinear };

/// Piecewise-linear Galerkin matrices on a star mesh.
///
///   mass       M_ik = sum_j int psi_k psi_i
///   stiffness  K_ik = sum_j int psi_k' psi_i'
///   convection C_ik = sum_j int psi_k' psi_i      (not integrated by parts)
///   energy     A_H  = M + K
///
/// With u(l_j) = 0 on every edge, u^T C u = -(N/2) u_c^2 holds exactly.
struct SystemMatrices {
    MeshPtr mesh;
    SparseMatrix mass;
    SparseMatrix stiffness;
    SparseMatrix convection;
    SparseMatrix energy;
    std::size_t center_index = Mesh::center_index();
};

SystemMatrices assemble(MeshPtr mesh);

/// n_i = sum_j int u u' psi_i, two-point Gauss per cell (exact here), so that
/// u^T n(u) = -(N/3) u_c^3.
Vector nonlinear_load(const SystemMatrices& mats, const NetworkFunction& u);
Vector nonlinear_load(const SystemMatrices& mats, const Vector& u);

/// Right-hand side of the central flux condition: alpha u_c, plus (N/3) u_c^2
/// for the nonlinear model.
double boundary_load(double u_center, double alpha, std::size_t edge_count, Model model) noexcept;

/// The affine lifting phi_j(x) = (x - l_j)/l_j * (sum_i 1/l_i)^{-1}, which carries
/// a unit flux sum at the center. Its nodal interpolant is exact.
NetworkFunction lifting_phi(MeshPtr mesh);

/// Per-edge slopes of a function at the center, (v_j(h_j) - v_j(0)) / h_j.
std::vector<double> center_slopes(const NetworkFunction& v);

}  // namespace bbmnet
