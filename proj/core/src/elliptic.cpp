#include "bbmnet/elliptic.hpp"

#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace bbmnet {

struct EllipticSolver::State {
    MeshPtr mesh;
    CenterCondition center;
    SparseMatrix matrix;
    SparseMatrix mass;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

namespace {

SparseMatrix pin_center(const SparseMatrix& a, Eigen::Index c) {
    SparseMatrix out = a;
    for (int k = 0; k < out.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(out, k); it; ++it) {
            if (it.row() == c || it.col() == c) {
                it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
            }
        }
    }
    out.prune(0.0);
    return out;
}

}  // namespace

const Mesh& EllipticSolver::mesh() const noexcept { return *state_->mesh; }

CenterCondition EllipticSolver::center_condition() const noexcept { return state_->center; }

EllipticSolver::EllipticSolver(const SystemMatrices& mats, CenterCondition center) {
    auto state = std::make_shared<State>();
    state->mesh = mats.mesh;
    state->center = center;
    state->mass = mats.mass;
    const auto c = static_cast<Eigen::Index>(mats.center_index);
    state->matrix = center == CenterCondition::Pinned ? pin_center(mats.energy, c) : mats.energy;
    state->ldlt.compute(state->matrix);
    if (state->ldlt.info() != Eigen::Success) {
        throw std::runtime_error("EllipticSolver: factorization of A_H failed (matrix not positive definite)");
    }
    state_ = std::move(state);
}

Vector EllipticSolver::solve(const Vector& rhs) const {
    if (static_cast<std::size_t>(rhs.size()) != state_->mesh->dof_count()) {
        throw std::invalid_argument("EllipticSolver::solve: right-hand side size does not match mesh");
    }
    if (state_->center == CenterCondition::Pinned) {
        Vector b = rhs;
        b[static_cast<Eigen::Index>(center_index())] = 0.0;
        return state_->ldlt.solve(b);
    }
    return state_->ldlt.solve(rhs);
}

NetworkFunction EllipticSolver::solve_homogeneous(const NetworkFunction& q) const {
    require_same_mesh(*state_->mesh, q.mesh(), "solve_homogeneous");
    return NetworkFunction(state_->mesh, solve(state_->mass * q.coefficients()));
}

NetworkFunction EllipticSolver::solve_flux(const Vector& load, double flux_sum) const {
    if (static_cast<std::size_t>(load.size()) != state_->mesh->dof_count()) {
        throw std::invalid_argument("solve_flux: load vector size does not match mesh");
    }
    Vector rhs = load;
    rhs[static_cast<Eigen::Index>(center_index())] -= flux_sum;
    return NetworkFunction(state_->mesh, solve(rhs));
}

double EllipticSolver::residual_norm(const Vector& x, const Vector& rhs) const {
    Vector b = rhs;
    if (state_->center == CenterCondition::Pinned) b[static_cast<Eigen::Index>(center_index())] = 0.0;
    return (state_->matrix * x - b).norm();
}

}  // namespace bbmnet
