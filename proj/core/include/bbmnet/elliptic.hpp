#pragma once

#include <memory>

#include "bbmnet/assembly.hpp"

namespace bbmnet {

/// How the central node enters the elliptic problem (1 - d^2/dx^2) v = f.
enum class CenterCondition {
    /// Continuity plus a prescribed flux sum at x = 0 (natural in the weak form).
    Flux,
    /// Homogeneous Dirichlet value at x = 0 on every edge.
    Pinned,
};

/// Factored A_H = M + K for one mesh. Copies share the factorization.
class EllipticSolver {
public:
    explicit EllipticSolver(const SystemMatrices& mats, CenterCondition center = CenterCondition::Flux);

    [[nodiscard]] const Mesh& mesh() const noexcept;
    [[nodiscard]] std::size_t center_index() const noexcept { return Mesh::center_index(); }
    [[nodiscard]] CenterCondition center_condition() const noexcept;

    /// Solves A x = rhs. In Pinned mode the central row is replaced by x_c = 0.
    [[nodiscard]] Vector solve(const Vector& rhs) const;

    /// Weak solution of (1 - d^2/dx^2) w = q with zero flux sum: A_H w = M q.
    [[nodiscard]] NetworkFunction solve_homogeneous(const NetworkFunction& q) const;

    /// Weak solution with load vector f and prescribed flux sum a:
    /// A_H v = f - a e_c.
    [[nodiscard]] NetworkFunction solve_flux(const Vector& load, double flux_sum) const;

    /// ||A x - rhs||_2 for the matrix this solver factored.
    [[nodiscard]] double residual_norm(const Vector& x, const Vector& rhs) const;

private:
    struct State;
    std::shared_ptr<const State> state_;
};

}  // namespace bbmnet
