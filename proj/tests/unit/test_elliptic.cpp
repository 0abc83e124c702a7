#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "bbmnet/elliptic.hpp"
#include "test_support.hpp"

using namespace bbmnet;
using bbmnet::testutil::random_vector;

namespace {

// L2 distance between a P1 function and an analytic one, three-point Gauss per cell.
template <class F>
double l2_error(const NetworkFunction& w, F&& exact) {
    const double g = std::sqrt(0.6);
    const double nodes[3] = {-g, 0.0, g};
    const double weights[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const Mesh& mesh = w.mesh();
    double sum = 0.0;
    for (std::size_t j = 0; j < mesh.edge_count(); ++j) {
        for (int c = 0; c < mesh.cells(j); ++c) {
            const auto d = bbmnet::testutil::cell_data(mesh, w.coefficients(), j, c);
            for (int q = 0; q < 3; ++q) {
                const double t = 0.5 * (1.0 + nodes[q]);
                const double diff = (1.0 - t) * d.left + t * d.right - exact(j, (c + t) * d.h);
                sum += 0.5 * d.h * weights[q] * diff * diff;
            }
        }
    }
    return std::sqrt(sum);
}

double manufactured(std::size_t j, double x) { return (j == 0 ? -1.0 : 1.0) * std::sin(x); }

}  // namespace

TEST(EllipticSolver, ZeroDataGivesZero) {
    const auto mesh = build_mesh(StarNetwork({1.0, 2.0, 3.0}, 2.0), 10);
    const EllipticSolver solver(assemble(mesh));
    EXPECT_EQ(solver.solve_homogeneous(NetworkFunction(mesh)).coefficients().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(solver.center_index(), 0u);
    EXPECT_EQ(solver.center_condition(), CenterCondition::Flux);
}

TEST(EllipticSolver, ResidualBound) {
    std::mt19937_64 rng(43);
    for (int m : {5, 50, 400}) {
        const auto mesh = build_mesh(StarNetwork({1.0, std::sqrt(2.0), std::sqrt(3.0)}, 2.0), m);
        for (auto center : {CenterCondition::Flux, CenterCondition::Pinned}) {
            const EllipticSolver solver(assemble(mesh), center);
            for (int trial = 0; trial < 10; ++trial) {
                const Vector rhs = random_vector(static_cast<Eigen::Index>(mesh->dof_count()), rng);
                const Vector x = solver.solve(rhs);
                EXPECT_LE(solver.residual_norm(x, rhs), 1e-12 * rhs.norm());
            }
        }
    }
}

TEST(EllipticSolver, ManufacturedSecondOrder) {
    std::vector<double> errors;
    for (int m : {8, 16, 32, 64}) {
        const auto mesh = build_mesh(StarNetwork({M_PI, M_PI}, 2.0), m);
        const EllipticSolver solver(assemble(mesh));
        const auto q = NetworkFunction::interpolate(mesh, [](std::size_t j, double x) { return 2.0 * manufactured(j, x); });
        errors.push_back(l2_error(solver.solve_homogeneous(q), manufactured));
    }
    for (std::size_t k = 1; k < errors.size(); ++k) {
        const double order = std::log2(errors[k - 1] / errors[k]);
        EXPECT_NEAR(order, 2.0, 0.2) << "level " << k;
    }
}

TEST(EllipticSolver, ConstantDataIsSymmetric) {
    // w - w'' = 1, w(1) = 0 and zero flux on two equal edges: w = 1 - cosh(x)/cosh(1).
    const auto exact = [](std::size_t, double x) { return 1.0 - std::cosh(x) / std::cosh(1.0); };
    double previous = 0.0;
    for (int m : {10, 20, 40}) {
        const auto mesh = build_mesh(StarNetwork({1.0, 1.0}, 2.0), m);
        const EllipticSolver solver(assemble(mesh));
        const auto w = solver.solve_homogeneous(NetworkFunction::interpolate(mesh, [](std::size_t, double) { return 1.0; }));
        for (int i = 1; i < m; ++i) {
            EXPECT_NEAR(w.coefficients()[static_cast<Eigen::Index>(*mesh->dof(0, i))],
                        w.coefficients()[static_cast<Eigen::Index>(*mesh->dof(1, i))], 1e-14);
        }
        const double err = l2_error(w, exact);
        if (previous > 0.0) {
            EXPECT_NEAR(std::log2(previous / err), 2.0, 0.2);
        }
        previous = err;
    }
}

TEST(EllipticSolver, FluxWithZeroSumMatchesPlainSolve) {
    std::mt19937_64 rng(47);
    const auto mesh = build_mesh(StarNetwork({1.0, 2.0, 0.5}, 2.0), 20);
    const EllipticSolver solver(assemble(mesh));
    const Vector f = random_vector(static_cast<Eigen::Index>(mesh->dof_count()), rng);
    EXPECT_EQ((solver.solve_flux(f, 0.0).coefficients() - solver.solve(f)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EllipticSolver, UnitFluxSumConverges) {
    const StarNetwork net({1.0, std::sqrt(2.0), std::sqrt(3.0)}, 2.0);
    std::vector<double> defects;
    for (int m : {10, 40, 160, 640}) {
        const auto mesh = build_mesh(net, m);
        const EllipticSolver solver(assemble(mesh));
        const auto v = solver.solve_flux(Vector::Zero(static_cast<Eigen::Index>(mesh->dof_count())), 1.0);
        EXPECT_GT(v.coefficients().norm(), 0.0);
        double sum = 0.0;
        for (double s : center_slopes(v)) sum += s;
        defects.push_back(std::abs(sum - 1.0));
    }
    for (std::size_t k = 1; k < defects.size(); ++k) EXPECT_LT(defects[k], defects[k - 1]);
    EXPECT_LT(defects.back(), 5e-3);
}

TEST(EllipticSolver, LiftingDecomposition) {
    // v = w + a phi where (1 - d^2/dx^2) w = q - a phi, using phi'' = 0.
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> len(0.3, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const StarNetwork net({len(rng), len(rng), len(rng)}, 2.0);
        const auto mesh = build_mesh(net, Spacing{0.02});
        const auto mats = assemble(mesh);
        const EllipticSolver solver(mats);
        const NetworkFunction q(mesh, random_vector(static_cast<Eigen::Index>(mesh->dof_count()), rng));
        const double a = 0.7 + trial;
        const auto phi = lifting_phi(mesh);
        const Vector v = solver.solve_flux(mats.mass * q.coefficients(), a).coefficients();
        const NetworkFunction shifted(mesh, q.coefficients() - a * phi.coefficients());
        const Vector w = solver.solve_homogeneous(shifted).coefficients() + a * phi.coefficients();
        const Vector d = v - w;
        EXPECT_LE(std::sqrt(d.dot(mats.energy * d)), 1e-10 * (1.0 + std::sqrt(v.dot(mats.energy * v))));
    }
}

TEST(EllipticSolver, DeterministicReSolve) {
    std::mt19937_64 rng(59);
    const auto mesh = build_mesh(StarNetwork({1.0, 2.0}, 2.0), 100);
    const EllipticSolver solver(assemble(mesh));
    const EllipticSolver copy = solver;
    const Vector rhs = random_vector(static_cast<Eigen::Index>(mesh->dof_count()), rng);
    const Vector a = solver.solve(rhs);
    const Vector b = solver.solve(rhs);
    const Vector c = copy.solve(rhs);
    EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0);
    EXPECT_EQ(std::memcmp(a.data(), c.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0);
}

TEST(EllipticSolver, PinnedCenterVanishes) {
    std::mt19937_64 rng(61);
    const auto mesh = build_mesh(StarNetwork({1.0, 2.0, 3.0}, 2.0), 30);
    const EllipticSolver solver(assemble(mesh), CenterCondition::Pinned);
    const Vector x = solver.solve(random_vector(static_cast<Eigen::Index>(mesh->dof_count()), rng));
    EXPECT_EQ(x[0], 0.0);
}

TEST(EllipticSolver, RejectsMismatchedInput) {
    const auto mesh = build_mesh(StarNetwork({1.0, 2.0}, 2.0), 10);
    const auto other = build_mesh(StarNetwork({1.0, 2.5}, 2.0), 10);
    const EllipticSolver solver(assemble(mesh));
    EXPECT_THROW(solver.solve_homogeneous(NetworkFunction(other)), std::invalid_argument);
    EXPECT_THROW(solver.solve_flux(Vector::Zero(4), 1.0), std::invalid_argument);
    EXPECT_THROW(solver.solve(Vector::Zero(4)), std::invalid_argument);
}
