#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "rsav/fem.hpp"
#include "rsav/linalg.hpp"
#include "rsav/mesh.hpp"
#include "rsav/potential.hpp"
#include "rsav/sparse.hpp"

namespace rsav::testing {

inline Eigen::MatrixXd dense(const CsrMatrix& a) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            d(i, a.col_idx()[k]) += a.values()[k];
    return d;
}

inline Eigen::MatrixXd dense(const LumpedMass& m) {
    return Eigen::VectorXd::Map(m.diag.data(), m.diag.size()).asDiagonal();
}

inline Eigen::VectorXd vec(const std::vector<double>& v) { return Eigen::VectorXd::Map(v.data(), v.size()); }

inline std::vector<double> stdvec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline NodalField random_field(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    NodalField f(n);
    for (double& v : f)
        v = u(rng);
    return f;
}

struct Problem {
    Mesh mesh;
    std::shared_ptr<const LumpedMass> mass;
    std::shared_ptr<const CsrMatrix> S;
    std::shared_ptr<const CsrMatrix> Sh;

    StepOperatorContext ctx(double eps, double tau) const { return {mass, S, Sh, eps, tau}; }
};

/// Sh defaults to S (constant unit mobility) unless a mobility field is given.
inline Problem make_problem(Mesh mesh, const NodalField* mobility = nullptr) {
    Problem p;
    p.mass = std::make_shared<const LumpedMass>(assemble_lumped_mass(mesh));
    p.S = std::make_shared<const CsrMatrix>(assemble_stiffness(mesh));
    p.Sh = mobility ? std::make_shared<const CsrMatrix>(assemble_weighted_stiffness(mesh, *mobility)) : p.S;
    p.mesh = std::move(mesh);
    return p;
}

inline Eigen::MatrixXd dense_B(const Problem& p, double eps, double tau) {
    const Eigen::MatrixXd Minv = dense(*p.mass).inverse();
    const long n = static_cast<long>(p.mass->size());
    return Eigen::MatrixXd::Identity(n, n) + eps * tau * Minv * dense(*p.Sh) * Minv * dense(*p.S);
}

struct MonolithicSolution {
    Eigen::VectorXd phi;
    Eigen::VectorXd mu;
    double r;
};

// Coupled linear system in (phi, mu, r):
//   M(phi - phi_p) + tau Sh mu = tau M f + M e
//   M mu - eps S phi - M b r = -M g
//   r - 1/2 (M b).phi = q - 1/2 (M b).phi_p
inline MonolithicSolution monolithic(const Problem& p, const PotentialSpec& pot, const NodalField& phi_p, double q,
                              double eps, double tau, double C0, const NodalField& f, const NodalField& g,
                              const NodalField* e) {
    const long n = static_cast<long>(phi_p.size());
    const Eigen::MatrixXd M = dense(*p.mass), S = dense(*p.S), Sh = dense(*p.Sh);
    double integral = 0.0;
    for (long k = 0; k < n; ++k)
        integral += p.mass->diag[k] * pot.F(phi_p[k]);
    const double Q = std::sqrt(integral / eps + C0);
    Eigen::VectorXd b(n);
    for (long k = 0; k < n; ++k)
        b[k] = pot.F_prime(phi_p[k]) / (eps * Q);
    const Eigen::VectorXd Mb = M * b;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
    Eigen::VectorXd rhs(2 * n + 1);
    A.block(0, 0, n, n) = M;
    A.block(0, n, n, n) = tau * Sh;
    rhs.head(n) = M * vec(phi_p) + tau * M * vec(f);
    if (e)
        rhs.head(n) += M * vec(*e);
    A.block(n, 0, n, n) = -eps * S;
    A.block(n, n, n, n) = M;
    A.block(n, 2 * n, n, 1) = -Mb;
    rhs.segment(n, n) = -M * vec(g);
    A.block(2 * n, 0, 1, n) = -0.5 * Mb.transpose();
    A(2 * n, 2 * n) = 1.0;
    rhs[2 * n] = q - 0.5 * Mb.dot(vec(phi_p));
    const Eigen::VectorXd sol = A.fullPivLu().solve(rhs);
    return {sol.head(n), sol.segment(n, n), sol[2 * n]};
}

} // namespace rsav::testing
