#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rsav/mesh.hpp"
#include "rsav/sparse.hpp"

namespace rsav {

/// Nodal values of a P1 function.
using NodalField = std::vector<double>;

/// Diagonal of the lumped mass matrix; entry k is the integral of the k-th hat function.
struct LumpedMass {
    std::vector<double> diag;

    std::size_t size() const { return diag.size(); }
    /// M^{-1} v
    NodalField solve(std::span<const double> v) const;
    /// M v
    NodalField apply(std::span<const double> v) const;
    /// (u, v)^h
    double inner(std::span<const double> u, std::span<const double> v) const;
    /// (u, 1)^h
    double integral(std::span<const double> u) const;
    /// (u, 1)^h / |Omega|
    double mean(std::span<const double> u) const;
    double total() const;
};

LumpedMass assemble_lumped_mass(const Mesh& mesh);

/// Stiffness matrix (grad chi_i, grad chi_j).
CsrMatrix assemble_stiffness(const Mesh& mesh);

/// (I_h(coeff) grad chi_i, grad chi_j); the result shares the sparsity
/// pattern of assemble_stiffness.
CsrMatrix assemble_weighted_stiffness(const Mesh& mesh, std::span<const double> coeff);

NodalField nodal_interpolate(const Mesh& mesh, const std::function<double(double, double)>& fn);

/// sqrt((u, u)^h)
double lumped_norm(std::span<const double> field, const LumpedMass& mass);

} // namespace rsav
