#include "rsav/fem.hpp"

#include <cmath>
#include <string>

#include "rsav/error.hpp"

namespace rsav {

NodalField LumpedMass::solve(std::span<const double> v) const {
    if (v.size() != diag.size())
        throw InputError("LumpedMass::solve length mismatch");
    NodalField out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] / diag[i];
    return out;
}

NodalField LumpedMass::apply(std::span<const double> v) const {
    if (v.size() != diag.size())
        throw InputError("LumpedMass::apply length mismatch");
    NodalField out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] * diag[i];
    return out;
}

double LumpedMass::inner(std::span<const double> u, std::span<const double> v) const {
    if (u.size() != diag.size() || v.size() != diag.size())
        throw InputError("LumpedMass::inner length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += diag[i] * u[i] * v[i];
    return s;
}

double LumpedMass::integral(std::span<const double> u) const {
    if (u.size() != diag.size())
        throw InputError("LumpedMass::integral length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += diag[i] * u[i];
    return s;
}

double LumpedMass::mean(std::span<const double> u) const { return integral(u) / total(); }

double LumpedMass::total() const {
    double s = 0.0;
    for (double d : diag)
        s += d;
    return s;
}

LumpedMass assemble_lumped_mass(const Mesh& mesh) {
    validate_mesh(mesh);
    LumpedMass m;
    m.diag.assign(mesh.num_nodes(), 0.0);
    const int nv = mesh.vertices_per_element();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double share = element_measure(mesh, e) / nv;
        for (int k = 0; k < nv; ++k)
            m.diag[mesh.elements[e][k]] += share;
    }
    return m;
}

namespace {

// Local stiffness of one element, row-major nv x nv.
std::array<double, 9> element_stiffness(const Mesh& mesh, std::size_t e) {
    std::array<double, 9> k{};
    const auto& el = mesh.elements[e];
    const double meas = element_measure(mesh, e);
    if (!(meas > 0.0))
        throw AssemblyError("degenerate element " + std::to_string(e));
    if (mesh.dim == 1) {
        const double w = 1.0 / meas;
        k[0] = w;
        k[1] = -w;
        k[3] = -w;
        k[4] = w;
        return k;
    }
    // grad lambda_i = rot(edge opposite i) / (2 area)
    std::array<std::array<double, 2>, 3> g{};
    for (int i = 0; i < 3; ++i) {
        const auto& p = mesh.nodes[el[(i + 1) % 3]];
        const auto& q = mesh.nodes[el[(i + 2) % 3]];
        g[i] = {(p[1] - q[1]) / (2.0 * meas), (q[0] - p[0]) / (2.0 * meas)};
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            k[i * 3 + j] = meas * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
    return k;
}

CsrMatrix assemble(const Mesh& mesh, std::span<const double> coeff) {
    validate_mesh(mesh);
    const int nv = mesh.vertices_per_element();
    std::vector<Triplet> trip;
    trip.reserve(mesh.num_elements() * nv * nv);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& el = mesh.elements[e];
        double w = 1.0;
        if (!coeff.empty()) {
            w = 0.0;
            for (int a = 0; a < nv; ++a)
                w += coeff[el[a]];
            w /= nv;
        }
        const auto k = element_stiffness(mesh, e);
        for (int a = 0; a < nv; ++a)
            for (int b = 0; b < nv; ++b)
                trip.push_back({el[a], el[b], w * k[a * 3 + b]});
    }
    return CsrMatrix::from_triplets(mesh.num_nodes(), std::move(trip));
}

} // namespace

CsrMatrix assemble_stiffness(const Mesh& mesh) { return assemble(mesh, {}); }

CsrMatrix assemble_weighted_stiffness(const Mesh& mesh, std::span<const double> coeff) {
    if (coeff.size() != mesh.num_nodes())
        throw AssemblyError("coefficient length does not match node count");
    for (std::size_t i = 0; i < coeff.size(); ++i)
        if (!(coeff[i] > 0.0) || !std::isfinite(coeff[i]))
            throw AssemblyError("mobility coefficient must be positive and finite (node " +
                                std::to_string(i) + ")");
    return assemble(mesh, coeff);
}

NodalField nodal_interpolate(const Mesh& mesh, const std::function<double(double, double)>& fn) {
    NodalField v(mesh.num_nodes());
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] = fn(mesh.nodes[k][0], mesh.nodes[k][1]);
        if (!std::isfinite(v[k]))
            throw InputError("non-finite value while interpolating at node " + std::to_string(k));
    }
    return v;
}

double lumped_norm(std::span<const double> field, const LumpedMass& mass) {
    return std::sqrt(mass.inner(field, field));
}

} // namespace rsav
