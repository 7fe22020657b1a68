#include "rsav/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rsav/error.hpp"
#include "rsav/linalg.hpp"

namespace rsav {

MobilitySpec MobilitySpec::constant_value(double value) {
    if (!(value > 0.0))
        throw ConfigError("constant mobility must be positive");
    return {[value](double) { return value; }, value, value, true};
}

NodalField MobilitySpec::evaluate(std::span<const double> phi) const {
    NodalField out(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k) {
        out[k] = m(phi[k]);
        if (!(out[k] >= m0 * (1 - 1e-14) && out[k] <= m1 * (1 + 1e-14)))
            throw ConfigError("mobility value " + std::to_string(out[k]) + " outside its declared bounds");
    }
    return out;
}

NodalField cho_source(std::span<const double> phi_prev, const ChoParams& p) {
    NodalField f(phi_prev.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = p.eta * (p.c - phi_prev[k]);
    return f;
}

double cho_mean_closed_form(double mean0, const ChoParams& p, double tau, long n) {
    const double decay = std::pow(1.0 - tau * p.eta, static_cast<double>(n));
    return mean0 * decay + p.c * (1.0 - decay);
}

double heaviside_eta(double z, double eta) { return 0.5 * (1.0 + 2.0 / std::numbers::pi * std::atan(z / eta)); }

std::pair<double, double> seg_update_intensities(std::span<const double> phi, const SegParams& p,
                                                 const LumpedMass& mass) {
    if (phi.size() != mass.size() || p.image.size() != mass.size())
        throw InputError("seg_update_intensities: length mismatch");
    double n1 = 0, d1 = 0, n2 = 0, d2 = 0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double H = heaviside_eta(phi[k] - 0.5, p.eta);
        n1 += mass.diag[k] * p.image[k] * H;
        d1 += mass.diag[k] * H;
        n2 += mass.diag[k] * p.image[k] * (1.0 - H);
        d2 += mass.diag[k] * (1.0 - H);
    }
    return {n1 / d1, n2 / d2};
}

NodalField seg_source(std::span<const double> phi_prev, const SegParams& p) {
    if (phi_prev.size() != p.image.size())
        throw InputError("seg_source: length mismatch");
    NodalField f(phi_prev.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double I = p.image[k];
        const double z = phi_prev[k] - 0.5;
        f[k] = -p.eta * (p.lambda1 * (I - p.c1) * (I - p.c1) - p.lambda2 * (I - p.c2) * (I - p.c2)) /
               (std::numbers::pi * (p.eta * p.eta + z * z));
    }
    return f;
}

double seg_source_bound(const SegParams& p) {
    double m1 = 0.0, m2 = 0.0;
    for (double I : p.image) {
        m1 = std::max(m1, (I - p.c1) * (I - p.c1));
        m2 = std::max(m2, (I - p.c2) * (I - p.c2));
    }
    return (p.lambda1 * m1 + p.lambda2 * m2) / (std::numbers::pi * p.eta);
}

double truncate_unit(double s) { return std::max(-1.0, std::min(1.0, s)); }

NodalField inpaint_source(std::span<const double> phi_prev, const InpaintParams& p) {
    if (phi_prev.size() != p.image.size() || phi_prev.size() != p.mask.size())
        throw InputError("inpaint_source: length mismatch");
    NodalField f(phi_prev.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        f[k] = p.lambda0 * p.mask[k] * (p.image[k] - truncate_unit(phi_prev[k]));
    return f;
}

double tumor_h(double s) { return std::max(0.0, std::min(1.0, 0.5 * (1.0 + s))); }

double tumor_k(double s, double sigma_inf) { return std::max(0.0, std::min(sigma_inf, s)); }

namespace {

CsrMatrix mobility_stiffness(const MobilitySpec& mob, std::span<const double> phi, const Mesh& mesh,
                             const CsrMatrix* stiffness) {
    if (mob.constant && stiffness) {
        CsrMatrix out = *stiffness;
        for (double& v : out.values())
            v *= mob.m0;
        return out;
    }
    if (mob.constant)
        return assemble_weighted_stiffness(mesh, NodalField(phi.size(), mob.m0));
    return assemble_weighted_stiffness(mesh, mob.evaluate(phi));
}

} // namespace

NodalField tumor_sigma_step(std::span<const double> sigma_prev, std::span<const double> phi_prev,
                            const TumorParams& p, const Mesh& mesh, const LumpedMass& mass, double tau,
                            double tol, const CsrMatrix* stiffness) {
    const std::size_t n = mass.size();
    if (sigma_prev.size() != n || phi_prev.size() != n)
        throw InputError("tumor_sigma_step: length mismatch");
    if (!(tau > 0.0))
        throw InputError("tumor_sigma_step: tau must be positive");
    const CsrMatrix Sn = mobility_stiffness(p.mobility_sigma, phi_prev, mesh, stiffness);

    NodalField reaction(n), rhs = mass.apply(sigma_prev);
    const NodalField Sphi = Sn * phi_prev;
    for (std::size_t k = 0; k < n; ++k) {
        reaction[k] = tau * p.C_rate * mass.diag[k] * tumor_h(phi_prev[k]);
        rhs[k] += tau * p.eta * Sphi[k];
    }
    return solve_spd(mass, Sn, {1.0, tau * p.chi_sigma}, reaction, rhs, tol, sigma_prev).first;
}

TumorPhiInputs tumor_phi_step_inputs(std::span<const double> sigma_new, std::span<const double> phi_prev,
                                     const TumorParams& p, const Mesh& mesh, const LumpedMass& mass,
                                     double tau, const CsrMatrix* stiffness) {
    const std::size_t n = mass.size();
    if (sigma_new.size() != n || phi_prev.size() != n)
        throw InputError("tumor_phi_step_inputs: length mismatch");
    TumorPhiInputs out;
    out.f.resize(n);
    out.g.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        out.f[k] = tumor_h(phi_prev[k]) * (p.P_rate * tumor_k(sigma_new[k], p.sigma_inf) - p.A_rate);
    if (p.chi == 0.0) {
        out.extra_rhs.assign(n, 0.0);
        return out;
    }
    const CsrMatrix Sm = mobility_stiffness(p.mobility_phi, phi_prev, mesh, stiffness);
    out.extra_rhs = mass.solve(Sm * sigma_new);
    for (double& v : out.extra_rhs)
        v *= tau * p.chi;
    return out;
}

NodalField tumor_initial_phi(const Mesh& mesh) {
    if (mesh.dim != 2)
        throw ConfigError("tumor initial condition needs a 2D mesh");
    double xmax = 0.0, ymax = 0.0;
    for (const auto& p : mesh.nodes) {
        xmax = std::max(xmax, p[0]);
        ymax = std::max(ymax, p[1]);
    }
    return nodal_interpolate(mesh, [&](double x, double y) {
        const double dx = x - 0.5 * xmax, dy = y - 0.5 * ymax;
        const double rho = std::hypot(dx, dy);
        const double theta = std::atan2(dy, dx);
        return -std::tanh((rho - (0.05 + 0.02 * std::cos(2.0 * theta))) / (std::numbers::sqrt2 * 0.01));
    });
}

} // namespace rsav
