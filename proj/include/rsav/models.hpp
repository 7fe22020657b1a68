#pragma once

#include <functional>
#include <span>
#include <utility>

#include "rsav/fem.hpp"
#include "rsav/mesh.hpp"
#include "rsav/sparse.hpp"

namespace rsav {

/// Mobility m(phi) with bounds m0 <= m <= m1.
struct MobilitySpec {
    std::function<double(double)> m;
    double m0 = 1.0;
    double m1 = 1.0;
    bool constant = true;

    static MobilitySpec constant_value(double value);
    /// Nodal values m(phi_k); throws ConfigError if a value leaves [m0, m1].
    NodalField evaluate(std::span<const double> phi) const;
};

// Cahn-Hilliard-Oono

struct ChoParams {
    double eta = 0.001;
    double c = 0.0;
};

/// f = eta (c - phi_prev)
NodalField cho_source(std::span<const double> phi_prev, const ChoParams& p);

/// Mean after n steps of the recursion m_n = (1 - tau eta) m_{n-1} + tau eta c.
double cho_mean_closed_form(double mean0, const ChoParams& p, double tau, long n);

// Segmentation

struct SegParams {
    double eta = 0.1;
    double lambda1 = 0.65;
    double lambda2 = 1.0;
    NodalField image;
    double c1 = 1.0;
    double c2 = 0.0;
};

/// Regularized Heaviside 1/2 (1 + 2/pi atan(z / eta)).
double heaviside_eta(double z, double eta);

/// Average intensities inside and outside the contour phi = 1/2.
std::pair<double, double> seg_update_intensities(std::span<const double> phi, const SegParams& p,
                                                 const LumpedMass& mass);

NodalField seg_source(std::span<const double> phi_prev, const SegParams& p);

/// Closed-form bound on |seg_source|.
double seg_source_bound(const SegParams& p);

// Inpainting

struct InpaintParams {
    double lambda0 = 10.0;
    /// 1 on the undamaged region, 0 on the damaged region
    NodalField mask;
    /// binary image with values in {-1, 1}
    NodalField image;
};

/// max(-1, min(1, s))
double truncate_unit(double s);

NodalField inpaint_source(std::span<const double> phi_prev, const InpaintParams& p);

// Tumor growth

struct TumorParams {
    double chi_sigma = 25.0;
    double chi = 5.0;
    double eta = 5.0;
    double P_rate = 1.0;
    double A_rate = 0.0;
    double C_rate = 1.0;
    double sigma_inf = 1.0;
    MobilitySpec mobility_phi = MobilitySpec::constant_value(1.0);
    MobilitySpec mobility_sigma = MobilitySpec::constant_value(1.0);
};

/// Proliferation weight, clamped to [0, 1].
double tumor_h(double s);
/// max(0, min(sigma_inf, s))
double tumor_k(double s, double sigma_inf);

/// Implicit nutrient update; solves
/// (M + tau chi_sigma S_n + tau C diag(M h(phi))) sigma = M sigma_prev + tau eta S_n phi_prev.
/// stiffness, if given, is the unit-coefficient stiffness reused for constant mobilities.
NodalField tumor_sigma_step(std::span<const double> sigma_prev, std::span<const double> phi_prev,
                            const TumorParams& p, const Mesh& mesh, const LumpedMass& mass, double tau,
                            double tol = 1e-12, const CsrMatrix* stiffness = nullptr);

struct TumorPhiInputs {
    NodalField f;
    NodalField g;
    /// tau chi M^{-1} S_m sigma, added to the phi right-hand side as is
    NodalField extra_rhs;
};

TumorPhiInputs tumor_phi_step_inputs(std::span<const double> sigma_new, std::span<const double> phi_prev,
                                     const TumorParams& p, const Mesh& mesh, const LumpedMass& mass,
                                     double tau, const CsrMatrix* stiffness = nullptr);

/// Perturbed circle of radius 0.05 centred in the domain, interface width ~0.01.
NodalField tumor_initial_phi(const Mesh& mesh);

} // namespace rsav
