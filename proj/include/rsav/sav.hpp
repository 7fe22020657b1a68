#pragma once

#include <optional>
#include <span>
#include <string>

#include "rsav/fem.hpp"
#include "rsav/linalg.hpp"
#include "rsav/potential.hpp"

namespace rsav {

struct ZetaPolicy {
    bool optimal = true;
    /// used when optimal is false
    double value = 1.0;

    static ZetaPolicy fixed(double zeta) { return {false, zeta}; }
    static ZetaPolicy optimal_choice() { return {true, 0.0}; }
};

struct SchemeParams {
    double eps = 1.0;
    double tau = 0.01;
    double C0 = 1.0;
    double eta_relax = 0.95;
    double M_relax = 1.0;
    /// lower bound of the mobility
    double m0 = 1.0;
    ZetaPolicy zeta = ZetaPolicy::optimal_choice();
    double solver_tol = 1e-12;
    PreconditionerKind preconditioner = PreconditionerKind::lu;

    void validate() const;
};

struct SavState {
    NodalField phi;
    double q = 0.0;
    long step = 0;
    double time = 0.0;
};

/// R(z) = a z^2 + b z + c; admissible relaxation parameters satisfy R(z) <= 0.
struct RQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double operator()(double z) const { return (a * z + b) * z + c; }
};

struct DiagnosticsRow {
    long step = 0;
    double time = 0.0;
    double zeta = 0.0;
    double r = 0.0;
    double q = 0.0;
    double G = 0.0;
    double E_GL = 0.0;
    double mean_phi = 0.0;
    double grad_mu_sq = 0.0;
};

std::string diagnostics_csv_header();
/// 17 significant digits per value
std::string to_csv(const DiagnosticsRow& row);

/// sqrt((1/eps) (F(phi), 1)^h + C0)
double q_functional(std::span<const double> phi, const PotentialSpec& pot, double eps, double C0,
                    const LumpedMass& mass);

RQuadratic compute_R_quadratic(double r_n, double Q_new, double q_prev, double tau, double eta, double M,
                               double m0, double grad_mu_sq);

/// Smallest admissible zeta in [0, 1].
double select_zeta(const RQuadratic& quad);

/// G = 1/2 (phi, phi)^h + eps/2 S phi.phi + q^2
double modified_energy(std::span<const double> phi, double q, const LumpedMass& mass, const CsrMatrix& S,
                       double eps);

/// eps/2 S phi.phi + Q_h(phi)^2 - C0
double gl_energy(std::span<const double> phi, const PotentialSpec& pot, double eps, double C0,
                 const LumpedMass& mass, const CsrMatrix& S);

struct StepResult {
    SavState state;
    NodalField mu;
    double r = 0.0;
    DiagnosticsRow diag;
    RQuadratic quad;
    double R_at_zeta = 0.0;
    double Q_new = 0.0;
    /// |a + b + c - (-tau eta m0 |grad mu|^2 - tau M)| relative to the magnitudes involved
    double identity_error = 0.0;
    /// false only for a fixed zeta that violates R(zeta) <= 1e-10
    bool admissible = true;
    SolveReport solve1;
    SolveReport solve2;
};

/// Advances one RSAV step.
///
/// f and g are the source and chemical-potential shift at t^{n-1}; extra_rhs,
/// if given, is added to the right-hand side of the phi equation as is.
/// Throws StepError for non-finite results or when the optimal zeta fails
/// the admissibility check.
StepResult rsav_step(const SavState& state, const BSolver& solver, const PotentialSpec& pot,
                     const SchemeParams& params, std::span<const double> f, std::span<const double> g,
                     std::optional<std::span<const double>> extra_rhs = std::nullopt);

/// Convenience overload that builds the solver for a single step.
StepResult rsav_step(const SavState& state, const StepOperatorContext& ctx, const PotentialSpec& pot,
                     const SchemeParams& params, std::span<const double> f, std::span<const double> g,
                     std::optional<std::span<const double>> extra_rhs = std::nullopt);

/// Running extrema of per-step invariants.
struct StepMonitor {
    long steps = 0;
    double max_R = -1e300;
    double max_identity_error = 0.0;
    long inadmissible_steps = 0;

    void observe(const StepResult& res);
};

} // namespace rsav

namespace rsav {

/// Diagnostics of a state before any step (zeta, r reported as 0 and q).
DiagnosticsRow initial_diagnostics(const SavState& state, const PotentialSpec& pot, const SchemeParams& params,
                                   const LumpedMass& mass, const CsrMatrix& S);

} // namespace rsav
