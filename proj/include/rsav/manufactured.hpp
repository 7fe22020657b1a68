#pragma once

#include <string>
#include <vector>

#include "rsav/fem.hpp"
#include "rsav/linalg.hpp"
#include "rsav/mesh.hpp"
#include "rsav/sav.hpp"

namespace rsav {

enum class SolutionId { cos_linear, expcos_cos, expcost_sin2 };

SolutionId parse_solution(const std::string& name);
std::string to_string(SolutionId id);

/// Separable exact solution phi*(x, t) = T(t) X(x) on [0, 1].
///
/// cos_linear:   (1 + t) cos(pi x)
/// expcos_cos:   cos(t) exp(cos(pi x))
/// expcost_sin2: exp(cos t) sin^2(pi x)
struct AnalyticSolution {
    SolutionId id = SolutionId::cos_linear;

    double T(double t) const;
    double dT(double t) const;
    /// k-th derivative of X, k in {0, 1, 2, 4}
    double X(double x, int k = 0) const;

    double phi(double x, double t) const { return T(t) * X(x); }
    double dphi_dt(double x, double t) const { return dT(t) * X(x); }
};

/// Closed-form chemical potential -eps phi_xx + (phi^3 - phi) / eps.
double manufactured_mu(const AnalyticSolution& sol, double eps, double x, double t);

/// Source f = phi_t - mu_xx for unit mobility and the quartic potential.
double manufactured_f(const AnalyticSolution& sol, double eps, double x, double t);

/// sqrt(sum_n tau ||phi^n - I_h phi*(t^n)||_h^2) with trajectory[n-1] = phi^n.
double l2l2_error(const std::vector<NodalField>& trajectory, const AnalyticSolution& sol, const Mesh& mesh,
                  const LumpedMass& mass, double tau);

struct ConvergenceOptions {
    double h = 0.001;
    double T = 5.0;
    double eps = 1.0;
    double C0 = 1.0;
    double eta_relax = 0.95;
    double M_relax = 1.0;
    double tol = 1e-12;
    PreconditionerKind preconditioner = PreconditionerKind::lu;
    /// 0 picks the hardware concurrency
    unsigned threads = 0;
    bool keep_history = false;
};

struct ConvergenceCell {
    double tau = 0.0;
    /// negative means the optimal policy
    double zeta = 0.0;
    double error = 0.0;
    long steps = 0;
    double wall_ms = 0.0;
    bool ok = true;
    std::string failure;
    StepMonitor monitor;
    DiagnosticsRow initial;
    std::vector<DiagnosticsRow> history;
};

struct ErrorTable {
    SolutionId solution = SolutionId::cos_linear;
    std::vector<ConvergenceCell> rows;

    const ConvergenceCell* find(double tau, double zeta) const;
    /// columns tau,zeta,error,steps,wall_ms
    std::string to_csv() const;
};

/// Runs one manufactured-solution simulation to time T.
ConvergenceCell run_manufactured(const AnalyticSolution& sol, double tau, ZetaPolicy zeta,
                                 const ConvergenceOptions& opts);

/// All (tau, zeta) cells, run concurrently; failures are recorded per cell.
ErrorTable run_convergence(const AnalyticSolution& sol, const std::vector<double>& taus,
                           const std::vector<double>& zetas, const ConvergenceOptions& opts);

struct ZetaHistory {
    DiagnosticsRow initial;
    std::vector<DiagnosticsRow> rows;
    std::vector<RQuadratic> quads;
    StepMonitor monitor;

    /// columns step,time,zeta,a,b,c,r,q,E_GL
    std::string to_csv() const;
};

ZetaHistory run_zeta_study(const AnalyticSolution& sol, double tau, double h, double T, double eta, double M,
                           const ConvergenceOptions& base = {});

} // namespace rsav
