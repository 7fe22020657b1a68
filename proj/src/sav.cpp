#include "rsav/sav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace rsav {

void SchemeParams::validate() const {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw ConfigError("eps must be positive");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw ConfigError("tau must be positive");
    if (!(C0 > 0.0))
        throw ConfigError("C0 must be positive");
    if (!(eta_relax >= 0.0 && eta_relax < 1.0))
        throw ConfigError("eta_relax must lie in [0, 1)");
    if (!(M_relax >= 0.0))
        throw ConfigError("M_relax must be nonnegative");
    if (!(m0 > 0.0))
        throw ConfigError("m0 must be positive");
    if (!zeta.optimal && !(zeta.value >= 0.0 && zeta.value <= 1.0))
        throw ConfigError("fixed zeta must lie in [0, 1]");
    if (!(solver_tol > 0.0 && solver_tol < 1.0))
        throw ConfigError("solver tolerance must lie in (0, 1)");
}

std::string diagnostics_csv_header() { return "step,time,zeta,r,q,G,E_GL,mean_phi,grad_mu_sq"; }

std::string to_csv(const DiagnosticsRow& row) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", row.step, row.time,
                  row.zeta, row.r, row.q, row.G, row.E_GL, row.mean_phi, row.grad_mu_sq);
    return buf;
}

double q_functional(std::span<const double> phi, const PotentialSpec& pot, double eps, double C0,
                    const LumpedMass& mass) {
    if (phi.size() != mass.size())
        throw InputError("q_functional: field length does not match mass");
    double s = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k)
        s += mass.diag[k] * pot.F(phi[k]);
    const double radicand = s / eps + C0;
    if (!(radicand >= C0 * (1.0 - 1e-14)) || !std::isfinite(radicand))
        throw InputError("q_functional: potential integral is negative or non-finite");
    return std::sqrt(radicand);
}

RQuadratic compute_R_quadratic(double r_n, double Q_new, double q_prev, double tau, double eta, double M,
                               double m0, double grad_mu_sq) {
    const double d = r_n - Q_new;
    RQuadratic out;
    out.a = 1.5 * d * d;
    out.b = d * (3.0 * Q_new - q_prev);
    out.c = Q_new * Q_new - r_n * r_n +
            0.5 * ((Q_new - q_prev) * (Q_new - q_prev) - (r_n - q_prev) * (r_n - q_prev)) -
            tau * eta * m0 * grad_mu_sq - tau * M;
    return out;
}

double select_zeta(const RQuadratic& quad) {
    if (quad.a <= 1e-14)
        return quad.c <= 0.0 ? 0.0 : 1.0;
    double disc = quad.b * quad.b - 4.0 * quad.a * quad.c;
    disc = std::max(disc, 0.0);
    // cancellation-free form of the smaller root
    const double root = quad.b <= 0.0 ? 2.0 * quad.c / (-quad.b + std::sqrt(disc))
                                      : (-quad.b - std::sqrt(disc)) / (2.0 * quad.a);
    double z = std::clamp(std::isfinite(root) ? root : 0.0, 0.0, 1.0);
    if (quad(z) > 0.0 && quad(1.0) <= 0.0) {
        // rounding left the root just outside the admissible set
        double lo = z, hi = 1.0;
        for (int i = 0; i < 80 && hi - lo > 0.0; ++i) {
            const double mid = 0.5 * (lo + hi);
            (quad(mid) <= 0.0 ? hi : lo) = mid;
        }
        z = hi;
    }
    return z;
}

double modified_energy(std::span<const double> phi, double q, const LumpedMass& mass, const CsrMatrix& S,
                       double eps) {
    return 0.5 * mass.inner(phi, phi) + 0.5 * eps * S.quadratic_form(phi) + q * q;
}

double gl_energy(std::span<const double> phi, const PotentialSpec& pot, double eps, double C0,
                 const LumpedMass& mass, const CsrMatrix& S) {
    const double Q = q_functional(phi, pot, eps, C0, mass);
    return 0.5 * eps * S.quadratic_form(phi) + (Q * Q - C0);
}

namespace {

void require_finite(std::span<const double> v, const char* what, long step) {
    for (double x : v)
        if (!std::isfinite(x))
            throw StepError(std::string("non-finite ") + what + " in step " + std::to_string(step), step);
}

// M^{-1} K v; its lumped integral vanishes exactly, so the rounding residue is removed
NodalField flux_term(const LumpedMass& M, const CsrMatrix& K, std::span<const double> v) {
    NodalField out = M.solve(K * v);
    const double shift = M.integral(out) / M.total();
    for (double& x : out)
        x -= shift;
    return out;
}

} // namespace

StepResult rsav_step(const SavState& state, const BSolver& solver, const PotentialSpec& pot,
                     const SchemeParams& params, std::span<const double> f, std::span<const double> g,
                     std::optional<std::span<const double>> extra_rhs) {
    const auto& ctx = solver.context();
    const LumpedMass& M = *ctx.mass;
    const std::size_t n = ctx.size();
    const long step = state.step + 1;
    if (state.phi.size() != n || f.size() != n || g.size() != n || (extra_rhs && extra_rhs->size() != n))
        throw InputError("rsav_step: vector lengths do not match the mesh");
    if (ctx.eps != params.eps || ctx.tau != params.tau)
        throw InputError("rsav_step: operator built for different eps or tau");
    const double tau = params.tau;
    const double eps = params.eps;
    const auto& phi = state.phi;

    const double Q_prev = q_functional(phi, pot, eps, params.C0, M);
    NodalField b(n);
    for (std::size_t k = 0; k < n; ++k)
        b[k] = pot.F_prime(phi[k]) / (eps * Q_prev);
    const NodalField Mb = M.apply(b);

    const double coef = 0.5 * dot(Mb, phi) - state.q;
    NodalField w(n);
    for (std::size_t k = 0; k < n; ++k)
        w[k] = g[k] + coef * b[k];
    const NodalField Shw = flux_term(M, *ctx.Sh, w);
    NodalField c(n);
    for (std::size_t k = 0; k < n; ++k)
        c[k] = phi[k] + tau * f[k] + tau * Shw[k] + (extra_rhs ? (*extra_rhs)[k] : 0.0);
    require_finite(c, "right-hand side", step);

    StepResult res;
    auto [y1, rep1] = solver.solve(c);
    auto [y2, rep2] = solver.solve(flux_term(M, *ctx.Sh, b));
    res.solve1 = rep1;
    res.solve2 = rep2;

    const double d = dot(Mb, y1) / (1.0 + 0.5 * tau * dot(Mb, y2));
    NodalField phi_new(n);
    for (std::size_t k = 0; k < n; ++k)
        phi_new[k] = y1[k] - 0.5 * tau * d * y2[k];
    require_finite(phi_new, "phi", step);

    NodalField dphi(n);
    for (std::size_t k = 0; k < n; ++k)
        dphi[k] = phi_new[k] - phi[k];
    const double r = state.q + 0.5 * dot(Mb, dphi);

    NodalField mu = M.solve(*ctx.S * phi_new);
    for (std::size_t k = 0; k < n; ++k)
        mu[k] = eps * mu[k] - g[k] + r * b[k];
    require_finite(mu, "mu", step);
    const double grad_mu_sq = ctx.S->quadratic_form(mu);

    const double Q_new = q_functional(phi_new, pot, eps, params.C0, M);
    const RQuadratic quad =
        compute_R_quadratic(r, Q_new, state.q, tau, params.eta_relax, params.M_relax, params.m0, grad_mu_sq);
    const double target = -tau * params.eta_relax * params.m0 * grad_mu_sq - tau * params.M_relax;
    const double scale = Q_new * Q_new + r * r + state.q * state.q + std::abs(target);
    res.identity_error = std::abs(quad.a + quad.b + quad.c - target) / scale;

    const double zeta = params.zeta.optimal ? select_zeta(quad) : params.zeta.value;
    res.R_at_zeta = quad(zeta);
    res.admissible = res.R_at_zeta <= 1e-10;
    if (params.zeta.optimal && !res.admissible)
        throw StepError("optimal zeta is not admissible in step " + std::to_string(step), step);

    res.state.phi = std::move(phi_new);
    res.state.q = zeta * r + (1.0 - zeta) * Q_new;
    res.state.step = step;
    res.state.time = state.time + tau;
    if (!std::isfinite(res.state.q) || !std::isfinite(r))
        throw StepError("non-finite scalar variable in step " + std::to_string(step), step);

    res.mu = std::move(mu);
    res.r = r;
    res.quad = quad;
    res.Q_new = Q_new;
    auto& dg = res.diag;
    dg.step = step;
    dg.time = res.state.time;
    dg.zeta = zeta;
    dg.r = r;
    dg.q = res.state.q;
    dg.G = modified_energy(res.state.phi, res.state.q, M, *ctx.S, eps);
    dg.E_GL = 0.5 * eps * ctx.S->quadratic_form(res.state.phi) + Q_new * Q_new - params.C0;
    dg.mean_phi = M.mean(res.state.phi);
    dg.grad_mu_sq = grad_mu_sq;
    return res;
}

StepResult rsav_step(const SavState& state, const StepOperatorContext& ctx, const PotentialSpec& pot,
                     const SchemeParams& params, std::span<const double> f, std::span<const double> g,
                     std::optional<std::span<const double>> extra_rhs) {
    const BSolver solver(ctx, {params.solver_tol, params.preconditioner, 0});
    return rsav_step(state, solver, pot, params, f, g, extra_rhs);
}

void StepMonitor::observe(const StepResult& res) {
    ++steps;
    max_R = std::max(max_R, res.R_at_zeta);
    max_identity_error = std::max(max_identity_error, res.identity_error);
    if (!res.admissible)
        ++inadmissible_steps;
}

} // namespace rsav

namespace rsav {

DiagnosticsRow initial_diagnostics(const SavState& state, const PotentialSpec& pot, const SchemeParams& params,
                                   const LumpedMass& mass, const CsrMatrix& S) {
    DiagnosticsRow d;
    d.step = state.step;
    d.time = state.time;
    d.zeta = 0.0;
    d.r = state.q;
    d.q = state.q;
    d.G = modified_energy(state.phi, state.q, mass, S, params.eps);
    d.E_GL = gl_energy(state.phi, pot, params.eps, params.C0, mass, S);
    d.mean_phi = mass.mean(state.phi);
    d.grad_mu_sq = 0.0;
    return d;
}

} // namespace rsav
