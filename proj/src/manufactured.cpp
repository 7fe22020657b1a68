#include "rsav/manufactured.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include "rsav/error.hpp"
#include "rsav/potential.hpp"

namespace rsav {

namespace {
constexpr double pi = std::numbers::pi;
}

SolutionId parse_solution(const std::string& name) {
    if (name == "cos_linear")
        return SolutionId::cos_linear;
    if (name == "expcos_cos")
        return SolutionId::expcos_cos;
    if (name == "expcost_sin2")
        return SolutionId::expcost_sin2;
    throw ConfigError("unknown solution '" + name + "' (valid: cos_linear, expcos_cos, expcost_sin2)");
}

std::string to_string(SolutionId id) {
    switch (id) {
    case SolutionId::cos_linear:
        return "cos_linear";
    case SolutionId::expcos_cos:
        return "expcos_cos";
    case SolutionId::expcost_sin2:
        return "expcost_sin2";
    }
    return "?";
}

double AnalyticSolution::T(double t) const {
    switch (id) {
    case SolutionId::cos_linear:
        return 1.0 + t;
    case SolutionId::expcos_cos:
        return std::cos(t);
    case SolutionId::expcost_sin2:
        return std::exp(std::cos(t));
    }
    return 0.0;
}

double AnalyticSolution::dT(double t) const {
    switch (id) {
    case SolutionId::cos_linear:
        return 1.0;
    case SolutionId::expcos_cos:
        return -std::sin(t);
    case SolutionId::expcost_sin2:
        return -std::sin(t) * std::exp(std::cos(t));
    }
    return 0.0;
}

double AnalyticSolution::X(double x, int k) const {
    const double s = std::sin(pi * x), c = std::cos(pi * x);
    switch (id) {
    case SolutionId::cos_linear:
        switch (k) {
        case 0:
            return c;
        case 1:
            return -pi * s;
        case 2:
            return -pi * pi * c;
        case 4:
            return pi * pi * pi * pi * c;
        }
        break;
    case SolutionId::expcos_cos: {
        const double E = std::exp(c);
        const double g = 3.0 * c + 1.0 - s * s;
        switch (k) {
        case 0:
            return E;
        case 1:
            return -pi * s * E;
        case 2:
            return pi * pi * E * (s * s - c);
        case 4:
            return pi * pi * pi * pi * E * (-s * s * g + c * g - 3.0 * s * s - 2.0 * s * s * c);
        }
        break;
    }
    case SolutionId::expcost_sin2:
        switch (k) {
        case 0:
            return s * s;
        case 1:
            return pi * std::sin(2.0 * pi * x);
        case 2:
            return 2.0 * pi * pi * std::cos(2.0 * pi * x);
        case 4:
            return -8.0 * pi * pi * pi * pi * std::cos(2.0 * pi * x);
        }
        break;
    }
    throw InputError("unsupported derivative order " + std::to_string(k));
}

double manufactured_mu(const AnalyticSolution& sol, double eps, double x, double t) {
    const double p = sol.phi(x, t);
    return -eps * sol.T(t) * sol.X(x, 2) + (p * p * p - p) / eps;
}

double manufactured_f(const AnalyticSolution& sol, double eps, double x, double t) {
    const double T = sol.T(t), T3 = T * T * T;
    const double X0 = sol.X(x, 0), X1 = sol.X(x, 1), X2 = sol.X(x, 2), X4 = sol.X(x, 4);
    // (phi^3)_xx = 3 phi^2 phi_xx + 6 phi phi_x^2
    const double mu_xx =
        -eps * T * X4 + (3.0 * T3 * X0 * X0 * X2 + 6.0 * T3 * X0 * X1 * X1 - T * X2) / eps;
    return sol.dT(t) * X0 - mu_xx;
}

double l2l2_error(const std::vector<NodalField>& trajectory, const AnalyticSolution& sol, const Mesh& mesh,
                  const LumpedMass& mass, double tau) {
    double sum = 0.0;
    for (std::size_t n = 0; n < trajectory.size(); ++n) {
        if (trajectory[n].size() != mesh.num_nodes())
            throw InputError("l2l2_error: trajectory entry has the wrong length");
        const double t = static_cast<double>(n + 1) * tau;
        NodalField e = nodal_interpolate(mesh, [&](double x, double) { return sol.phi(x, t); });
        for (std::size_t k = 0; k < e.size(); ++k)
            e[k] = trajectory[n][k] - e[k];
        sum += tau * mass.inner(e, e);
    }
    return std::sqrt(sum);
}

namespace {

struct ManufacturedSetup {
    Mesh mesh;
    std::shared_ptr<const LumpedMass> mass;
    std::shared_ptr<const CsrMatrix> S;
};

ManufacturedSetup make_setup(double h) {
    if (!(h > 0.0 && h <= 1.0))
        throw ConfigError("mesh size h must lie in (0, 1]");
    const int cells = static_cast<int>(std::lround(1.0 / h));
    ManufacturedSetup s;
    s.mesh = build_interval_mesh(0.0, 1.0, cells);
    s.mass = std::make_shared<const LumpedMass>(assemble_lumped_mass(s.mesh));
    s.S = std::make_shared<const CsrMatrix>(assemble_stiffness(s.mesh));
    return s;
}

long step_count(double T, double tau) {
    if (!(tau > 0.0) || !(T > 0.0))
        throw ConfigError("T and tau must be positive");
    return std::lround(T / tau);
}

} // namespace

ConvergenceCell run_manufactured(const AnalyticSolution& sol, double tau, ZetaPolicy zeta,
                                 const ConvergenceOptions& opts) {
    ConvergenceCell cell;
    cell.tau = tau;
    cell.zeta = zeta.optimal ? -1.0 : zeta.value;
    const auto start = std::chrono::steady_clock::now();
    try {
        const ManufacturedSetup setup = make_setup(opts.h);
        const PotentialSpec pot = quartic_potential();
        SchemeParams params;
        params.eps = opts.eps;
        params.tau = tau;
        params.C0 = opts.C0;
        params.eta_relax = opts.eta_relax;
        params.M_relax = opts.M_relax;
        params.zeta = zeta;
        params.solver_tol = opts.tol;
        params.preconditioner = opts.preconditioner;
        params.validate();

        const BSolver solver({setup.mass, setup.S, setup.S, params.eps, tau},
                             {opts.tol, opts.preconditioner, 0});
        SavState state;
        state.phi = nodal_interpolate(setup.mesh, [&](double x, double) { return sol.phi(x, 0.0); });
        state.q = q_functional(state.phi, pot, params.eps, params.C0, *setup.mass);
        cell.initial = initial_diagnostics(state, pot, params, *setup.mass, *setup.S);

        const long N = step_count(opts.T, tau);
        const NodalField g(setup.mesh.num_nodes(), 0.0);
        double sum = 0.0;
        for (long n = 1; n <= N; ++n) {
            const double t_prev = static_cast<double>(n - 1) * tau;
            const double t_now = static_cast<double>(n) * tau;
            const NodalField f = nodal_interpolate(
                setup.mesh, [&](double x, double) { return manufactured_f(sol, params.eps, x, t_prev); });
            StepResult res = rsav_step(state, solver, pot, params, f, g);
            cell.monitor.observe(res);
            if (opts.keep_history)
                cell.history.push_back(res.diag);
            state = std::move(res.state);
            state.time = t_now;
            NodalField e = nodal_interpolate(setup.mesh, [&](double x, double) { return sol.phi(x, t_now); });
            for (std::size_t k = 0; k < e.size(); ++k)
                e[k] = state.phi[k] - e[k];
            sum += tau * setup.mass->inner(e, e);
        }
        cell.steps = N;
        cell.error = std::sqrt(sum);
    } catch (const std::exception& ex) {
        cell.ok = false;
        cell.failure = ex.what();
    }
    cell.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return cell;
}

ErrorTable run_convergence(const AnalyticSolution& sol, const std::vector<double>& taus,
                           const std::vector<double>& zetas, const ConvergenceOptions& opts) {
    ErrorTable table;
    table.solution = sol.id;
    for (double tau : taus)
        for (double z : zetas) {
            ConvergenceCell c;
            c.tau = tau;
            c.zeta = z;
            table.rows.push_back(std::move(c));
        }

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < table.rows.size(); i = next++) {
            const double z = table.rows[i].zeta;
            const ZetaPolicy policy = z < 0.0 ? ZetaPolicy::optimal_choice() : ZetaPolicy::fixed(z);
            table.rows[i] = run_manufactured(sol, table.rows[i].tau, policy, opts);
        }
    };
    unsigned nt = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min<unsigned>(nt, static_cast<unsigned>(std::max<std::size_t>(1, table.rows.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < nt; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return table;
}

const ConvergenceCell* ErrorTable::find(double tau, double zeta) const {
    for (const auto& r : rows)
        if (std::abs(r.tau - tau) <= 1e-12 * tau && std::abs(r.zeta - zeta) <= 1e-12)
            return &r;
    return nullptr;
}

std::string ErrorTable::to_csv() const {
    std::ostringstream os;
    os << "tau,zeta,error,steps,wall_ms\n";
    char buf[256];
    for (const auto& r : rows) {
        if (r.ok)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%ld,%.3f\n", r.tau, r.zeta, r.error, r.steps,
                          r.wall_ms);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,nan,%ld,%.3f\n", r.tau, r.zeta, r.steps, r.wall_ms);
        os << buf;
    }
    return os.str();
}

ZetaHistory run_zeta_study(const AnalyticSolution& sol, double tau, double h, double T, double eta, double M,
                           const ConvergenceOptions& base) {
    ConvergenceOptions opts = base;
    opts.h = h;
    opts.T = T;
    opts.eta_relax = eta;
    opts.M_relax = M;

    const ManufacturedSetup setup = make_setup(h);
    const PotentialSpec pot = quartic_potential();
    SchemeParams params;
    params.eps = opts.eps;
    params.tau = tau;
    params.C0 = opts.C0;
    params.eta_relax = eta;
    params.M_relax = M;
    params.zeta = ZetaPolicy::optimal_choice();
    params.solver_tol = opts.tol;
    params.preconditioner = opts.preconditioner;
    params.validate();

    const BSolver solver({setup.mass, setup.S, setup.S, params.eps, tau}, {opts.tol, opts.preconditioner, 0});
    SavState state;
    state.phi = nodal_interpolate(setup.mesh, [&](double x, double) { return sol.phi(x, 0.0); });
    state.q = q_functional(state.phi, pot, params.eps, params.C0, *setup.mass);

    ZetaHistory out;
    out.initial = initial_diagnostics(state, pot, params, *setup.mass, *setup.S);
    const long N = step_count(T, tau);
    const NodalField g(setup.mesh.num_nodes(), 0.0);
    for (long n = 1; n <= N; ++n) {
        const double t_prev = static_cast<double>(n - 1) * tau;
        const NodalField f = nodal_interpolate(
            setup.mesh, [&](double x, double) { return manufactured_f(sol, params.eps, x, t_prev); });
        StepResult res = rsav_step(state, solver, pot, params, f, g);
        out.monitor.observe(res);
        out.rows.push_back(res.diag);
        out.quads.push_back(res.quad);
        state = std::move(res.state);
        state.time = static_cast<double>(n) * tau;
    }
    return out;
}

std::string ZetaHistory::to_csv() const {
    std::ostringstream os;
    os << "step,time,zeta,a,b,c,r,q,E_GL\n";
    char buf[512];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& d = rows[i];
        const auto& q = quads[i];
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", d.step, d.time,
                      d.zeta, q.a, q.b, q.c, d.r, d.q, d.E_GL);
        os << buf;
    }
    return os.str();
}

} // namespace rsav
