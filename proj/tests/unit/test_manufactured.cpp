#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rsav/error.hpp"
#include "rsav/manufactured.hpp"

using namespace rsav;

namespace {

const SolutionId kAll[] = {SolutionId::cos_linear, SolutionId::expcos_cos, SolutionId::expcost_sin2};

double central2(const std::function<double(double)>& g, double x, double h) {
    return (-g(x + 2 * h) + 16 * g(x + h) - 30 * g(x) + 16 * g(x - h) - g(x - 2 * h)) / (12 * h * h);
}

double central1(const std::function<double(double)>& g, double x, double h) {
    return (-g(x + 2 * h) + 8 * g(x + h) - 8 * g(x - h) + g(x - 2 * h)) / (12 * h);
}

// f = phi_t - mu_xx with mu built from phi and the analytic phi_xx, differentiated numerically
double f_oracle(const AnalyticSolution& sol, double eps, double x, double t) {
    auto mu = [&](double y) {
        const double p = sol.phi(y, t);
        return -eps * sol.T(t) * sol.X(y, 2) + (p * p * p - p) / eps;
    };
    const double h = 1e-3;
    const double mu_xx = (16 * central2(mu, x, h / 2) - central2(mu, x, h)) / 15;
    auto phi_t = [&](double s) { return sol.phi(x, s); };
    const double dt = (16 * central1(phi_t, t, 0.5e-5) - central1(phi_t, t, 1e-5)) / 15;
    return dt - mu_xx;
}

ConvergenceOptions coarse(double h = 0.01, double T = 1.0) {
    ConvergenceOptions o;
    o.h = h;
    o.T = T;
    o.threads = 2;
    return o;
}

} // namespace

TEST(Solution, ParseRoundTrip) {
    for (SolutionId id : kAll)
        EXPECT_EQ(parse_solution(to_string(id)), id);
    EXPECT_THROW(parse_solution("sin"), ConfigError);
}

TEST(Solution, ClosedForms) {
    const double x = 0.3, t = 0.7, c = std::cos(std::numbers::pi * x), s = std::sin(std::numbers::pi * x);
    EXPECT_NEAR(AnalyticSolution{SolutionId::cos_linear}.phi(x, t), c * 1.7, 1e-15);
    EXPECT_NEAR(AnalyticSolution{SolutionId::expcos_cos}.phi(x, t), std::cos(t) * std::exp(c), 1e-14);
    EXPECT_NEAR(AnalyticSolution{SolutionId::expcost_sin2}.phi(x, t), std::exp(std::cos(t)) * s * s, 1e-14);
    EXPECT_THROW(AnalyticSolution{}.X(0.1, 3), InputError);
}

TEST(Solution, SpatialDerivativesMatchFiniteDifferences) {
    for (SolutionId id : kAll) {
        const AnalyticSolution sol{id};
        for (double x : {0.05, 0.2, 0.5, 0.61, 0.93}) {
            auto X0 = [&](double y) { return sol.X(y, 0); };
            auto X2 = [&](double y) { return sol.X(y, 2); };
            EXPECT_NEAR(sol.X(x, 1), central1(X0, x, 1e-3), 1e-9) << to_string(id);
            EXPECT_NEAR(sol.X(x, 2), central2(X0, x, 1e-3), 1e-7) << to_string(id);
            EXPECT_NEAR(sol.X(x, 4), central2(X2, x, 1e-3), 1e-5 * std::max(1.0, std::abs(sol.X(x, 4))))
                << to_string(id);
        }
        for (double t : {0.0, 1.3, 4.9}) {
            auto T = [&](double s) { return sol.T(s); };
            EXPECT_NEAR(sol.dT(t), central1(T, t, 1e-4), 1e-10) << to_string(id);
        }
    }
}

TEST(Source, MatchesFiniteDifferenceOracle) {
    for (SolutionId id : kAll) {
        const AnalyticSolution sol{id};
        for (double eps : {1.0, 0.5})
            for (double x : {0.0, 0.13, 0.5, 0.77, 1.0})
                for (double t : {0.0, 0.4, 2.5, 5.0}) {
                    const double got = manufactured_f(sol, eps, x, t);
                    const double expect = f_oracle(sol, eps, x, t);
                    EXPECT_NEAR(got, expect, 1e-6 * std::max(1.0, std::abs(expect)))
                        << to_string(id) << " eps=" << eps << " x=" << x << " t=" << t;
                }
    }
}

TEST(Source, CosLinearPolynomialStructure) {
    // f = cos(pi x) + A(x)(1+t) + B(x)(1+t)^3, so f - cos(pi x) is odd in s = 1 + t
    const AnalyticSolution sol{SolutionId::cos_linear};
    for (double x : {0.1, 0.35, 0.8})
        for (double s : {0.5, 1.7, 4.0}) {
            const double c = std::cos(std::numbers::pi * x);
            const double plus = manufactured_f(sol, 1.0, x, s - 1) - c;
            const double minus = manufactured_f(sol, 1.0, x, -s - 1) - c;
            EXPECT_NEAR(plus + minus, 0.0, 1e-11 * std::abs(plus));
        }
}

TEST(Source, MuClosedForm) {
    for (SolutionId id : kAll) {
        const AnalyticSolution sol{id};
        const double x = 0.42, t = 1.1, eps = 0.7, p = sol.phi(x, t);
        EXPECT_NEAR(manufactured_mu(sol, eps, x, t), -eps * sol.T(t) * sol.X(x, 2) + (p * p * p - p) / eps, 1e-12);
    }
}

TEST(L2L2Error, Examples) {
    const Mesh m = build_interval_mesh(0, 1, 50);
    const LumpedMass M = assemble_lumped_mass(m);
    const AnalyticSolution sol{SolutionId::expcos_cos};
    const double tau = 0.1, T = 2.0;
    std::vector<NodalField> exact, shifted;
    for (int n = 1; n <= 20; ++n) {
        exact.push_back(nodal_interpolate(m, [&](double x, double) { return sol.phi(x, n * tau); }));
        shifted.push_back(exact.back());
        for (double& v : shifted.back())
            v += 0.3;
    }
    EXPECT_EQ(l2l2_error(exact, sol, m, M, tau), 0.0);
    EXPECT_NEAR(l2l2_error(shifted, sol, m, M, tau), 0.3 * std::sqrt(T), 1e-13);
    exact[3].pop_back();
    EXPECT_THROW(l2l2_error(exact, sol, m, M, tau), InputError);
}

TEST(RunManufactured, ShortRun) {
    const AnalyticSolution sol{SolutionId::cos_linear};
    ConvergenceOptions o = coarse();
    o.keep_history = true;
    const ConvergenceCell cell = run_manufactured(sol, 0.1, ZetaPolicy::fixed(1.0), o);
    EXPECT_TRUE(cell.ok);
    EXPECT_EQ(cell.steps, 10);
    EXPECT_EQ(cell.history.size(), 10u);
    EXPECT_EQ(cell.monitor.steps, 10);
    EXPECT_GT(cell.error, 0.0);
    EXPECT_LT(cell.error, 0.1);
    EXPECT_NEAR(cell.history.back().time, 1.0, 1e-12);
    for (const auto& row : cell.history)
        EXPECT_EQ(row.zeta, 1.0);
}

TEST(RunManufactured, InvalidOptionsRecordedAsFailure) {
    const AnalyticSolution sol{};
    ConvergenceOptions o = coarse();
    o.h = 0.0;
    const ConvergenceCell bad_h = run_manufactured(sol, 0.1, ZetaPolicy::fixed(1.0), o);
    EXPECT_FALSE(bad_h.ok);
    EXPECT_NE(bad_h.failure.find("mesh size"), std::string::npos);
    const ConvergenceCell bad_tau = run_manufactured(sol, -0.1, ZetaPolicy::fixed(1.0), coarse());
    EXPECT_FALSE(bad_tau.ok);
}

TEST(RunConvergence, FirstOrderAndTableLayout) {
    const AnalyticSolution sol{SolutionId::cos_linear};
    const ErrorTable table = run_convergence(sol, {0.1, 0.05, 0.025}, {0.0, 1.0}, coarse(0.01, 5.0));
    ASSERT_EQ(table.rows.size(), 6u);
    for (double z : {0.0, 1.0}) {
        const double e1 = table.find(0.1, z)->error, e2 = table.find(0.05, z)->error,
                     e3 = table.find(0.025, z)->error;
        EXPECT_GT(e1 / e2, 1.7);
        EXPECT_LT(e1 / e2, 2.3);
        EXPECT_GT(e2 / e3, 1.7);
        EXPECT_LT(e2 / e3, 2.3);
    }
    EXPECT_EQ(table.find(0.3, 0.0), nullptr);
    const std::string csv = table.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "tau,zeta,error,steps,wall_ms");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(RunConvergence, OptimalZetaColumn) {
    const ErrorTable table =
        run_convergence(AnalyticSolution{SolutionId::expcost_sin2}, {0.1}, {-1.0, 0.0}, coarse(0.02, 1.0));
    ASSERT_EQ(table.rows.size(), 2u);
    EXPECT_TRUE(table.rows[0].ok);
    EXPECT_LT(table.rows[0].zeta, 0.0);
    // the optimal policy is written as zeta = -1
    EXPECT_NE(table.to_csv().find("\n0.10000000000000001,-1,"), std::string::npos);
}

TEST(RunConvergence, ZetaInsensitiveAtSmallTau) {
    const AnalyticSolution sol{SolutionId::cos_linear};
    ConvergenceOptions o = coarse(0.001, 5.0);
    o.threads = 0;
    const std::vector<double> zetas = {0.0, 0.25, 0.5, 0.75, 1.0};
    const ErrorTable table = run_convergence(sol, {0.0125}, zetas, o);
    double lo = 1e300, hi = 0.0;
    std::string detail;
    for (const auto& row : table.rows) {
        ASSERT_TRUE(row.ok) << row.failure;
        lo = std::min(lo, row.error);
        hi = std::max(hi, row.error);
        detail += " zeta=" + std::to_string(row.zeta) + ":" + std::to_string(row.error);
    }
    EXPECT_LT((hi - lo) / lo, 0.02) << detail;
}

TEST(RunConvergence, FailureIsRecordedPerCell) {
    // a solver iteration cap of zero tolerance cannot be met
    ConvergenceOptions o = coarse(0.05, 0.2);
    o.tol = 1e-300;
    const ErrorTable table = run_convergence(AnalyticSolution{}, {0.1}, {1.0}, o);
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_FALSE(table.rows[0].ok);
    EXPECT_FALSE(table.rows[0].failure.empty());
}

TEST(ZetaStudy, StandardRelaxationGivesZero) {
    const ZetaHistory hist = run_zeta_study(AnalyticSolution{}, 0.01, 0.01, 1.0, 0.95, 1.0);
    ASSERT_EQ(hist.rows.size(), 100u);
    ASSERT_EQ(hist.quads.size(), 100u);
    for (const auto& row : hist.rows)
        EXPECT_EQ(row.zeta, 0.0);
    EXPECT_LE(hist.monitor.max_R, 1e-10);
    const std::string csv = hist.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,time,zeta,a,b,c,r,q,E_GL");
}

TEST(ZetaStudy, ValuesWithinUnitInterval) {
    const ZetaHistory hist = run_zeta_study(AnalyticSolution{SolutionId::expcos_cos}, 0.05, 0.02, 2.0, 0.0, 0.01);
    for (const auto& row : hist.rows) {
        EXPECT_GE(row.zeta, 0.0);
        EXPECT_LE(row.zeta, 1.0);
    }
    for (std::size_t k = 0; k < hist.rows.size(); ++k)
        EXPECT_LE(hist.quads[k](hist.rows[k].zeta), 1e-10);
}
