#include "rsav/linalg.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace rsav {

PreconditionerKind parse_preconditioner(const std::string& name) {
    if (name == "none")
        return PreconditionerKind::none;
    if (name == "jacobi")
        return PreconditionerKind::jacobi;
    if (name == "lu")
        return PreconditionerKind::lu;
    throw ConfigError("unknown preconditioner '" + name + "' (valid: none, jacobi, lu)");
}

std::string to_string(PreconditionerKind kind) {
    switch (kind) {
    case PreconditionerKind::none:
        return "none";
    case PreconditionerKind::jacobi:
        return "jacobi";
    case PreconditionerKind::lu:
        return "lu";
    }
    return "?";
}

void StepOperatorContext::validate() const {
    if (!mass || !S || !Sh)
        throw InputError("step operator context is incomplete");
    if (S->size() != mass->size() || Sh->size() != mass->size())
        throw InputError("step operator context dimension mismatch");
    if (!(eps >= 0.0) || !(tau >= 0.0))
        throw InputError("eps and tau must be nonnegative");
}

NodalField apply_B(const StepOperatorContext& ctx, std::span<const double> x) {
    ctx.validate();
    if (x.size() != ctx.size())
        throw InputError("apply_B: vector length does not match operator");
    NodalField y = ctx.mass->solve(*ctx.S * x);
    y = ctx.mass->solve(*ctx.Sh * y);
    const double w = ctx.eps * ctx.tau;
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = x[i] + w * y[i];
    return y;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat to_eigen(const CsrMatrix& a) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nnz());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            t.emplace_back(static_cast<int>(i), a.col_idx()[k], a.values()[k]);
    const auto n = static_cast<Eigen::Index>(a.size());
    SpMat m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SpMat eigen_B(const StepOperatorContext& ctx) {
    const auto n = static_cast<Eigen::Index>(ctx.size());
    Eigen::VectorXd minv(n);
    for (Eigen::Index i = 0; i < n; ++i)
        minv[i] = 1.0 / ctx.mass->diag[static_cast<std::size_t>(i)];
    const SpMat a = minv.asDiagonal() * to_eigen(*ctx.Sh);
    const SpMat b = minv.asDiagonal() * to_eigen(*ctx.S);
    SpMat id(n, n);
    id.setIdentity();
    SpMat out = id + (ctx.eps * ctx.tau) * (a * b).pruned(0.0);
    out.makeCompressed();
    return out;
}

// Row and column absolute sums of M^{-1} K.
std::pair<double, double> scaled_norms(const CsrMatrix& k, const LumpedMass& m) {
    std::vector<double> col(k.size(), 0.0);
    double row_max = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        double s = 0.0;
        for (std::size_t p = k.row_ptr()[i]; p < k.row_ptr()[i + 1]; ++p) {
            const double v = std::abs(k.values()[p]) / m.diag[i];
            s += v;
            col[k.col_idx()[p]] += v;
        }
        row_max = std::max(row_max, s);
    }
    return {*std::max_element(col.begin(), col.end()), row_max};
}

} // namespace

CsrMatrix assemble_B(const StepOperatorContext& ctx) {
    ctx.validate();
    const SpMat b = eigen_B(ctx);
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(b.nonZeros()));
    for (Eigen::Index j = 0; j < b.outerSize(); ++j)
        for (SpMat::InnerIterator it(b, j); it; ++it)
            t.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    return CsrMatrix::from_triplets(ctx.size(), std::move(t));
}

double B_norm_bound(const StepOperatorContext& ctx) {
    ctx.validate();
    const auto [sh1, shi] = scaled_norms(*ctx.Sh, *ctx.mass);
    const auto [s1, si] = scaled_norms(*ctx.S, *ctx.mass);
    const double w = ctx.eps * ctx.tau;
    return std::sqrt((1.0 + w * sh1 * s1) * (1.0 + w * shi * si));
}

struct BSolver::Precond {
    PreconditionerKind kind = PreconditionerKind::none;
    std::vector<double> inv_diag;
    Eigen::SparseLU<SpMat> lu;

    NodalField apply(std::span<const double> v) const {
        switch (kind) {
        case PreconditionerKind::none:
            return NodalField(v.begin(), v.end());
        case PreconditionerKind::jacobi: {
            NodalField out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                out[i] = v[i] * inv_diag[i];
            return out;
        }
        case PreconditionerKind::lu: {
            const Eigen::Map<const Eigen::VectorXd> in(v.data(), static_cast<Eigen::Index>(v.size()));
            const Eigen::VectorXd x = lu.solve(in);
            return NodalField(x.data(), x.data() + x.size());
        }
        }
        return {};
    }
};

BSolver::BSolver(StepOperatorContext ctx, SolverOptions opts)
    : ctx_(std::move(ctx)), opts_(opts), precond_(std::make_unique<Precond>()) {
    ctx_.validate();
    if (!(opts_.tol > 0.0 && opts_.tol < 1.0))
        throw ConfigError("solver tolerance must lie in (0, 1)");
    norm_B_ = B_norm_bound(ctx_);
    precond_->kind = opts_.preconditioner;
    if (opts_.preconditioner == PreconditionerKind::jacobi) {
        const auto& S = *ctx_.S;
        const auto& Sh = *ctx_.Sh;
        const auto& m = ctx_.mass->diag;
        precond_->inv_diag.resize(ctx_.size());
        for (std::size_t i = 0; i < ctx_.size(); ++i) {
            double s = 0.0;
            for (std::size_t p = Sh.row_ptr()[i]; p < Sh.row_ptr()[i + 1]; ++p) {
                const auto k = static_cast<std::size_t>(Sh.col_idx()[p]);
                s += Sh.values()[p] * S.at(k, i) / m[k];
            }
            precond_->inv_diag[i] = 1.0 / (1.0 + ctx_.eps * ctx_.tau * s / m[i]);
        }
    } else if (opts_.preconditioner == PreconditionerKind::lu) {
        const SpMat b = eigen_B(ctx_);
        precond_->lu.analyzePattern(b);
        precond_->lu.factorize(b);
        if (precond_->lu.info() != Eigen::Success)
            throw SolverError("sparse LU factorization of B failed: " + precond_->lu.lastErrorMessage(), {});
    }
}

BSolver::~BSolver() = default;
BSolver::BSolver(BSolver&&) noexcept = default;
BSolver& BSolver::operator=(BSolver&&) noexcept = default;

std::pair<NodalField, SolveReport> BSolver::solve(std::span<const double> rhs) const {
    const std::size_t n = ctx_.size();
    if (rhs.size() != n)
        throw InputError("solve_B: rhs length does not match operator");
    for (double v : rhs)
        if (!std::isfinite(v))
            throw InputError("solve_B: rhs contains non-finite values");

    SolveReport rep;
    NodalField x(n, 0.0);
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) {
        rep.converged = true;
        return {x, rep};
    }
    const int cap = opts_.max_iterations > 0 ? opts_.max_iterations : static_cast<int>(10 * n);

    auto true_residual = [&](const NodalField& xx) {
        NodalField r = apply_B(ctx_, xx);
        for (std::size_t i = 0; i < n; ++i)
            r[i] = rhs[i] - r[i];
        return r;
    };
    auto backward = [&](double rn, const NodalField& xx) { return rn / (norm_B_ * norm2(xx) + bnorm); };
    const LumpedMass& M = *ctx_.mass;
    const double rhs_mass = M.integral(rhs);
    auto finish = [&](NodalField& xx, int it) {
        // B maps constants to themselves and M B - M has zero column sums, so a
        // constant shift makes (B x, 1)^h = (rhs, 1)^h hold to rounding
        const double shift = (rhs_mass - M.integral(xx)) / M.total();
        for (double& v : xx)
            v += shift;
        const double rn = norm2(true_residual(xx));
        rep.iterations = it;
        rep.relative_residual = rn / bnorm;
        rep.backward_error = backward(rn, xx);
        rep.converged = rep.backward_error <= opts_.tol;
        return rep.converged;
    };

    NodalField r(rhs.begin(), rhs.end());
    NodalField rhat = r, p(n, 0.0), v(n, 0.0), s(n), t;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    int it = 0;
    while (it < cap) {
        ++it;
        const double rho_new = dot(rhat, r);
        if (rho_new == 0.0 || !std::isfinite(rho_new)) {
            // breakdown: restart from the current iterate
            r = true_residual(x);
            rhat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            if (dot(rhat, r) == 0.0)
                break;
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        const NodalField phat = precond_->apply(p);
        v = apply_B(ctx_, phat);
        alpha = rho / dot(rhat, v);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * phat[i];
            s[i] = r[i] - alpha * v[i];
        }
        if (backward(norm2(s), x) <= opts_.tol) {
            if (finish(x, it))
                return {x, rep};
            s = true_residual(x);
        }
        const NodalField shat = precond_->apply(s);
        t = apply_B(ctx_, shat);
        const double tt = dot(t, t);
        omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if (backward(norm2(r), x) <= opts_.tol) {
            if (finish(x, it))
                return {x, rep};
            // recurrence drifted from the true residual
            r = true_residual(x);
        }
        if (omega == 0.0) {
            r = true_residual(x);
            rhat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
        }
    }
    finish(x, it);
    if (!rep.converged)
        throw SolverError("BiCGStab did not converge in " + std::to_string(it) +
                              " iterations (backward error " + std::to_string(rep.backward_error) + ")",
                          rep);
    return {x, rep};
}

std::pair<NodalField, SolveReport> solve_B(const StepOperatorContext& ctx, std::span<const double> rhs,
                                           double tol, PreconditionerKind preconditioner) {
    const BSolver solver(ctx, {tol, preconditioner, 0});
    return solver.solve(rhs);
}

std::pair<NodalField, SolveReport> solve_spd(const LumpedMass& mass, const CsrMatrix& K, SpdShift shift,
                                             std::span<const double> reaction, std::span<const double> rhs,
                                             double tol, std::span<const double> guess) {
    const std::size_t n = mass.size();
    if (K.size() != n || rhs.size() != n || (!reaction.empty() && reaction.size() != n) ||
        (!guess.empty() && guess.size() != n))
        throw InputError("solve_spd dimension mismatch");
    if (!(shift.alpha > 0.0) || shift.beta < 0.0)
        throw InputError("solve_spd needs alpha > 0 and beta >= 0");
    for (double r : reaction)
        if (r < 0.0)
            throw InputError("solve_spd reaction term must be nonnegative");

    const std::vector<double> kd = K.diagonal();
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = shift.alpha * mass.diag[i] + shift.beta * kd[i] + (reaction.empty() ? 0.0 : reaction[i]);

    auto apply = [&](std::span<const double> x) {
        NodalField y = K * x;
        for (std::size_t i = 0; i < n; ++i)
            y[i] = shift.beta * y[i] + (shift.alpha * mass.diag[i] + (reaction.empty() ? 0.0 : reaction[i])) * x[i];
        return y;
    };
    double norm_A = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = shift.alpha * mass.diag[i] + (reaction.empty() ? 0.0 : reaction[i]);
        for (std::size_t p = K.row_ptr()[i]; p < K.row_ptr()[i + 1]; ++p)
            s += shift.beta * std::abs(K.values()[p]);
        norm_A = std::max(norm_A, s);
    }

    SolveReport rep;
    NodalField x(n, 0.0);
    const double bnorm = norm2(rhs);
    if (bnorm == 0.0) {
        rep.converged = true;
        return {x, rep};
    }
    const int cap = static_cast<int>(10 * n);
    NodalField r(rhs.begin(), rhs.end()), z(n), p(n);
    if (!guess.empty()) {
        x.assign(guess.begin(), guess.end());
        const NodalField ax = apply(x);
        for (std::size_t i = 0; i < n; ++i)
            r[i] -= ax[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    int it = 0;
    auto check = [&]() {
        NodalField ax = apply(x);
        for (std::size_t i = 0; i < n; ++i)
            ax[i] = rhs[i] - ax[i];
        const double rn = norm2(ax);
        rep.iterations = it;
        rep.relative_residual = rn / bnorm;
        rep.backward_error = rn / (norm_A * norm2(x) + bnorm);
        rep.converged = rep.backward_error <= tol;
        return ax;
    };
    if (!guess.empty() && norm2(r) / (norm_A * norm2(x) + bnorm) <= tol) {
        check();
        if (rep.converged)
            return {x, rep};
    }
    while (it < cap) {
        ++it;
        const NodalField ap = apply(p);
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (norm2(r) / (norm_A * norm2(x) + bnorm) <= tol) {
            NodalField tr = check();
            if (rep.converged)
                return {x, rep};
            r = std::move(tr);
        }
        for (std::size_t i = 0; i < n; ++i)
            z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i)
            p[i] = z[i] + beta * p[i];
    }
    check();
    if (!rep.converged)
        throw SolverError("conjugate gradients did not converge in " + std::to_string(it) + " iterations", rep);
    return {x, rep};
}

} // namespace rsav
