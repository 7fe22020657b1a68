#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>

#include "rsav/error.hpp"
#include "rsav/fem.hpp"
#include "rsav/sparse.hpp"

namespace rsav {

enum class PreconditionerKind { none, jacobi, lu };

PreconditionerKind parse_preconditioner(const std::string& name);
std::string to_string(PreconditionerKind kind);

/// Data defining B = I + eps*tau*M^{-1} S_h M^{-1} S.
struct StepOperatorContext {
    std::shared_ptr<const LumpedMass> mass;
    std::shared_ptr<const CsrMatrix> S;
    std::shared_ptr<const CsrMatrix> Sh;
    double eps = 1.0;
    double tau = 1.0;

    std::size_t size() const { return mass ? mass->size() : 0; }
    void validate() const;
};

NodalField apply_B(const StepOperatorContext& ctx, std::span<const double> x);

/// B as an explicit sparse matrix (used for preconditioning and tests).
CsrMatrix assemble_B(const StepOperatorContext& ctx);

/// Upper bound on the spectral norm of B, from its 1- and inf-norm bounds.
double B_norm_bound(const StepOperatorContext& ctx);

struct SolverOptions {
    double tol = 1e-12;
    PreconditionerKind preconditioner = PreconditionerKind::lu;
    /// 0 means 10 * number of unknowns
    int max_iterations = 0;
};

/// Right-preconditioned BiCGStab for B x = rhs, applying B matrix-free.
///
/// The preconditioner is built once in the constructor and reused for every
/// right-hand side. Convergence is declared when the backward error
/// ||B x - rhs|| / (||B|| ||x|| + ||rhs||) drops below tol.
class BSolver {
public:
    BSolver(StepOperatorContext ctx, SolverOptions opts = {});
    ~BSolver();
    BSolver(BSolver&&) noexcept;
    BSolver& operator=(BSolver&&) noexcept;

    std::pair<NodalField, SolveReport> solve(std::span<const double> rhs) const;

    const StepOperatorContext& context() const { return ctx_; }
    const SolverOptions& options() const { return opts_; }

private:
    struct Precond;
    StepOperatorContext ctx_;
    SolverOptions opts_;
    double norm_B_ = 1.0;
    std::unique_ptr<Precond> precond_;
};

std::pair<NodalField, SolveReport> solve_B(const StepOperatorContext& ctx, std::span<const double> rhs,
                                           double tol,
                                           PreconditionerKind preconditioner = PreconditionerKind::lu);

/// Coefficients of A = alpha*M + beta*K + diag(reaction).
struct SpdShift {
    double alpha = 1.0;
    double beta = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for the operator above.
/// reaction may be empty (treated as zero); guess, if non-empty, is the starting iterate.
std::pair<NodalField, SolveReport> solve_spd(const LumpedMass& mass, const CsrMatrix& K, SpdShift shift,
                                             std::span<const double> reaction, std::span<const double> rhs,
                                             double tol, std::span<const double> guess = {});

} // namespace rsav
