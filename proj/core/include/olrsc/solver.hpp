#pragma once

#include "olrsc/model.hpp"

namespace olrsc {

// Elementwise sign(x) * max(|x| - tau, 0).
Vector soft_threshold(const Vector& x, double tau);

// lambda1/2 ||z - D v - e||^2 + 1/2 ||v||^2 + lambda2 ||e||_1
double coding_objective(const Vector& z, const Matrix& D, const Vector& v,
                        const Vector& e, double lambda1, double lambda2);

struct VeResult {
    Vector v;
    Vector e;
    double obj = 0.0;
    int iters = 0;
    bool converged = true;
};

// Block-coordinate minimization of the coding objective, alternating the
// ridge v-step with the soft-threshold e-step, starting from e = 0.  Stops
// when the sup-norm change of both blocks drops below params.ve_tol or the
// iteration cap is hit; in the latter case the result is still returned,
// flagged not-converged when the residual change exceeds 10 * ve_tol.
VeResult solve_ve(const Vector& z, const Matrix& D, const SolverParams& params);

// u = (||y||^2 + 1/lambda3)^{-1} (D - M)^T y.
Vector solve_u(const Vector& y, const Matrix& D, const Matrix& M,
               double lambda3);

// Folds one coded sample into the accumulators and advances t.  Dimension
// mismatches throw before any mutation.
void update_accumulators(ModelState& state, const Vector& z, const Vector& y,
                         const SampleCode& code);

// D = (lambda1 B + lambda3 M)(lambda1 A + lambda3 I)^{-1}.  lambda1 = 0 is
// accepted and short-circuits to D = M.
Matrix update_basis_closed(const Matrix& A, const Matrix& B, const Matrix& M,
                           double lambda1, double lambda3);

// Column-wise coordinate descent on the same quadratic, `passes` full sweeps
// starting from D_prev.  Each column update is an exact coordinate minimum,
// so the surrogate objective never increases across updates.
Matrix update_basis_bcd(const Matrix& D_prev, const Matrix& A, const Matrix& B,
                        const Matrix& M, double lambda1, double lambda3,
                        int passes);

namespace detail {
// One exact minimization of column j given the others fixed:
// d_j <- d_j - (D a_j - b_j) / A(j, j), with the hatted matrices
// Ahat = lambda1 A + lambda3 I and Bhat = lambda1 B + lambda3 M.
// Returns false (leaving the column untouched) when Ahat(j, j) is not
// usable, which only happens under a fixed lambda3 = 0 misconfiguration.
bool bcd_update_column(Matrix& D, const Matrix& Ahat, const Matrix& Bhat,
                       int j);
}  // namespace detail

// One full pass of the online solver: schedule lambda3 for sample t+1, code
// the sample against the current basis, fold the accumulators, then refresh
// the basis (column BCD by default, closed form per params).
SampleCode olrsc_step(ModelState& state, const Vector& z, const Vector& y,
                      const SolverParams& params);

}  // namespace olrsc
