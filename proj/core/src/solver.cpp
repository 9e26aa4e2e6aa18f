#include "olrsc/solver.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace olrsc {

Vector soft_threshold(const Vector& x, double tau) {
    if (tau < 0.0) throw std::invalid_argument("soft_threshold requires tau >= 0");
    return x.array().sign() * (x.array().abs() - tau).max(0.0);
}

double coding_objective(const Vector& z, const Matrix& D, const Vector& v,
                        const Vector& e, double lambda1, double lambda2) {
    const double fit = (z - D * v - e).squaredNorm();
    return 0.5 * lambda1 * fit + 0.5 * v.squaredNorm() + lambda2 * e.lpNorm<1>();
}

VeResult solve_ve(const Vector& z, const Matrix& D, const SolverParams& params) {
    if (z.size() != D.rows())
        throw std::invalid_argument("sample dimension does not match basis rows");
    const int d = static_cast<int>(D.cols());
    const double tau = params.lambda2 / params.lambda1;

    // The v-step system (lambda1^{-1} I + D^T D) is fixed for the whole
    // alternation, so factor it once.
    Matrix gram = D.transpose() * D;
    gram.diagonal().array() += 1.0 / params.lambda1;
    Eigen::LDLT<Matrix> ridge(gram);

    VeResult res;
    res.v = Vector::Zero(d);
    res.e = Vector::Zero(z.size());
    double delta = 0.0;
    for (int it = 0; it < params.ve_max_iters; ++it) {
        Vector v_next = ridge.solve(D.transpose() * (z - res.e));
        Vector e_next = soft_threshold(z - D * v_next, tau);
        delta = (v_next - res.v).lpNorm<Eigen::Infinity>();
        delta = std::max(delta, (e_next - res.e).lpNorm<Eigen::Infinity>());
        res.v = std::move(v_next);
        res.e = std::move(e_next);
        res.iters = it + 1;
        if (delta < params.ve_tol) break;
    }
    res.converged = delta < 10.0 * params.ve_tol;
    res.obj = coding_objective(z, D, res.v, res.e, params.lambda1, params.lambda2);
    return res;
}

Vector solve_u(const Vector& y, const Matrix& D, const Matrix& M,
               double lambda3) {
    if (y.size() != D.rows() || D.rows() != M.rows() || D.cols() != M.cols())
        throw std::invalid_argument("solve_u dimension mismatch");
    if (lambda3 <= 0.0) throw std::invalid_argument("solve_u requires lambda3 > 0");
    const double denom = y.squaredNorm() + 1.0 / lambda3;
    return (D - M).transpose() * y / denom;
}

void update_accumulators(ModelState& state, const Vector& z, const Vector& y,
                         const SampleCode& code) {
    if (z.size() != state.p || y.size() != state.p)
        throw std::invalid_argument("sample dimension does not match state");
    if (code.v.size() != state.d || code.u.size() != state.d ||
        code.e.size() != state.p)
        throw std::invalid_argument("code dimensions do not match state");

    state.M.noalias() += y * code.u.transpose();
    state.A.noalias() += code.v * code.v.transpose();
    state.A = 0.5 * (state.A + state.A.transpose()).eval();  // keep exactly symmetric
    state.B.noalias() += (z - code.e) * code.v.transpose();
    state.s_ze += (z - code.e).squaredNorm();
    state.s_v += code.v.squaredNorm();
    state.s_e1 += code.e.lpNorm<1>();
    state.s_u += 0.5 * code.u.squaredNorm();
    state.t += 1;
}

Matrix update_basis_closed(const Matrix& A, const Matrix& B, const Matrix& M,
                           double lambda1, double lambda3) {
    if (lambda1 < 0.0 || lambda3 <= 0.0)
        throw std::invalid_argument("update_basis_closed requires lambda1 >= 0, lambda3 > 0");
    if (lambda1 == 0.0) return M;  // the system degenerates to lambda3 D = lambda3 M
    Matrix lhs = lambda1 * A;
    lhs.diagonal().array() += lambda3;
    const Matrix rhs = lambda1 * B + lambda3 * M;
    // Solve D (lambda1 A + lambda3 I) = rhs via the transposed SPD system.
    Eigen::LDLT<Matrix> ldlt(lhs);
    return ldlt.solve(rhs.transpose()).transpose();
}

namespace detail {

bool bcd_update_column(Matrix& D, const Matrix& Ahat, const Matrix& Bhat,
                       int j) {
    const double ajj = Ahat(j, j);
    if (!(ajj > 0.0) || !std::isfinite(ajj)) return false;
    D.col(j) -= (D * Ahat.col(j) - Bhat.col(j)) / ajj;
    return true;
}

}  // namespace detail

Matrix update_basis_bcd(const Matrix& D_prev, const Matrix& A, const Matrix& B,
                        const Matrix& M, double lambda1, double lambda3,
                        int passes) {
    if (lambda1 < 0.0 || lambda3 <= 0.0)
        throw std::invalid_argument("update_basis_bcd requires lambda1 >= 0, lambda3 > 0");
    if (passes < 1) throw std::invalid_argument("passes must be at least 1");
    Matrix Ahat = lambda1 * A;
    Ahat.diagonal().array() += lambda3;
    const Matrix Bhat = lambda1 * B + lambda3 * M;
    Matrix D = D_prev;
    for (int pass = 0; pass < passes; ++pass)
        for (int j = 0; j < D.cols(); ++j) detail::bcd_update_column(D, Ahat, Bhat, j);
    return D;
}

SampleCode olrsc_step(ModelState& state, const Vector& z, const Vector& y,
                      const SolverParams& params) {
    const double lambda3 = lambda3_at(params, state.t + 1, state.p);

    VeResult ve = solve_ve(z, state.D, params);
    SampleCode code;
    code.v = std::move(ve.v);
    code.e = std::move(ve.e);
    code.u = solve_u(y, state.D, state.M, lambda3);
    code.point_loss = ve.obj;
    code.converged = ve.converged;

    update_accumulators(state, z, y, code);

    if (params.basis_update == BasisUpdate::ClosedForm)
        state.D = update_basis_closed(state.A, state.B, state.M, params.lambda1, lambda3);
    else
        state.D = update_basis_bcd(state.D, state.A, state.B, state.M,
                                   params.lambda1, lambda3, params.bcd_passes);
    return code;
}

}  // namespace olrsc
