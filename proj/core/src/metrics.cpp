#include "olrsc/metrics.hpp"

#include "olrsc/solver.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace olrsc {

double expressed_variance(const Matrix& D, const Matrix& L) {
    if (D.rows() != L.rows())
        throw std::invalid_argument("basis and ground truth must share the ambient dimension");
    const double denom = L.squaredNorm();  // tr(L L^T)
    if (denom == 0.0) throw std::invalid_argument("ground-truth basis must be nonzero");

    // Normalize D's columns, dropping the zero ones; tr(Dh Dh^T L L^T) is then
    // the squared Frobenius norm of L^T Dh.
    double num = 0.0;
    for (int j = 0; j < D.cols(); ++j) {
        const double norm = D.col(j).norm();
        if (norm == 0.0) continue;
        num += (L.transpose() * D.col(j)).squaredNorm() / (norm * norm);
    }
    return num / denom;
}

namespace {

// Dense relabeling in order of first appearance.
std::vector<int> densify(std::span<const int> labels, int& k_out) {
    std::unordered_map<int, int> remap;
    std::vector<int> dense(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        dense[i] = it->second;
        (void)fresh;
    }
    k_out = static_cast<int>(remap.size());
    return dense;
}

// Minimum-cost perfect matching on a square cost matrix (potentials method,
// O(k^3)); returns match[col] = row.
std::vector<int> hungarian_min(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pot_u(n + 1, 0.0), pot_v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - pot_u[i0] - pot_v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    pot_u[match[j]] += delta;
                    pot_v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> result(static_cast<std::size_t>(n));
    for (int j = 1; j <= n; ++j) result[static_cast<std::size_t>(j - 1)] = match[j] - 1;
    return result;
}

}  // namespace

double clustering_accuracy(std::span<const int> pred, std::span<const int> truth) {
    if (pred.empty()) throw std::invalid_argument("clustering_accuracy requires samples");
    if (pred.size() != truth.size())
        throw std::invalid_argument("prediction and truth lengths differ");

    int kp = 0, kt = 0;
    const std::vector<int> dp = densify(pred, kp);
    const std::vector<int> dt = densify(truth, kt);
    const int k = std::max(kp, kt);

    // Contingency counts on a k x k grid; absent clusters pad with zeros so a
    // one-to-one mapping is always a permutation.
    Matrix counts = Matrix::Zero(k, k);
    for (std::size_t i = 0; i < dp.size(); ++i) counts(dp[i], dt[i]) += 1.0;

    double best = 0.0;
    if (k <= 8) {
        std::vector<int> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double agree = 0.0;
            for (int j = 0; j < k; ++j) agree += counts(j, perm[static_cast<std::size_t>(j)]);
            best = std::max(best, agree);
        } while (std::next_permutation(perm.begin(), perm.end()));
    } else {
        const std::vector<int> match = hungarian_min(-counts);
        for (int j = 0; j < k; ++j) best += counts(match[static_cast<std::size_t>(j)], j);
    }
    return best / static_cast<double>(pred.size());
}

PointLoss point_loss(const Vector& z, const Matrix& D, const SolverParams& params) {
    VeResult ve = solve_ve(z, D, params);
    return PointLoss{ve.obj, std::move(ve.v), std::move(ve.e), ve.converged};
}

double surrogate_value(const ModelState& state, const Matrix& D, double lambda1,
                       double lambda2, double lambda3) {
    if (state.t < 1) throw std::invalid_argument("surrogate is undefined before any sample");
    if (D.rows() != state.p || D.cols() != state.d)
        throw std::invalid_argument("basis shape does not match state");
    const double tr_dda = (D.transpose() * D).cwiseProduct(state.A).sum();
    const double tr_db = D.cwiseProduct(state.B).sum();
    const double quad = 0.5 * lambda1 * (state.s_ze + tr_dda - 2.0 * tr_db);
    const double prox = 0.5 * lambda3 * (D - state.M).squaredNorm();
    return (quad + 0.5 * state.s_v + lambda2 * state.s_e1 + state.s_u + prox) /
           static_cast<double>(state.t);
}

double empirical_loss(const Matrix& Z, const Matrix& Y, const Matrix& D,
                      const SolverParams& params, double lambda3) {
    if (Z.rows() != Y.rows() || Z.cols() != Y.cols())
        throw std::invalid_argument("Z and Y must have the same shape");
    if (Z.cols() < 1) throw std::invalid_argument("empirical loss requires samples");
    if (lambda3 <= 0.0) throw std::invalid_argument("empirical loss requires lambda3 > 0");
    const auto n = static_cast<double>(Z.cols());
    const auto p = Z.rows();

    double loss_sum = 0.0;
    for (Eigen::Index i = 0; i < Z.cols(); ++i)
        loss_sum += point_loss(Z.col(i), D, params).loss;

    const Matrix N = Y * Y.transpose();
    Matrix lhs1 = N / n;
    lhs1.diagonal().array() += 1.0 / (lambda3 * n);
    const Matrix W = Eigen::LDLT<Matrix>(lhs1).solve(Y);  // columns (..)^{-1} y_i

    Matrix lhs2 = (lambda3 / n) * N;
    lhs2.diagonal().array() += 1.0 / n;
    const Matrix V = Eigen::LDLT<Matrix>(lhs2).solve(D);

    double h = 0.0;
    for (Eigen::Index i = 0; i < W.cols(); ++i)
        h += 0.5 * (D.transpose() * W.col(i)).squaredNorm();
    h /= n * n;
    h += 0.5 * lambda3 * V.squaredNorm() / (n * n);
    (void)p;
    return (loss_sum + h) / n;
}

Matrix full_u_star(const Matrix& Y, const Matrix& D, double lambda3) {
    if (Y.rows() != D.rows()) throw std::invalid_argument("Y and D must share rows");
    if (lambda3 <= 0.0) throw std::invalid_argument("full_u_star requires lambda3 > 0");
    Matrix lhs = Y * Y.transpose();
    lhs.diagonal().array() += 1.0 / lambda3;
    const Matrix W = Eigen::LDLT<Matrix>(lhs).solve(Y);  // p x n
    return W.transpose() * D;                            // row i = D^T (..)^{-1} y_i
}

Matrix grad_point_loss(const Vector& z, const Matrix& D, const SolverParams& params) {
    const PointLoss pl = point_loss(z, D, params);
    // The fit term carries lambda1/2, so its gradient carries lambda1.
    return params.lambda1 * (D * pl.v + pl.e - z) * pl.v.transpose();
}

}  // namespace olrsc
