#pragma once

#include "olrsc/model.hpp"
#include "olrsc/solver.hpp"

#include <span>

namespace olrsc {

// tr(Dhat Dhat^T L L^T) / tr(L L^T), where Dhat is D with unit-normalized
// columns (zero columns dropped).  Lies in [0, 1] when L has orthonormal
// columns and d <= rank(L); reported unclipped otherwise.
double expressed_variance(const Matrix& D, const Matrix& L);

// Best one-to-one matching of predicted clusters to true classes, as a
// fraction of agreeing samples.  Exhaustive over permutations for up to 8
// clusters, optimal assignment on the contingency matrix beyond that.
double clustering_accuracy(std::span<const int> pred,
                           std::span<const int> truth);

struct PointLoss {
    double loss = 0.0;
    Vector v;
    Vector e;
    bool converged = true;
};

// min over (v, e) of the coding objective, via solve_ve.
PointLoss point_loss(const Vector& z, const Matrix& D,
                     const SolverParams& params);

// Surrogate objective at basis D, computed from the O(pd) state:
//   (1/t) [ lambda1/2 (s_ze + tr(D^T D A) - 2 tr(D^T B))
//           + s_v/2 + lambda2 s_e1 + s_u + lambda3/2 ||D - M||_F^2 ].
double surrogate_value(const ModelState& state, const Matrix& D,
                       double lambda1, double lambda2, double lambda3);

// Empirical loss (1/n) sum_i min-coding-loss(z_i, D) + (1/n) h(Y, D), with
// the dictionary-fit term h evaluated through its closed form (two direct
// p x p solves).  Desk scale only.
double empirical_loss(const Matrix& Z, const Matrix& Y, const Matrix& D,
                      const SolverParams& params, double lambda3);

// Batch-optimal row coefficients: row i of the returned n x d matrix is
// D^T (lambda3^{-1} I_p + Y Y^T)^{-1} y_i.
Matrix full_u_star(const Matrix& Y, const Matrix& D, double lambda3);

// Gradient of the minimized coding loss in D:
// lambda1 (D v' + e' - z) v'^T at the minimizing (v', e').
Matrix grad_point_loss(const Vector& z, const Matrix& D,
                       const SolverParams& params);

}  // namespace olrsc
