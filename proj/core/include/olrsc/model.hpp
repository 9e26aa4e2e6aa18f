#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace olrsc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Constraint-weight schedule: either a fixed value or sqrt(t/p) with t the
// 1-based sample counter.
enum class Lambda3Mode { Fixed, SqrtTOverP };

enum class BasisUpdate { ColumnBcd, ClosedForm };

struct SolverParams {
    double lambda1 = 1.0;   // reconstruction weight
    double lambda2 = 0.1;   // sparsity weight, typically 1/sqrt(p)
    Lambda3Mode lambda3_mode = Lambda3Mode::SqrtTOverP;
    double lambda3_value = 1.0;  // used only in Fixed mode
    int d = 10;                  // rank budget, d < p
    double ve_tol = 1e-8;        // sup-norm tolerance on (v, e) iterate change
    int ve_max_iters = 500;
    int bcd_passes = 1;
    BasisUpdate basis_update = BasisUpdate::ColumnBcd;

    // lambda1 = 1, lambda2 = 1/sqrt(p), lambda3 = sqrt(t/p).
    static SolverParams standard(int p, int d);

    // Throws std::invalid_argument when a weight or dimension is out of range
    // for a stream of ambient dimension p.
    void validate(int p) const;
};

double lambda3_at(const SolverParams& params, std::int64_t t, int p);

// Everything the online solver carries between samples.  All array sizes
// depend only on (p, d), never on how many samples were folded in.
struct ModelState {
    int p = 0;
    int d = 0;
    std::int64_t t = 0;  // samples folded in so far

    Matrix D;  // p x d current basis
    Matrix M;  // p x d, sum of y_i u_i^T
    Matrix A;  // d x d symmetric, sum of v_i v_i^T
    Matrix B;  // p x d, sum of (z_i - e_i) v_i^T

    // Running scalars; together with the matrices above they make the
    // surrogate objective computable without any per-sample history.
    double s_ze = 0.0;  // sum ||z_i - e_i||^2
    double s_v = 0.0;   // sum ||v_i||^2
    double s_e1 = 0.0;  // sum ||e_i||_1
    double s_u = 0.0;   // sum 0.5 ||u_i||^2

    // D entries i.i.d. N(0, 1/p); accumulators zero.
    static ModelState init(int p, int d, std::uint64_t seed);
    static ModelState zeros(int p, int d);

    // Stored matrix elements: 3*p*d + d*d.
    std::size_t element_count() const;

    // Binary snapshot (layout documented in the README): magic, dims
    // (p, d, t), then D, M, A, B column-major, then the four scalars.
    void save(const std::string& path) const;
    static ModelState load(const std::string& path);

    bool operator==(const ModelState& other) const;
};

// Per-sample solver output.
struct SampleCode {
    Vector v;  // d, low-rank coefficient
    Vector e;  // p, sparse corruption estimate
    Vector u;  // d
    double point_loss = 0.0;  // coding objective at (v, e)
    bool converged = true;    // false when the (v, e) solve hit its cap
};

// Streaming k-means over code vectors.
struct KMeansState {
    Matrix C;                     // d x k centroids
    std::vector<std::int64_t> r;  // per-centroid assignment counts

    int k() const { return static_cast<int>(C.cols()); }
    static KMeansState init(const Matrix& centroids);
};

// Union-of-subspaces data with optional sparse corruption.
struct SyntheticDataset {
    Matrix Z;        // p x n observed
    Matrix Z_clean;  // p x n
    std::vector<Matrix> bases;  // orthonormalized basis per subspace
    std::vector<int> labels;    // subspace index per column
    BoolArray mask;             // true where corruption was added
    double rho = 0.0;

    int p() const { return static_cast<int>(Z.rows()); }
    int n() const { return static_cast<int>(Z.cols()); }
    // Column-wise concatenation of the orthonormal bases, p x sum(d_k).
    Matrix stacked_basis() const;
};

}  // namespace olrsc
