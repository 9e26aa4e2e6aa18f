#include "olrsc/synth.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace olrsc {

SyntheticDataset generate_union_of_subspaces(int p, const std::vector<int>& dims,
                                             const std::vector<int>& counts,
                                             std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("ambient dimension must be positive");
    if (dims.empty() || dims.size() != counts.size())
        throw std::invalid_argument("dims and counts must be non-empty and of equal length");
    int rank_total = 0;
    int n = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (dims[k] < 1 || counts[k] < 1)
            throw std::invalid_argument("subspace dimensions and counts must be positive");
        rank_total += dims[k];
        n += counts[k];
    }
    if (rank_total > p)
        throw std::invalid_argument(
            "sum of subspace dimensions exceeds the ambient dimension; "
            "subspaces could not be disjoint in general position");

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    SyntheticDataset ds;
    ds.Z_clean.resize(p, n);
    ds.labels.resize(static_cast<std::size_t>(n));
    ds.bases.reserve(dims.size());

    int at = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const int dk = dims[k];
        const int nk = counts[k];
        Matrix L(p, dk);
        for (int j = 0; j < dk; ++j)
            for (int i = 0; i < p; ++i) L(i, j) = normal(gen);
        Matrix R(nk, dk);
        for (int j = 0; j < dk; ++j)
            for (int i = 0; i < nk; ++i) R(i, j) = normal(gen);
        ds.Z_clean.middleCols(at, nk).noalias() = L * R.transpose();
        std::fill_n(ds.labels.begin() + at, nk, static_cast<int>(k));
        // Orthonormal range of L_k, kept for expressed-variance checks.
        Eigen::HouseholderQR<Matrix> qr(L);
        ds.bases.push_back(Matrix(qr.householderQ()).leftCols(dk));
        at += nk;
    }

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);

    Matrix shuffled(p, n);
    std::vector<int> shuffled_labels(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        shuffled.col(j) = ds.Z_clean.col(perm[static_cast<std::size_t>(j)]);
        shuffled_labels[static_cast<std::size_t>(j)] =
            ds.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
    }
    ds.Z_clean = std::move(shuffled);
    ds.labels = std::move(shuffled_labels);
    ds.Z = ds.Z_clean;
    ds.mask = BoolArray::Constant(p, n, false);
    ds.rho = 0.0;
    return ds;
}

SyntheticDataset corrupt_sparse(SyntheticDataset ds, double rho, std::uint64_t seed) {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must lie in [0, 1]");
    const std::int64_t total = static_cast<std::int64_t>(ds.Z_clean.size());
    const std::int64_t count = std::llround(rho * static_cast<double>(total));

    ds.Z = ds.Z_clean;
    ds.mask = BoolArray::Constant(ds.Z.rows(), ds.Z.cols(), false);
    ds.rho = rho;
    if (count == 0) return ds;

    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> uniform(-2.0, 2.0);

    // Partial Fisher-Yates: the first `count` slots end up holding a uniform
    // sample of entry positions without replacement.
    std::vector<std::int64_t> positions(static_cast<std::size_t>(total));
    std::iota(positions.begin(), positions.end(), std::int64_t{0});
    for (std::int64_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, total - 1);
        std::swap(positions[static_cast<std::size_t>(i)],
                  positions[static_cast<std::size_t>(pick(gen))]);
    }
    for (std::int64_t i = 0; i < count; ++i) {
        const std::int64_t pos = positions[static_cast<std::size_t>(i)];
        const auto row = static_cast<Eigen::Index>(pos % ds.Z.rows());
        const auto col = static_cast<Eigen::Index>(pos / ds.Z.rows());
        ds.Z(row, col) += uniform(gen);
        ds.mask(row, col) = true;
    }
    return ds;
}

}  // namespace olrsc
