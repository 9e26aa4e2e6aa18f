#pragma once

#include "olrsc/model.hpp"

#include <cstdint>
#include <vector>

namespace olrsc {

// Draws one p x d_k Gaussian basis L_k and n_k x d_k coefficients R_k per
// subspace, forms the clean blocks L_k R_k^T, concatenates them column-wise
// and applies a seeded random column permutation.  The stored per-subspace
// bases are orthonormalizations of the L_k.  Throws when sum(d_k) > p.
SyntheticDataset generate_union_of_subspaces(int p, const std::vector<int>& dims,
                                             const std::vector<int>& counts,
                                             std::uint64_t seed);

// Adds Uniform[-2, 2] corruption to exactly round(rho * p * n) entry
// positions drawn uniformly without replacement; the mask records them.
SyntheticDataset corrupt_sparse(SyntheticDataset ds, double rho,
                                std::uint64_t seed);

}  // namespace olrsc
