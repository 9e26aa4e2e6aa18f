#pragma once

#include "olrsc/model.hpp"

#include <string>
#include <vector>

namespace olrsc {

struct SparseDataset {
    Matrix Z;                 // p x n, one column per sample
    std::vector<int> labels;  // remapped to 0..k-1 by first appearance
    int n_classes = 0;
};

// Parses sparse classification files (`label index:value ...` lines with
// 1-based strictly increasing indices) into a dense column-per-sample
// matrix.  The ambient dimension is the largest index seen.  Malformed
// lines raise errors carrying the line number.
SparseDataset read_sparse_dataset(const std::string& path);

// Rescales every nonzero column to unit max-norm.
void scale_columns_unit_max(Matrix& Z);

}  // namespace olrsc
