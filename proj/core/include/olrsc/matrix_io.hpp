#pragma once

#include "olrsc/model.hpp"

#include <string>
#include <vector>

namespace olrsc {

enum class MatrixFormat { Text, Binary };

// Lossless matrix container (formats documented in the README).  Text mode
// prints 17 significant digits, which round-trips IEEE doubles exactly;
// binary mode stores raw column-major doubles.  read_matrix sniffs the
// format from the file header.
void write_matrix(const std::string& path, const Matrix& M,
                  MatrixFormat format = MatrixFormat::Text);
Matrix read_matrix(const std::string& path);

// One integer per line.
void write_labels(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::string& path);

}  // namespace olrsc
