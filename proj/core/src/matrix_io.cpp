#include "olrsc/matrix_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace olrsc {

namespace {

constexpr char kTextHeader[] = "OLRSC-MATRIX 1 text";
constexpr char kBinaryMagic[8] = {'O', 'L', 'R', 'S', 'C', 'M', 'B', '1'};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

void write_text(std::ofstream& out, const std::string& path, const Matrix& M) {
    out << kTextHeader << "\n" << M.rows() << " " << M.cols() << "\n";
    out.precision(17);
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) out << " ";
            out << M(i, j);
        }
        out << "\n";
    }
    if (!out) fail(path, "write failed");
}

void write_binary(std::ofstream& out, const std::string& path, const Matrix& M) {
    out.write(kBinaryMagic, sizeof(kBinaryMagic));
    const std::int64_t dims[2] = {M.rows(), M.cols()};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(M.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(M.size())));
    if (!out) fail(path, "write failed");
}

Matrix read_text(std::ifstream& in, const std::string& path) {
    std::string line;
    std::getline(in, line);  // header already validated by the caller
    if (!std::getline(in, line)) fail(path, "missing dimension line");
    std::istringstream dims(line);
    Eigen::Index rows = -1, cols = -1;
    if (!(dims >> rows >> cols) || rows < 0 || cols < 0)
        fail(path, "bad dimension line '" + line + "'");
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) fail(path, "truncated at row " + std::to_string(i));
        std::istringstream row(line);
        for (Eigen::Index j = 0; j < cols; ++j)
            if (!(row >> M(i, j)))
                fail(path, "bad value at row " + std::to_string(i) + ", column " +
                               std::to_string(j));
    }
    return M;
}

Matrix read_binary(std::ifstream& in, const std::string& path) {
    in.seekg(sizeof(kBinaryMagic));
    std::int64_t dims[2];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || dims[0] < 0 || dims[1] < 0) fail(path, "bad binary dimensions");
    Matrix M(dims[0], dims[1]);
    in.read(reinterpret_cast<char*>(M.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(M.size())));
    if (!in) fail(path, "truncated binary payload");
    return M;
}

}  // namespace

void write_matrix(const std::string& path, const Matrix& M, MatrixFormat format) {
    std::ofstream out(path, format == MatrixFormat::Binary
                                ? std::ios::binary | std::ios::out
                                : std::ios::out);
    if (!out) fail(path, "cannot open for writing");
    if (format == MatrixFormat::Binary)
        write_binary(out, path, M);
    else
        write_text(out, path, M);
}

Matrix read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char head[sizeof(kBinaryMagic)] = {};
    in.read(head, sizeof(head));
    if (!in && in.gcount() == 0) fail(path, "empty file");
    if (std::memcmp(head, kBinaryMagic, sizeof(kBinaryMagic)) == 0)
        return read_binary(in, path);
    in.clear();
    in.seekg(0);
    std::string first;
    std::getline(in, first);
    if (first != kTextHeader) fail(path, "unrecognized matrix header");
    in.seekg(0);
    return read_text(in, path);
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    for (int label : labels) out << label << "\n";
    if (!out) fail(path, "write failed");
}

std::vector<int> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        int label = 0;
        if (!(row >> label))
            fail(path + ":" + std::to_string(line_no), "bad label");
        labels.push_back(label);
    }
    return labels;
}

}  // namespace olrsc
