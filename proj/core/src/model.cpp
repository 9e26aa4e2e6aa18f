#include "olrsc/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace olrsc {

SolverParams SolverParams::standard(int p, int d) {
    SolverParams params;
    params.lambda1 = 1.0;
    params.lambda2 = 1.0 / std::sqrt(static_cast<double>(p));
    params.lambda3_mode = Lambda3Mode::SqrtTOverP;
    params.d = d;
    return params;
}

void SolverParams::validate(int p) const {
    if (lambda1 <= 0.0) throw std::invalid_argument("lambda1 must be positive");
    if (lambda2 <= 0.0) throw std::invalid_argument("lambda2 must be positive");
    if (lambda3_mode == Lambda3Mode::Fixed && lambda3_value <= 0.0)
        throw std::invalid_argument("fixed lambda3 must be positive");
    if (d < 1) throw std::invalid_argument("rank budget d must be at least 1");
    if (d >= p)
        throw std::invalid_argument("rank budget d must be smaller than the ambient dimension");
    if (ve_tol <= 0.0) throw std::invalid_argument("ve_tol must be positive");
    if (ve_max_iters < 1) throw std::invalid_argument("ve_max_iters must be at least 1");
    if (bcd_passes < 1) throw std::invalid_argument("bcd_passes must be at least 1");
}

double lambda3_at(const SolverParams& params, std::int64_t t, int p) {
    if (t < 1 || p < 1) throw std::invalid_argument("lambda3_at requires t >= 1 and p >= 1");
    if (params.lambda3_mode == Lambda3Mode::Fixed) return params.lambda3_value;
    return std::sqrt(static_cast<double>(t) / static_cast<double>(p));
}

ModelState ModelState::zeros(int p, int d) {
    if (p < 1 || d < 1) throw std::invalid_argument("state dimensions must be positive");
    ModelState s;
    s.p = p;
    s.d = d;
    s.D = Matrix::Zero(p, d);
    s.M = Matrix::Zero(p, d);
    s.A = Matrix::Zero(d, d);
    s.B = Matrix::Zero(p, d);
    return s;
}

ModelState ModelState::init(int p, int d, std::uint64_t seed) {
    ModelState s = zeros(p, d);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < p; ++i) s.D(i, j) = scale * normal(gen);
    return s;
}

std::size_t ModelState::element_count() const {
    return static_cast<std::size_t>(p) * d * 3 + static_cast<std::size_t>(d) * d;
}

bool ModelState::operator==(const ModelState& other) const {
    return p == other.p && d == other.d && t == other.t && D == other.D &&
           M == other.M && A == other.A && B == other.B && s_ze == other.s_ze &&
           s_v == other.s_v && s_e1 == other.s_e1 && s_u == other.s_u;
}

namespace {

constexpr char kStateMagic[8] = {'O', 'L', 'R', 'S', 'C', 'S', 'T', '1'};

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (!in) throw std::runtime_error("truncated model state file");
}

void write_mat(std::ofstream& out, const Matrix& M) {
    write_raw(out, M.data(), sizeof(double) * static_cast<std::size_t>(M.size()));
}

void read_mat(std::ifstream& in, Matrix& M) {
    read_raw(in, M.data(), sizeof(double) * static_cast<std::size_t>(M.size()));
}

}  // namespace

void ModelState::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_raw(out, kStateMagic, sizeof(kStateMagic));
    const std::int64_t dims[3] = {p, d, t};
    write_raw(out, dims, sizeof(dims));
    write_mat(out, D);
    write_mat(out, M);
    write_mat(out, A);
    write_mat(out, B);
    const double scalars[4] = {s_ze, s_v, s_e1, s_u};
    write_raw(out, scalars, sizeof(scalars));
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

ModelState ModelState::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    char magic[8];
    read_raw(in, magic, sizeof(magic));
    if (std::memcmp(magic, kStateMagic, sizeof(magic)) != 0)
        throw std::runtime_error("'" + path + "' is not a model state file");
    std::int64_t dims[3];
    read_raw(in, dims, sizeof(dims));
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 0)
        throw std::runtime_error("corrupt dimensions in '" + path + "'");
    ModelState s = zeros(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    s.t = dims[2];
    read_mat(in, s.D);
    read_mat(in, s.M);
    read_mat(in, s.A);
    read_mat(in, s.B);
    double scalars[4];
    read_raw(in, scalars, sizeof(scalars));
    s.s_ze = scalars[0];
    s.s_v = scalars[1];
    s.s_e1 = scalars[2];
    s.s_u = scalars[3];
    return s;
}

KMeansState KMeansState::init(const Matrix& centroids) {
    KMeansState km;
    km.C = centroids;
    km.r.assign(static_cast<std::size_t>(centroids.cols()), 0);
    return km;
}

Matrix SyntheticDataset::stacked_basis() const {
    int cols = 0;
    for (const auto& L : bases) cols += static_cast<int>(L.cols());
    Matrix out(Z.rows(), cols);
    int at = 0;
    for (const auto& L : bases) {
        out.middleCols(at, static_cast<int>(L.cols())) = L;
        at += static_cast<int>(L.cols());
    }
    return out;
}

}  // namespace olrsc
