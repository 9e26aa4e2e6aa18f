#include "olrsc/pipeline.hpp"

#include "olrsc/metrics.hpp"

#include <chrono>
#include <stdexcept>
#include <string>

namespace olrsc {

MatrixSource::MatrixSource(Matrix Z) : Z_(std::move(Z)) {}

MatrixSource::MatrixSource(Matrix Z, Matrix Y) : Z_(std::move(Z)), Y_(std::move(Y)) {
    if (Y_.rows() != Z_.rows() || Y_.cols() != Z_.cols())
        throw std::invalid_argument("dictionary stream must match data stream in shape");
}

std::optional<std::pair<Vector, Vector>> MatrixSource::next() {
    if (pos_ >= Z_.cols()) return std::nullopt;
    const auto j = pos_++;
    Vector z = Z_.col(j);
    Vector y = Y_.size() == 0 ? z : Vector(Y_.col(j));
    return std::make_pair(std::move(z), std::move(y));
}

int kmeans_step(KMeansState& km, const Vector& v) {
    if (km.k() < 1) throw std::invalid_argument("kmeans_step requires at least one centroid");
    if (v.size() != km.C.rows())
        throw std::invalid_argument("code dimension does not match centroids");
    int o = 0;
    double best = (v - km.C.col(0)).squaredNorm();
    for (int j = 1; j < km.k(); ++j) {
        const double dist = (v - km.C.col(j)).squaredNorm();
        if (dist < best) {
            best = dist;
            o = j;
        }
    }
    auto& count = km.r[static_cast<std::size_t>(o)];
    count += 1;
    const double rn = static_cast<double>(count);
    km.C.col(o) = ((rn - 1.0) / rn) * km.C.col(o) + (1.0 / rn) * v;
    return o;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Growing k-means model used when no init_C is given: the first k distinct
// codes become the centroids (count 1 each); every other code takes a normal
// streaming step against the centroids collected so far.
struct SeededKMeans {
    int target_k;
    KMeansState km;
    bool from_init = false;

    int assign(const Vector& v) {
        const int m = km.k();
        if (!from_init && m < target_k) {
            bool fresh = true;
            for (int j = 0; j < m && fresh; ++j)
                if (km.C.col(j) == v) fresh = false;
            if (fresh) {
                km.C.conservativeResize(v.size(), m + 1);
                km.C.col(m) = v;
                km.r.push_back(1);
                return m;
            }
        }
        return kmeans_step(km, v);
    }
};

RunReport drive(SampleSource& data, const SolverParams& params,
                const StreamOptions& options, ModelState state,
                SeededKMeans* cluster) {
    params.validate(state.p);
    if (options.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (options.checkpoint_stride < 0)
        throw std::invalid_argument("checkpoint_stride must not be negative");
    if (options.ground_truth && options.ground_truth->rows() != state.p)
        throw std::invalid_argument("ground-truth basis rows must equal the ambient dimension");

    RunReport report;
    report.peak_state_elements = state.element_count();

    const auto checkpoint = [&](const ModelState& s) {
        CheckpointRow row;
        row.t = s.t;
        const double lambda3 = lambda3_at(params, s.t, s.p);
        row.g = surrogate_value(s, s.D, params.lambda1, params.lambda2, lambda3);
        if (options.ground_truth) row.ev = expressed_variance(s.D, *options.ground_truth);
        report.checkpoints.push_back(row);
    };

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        const bool final_epoch = epoch == options.epochs - 1;
        const bool frozen = epoch > 0 && !options.update_basis_after_first_epoch;
        data.reset();
        std::int64_t index = 0;
        while (auto sample = data.next()) {
            const auto& [z, y] = *sample;
            if (z.size() != state.p || y.size() != state.p)
                throw std::invalid_argument("sample " + std::to_string(index) +
                                            " has dimension " + std::to_string(z.size()) +
                                            ", expected " + std::to_string(state.p));

            SampleCode code;
            if (frozen) {
                // Re-extract coefficients against the frozen basis; the model
                // itself (accumulators, counter, D) is left untouched.
                auto start = Clock::now();
                VeResult ve = solve_ve(z, state.D, params);
                report.solve_seconds += seconds_since(start);
                code.v = std::move(ve.v);
                code.e = std::move(ve.e);
                code.u = Vector::Zero(state.d);
                code.point_loss = ve.obj;
                code.converged = ve.converged;
            } else {
                // Same call sequence as olrsc_step, split so the coding and
                // basis phases can be timed separately.
                const double lambda3 = lambda3_at(params, state.t + 1, state.p);
                auto start = Clock::now();
                VeResult ve = solve_ve(z, state.D, params);
                code.v = std::move(ve.v);
                code.e = std::move(ve.e);
                code.u = solve_u(y, state.D, state.M, lambda3);
                code.point_loss = ve.obj;
                code.converged = ve.converged;
                update_accumulators(state, z, y, code);
                report.solve_seconds += seconds_since(start);

                start = Clock::now();
                if (params.basis_update == BasisUpdate::ClosedForm)
                    state.D = update_basis_closed(state.A, state.B, state.M,
                                                  params.lambda1, lambda3);
                else
                    state.D = update_basis_bcd(state.D, state.A, state.B, state.M,
                                               params.lambda1, lambda3,
                                               params.bcd_passes);
                report.basis_seconds += seconds_since(start);
            }

            report.samples_processed += 1;
            if (!code.converged) report.nonconverged_ve += 1;

            if (cluster && final_epoch) {
                auto start = Clock::now();
                report.assignments.push_back(cluster->assign(code.v));
                report.cluster_seconds += seconds_since(start);
            }
            if (options.log_codes && final_epoch) report.codes.push_back(code);

            std::size_t live = state.element_count() +
                               static_cast<std::size_t>(z.size() + y.size() + code.e.size()) +
                               static_cast<std::size_t>(code.v.size() + code.u.size());
            if (cluster)
                live += static_cast<std::size_t>(cluster->km.C.size()) + cluster->km.r.size();
            if (live > report.peak_state_elements) report.peak_state_elements = live;

            if (!frozen && options.checkpoint_stride > 0 &&
                state.t % options.checkpoint_stride == 0)
                checkpoint(state);
            ++index;
        }
    }

    if (report.samples_processed > 0 && state.t > 0 &&
        (report.checkpoints.empty() || report.checkpoints.back().t != state.t))
        checkpoint(state);

    if (cluster) report.kmeans = std::move(cluster->km);
    report.state = std::move(state);
    return report;
}

}  // namespace

RunReport run_stream(SampleSource& data, const SolverParams& params,
                     const StreamOptions& options, ModelState state) {
    return drive(data, params, options, std::move(state), nullptr);
}

RunReport run_fully_online(SampleSource& data, const SolverParams& params,
                           int k, const StreamOptions& options, ModelState state,
                           const std::optional<Matrix>& init_C) {
    if (k < 1) throw std::invalid_argument("k must be at least 1");
    SeededKMeans cluster;
    cluster.target_k = k;
    if (init_C) {
        if (init_C->rows() != state.d || init_C->cols() != k)
            throw std::invalid_argument("init_C must be d x k");
        cluster.km = KMeansState::init(*init_C);
        cluster.from_init = true;
    } else {
        cluster.km = KMeansState::init(Matrix(state.d, 0));
    }
    return drive(data, params, options, std::move(state), &cluster);
}

}  // namespace olrsc
