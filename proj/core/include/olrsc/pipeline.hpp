#pragma once

#include "olrsc/model.hpp"
#include "olrsc/solver.hpp"

#include <optional>
#include <utility>

namespace olrsc {

// Ordered stream of (z, y) sample pairs.  reset() rewinds to the first
// sample so the same order can be replayed for another epoch.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual std::optional<std::pair<Vector, Vector>> next() = 0;
    virtual void reset() = 0;
    virtual int dim() const = 0;
    virtual std::int64_t size() const = 0;  // samples per epoch
};

// Adapter over in-memory column matrices.  With one argument the dictionary
// is the dataset itself, i.e. the stream yields (z, z).
class MatrixSource final : public SampleSource {
public:
    explicit MatrixSource(Matrix Z);
    MatrixSource(Matrix Z, Matrix Y);

    std::optional<std::pair<Vector, Vector>> next() override;
    void reset() override { pos_ = 0; }
    int dim() const override { return static_cast<int>(Z_.rows()); }
    std::int64_t size() const override { return Z_.cols(); }

private:
    Matrix Z_;
    Matrix Y_;  // empty means Y = Z
    std::int64_t pos_ = 0;
};

struct StreamOptions {
    int epochs = 1;
    // Record a metrics row every `checkpoint_stride` samples (0 = only at the
    // end).  Rows carry the surrogate value and, when a ground-truth basis is
    // supplied, the expressed variance of the current basis.
    std::int64_t checkpoint_stride = 0;
    const Matrix* ground_truth = nullptr;
    // Keep per-sample codes from the final epoch (bounded by the stream
    // length; off by default so driver memory stays O(pd)).
    bool log_codes = false;
    // Keep updating the basis after the first epoch (the default).  When
    // false, later epochs only recompute codes against the frozen basis.
    bool update_basis_after_first_epoch = true;
};

struct CheckpointRow {
    std::int64_t t = 0;
    double ev = -1.0;  // negative when no ground truth was supplied
    double g = 0.0;    // surrogate value at the current basis
};

struct RunReport {
    ModelState state;
    std::vector<CheckpointRow> checkpoints;
    std::vector<SampleCode> codes;  // only when log_codes
    std::vector<int> assignments;   // fully-online mode, one per sample
    KMeansState kmeans;             // fully-online mode
    std::int64_t samples_processed = 0;
    int nonconverged_ve = 0;
    double solve_seconds = 0.0;
    double basis_seconds = 0.0;
    double cluster_seconds = 0.0;
    // Peak element count of live solver + clustering state (outputs and
    // opt-in logs excluded).
    std::size_t peak_state_elements = 0;
};

// Drives the online solver over the stream for options.epochs passes.
// Accumulators and the sample counter persist across epochs.  Samples whose
// dimension disagrees with the state abort with the offending index.
RunReport run_stream(SampleSource& data, const SolverParams& params,
                     const StreamOptions& options, ModelState state);

// Nearest centroid (lowest index wins ties), then a streaming mean update of
// that centroid.  Returns the assigned index.
int kmeans_step(KMeansState& km, const Vector& v);

// Interleaves the solver with streaming k-means on the v codes.  With more
// than one epoch, only final-epoch codes feed the k-means model and the
// reported assignments.  When init_C is absent the first k distinct final-
// epoch codes seed the centroids (with counts starting at 1).
RunReport run_fully_online(SampleSource& data, const SolverParams& params,
                           int k, const StreamOptions& options,
                           ModelState state,
                           const std::optional<Matrix>& init_C = std::nullopt);

}  // namespace olrsc
