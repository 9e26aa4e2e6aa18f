#pragma once

#include "olrsc/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace olrsc {

enum class ExperimentMode { SynthRecovery, SynthCluster, FileCluster };

// Everything needed to reproduce a run.  The seed is mandatory: any run is
// fully determined by its config.
struct ExperimentConfig {
    ExperimentMode mode = ExperimentMode::SynthRecovery;

    // Solver
    double lambda1 = 1.0;
    std::optional<double> lambda2;  // default 1/sqrt(p) once p is known
    Lambda3Mode lambda3_mode = Lambda3Mode::SqrtTOverP;
    double lambda3_value = 1.0;
    std::optional<int> d;  // default 5k in cluster modes
    double ve_tol = 1e-8;
    int ve_max_iters = 500;
    int bcd_passes = 1;
    bool closed_form_basis = false;

    // Synthesis
    int p = 100;
    std::vector<int> dims = {5, 5, 5, 5};
    std::vector<int> counts = {1000, 1000, 1000, 1000};
    double rho = 0.0;

    // Run
    int epochs = 1;
    int k = 4;
    std::optional<std::uint64_t> seed;
    std::int64_t checkpoint_stride = 0;
    std::string out_dir;
    std::string data_path;    // file modes
    std::string y_path;       // optional separate dictionary
    std::string labels_path;  // ground-truth labels for accuracy
    std::string basis_path;   // ground-truth basis for EV
    bool unit_scale = false;

    SolverParams solver_params(int ambient_p) const;
};

// `key = value` lines; '#' starts a comment.  Unknown keys are errors.
ExperimentConfig load_config(const std::string& path);

// Parses one key/value pair into cfg (shared by the file loader and tests).
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

}  // namespace olrsc
