#include "olrsc/cli.hpp"

#include "olrsc/config.hpp"
#include "olrsc/dataset_io.hpp"
#include "olrsc/matrix_io.hpp"
#include "olrsc/metrics.hpp"
#include "olrsc/pipeline.hpp"
#include "olrsc/solver.hpp"
#include "olrsc/synth.hpp"

#include "CLI11.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace olrsc {

namespace {

namespace fs = std::filesystem;

// Seed derivation for one run: stream +0 draws the clean data, +1 the
// corruption pattern, +2 the basis initialization.  Keeping the streams
// apart avoids the initial basis replaying the same normal draws as the
// first subspace.
constexpr std::uint64_t kCorruptionOffset = 1;
constexpr std::uint64_t kBasisOffset = 2;

// Options registered without a bound variable; after parsing, every one the
// user supplied is funneled through apply_config_entry so flags and config
// files share a single parser.
struct KeyedOptions {
    std::vector<std::pair<std::string, CLI::Option*>> values;
    std::vector<std::pair<std::string, CLI::Option*>> switches;

    void value(std::string key, CLI::Option* opt) { values.emplace_back(std::move(key), opt); }
    void flag(std::string key, CLI::Option* opt) { switches.emplace_back(std::move(key), opt); }

    void apply(ExperimentConfig& cfg) const {
        for (const auto& [key, opt] : values)
            if (opt->count() > 0) apply_config_entry(cfg, key, opt->results().back());
        for (const auto& [key, opt] : switches)
            if (opt->count() > 0) apply_config_entry(cfg, key, "true");
    }
};

struct ExperimentArgs {
    std::string config_path;
    KeyedOptions keyed;
    bool freeze_after_first_epoch = false;

    ExperimentConfig materialize() const {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        keyed.apply(cfg);
        return cfg;
    }
};

void add_solver_options(CLI::App& cmd, KeyedOptions& keyed) {
    keyed.value("lambda1", cmd.add_option("--lambda1", "reconstruction weight (default 1)"));
    keyed.value("lambda2", cmd.add_option("--lambda2", "sparsity weight (default 1/sqrt(p))"));
    keyed.value("lambda3",
                cmd.add_option("--lambda3", "'auto' for the sqrt(t/p) schedule, or a fixed value"));
    keyed.value("d", cmd.add_option("--d", "basis rank budget (cluster default: 5k)"));
    keyed.value("ve_tol", cmd.add_option("--ve-tol", "coefficient solve tolerance"));
    keyed.value("ve_max_iters", cmd.add_option("--ve-max-iters", "coefficient solve iteration cap"));
    keyed.value("bcd_passes", cmd.add_option("--bcd-passes", "basis coordinate-descent sweeps"));
    keyed.flag("closed_form_basis",
               cmd.add_flag("--closed-form-basis", "solve the basis update exactly each step"));
}

void add_data_options(CLI::App& cmd, KeyedOptions& keyed, bool with_synth) {
    if (with_synth) {
        keyed.value("p", cmd.add_option("--p", "ambient dimension for generated data"));
        keyed.value("dims", cmd.add_option("--dims", "comma-separated subspace dimensions"));
        keyed.value("counts", cmd.add_option("--counts", "comma-separated samples per subspace"));
        keyed.value("rho", cmd.add_option("--rho", "corrupted entry fraction in [0,1]"));
    }
    keyed.value("data", cmd.add_option("--data", "dataset file (matrix container or sparse rows)"));
    keyed.value("labels", cmd.add_option("--labels", "ground-truth labels for accuracy"));
    keyed.value("dictionary", cmd.add_option("--dictionary", "separate dictionary stream Y"));
    keyed.value("basis", cmd.add_option("--basis", "ground-truth basis for expressed variance"));
    keyed.flag("unit_scale", cmd.add_flag("--unit-scale", "rescale columns to unit max-norm"));
}

void add_run_options(CLI::App& cmd, KeyedOptions& keyed, bool with_k) {
    keyed.value("seed", cmd.add_option("--seed", "run seed (required)"));
    keyed.value("epochs", cmd.add_option("--epochs", "passes over the stream"));
    if (with_k) keyed.value("k", cmd.add_option("--k", "number of clusters"));
    keyed.value("checkpoint_stride",
                cmd.add_option("--checkpoint-stride", "samples between metric rows (0: final only)"));
    keyed.value("out_dir", cmd.add_option("--out", "output directory (default $OLRSC_OUTPUT_DIR or .)"));
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
    if (!cfg.seed)
        throw std::runtime_error("a seed is required; pass --seed or set it in the config");
    return *cfg.seed;
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    fs::path dir = cfg.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("OLRSC_OUTPUT_DIR");
        dir = env && *env ? env : ".";
    }
    fs::create_directories(dir);
    return dir;
}

bool is_matrix_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char head[5] = {};
    in.read(head, sizeof(head));
    return in.gcount() == 5 && std::string_view(head, 5) == "OLRSC";
}

struct RunInputs {
    Matrix Z;
    std::optional<Matrix> Y;
    std::vector<int> truth;       // empty when unknown
    std::optional<Matrix> basis;  // ground truth for EV
};

RunInputs load_inputs(const ExperimentConfig& cfg) {
    RunInputs in;
    if (!cfg.data_path.empty()) {
        if (is_matrix_container(cfg.data_path)) {
            in.Z = read_matrix(cfg.data_path);
        } else {
            SparseDataset ds = read_sparse_dataset(cfg.data_path);
            in.Z = std::move(ds.Z);
            in.truth = std::move(ds.labels);
        }
        if (!cfg.labels_path.empty()) in.truth = read_labels(cfg.labels_path);
        if (!cfg.y_path.empty()) in.Y = read_matrix(cfg.y_path);
        if (!cfg.basis_path.empty()) in.basis = read_matrix(cfg.basis_path);
    } else {
        SyntheticDataset ds =
            generate_union_of_subspaces(cfg.p, cfg.dims, cfg.counts, require_seed(cfg));
        if (cfg.rho > 0.0)
            ds = corrupt_sparse(std::move(ds), cfg.rho, require_seed(cfg) + kCorruptionOffset);
        in.basis = ds.stacked_basis();
        in.Z = std::move(ds.Z);
        in.truth = std::move(ds.labels);
    }
    if (cfg.unit_scale) {
        scale_columns_unit_max(in.Z);
        if (in.Y) scale_columns_unit_max(*in.Y);
    }
    return in;
}

struct MetricsRow {
    std::int64_t t = 0;
    double ev = -1.0;  // negative: unknown
    double g = 0.0;
    std::optional<double> acc;
};

void write_metrics_table(const fs::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.precision(12);
    out << "# t\tev\tg\tacc\n";
    for (const MetricsRow& row : rows) {
        out << row.t << '\t';
        if (row.ev >= 0.0)
            out << row.ev;
        else
            out << '-';
        out << '\t' << row.g << '\t';
        if (row.acc)
            out << *row.acc;
        else
            out << '-';
        out << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<MetricsRow> rows_from_checkpoints(const std::vector<CheckpointRow>& checkpoints) {
    std::vector<MetricsRow> rows;
    rows.reserve(checkpoints.size());
    for (const CheckpointRow& c : checkpoints) rows.push_back({c.t, c.ev, c.g, std::nullopt});
    return rows;
}

void warn_if_ev_exceeds_one(double ev) {
    if (ev > 1.0)
        std::cerr << "warning: expressed variance " << ev
                  << " exceeds 1; the basis columns are not orthogonal, so the"
                     " trace ratio is not a fraction\n";
}

int run_synth(const ExperimentArgs& args, const std::string& format_name) {
    ExperimentConfig cfg = args.materialize();
    const std::uint64_t seed = require_seed(cfg);
    const MatrixFormat format =
        format_name == "binary" ? MatrixFormat::Binary : MatrixFormat::Text;

    SyntheticDataset ds = generate_union_of_subspaces(cfg.p, cfg.dims, cfg.counts, seed);
    if (cfg.rho > 0.0) ds = corrupt_sparse(std::move(ds), cfg.rho, seed + kCorruptionOffset);

    const fs::path dir = prepare_out_dir(cfg);
    write_matrix((dir / "Z.mat").string(), ds.Z, format);
    write_matrix((dir / "clean.mat").string(), ds.Z_clean, format);
    write_matrix((dir / "basis.mat").string(), ds.stacked_basis(), format);
    write_labels((dir / "labels.txt").string(), ds.labels);

    std::ofstream meta(dir / "meta.cfg");
    meta << "# generated dataset parameters\n";
    meta << "p = " << cfg.p << "\n";
    meta << "dims = ";
    for (std::size_t i = 0; i < cfg.dims.size(); ++i) meta << (i ? "," : "") << cfg.dims[i];
    meta << "\ncounts = ";
    for (std::size_t i = 0; i < cfg.counts.size(); ++i) meta << (i ? "," : "") << cfg.counts[i];
    meta << "\nrho = " << cfg.rho << "\n";
    meta << "seed = " << seed << "\n";
    if (!meta) throw std::runtime_error("failed to write meta.cfg");

    std::cout << "synth: wrote " << ds.p() << " x " << ds.n() << " dataset ("
              << ds.bases.size() << " subspaces, rho " << cfg.rho << ") to " << dir.string()
              << "\n";
    return 0;
}

int run_fit(const ExperimentArgs& args) {
    ExperimentConfig cfg = args.materialize();
    const std::uint64_t seed = require_seed(cfg);
    RunInputs in = load_inputs(cfg);
    const int p = static_cast<int>(in.Z.rows());
    const SolverParams params = cfg.solver_params(p);

    StreamOptions options;
    options.epochs = cfg.epochs;
    options.checkpoint_stride = cfg.checkpoint_stride;
    options.ground_truth = in.basis ? &*in.basis : nullptr;
    options.update_basis_after_first_epoch = !args.freeze_after_first_epoch;

    MatrixSource source = in.Y ? MatrixSource(std::move(in.Z), std::move(*in.Y))
                               : MatrixSource(std::move(in.Z));
    RunReport report = run_stream(source, params, options,
                                  ModelState::init(p, params.d, seed + kBasisOffset));

    const fs::path dir = prepare_out_dir(cfg);
    report.state.save((dir / "state.bin").string());
    write_metrics_table(dir / "metrics.tsv", rows_from_checkpoints(report.checkpoints));

    std::cout << "fit: " << report.samples_processed << " samples over " << cfg.epochs
              << " epoch(s); solve " << report.solve_seconds << " s, basis "
              << report.basis_seconds << " s\n";
    if (report.nonconverged_ve > 0)
        std::cout << "fit: " << report.nonconverged_ve
                  << " coefficient solves hit the iteration cap\n";
    if (!report.checkpoints.empty() && report.checkpoints.back().ev >= 0.0) {
        const double ev = report.checkpoints.back().ev;
        std::cout << "fit: final EV " << ev << "\n";
        warn_if_ev_exceeds_one(ev);
    }
    std::cout << "fit: state -> " << (dir / "state.bin").string() << ", metrics -> "
              << (dir / "metrics.tsv").string() << "\n";
    return 0;
}

int run_cluster(const ExperimentArgs& args) {
    ExperimentConfig cfg = args.materialize();
    const std::uint64_t seed = require_seed(cfg);
    if (cfg.k < 1) throw std::runtime_error("k must be at least 1");
    RunInputs in = load_inputs(cfg);
    const int p = static_cast<int>(in.Z.rows());
    const SolverParams params = cfg.solver_params(p);

    StreamOptions options;
    options.epochs = cfg.epochs;
    options.checkpoint_stride = cfg.checkpoint_stride;
    options.ground_truth = in.basis ? &*in.basis : nullptr;
    options.update_basis_after_first_epoch = !args.freeze_after_first_epoch;

    std::vector<int> truth = std::move(in.truth);
    MatrixSource source = in.Y ? MatrixSource(std::move(in.Z), std::move(*in.Y))
                               : MatrixSource(std::move(in.Z));
    RunReport report = run_fully_online(source, params, cfg.k, options,
                                        ModelState::init(p, params.d, seed + kBasisOffset));

    std::optional<double> accuracy;
    if (!truth.empty() && truth.size() == report.assignments.size())
        accuracy = clustering_accuracy(report.assignments, truth);

    const fs::path dir = prepare_out_dir(cfg);
    report.state.save((dir / "state.bin").string());
    write_labels((dir / "assignments.txt").string(), report.assignments);
    std::vector<MetricsRow> rows = rows_from_checkpoints(report.checkpoints);
    if (!rows.empty()) rows.back().acc = accuracy;
    write_metrics_table(dir / "metrics.tsv", rows);

    std::cout << "cluster: " << report.samples_processed << " samples over " << cfg.epochs
              << " epoch(s), k " << cfg.k << ", d " << params.d << "; solve "
              << report.solve_seconds << " s, basis " << report.basis_seconds
              << " s, k-means " << report.cluster_seconds << " s\n";
    if (accuracy) std::cout << "cluster: accuracy " << *accuracy << "\n";
    if (!report.checkpoints.empty() && report.checkpoints.back().ev >= 0.0) {
        const double ev = report.checkpoints.back().ev;
        std::cout << "cluster: final EV " << ev << "\n";
        warn_if_ev_exceeds_one(ev);
    }
    std::cout << "cluster: assignments -> " << (dir / "assignments.txt").string() << "\n";
    return 0;
}

struct EvalArgs {
    std::string state_path;
    std::string basis_path;
    std::string pred_path;
    std::string truth_path;
    std::string data_path;
    std::string y_path;
    double lambda1 = 1.0;
    double lambda2 = 0.0;  // 0: default 1/sqrt(p)
    std::string lambda3 = "auto";
};

int run_eval(const EvalArgs& args) {
    bool produced = false;
    std::optional<ModelState> state;
    if (!args.state_path.empty()) state = ModelState::load(args.state_path);

    std::cout.precision(12);
    if (state && !args.basis_path.empty()) {
        const double ev = expressed_variance(state->D, read_matrix(args.basis_path));
        std::cout << "ev " << ev << "\n";
        warn_if_ev_exceeds_one(ev);
        produced = true;
    }
    if (!args.pred_path.empty() && !args.truth_path.empty()) {
        const std::vector<int> pred = read_labels(args.pred_path);
        const std::vector<int> truth = read_labels(args.truth_path);
        std::cout << "accuracy " << clustering_accuracy(pred, truth) << "\n";
        produced = true;
    }
    if (state && !args.data_path.empty()) {
        const Matrix Z = read_matrix(args.data_path);
        const Matrix Y = args.y_path.empty() ? Z : read_matrix(args.y_path);
        SolverParams params;
        params.lambda1 = args.lambda1;
        params.lambda2 = args.lambda2 > 0.0
                             ? args.lambda2
                             : 1.0 / std::sqrt(static_cast<double>(Z.rows()));
        params.d = state->d;
        double lambda3 = 0.0;
        if (args.lambda3 == "auto")
            lambda3 = std::sqrt(static_cast<double>(Z.cols()) / static_cast<double>(Z.rows()));
        else
            lambda3 = std::stod(args.lambda3);
        std::cout << "empirical_loss " << empirical_loss(Z, Y, state->D, params, lambda3)
                  << "\n";
        produced = true;
    }
    if (!produced)
        throw std::runtime_error(
            "nothing to evaluate; pass --state with --basis or --data, or --pred with --truth");
    return 0;
}

}  // namespace

bool selftest() {
    bool all_ok = true;
    const auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        all_ok = all_ok && ok;
    };

    {
        Vector x(3);
        x << 1.5, -0.2, 0.0;
        const Vector s = soft_threshold(x, 0.5);
        check("soft-threshold shrinks toward zero",
              s(0) == 1.0 && s(1) == 0.0 && s(2) == 0.0);
    }
    {
        std::mt19937_64 gen(11);
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix D(12, 3);
        Vector z(12);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 12; ++i) D(i, j) = normal(gen);
        for (int i = 0; i < 12; ++i) z(i) = normal(gen);
        SolverParams params;
        params.lambda2 = 0.3;
        params.d = 3;
        const VeResult ve = solve_ve(z, D, params);
        const double budget = params.lambda2 * z.lpNorm<1>();
        check("coefficient solve respects the trivial-solution bound",
              ve.converged && 0.5 * ve.v.squaredNorm() <= budget &&
                  ve.e.lpNorm<1>() <= z.lpNorm<1>() && ve.obj <= budget + 1e-12);
    }
    {
        std::mt19937_64 gen(12);
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix G(4, 4), B(9, 4), M(9, 4), D0(9, 4);
        for (auto* m : {&G})
            for (int j = 0; j < 4; ++j)
                for (int i = 0; i < 4; ++i) (*m)(i, j) = normal(gen);
        for (auto* m : {&B, &M, &D0})
            for (int j = 0; j < 4; ++j)
                for (int i = 0; i < 9; ++i) (*m)(i, j) = normal(gen);
        const Matrix A = G * G.transpose();
        const Matrix closed = update_basis_closed(A, B, M, 1.0, 0.7);
        const Matrix bcd = update_basis_bcd(D0, A, B, M, 1.0, 0.7, 400);
        check("coordinate basis update converges to the exact minimizer",
              (closed - bcd).norm() < 1e-8);
    }
    {
        std::mt19937_64 gen(13);
        std::normal_distribution<double> normal(0.0, 1.0);
        Matrix L(10, 3);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 10; ++i) L(i, j) = normal(gen);
        const Matrix Q = Matrix(Eigen::HouseholderQR<Matrix>(L).householderQ()).leftCols(3);
        check("expressed variance of a basis against itself is 1",
              std::abs(expressed_variance(Q, Q) - 1.0) < 1e-12);
    }
    {
        const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
        const std::vector<int> pred = {2, 2, 0, 0, 1, 1};
        check("clustering accuracy is relabeling-invariant",
              clustering_accuracy(pred, truth) == 1.0);
    }
    {
        Matrix C = Matrix::Zero(2, 2);
        C(0, 1) = 4.0;
        KMeansState km = KMeansState::init(C);
        Vector v(2);
        v << 1.0, 0.0;
        const int o = kmeans_step(km, v);
        check("first k-means assignment copies the sample",
              o == 0 && km.C.col(0) == v && km.r[0] == 1);
    }
    return all_ok;
}

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"online low-rank subspace clustering"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    ExperimentArgs synth_args;
    std::string synth_format = "text";
    CLI::App* synth = app.add_subcommand("synth", "generate a union-of-subspaces dataset");
    synth->add_option("--config", synth_args.config_path, "config file with key = value lines");
    add_data_options(*synth, synth_args.keyed, true);
    add_run_options(*synth, synth_args.keyed, false);
    synth->add_option("--format", synth_format, "matrix file format: text or binary")
        ->check(CLI::IsMember({"text", "binary"}));

    ExperimentArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "run the online solver over a stream");
    fit->add_option("--config", fit_args.config_path, "config file with key = value lines");
    add_solver_options(*fit, fit_args.keyed);
    add_data_options(*fit, fit_args.keyed, true);
    add_run_options(*fit, fit_args.keyed, false);
    fit->add_flag("--freeze-after-first-epoch", fit_args.freeze_after_first_epoch,
                  "later epochs only re-extract coefficients");

    ExperimentArgs cluster_args;
    CLI::App* cluster = app.add_subcommand("cluster", "online solve plus streaming k-means");
    cluster->add_option("--config", cluster_args.config_path, "config file with key = value lines");
    add_solver_options(*cluster, cluster_args.keyed);
    add_data_options(*cluster, cluster_args.keyed, true);
    add_run_options(*cluster, cluster_args.keyed, true);
    cluster->add_flag("--freeze-after-first-epoch", cluster_args.freeze_after_first_epoch,
                      "later epochs only re-extract coefficients");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "metrics over saved artifacts");
    eval->add_option("--state", eval_args.state_path, "model state snapshot");
    eval->add_option("--basis", eval_args.basis_path, "ground-truth basis (EV)");
    eval->add_option("--pred", eval_args.pred_path, "predicted labels (accuracy)");
    eval->add_option("--truth", eval_args.truth_path, "true labels (accuracy)");
    eval->add_option("--data", eval_args.data_path, "data matrix (empirical loss)");
    eval->add_option("--dictionary", eval_args.y_path, "dictionary matrix (defaults to data)");
    eval->add_option("--lambda1", eval_args.lambda1, "reconstruction weight");
    eval->add_option("--lambda2", eval_args.lambda2, "sparsity weight (0: 1/sqrt(p))");
    eval->add_option("--lambda3", eval_args.lambda3, "'auto' for sqrt(n/p), or a fixed value");

    CLI::App* self = app.add_subcommand("selftest", "run the built-in invariant sweep");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& err) {
        return app.exit(err);
    }

    try {
        if (*synth) return run_synth(synth_args, synth_format);
        if (*fit) return run_fit(fit_args);
        if (*cluster) return run_cluster(cluster_args);
        if (*eval) return run_eval(eval_args);
        if (*self) return selftest() ? 0 : 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace olrsc
