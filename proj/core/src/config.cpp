#include "olrsc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace olrsc {

SolverParams ExperimentConfig::solver_params(int ambient_p) const {
    SolverParams params;
    params.lambda1 = lambda1;
    params.lambda2 = lambda2 ? *lambda2 : 1.0 / std::sqrt(static_cast<double>(ambient_p));
    params.lambda3_mode = lambda3_mode;
    params.lambda3_value = lambda3_value;
    params.d = d ? *d : 5 * k;
    params.ve_tol = ve_tol;
    params.ve_max_iters = ve_max_iters;
    params.bcd_passes = bcd_passes;
    params.basis_update = closed_form_basis ? BasisUpdate::ClosedForm : BasisUpdate::ColumnBcd;
    params.validate(ambient_p);
    return params;
}

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    auto end = s.find_last_not_of(" \t\r");
    return begin == std::string::npos ? std::string() : s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value) {
    std::vector<int> out;
    std::istringstream in(value);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (part.empty()) throw std::invalid_argument("empty list entry");
        out.push_back(std::stoi(part));
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

bool parse_bool(const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw std::invalid_argument("expected a boolean, got '" + value + "'");
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    try {
        if (key == "mode") {
            if (value == "synth-recovery")
                cfg.mode = ExperimentMode::SynthRecovery;
            else if (value == "synth-cluster")
                cfg.mode = ExperimentMode::SynthCluster;
            else if (value == "file-cluster")
                cfg.mode = ExperimentMode::FileCluster;
            else
                throw std::invalid_argument("unknown mode '" + value + "'");
        } else if (key == "lambda1") {
            cfg.lambda1 = std::stod(value);
        } else if (key == "lambda2") {
            cfg.lambda2 = std::stod(value);
        } else if (key == "lambda3") {
            if (value == "auto") {
                cfg.lambda3_mode = Lambda3Mode::SqrtTOverP;
            } else {
                cfg.lambda3_mode = Lambda3Mode::Fixed;
                cfg.lambda3_value = std::stod(value);
            }
        } else if (key == "d") {
            cfg.d = std::stoi(value);
        } else if (key == "ve_tol") {
            cfg.ve_tol = std::stod(value);
        } else if (key == "ve_max_iters") {
            cfg.ve_max_iters = std::stoi(value);
        } else if (key == "bcd_passes") {
            cfg.bcd_passes = std::stoi(value);
        } else if (key == "closed_form_basis") {
            cfg.closed_form_basis = parse_bool(value);
        } else if (key == "p") {
            cfg.p = std::stoi(value);
        } else if (key == "dims") {
            cfg.dims = parse_int_list(value);
        } else if (key == "counts") {
            cfg.counts = parse_int_list(value);
        } else if (key == "rho") {
            cfg.rho = std::stod(value);
        } else if (key == "epochs") {
            cfg.epochs = std::stoi(value);
        } else if (key == "k") {
            cfg.k = std::stoi(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "checkpoint_stride") {
            cfg.checkpoint_stride = std::stoll(value);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "data") {
            cfg.data_path = value;
        } else if (key == "dictionary") {
            cfg.y_path = value;
        } else if (key == "labels") {
            cfg.labels_path = value;
        } else if (key == "basis") {
            cfg.basis_path = value;
        } else if (key == "unit_scale") {
            cfg.unit_scale = parse_bool(value);
        } else {
            throw std::invalid_argument("unknown config key '" + key + "'");
        }
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value '" + value + "' for key '" + key + "'");
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'key = value'");
        try {
            apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::exception& err) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                                     err.what());
        }
    }
    return cfg;
}

}  // namespace olrsc
