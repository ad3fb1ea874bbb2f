#pragma once

#include "robpen/verification.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace robpen {

enum class ExperimentKind { bias_curve, if_surface, sc_surface, asv_curve, mse_curve, mse_convergence, verify };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::bias_curve;
    std::uint64_t seed = 1;
    std::size_t n_draws = 100000;
    std::string output; // may be overridden on the command line

    VectorXd beta0 = VectorXd::Constant(1, 1.5);
    double sigma = 1.0;

    std::vector<FunctionalSpec> functionals;

    std::vector<double> lambda_grid;
    std::vector<double> beta0_grid;
    double contamination_lo = -10.0;
    double contamination_hi = 10.0;
    int contamination_points = 41;
    std::vector<Index> n_grid;
    std::vector<double> k_grid;

    int replicates = 500;
    ScalePolicy scale_policy = ScalePolicy::hold_base;
    std::vector<int> criteria; // verify; empty = all

    Index p() const { return beta0.size(); }
    RegressionModel model() const { return RegressionModel::standard(beta0, sigma); }
    void validate() const;
};

// INI-style text: [section] headers, key = value lines, ';' or '#' comments.
// Unknown sections or keys raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunReport {
    std::vector<std::string> files; // written, relative to the output directory
    std::vector<CheckResult> checks; // verify only
    bool all_passed = true;
    double seconds = 0.0;
};

// Writes every CSV and manifest.txt into a fresh temporary directory next to
// out_dir and renames it into place at the end. out_dir must not exist or be
// empty. On any error the temporary directory is removed and the exception
// propagates.
RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         const std::string& config_path = {});

// Comma separated values with a header row, numbers printed with %.17g.
std::string csv_number(double v);

} // namespace robpen
