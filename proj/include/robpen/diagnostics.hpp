#pragma once

#include "robpen/estimators.hpp"
#include "robpen/influence.hpp"

#include <cstdint>
#include <vector>

namespace robpen {

struct SensitivitySurface {
    std::vector<ContaminationPoint> grid;
    MatrixXd values;            // (n + 1)(beta_hat(with point) - beta_hat), one row per point; NaN when missing
    std::vector<char> missing;  // refit failed or did not converge
    Index n = 0;
    std::uint64_t seed = 0;
    std::string functional_id;

    std::size_t missing_count() const;
};

enum class ScalePolicy {
    hold_base, // refits reuse the preliminary scale of the base fit
    refit,     // every refit recomputes the MAD scale
};

// One base fit and one refit per grid point with (x0, y0) appended.
SensitivitySurface sensitivity_curve(const Dataset& base, const FunctionalSpec& spec,
                                     const std::vector<ContaminationPoint>& grid, const FitOptions& opts = {},
                                     std::uint64_t seed = 0, ScalePolicy policy = ScalePolicy::hold_base);

struct ASVReport {
    MatrixXd asv;       // E[IF IF'] over the draws
    MatrixXd mc_stderr; // Monte-Carlo standard error of each entry
    std::size_t n_draws = 0;
    FunctionalResult functional;
};

// The functional is computed from `draws`, its influence function prepared
// from the same draws, and E[IF IF'] averaged over them.
ASVReport asv(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws);

struct MSEReport {
    double mse = 0.0;      // trace(ASV) / n + |Bias|^2
    double asv_trace = 0.0;
    double bias_sq = 0.0;
    double std_error = 0.0; // from the ASV Monte-Carlo error
};

MSEReport mse(const RegressionModel& model, const FunctionalSpec& spec, Index n, const DrawSet& draws);
MSEReport mse(const ASVReport& report, const RegressionModel& model, Index n);

struct MSEHatReport {
    double mse_hat = 0.0; // mean of |beta_hat_r - beta0|^2 over the used replicates
    double std_error = 0.0;
    int used = 0;
    int excluded = 0;     // failed or unconverged fits
};

// R replicates of size n; replicate r uses the seed substream_seed(seed, replicate, r).
// More than 10% exclusions raise NumericalError.
MSEHatReport mse_hat(const RegressionModel& model, const FunctionalSpec& spec, Index n, int R, std::uint64_t seed,
                     const FitOptions& opts = {});
// Same with explicit per-replicate data seeds.
MSEHatReport mse_hat(const RegressionModel& model, const FunctionalSpec& spec, Index n,
                     const std::vector<std::uint64_t>& replicate_seeds, const FitOptions& opts = {});

} // namespace robpen
