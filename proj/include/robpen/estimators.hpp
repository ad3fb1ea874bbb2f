#pragma once

#include "robpen/functional_spec.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace robpen {

struct FitOptions {
    double tol = 1e-10;     // max coefficient change
    int max_iter = 10000;   // coordinate-descent sweeps per inner solve
    int max_outer = 500;    // IRLS steps
    int lts_starts = 50;    // elemental starts
    int lts_keep = 10;      // starts carried to convergence
    int lts_initial_csteps = 2;
    int lts_max_csteps = 200;
    std::uint64_t seed = 0; // elemental subsets
    // Huber / biweight: use this scale instead of the MAD of the initial fit.
    std::optional<double> fixed_scale;
};

struct FitResult {
    VectorXd beta_hat;
    double scale_hat = 1.0;
    std::optional<std::vector<Index>> subset; // sparse LTS: rows of the best subset, ascending
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective_trace; // sparse LTS: objective after each C-step of the best start
};

// 1.4826 * median |r_i - median(r)|; medians of even-length vectors average
// the two middle values.
double mad_scale(const VectorXd& residuals);

// (1/h) sum of the h = ceil(alpha n) smallest squared residuals + lambda |beta|_1.
double sparse_lts_objective(const Dataset& data, const VectorXd& beta, const SparseLTSParams& params);
// (1/n) sum rho((y_i - x_i'beta) / scale) + 2 lambda sum J(beta_j); the scale is taken from loss.
double penalized_m_objective(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty,
                             const VectorXd& beta);

// Multi-start C-step search. Rows are processed in a canonical order sorted by
// content, so the result does not depend on the row order of `data`.
FitResult fit_sparse_lts(const Dataset& data, const SparseLTSParams& params, const FitOptions& opts = {});

// Quadratic loss: least-squares start, unit scale, direct or coordinate-descent
// solve. Huber and biweight: sparse LTS start with the same lambda, scale =
// MAD of its residuals, then IRLS with coordinate descent.
FitResult fit_penalized_m(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty,
                          const FitOptions& opts = {});

// Sample estimator matching a functional spec.
FitResult fit(const Dataset& data, const FunctionalSpec& spec, const FitOptions& opts = {});

} // namespace robpen
