#pragma once

#include "robpen/losses.hpp"
#include "robpen/model.hpp"
#include "robpen/penalties.hpp"

#include <optional>

namespace robpen {

enum class Method { closed_form, coord_descent, irls, oracle };

const char* to_string(Method m);

// Population value of a functional at the model, with its bias
// beta(H0) - beta0. std_error is the Monte-Carlo standard error of beta where
// one is available, zero for closed forms.
struct FunctionalResult {
    VectorXd beta;
    VectorXd bias;
    Method method = Method::closed_form;
    int iterations = 0;
    bool converged = true;
    MCConfig mc;
    VectorXd std_error;
};

struct SparseLTSParams {
    double alpha = 0.75;
    double lambda = 0.0;

    void validate() const;
};

struct SolverOptions {
    double tol = 1e-6;
    int max_iter = 1000; // coordinate-descent sweeps
    int max_outer = 100; // IRLS reweighting steps
};

VectorXd bias(const FunctionalResult& fr, const RegressionModel& model);

// Closed forms for simple regression (p = 1). They use the analytic moments
// E[x^2] = Var(x) and beta_LS = beta0 of the model.
FunctionalResult lasso_simple(const RegressionModel& model, double lambda);
FunctionalResult scad_simple(const RegressionModel& model, double lambda, double a = kScadA);
FunctionalResult sparse_lts_simple(const RegressionModel& model, const SparseLTSParams& params);
// Ridge with independent predictors: beta_j = beta0_j Var(x_j) / (Var(x_j) + 2 lambda).
FunctionalResult ridge_closed_form(const RegressionModel& model, double lambda);

// Quadratic-loss functional by coordinate descent on the Monte-Carlo moments
// of `draws`. The default start is beta0.
FunctionalResult coord_descent(const RegressionModel& model, const LossSpec& loss, const PenaltySpec& penalty,
                               const DrawSet& draws, const std::optional<VectorXd>& start = std::nullopt,
                               const SolverOptions& opts = {});

// Non-quadratic loss by iteratively reweighted penalized least squares on the
// Monte-Carlo draws. Weights are psi(r)/(2r) (see irls_weight), whose fixed
// points are stationary points of the penalized objective. The default start
// is beta0.
FunctionalResult irls(const RegressionModel& model, const LossSpec& loss, const PenaltySpec& penalty,
                      const DrawSet& draws, const std::optional<VectorXd>& start = std::nullopt,
                      const SolverOptions& opts = {});

// Quadratic-loss functionals depend on H only through G = E_H[xx'] and
// c = E_H[xy]. Under the model these are known exactly.
struct QuadraticMoments {
    MatrixXd G;
    VectorXd c;
};

QuadraticMoments analytic_moments(const RegressionModel& model);
// Moments of (1 - eps) H0 + eps delta_pt.
QuadraticMoments mixture_moments(const RegressionModel& model, const ContaminationPoint& pt, double eps);
// Minimizer of E_H[(y - x'b)^2] + 2 lambda sum J(b_j) from the moments of H.
FunctionalResult quadratic_functional(const RegressionModel& model, const QuadraticMoments& m,
                                      const PenaltySpec& penalty, const std::optional<VectorXd>& start = std::nullopt,
                                      const SolverOptions& opts = {});

// Population objective: E[rho(y - x'b)] + 2 lambda sum J(b_j), or for sparse
// LTS E[(y - x'b)^2 1{|y - x'b| <= q_b}] + alpha lambda |b|_1 with q_b the
// alpha-quantile of |y - x'b|.
struct PopulationObjective {
    LossSpec loss = LossSpec::quadratic();
    PenaltySpec penalty = PenaltySpec::none();
    std::optional<SparseLTSParams> sparse_lts;

    static PopulationObjective penalized_m(const LossSpec& loss, const PenaltySpec& penalty)
    {
        return {loss, penalty, std::nullopt};
    }
    static PopulationObjective sparse_lts_objective(const SparseLTSParams& params)
    {
        return {LossSpec::quadratic(), PenaltySpec::l1(params.lambda), params};
    }
};

double population_objective(const PopulationObjective& obj, const DrawSet& draws, const VectorXd& beta);

struct GridSpec {
    VectorXd lo;
    VectorXd hi;
    int points = 41;          // per coordinate and refinement level
    double resolution = 1e-4; // final grid step

    // [-half_width, half_width]^p; an odd point count keeps 0 on every level.
    static GridSpec symmetric(Index p, double half_width, int points = 41, double resolution = 1e-4);
};

// Grid-refinement minimization of the Monte-Carlo objective (p <= 2). All
// grid evaluations reuse the same draws. std_error comes from repeating the
// search on `batches` disjoint slices of the draws.
FunctionalResult oracle_minimize(const RegressionModel& model, const PopulationObjective& obj, const DrawSet& draws,
                                 const GridSpec& grid, int batches = 10);

} // namespace robpen
