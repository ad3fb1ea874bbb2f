#pragma once

#include "robpen/functional_spec.hpp"

#include <vector>

namespace robpen {

// Coefficients with |beta_j| <= kActiveThreshold count as zero for sparse
// penalties; their influence is exactly 0.
inline constexpr double kActiveThreshold = 1e-8;

// Influence function of one functional at H0, prepared once and evaluated at
// many contamination points.
class InfluenceFunction {
public:
    // Dispatches on the spec: lasso with p = 1 uses the simple closed form,
    // other quadratic-loss functionals the exact model moments, sparse LTS
    // the simple-regression formula, and the robust M-functionals the
    // general formula with expectations over `draws`.
    static InfluenceFunction prepare(const RegressionModel& model, const FunctionalSpec& spec,
                                     const FunctionalResult& fr, const DrawSet& draws);

    // (E[psi'(r)xx'] + 2 lambda diag J''(beta))^-1 (psi(r0) x0 - E[psi(r) x]) restricted
    // to the active coordinates when the penalty is sparse. Quadratic losses use
    // the exact moments; other losses expectations over `draws`.
    static InfluenceFunction penalized_m(const RegressionModel& model, const LossSpec& loss,
                                         const PenaltySpec& penalty, const VectorXd& beta, const DrawSet& draws);
    // Same for a quadratic loss with given moments G = E[xx'], c = E[xy].
    static InfluenceFunction penalized_quadratic(const QuadraticMoments& m, const PenaltySpec& penalty,
                                                 const VectorXd& beta);

    Index dim() const { return p_; }
    VectorXd operator()(const VectorXd& x0, double y0) const;
    VectorXd operator()(const ContaminationPoint& pt) const { return (*this)(pt.x0, pt.y0); }
    // Monte-Carlo standard error by the delta method; zero when no
    // expectation was estimated.
    VectorXd std_error(const ContaminationPoint& pt) const;
    // True when the influence function vanishes identically.
    bool identically_zero() const { return kind_ == Kind::zero; }

private:
    enum class Kind { zero, linear, lasso_simple, sparse_lts };

    Kind kind_ = Kind::zero;
    Index p_ = 0;

    // linear: value_A = a_inv (score(r0) x0_A - m), r0 = y0 - x0'beta
    std::vector<Index> active_;
    MatrixXd a_inv_;
    VectorXd m_;
    LossSpec loss_;
    VectorXd beta_;
    std::optional<DrawSet> draws_;

    // lasso_simple and sparse_lts constants
    double beta0_ = 0.0;
    double ex2_ = 1.0;
    double lambda_ = 0.0;
    double sigma_ = 1.0;
    double alpha_ = 0.75;
    double q_ = 0.0;
    double c1_ = 1.0;
};

// Operation-level entry points.
VectorXd if_penalized_m(const RegressionModel& model, const LossSpec& loss, const PenaltySpec& penalty,
                        const FunctionalResult& fr, const ContaminationPoint& pt, const DrawSet& draws,
                        VectorXd* std_error = nullptr);
// (E[xx'] + 2 lambda I)^-1 ((y0 - x0'beta_R) x0 + E[xx'] Bias(beta_R)).
VectorXd if_ridge(const RegressionModel& model, const FunctionalResult& fr, double lambda,
                  const ContaminationPoint& pt);
double if_lasso_simple(const RegressionModel& model, double lambda, const ContaminationPoint& pt);
// One coordinate of the coordinate-descent recursion: the influence of
// coordinate j given the current influence and value of the others (entry j
// of prev_if and prev_beta is ignored).
double if_lasso_cd(const QuadraticMoments& m, double lambda, const ContaminationPoint& pt, const VectorXd& prev_if,
                   const VectorXd& prev_beta, Index j);

struct FixedPointResult {
    VectorXd value;
    int sweeps = 0;
    bool converged = false;
};
// Iterates if_lasso_cd over the coordinates (Gauss-Seidel, starting from 0)
// at the lasso value beta until the largest change in a sweep is below tol.
FixedPointResult if_lasso_cd_fixed_point(const QuadraticMoments& m, double lambda, const VectorXd& beta,
                                         const ContaminationPoint& pt, double tol = 1e-12, int max_sweeps = 10000);

// Active block G_AA^-1 (x0_A (y0 - x0'beta) - E[x_A (y - x'beta)]), zero elsewhere.
VectorXd if_lasso_multi(const QuadraticMoments& m, const VectorXd& beta, const ContaminationPoint& pt);

struct TanhLimitStep {
    double K = 0.0;
    VectorXd beta;      // value of the smooth functional
    VectorXd value;     // its influence at pt
    double deviation = 0.0; // max |value - lasso influence|
};
// Smooth tanh_K surrogate of the lasso for each K, compared with
// if_lasso_multi at the lasso value.
std::vector<TanhLimitStep> if_lasso_tanh_limit(const RegressionModel& model, double lambda,
                                               const ContaminationPoint& pt, const std::vector<double>& K_sequence);

double if_sparse_lts(const RegressionModel& model, const FunctionalResult& fr, const SparseLTSParams& params,
                     const ContaminationPoint& pt);

// Influence values on a grid of contamination points.
struct IFSurface {
    std::vector<ContaminationPoint> grid;
    MatrixXd values; // one row per grid point, one column per coefficient
    std::string functional_id;
};

// points x points grid over [lo, hi]^2 of (x0, y0) for simple regression,
// x0 varying slowest.
std::vector<ContaminationPoint> contamination_grid(double lo = -10.0, double hi = 10.0, int points = 41);

IFSurface if_surface(const InfluenceFunction& f, const std::vector<ContaminationPoint>& grid,
                     const std::string& functional_id);

std::string functional_id(const RegressionModel& model, const FunctionalSpec& spec);

} // namespace robpen
