#pragma once

#include "robpen/model.hpp"
#include "robpen/penalties.hpp"

namespace robpen {

struct QuadraticSolve {
    VectorXd beta;
    int iterations = 0;
    bool converged = false;
};

// Minimizes beta' G beta - 2 c' beta + 2 lambda sum_j J(beta_j) for symmetric
// positive definite G. This is the common inner problem of the population
// functionals (G = E[w x x'], c = E[w x y]) and of the sample estimators
// (G = X'WX / n, c = X'Wy / n).
//
// none and l2 are solved directly. l1, scad and tanh_k use cyclic coordinate
// descent from `start`, where coordinate j minimizes
//     G_jj b^2 - 2 S_j b + 2 lambda J(b),  S_j = c_j - sum_{k != j} G_jk beta_k,
// and iteration stops once the largest coordinate change in a sweep is below
// tol. The scad update needs G_jj > 1 / (a - 1) and throws NumericalError
// otherwise.
QuadraticSolve solve_penalized_quadratic(const MatrixXd& G, const VectorXd& c, const PenaltySpec& penalty,
                                         const VectorXd& start, double tol, int max_iter);

// One coordinate update for the problem above.
double coordinate_update(double g, double score, const PenaltySpec& penalty, double current);

} // namespace robpen
