#include "robpen/coordinate.hpp"

#include "robpen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace robpen {

namespace {

// Upper bound of |d/dz z tanh(Kz)| over z (the maximum is about 1.1997).
constexpr double kTanhSlopeBound = 1.25;

double scad_update(double g, double s, const PenaltySpec& pen)
{
    const double lam = pen.lambda;
    const double a = pen.a;
    if (!(g > 1.0 / (a - 1.0))) {
        std::ostringstream msg;
        msg << "scad coordinate update needs E[x_j^2] > 1/(a-1); got " << g;
        throw NumericalError(msg.str());
    }
    const double ls = s / g;
    const double abs_ls = std::abs(ls);
    if (abs_ls <= lam + lam / g)
        return soft_threshold(s, lam) / g;
    if (abs_ls <= a * lam)
        return ((a - 1.0) * s - a * lam * sign(s)) / ((a - 1.0) * g - 1.0);
    return ls;
}

// Minimizes g b^2 - 2 s b + 2 lambda b tanh(K b) by safeguarded Newton on the
// derivative inside a sign-change bracket, so the returned root is a local
// minimum.
double tanh_update(double g, double s, const PenaltySpec& pen, double current)
{
    const double lam = pen.lambda;
    auto deriv = [&](double b) { return g * b - s + lam * j_prime(pen, b); };
    auto curv = [&](double b) { return g + lam * j_second(pen, b); };

    double lo = (s - kTanhSlopeBound * lam) / g;
    double hi = (s + kTanhSlopeBound * lam) / g;
    double b = std::clamp(current, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double d = deriv(b);
        if (d == 0.0)
            return b;
        if (d < 0)
            lo = b;
        else
            hi = b;
        if (hi - lo <= 1e-15 * std::max(1.0, std::abs(b)))
            break;
        const double h = curv(b);
        double next = (h > 0) ? b - d / h : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - b) <= 1e-16 * std::max(1.0, std::abs(b)))
            return next;
        b = next;
    }
    return b;
}

} // namespace

double coordinate_update(double g, double s, const PenaltySpec& pen, double current)
{
    if (!(g > 0.0))
        throw NumericalError("coordinate update needs a positive diagonal entry");
    switch (pen.kind) {
    case PenaltyKind::none:
        return s / g;
    case PenaltyKind::l2:
        return s / (g + 2.0 * pen.lambda);
    case PenaltyKind::l1:
        return soft_threshold(s, pen.lambda) / g;
    case PenaltyKind::scad:
        return scad_update(g, s, pen);
    case PenaltyKind::tanh_k:
        return tanh_update(g, s, pen, current);
    }
    return 0.0;
}

QuadraticSolve solve_penalized_quadratic(const MatrixXd& G, const VectorXd& c, const PenaltySpec& penalty,
                                         const VectorXd& start, double tol, int max_iter)
{
    penalty.validate();
    const Index p = c.size();
    if (G.rows() != p || G.cols() != p || start.size() != p)
        throw std::invalid_argument("inconsistent dimensions in penalized quadratic problem");
    if (!(tol > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    if (!start.allFinite())
        throw std::invalid_argument("starting value must be finite");

    QuadraticSolve out;
    if (penalty.kind == PenaltyKind::none || penalty.kind == PenaltyKind::l2) {
        MatrixXd A = G;
        if (penalty.kind == PenaltyKind::l2)
            A.diagonal().array() += 2.0 * penalty.lambda;
        Eigen::LDLT<MatrixXd> ldlt(A);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14)
            throw NumericalError("penalized quadratic problem is singular");
        out.beta = ldlt.solve(c);
        out.iterations = 1;
        out.converged = true;
        return out;
    }

    out.beta = start;
    for (int it = 1; it <= max_iter; ++it) {
        double max_change = 0.0;
        for (Index jj = 0; jj < p; ++jj) {
            const double s = c(jj) - G.row(jj).dot(out.beta) + G(jj, jj) * out.beta(jj);
            const double next = coordinate_update(G(jj, jj), s, penalty, out.beta(jj));
            max_change = std::max(max_change, std::abs(next - out.beta(jj)));
            out.beta(jj) = next;
        }
        out.iterations = it;
        if (max_change < tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace robpen
