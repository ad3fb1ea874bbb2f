#include "robpen/functionals.hpp"

#include "robpen/coordinate.hpp"
#include "robpen/errors.hpp"
#include "robpen/normal.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace robpen {

namespace {

void require_simple(const RegressionModel& model, const char* what)
{
    model.validate();
    if (model.p() != 1) {
        std::ostringstream msg;
        msg << what << " has a closed form for simple regression only (p = 1), got p = " << model.p();
        throw std::invalid_argument(msg.str());
    }
}

FunctionalResult closed_form(const RegressionModel& model, double beta)
{
    FunctionalResult fr;
    fr.beta = VectorXd::Constant(1, beta);
    fr.method = Method::closed_form;
    fr.bias = bias(fr, model);
    fr.std_error = VectorXd::Zero(1);
    return fr;
}

VectorXd default_start(const RegressionModel& model, const std::optional<VectorXd>& start)
{
    VectorXd s = start ? *start : model.beta0;
    if (s.size() != model.p() || !s.allFinite())
        throw std::invalid_argument("starting value must be finite with one entry per predictor");
    return s;
}

// Weighted alpha-quantile of |r| where draws carry mass (1 - eps) / n and the
// contamination atom carries eps: the smallest q with P(|r| <= q) >= alpha.
double abs_residual_quantile(const VectorXd& abs_r, double alpha, const std::optional<DrawSet::Atom>& atom, double atom_abs_r)
{
    const Index n = abs_r.size();
    if (!atom) {
        std::vector<double> v(abs_r.data(), abs_r.data() + n);
        auto k = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n))) - 1;
        k = std::min(k, v.size() - 1);
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
        return v[k];
    }
    std::vector<double> v(abs_r.data(), abs_r.data() + n);
    std::sort(v.begin(), v.end());
    const double w = (1.0 - atom->eps) / static_cast<double>(n);
    double cum = 0.0;
    bool atom_used = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!atom_used && atom_abs_r <= v[i]) {
            cum += atom->eps;
            atom_used = true;
            if (cum >= alpha)
                return atom_abs_r;
        }
        cum += w;
        if (cum >= alpha)
            return v[i];
    }
    return atom_used ? v.back() : std::max(v.back(), atom_abs_r);
}

// Sandwich standard error of a Monte-Carlo M-functional:
// diag(A^-1 Cov(score x) A^-1) / N over the active coordinates.
VectorXd functional_std_error(const DrawSet& draws, const LossSpec& loss, const PenaltySpec& penalty,
                              const VectorXd& beta)
{
    const Index p = beta.size();
    VectorXd se = VectorXd::Zero(p);
    if (draws.atom())
        return se;
    std::vector<Index> act;
    for (Index j = 0; j < p; ++j)
        if (!penalty.sparse() || std::abs(beta(j)) > 1e-8)
            act.push_back(j);
    if (act.empty())
        return se;
    const Index k = static_cast<Index>(act.size());
    MatrixXd a = MatrixXd::Zero(k, k);
    MatrixXd s2 = MatrixXd::Zero(k, k);
    VectorXd m = VectorXd::Zero(k);
    VectorXd xa(k);
    const Index n = draws.size();
    for (Index i = 0; i < n; ++i) {
        const auto x = draws.xt().col(i);
        const double r = draws.y()(i) - x.dot(beta);
        for (Index u = 0; u < k; ++u)
            xa(u) = x(act[static_cast<std::size_t>(u)]);
        const double sc = score(loss, r);
        a.noalias() += score_slope(loss, r) * xa * xa.transpose();
        s2.noalias() += (sc * sc) * xa * xa.transpose();
        m += sc * xa;
    }
    const double dn = static_cast<double>(n);
    a /= dn;
    if (penalty.kind != PenaltyKind::none)
        for (Index u = 0; u < k; ++u)
            a(u, u) += 2.0 * penalty.lambda * j_second(penalty, beta(act[static_cast<std::size_t>(u)]));
    const MatrixXd cov = s2 / dn - (m / dn) * (m / dn).transpose();
    Eigen::FullPivLU<MatrixXd> lu(a);
    if (!lu.isInvertible())
        return se;
    const MatrixXd ainv = lu.inverse();
    const MatrixXd var = ainv * cov * ainv.transpose() / dn;
    for (Index u = 0; u < k; ++u)
        se(act[static_cast<std::size_t>(u)]) = std::sqrt(std::max(0.0, var(u, u)));
    return se;
}

struct GridOutcome {
    VectorXd beta;
    int evaluations = 0;
};

GridOutcome grid_minimize(const PopulationObjective& obj, const DrawSet& draws, const GridSpec& grid)
{
    const Index p = grid.lo.size();
    VectorXd lo = grid.lo;
    VectorXd hi = grid.hi;
    const int n = grid.points;
    GridOutcome out;

    for (int level = 0;; ++level) {
        const VectorXd step = (hi - lo) / static_cast<double>(n - 1);
        long total = 1;
        for (Index j = 0; j < p; ++j)
            total *= n;

        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_idx(static_cast<std::size_t>(p), 0);
        VectorXd b(p);
        std::vector<int> idx(static_cast<std::size_t>(p), 0);
        for (long flat = 0; flat < total; ++flat) {
            long rem = flat;
            for (Index j = 0; j < p; ++j) {
                idx[static_cast<std::size_t>(j)] = static_cast<int>(rem % n);
                rem /= n;
                // the middle point is placed exactly on the centre so that
                // symmetric grids contain zero
                const int i = idx[static_cast<std::size_t>(j)];
                b(j) = (2 * i == n - 1) ? 0.5 * (lo(j) + hi(j)) : lo(j) + step(j) * i;
            }
            const double v = population_objective(obj, draws, b);
            ++out.evaluations;
            if (v < best) {
                best = v;
                best_idx = idx;
                out.beta = b;
            }
        }

        for (Index j = 0; j < p; ++j) {
            const int i = best_idx[static_cast<std::size_t>(j)];
            const bool on_edge = (i == 0 && lo(j) <= grid.lo(j)) || (i == n - 1 && hi(j) >= grid.hi(j));
            if (on_edge) {
                std::ostringstream msg;
                msg << "oracle minimum lies on the grid boundary in coordinate " << j
                    << " (value " << out.beta(j) << "); widen the grid";
                throw NumericalError(msg.str());
            }
        }
        if (step.maxCoeff() <= grid.resolution)
            return out;
        for (Index j = 0; j < p; ++j) {
            lo(j) = std::max(grid.lo(j), out.beta(j) - step(j));
            hi(j) = std::min(grid.hi(j), out.beta(j) + step(j));
        }
    }
}

} // namespace

const char* to_string(Method m)
{
    switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::coord_descent: return "coord_descent";
    case Method::irls: return "irls";
    case Method::oracle: return "oracle";
    }
    return "?";
}

void SparseLTSParams::validate() const
{
    if (!(alpha > 0.5 && alpha <= 1.0))
        throw std::invalid_argument("sparse LTS alpha must lie in (0.5, 1]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("sparse LTS lambda must be nonnegative");
}

VectorXd bias(const FunctionalResult& fr, const RegressionModel& model)
{
    if (fr.beta.size() != model.p())
        throw std::invalid_argument("functional and model dimensions differ");
    return fr.beta - model.beta0;
}

FunctionalResult lasso_simple(const RegressionModel& model, double lambda)
{
    require_simple(model, "the lasso functional");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("lambda must be nonnegative");
    const double ex2 = model.second_moment(0);
    const double ls = model.beta0(0);
    return closed_form(model, soft_threshold(ls, lambda / ex2));
}

FunctionalResult scad_simple(const RegressionModel& model, double lambda, double a)
{
    require_simple(model, "the scad functional");
    PenaltySpec::scad(lambda, a).validate();
    const double ex2 = model.second_moment(0);
    if (!(ex2 > 1.0 / (a - 1.0))) {
        std::ostringstream msg;
        msg << "scad closed form needs E[x^2] > 1/(a-1) = " << 1.0 / (a - 1.0) << ", got " << ex2;
        throw NumericalError(msg.str());
    }
    const double ls = model.beta0(0);
    const double abs_ls = std::abs(ls);
    double beta;
    if (abs_ls <= lambda + lambda / ex2)
        beta = soft_threshold(ls, lambda / ex2);
    else if (abs_ls <= a * lambda)
        beta = ((a - 1.0) * ex2 * ls - a * lambda * sign(ls)) / ((a - 1.0) * ex2 - 1.0);
    else
        beta = ls;
    return closed_form(model, beta);
}

FunctionalResult sparse_lts_simple(const RegressionModel& model, const SparseLTSParams& params)
{
    require_simple(model, "the sparse LTS functional");
    params.validate();
    if (!model.is_normal())
        throw std::invalid_argument("sparse LTS closed form needs normal predictor and error");
    const auto tm = normal::trimmed_moments(params.alpha);
    const double threshold = params.alpha * params.lambda / (2.0 * tm.c1 * model.second_moment(0));
    return closed_form(model, soft_threshold(model.beta0(0), threshold));
}

FunctionalResult ridge_closed_form(const RegressionModel& model, double lambda)
{
    model.validate();
    if (!(lambda >= 0.0))
        throw std::invalid_argument("lambda must be nonnegative");
    FunctionalResult fr;
    fr.beta = model.beta0.cwiseProduct(model.x_var).cwiseQuotient((model.x_var.array() + 2.0 * lambda).matrix());
    fr.method = Method::closed_form;
    fr.bias = bias(fr, model);
    fr.std_error = VectorXd::Zero(model.p());
    return fr;
}

FunctionalResult coord_descent(const RegressionModel& model, const LossSpec& loss, const PenaltySpec& penalty,
                               const DrawSet& draws, const std::optional<VectorXd>& start, const SolverOptions& opts)
{
    model.validate();
    if (loss.kind != LossKind::quadratic)
        throw std::invalid_argument("coord_descent handles the quadratic loss; use irls otherwise");
    if (draws.dim() != model.p())
        throw std::invalid_argument("draws do not match the model dimension");
    const VectorXd s = default_start(model, start);

    // rho(r / scale) = r^2 / scale^2 only rescales the quadratic form
    const double w = 1.0 / (loss.scale * loss.scale);
    const GramMoments m = gram_moments(draws, s);
    const QuadraticSolve qs = solve_penalized_quadratic(w * m.xx, w * m.xy, penalty, s, opts.tol, opts.max_iter);

    FunctionalResult fr;
    fr.beta = qs.beta;
    fr.method = Method::coord_descent;
    fr.iterations = qs.iterations;
    fr.converged = qs.converged;
    fr.mc = draws.config();
    fr.bias = bias(fr, model);
    fr.std_error = functional_std_error(draws, loss, penalty, fr.beta);
    return fr;
}

FunctionalResult irls(const RegressionModel& model, const LossSpec& loss, const PenaltySpec& penalty,
                      const DrawSet& draws, const std::optional<VectorXd>& start, const SolverOptions& opts)
{
    model.validate();
    loss.validate();
    if (loss.kind == LossKind::quadratic)
        throw std::invalid_argument("irls expects a non-quadratic loss; use coord_descent");
    if (draws.dim() != model.p())
        throw std::invalid_argument("draws do not match the model dimension");

    VectorXd beta = default_start(model, start);
    const std::function<double(double)> weight = [&](double r) { return irls_weight(loss, r); };

    FunctionalResult fr;
    fr.method = Method::irls;
    fr.converged = false;
    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        const GramMoments m = gram_moments(draws, beta, &weight);
        const QuadraticSolve qs = solve_penalized_quadratic(m.xx, m.xy, penalty, beta, 0.01 * opts.tol, opts.max_iter);
        const double change = (qs.beta - beta).cwiseAbs().maxCoeff();
        beta = qs.beta;
        fr.iterations = outer;
        if (change < opts.tol) {
            fr.converged = true;
            break;
        }
    }
    fr.beta = beta;
    fr.mc = draws.config();
    fr.bias = bias(fr, model);
    fr.std_error = functional_std_error(draws, loss, penalty, fr.beta);
    return fr;
}

QuadraticMoments analytic_moments(const RegressionModel& model)
{
    model.validate();
    QuadraticMoments m;
    m.G = model.x_var.asDiagonal();
    m.c = model.x_var.cwiseProduct(model.beta0);
    return m;
}

QuadraticMoments mixture_moments(const RegressionModel& model, const ContaminationPoint& pt, double eps)
{
    if (pt.x0.size() != model.p() || !pt.x0.allFinite() || !std::isfinite(pt.y0))
        throw std::invalid_argument("contamination point must be finite with one entry per predictor");
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("contamination fraction must lie in [0, 1)");
    QuadraticMoments m = analytic_moments(model);
    m.G = (1.0 - eps) * m.G + eps * pt.x0 * pt.x0.transpose();
    m.c = (1.0 - eps) * m.c + eps * pt.y0 * pt.x0;
    return m;
}

FunctionalResult quadratic_functional(const RegressionModel& model, const QuadraticMoments& m,
                                      const PenaltySpec& penalty, const std::optional<VectorXd>& start,
                                      const SolverOptions& opts)
{
    const VectorXd s = default_start(model, start);
    const QuadraticSolve qs = solve_penalized_quadratic(m.G, m.c, penalty, s, opts.tol, opts.max_iter);
    FunctionalResult fr;
    fr.beta = qs.beta;
    fr.method = (penalty.kind == PenaltyKind::none || penalty.kind == PenaltyKind::l2) ? Method::closed_form
                                                                                       : Method::coord_descent;
    fr.iterations = qs.iterations;
    fr.converged = qs.converged;
    fr.mc = MCConfig{0, 0};
    fr.bias = bias(fr, model);
    fr.std_error = VectorXd::Zero(model.p());
    return fr;
}

double population_objective(const PopulationObjective& obj, const DrawSet& draws, const VectorXd& beta)
{
    if (beta.size() != draws.dim())
        throw std::invalid_argument("coefficient vector has the wrong dimension");

    if (obj.sparse_lts) {
        const SparseLTSParams& sp = *obj.sparse_lts;
        const VectorXd r = draws.y() - draws.xt().transpose() * beta;
        const VectorXd abs_r = r.cwiseAbs();
        const auto& atom = draws.atom();
        const double atom_r = atom ? atom->point.y0 - atom->point.x0.dot(beta) : 0.0;
        const double q = abs_residual_quantile(abs_r, sp.alpha, atom, std::abs(atom_r));
        double trimmed = 0.0;
        for (Index i = 0; i < r.size(); ++i)
            if (abs_r(i) <= q)
                trimmed += r(i) * r(i);
        trimmed /= static_cast<double>(r.size());
        if (atom) {
            trimmed *= (1.0 - atom->eps);
            if (std::abs(atom_r) <= q)
                trimmed += atom->eps * atom_r * atom_r;
        }
        return trimmed + sp.alpha * sp.lambda * beta.cwiseAbs().sum();
    }

    const LossSpec& loss = obj.loss;
    const Expectation e = expect(draws, 1, [&](const Eigen::Ref<const VectorXd>& x, double y, Eigen::Ref<VectorXd> out) {
        out(0) = rho(loss, y - x.dot(beta));
    });
    double pen = 0.0;
    for (Index k = 0; k < beta.size(); ++k)
        pen += j(obj.penalty, beta(k));
    return e.mean(0) + 2.0 * obj.penalty.lambda * pen;
}

GridSpec GridSpec::symmetric(Index p, double half_width, int points, double resolution)
{
    GridSpec g;
    g.lo = VectorXd::Constant(p, -half_width);
    g.hi = VectorXd::Constant(p, half_width);
    g.points = points;
    g.resolution = resolution;
    return g;
}

FunctionalResult oracle_minimize(const RegressionModel& model, const PopulationObjective& obj, const DrawSet& draws,
                                 const GridSpec& grid, int batches)
{
    model.validate();
    if (model.p() > 2)
        throw std::invalid_argument("oracle_minimize is limited to p <= 2");
    if (grid.lo.size() != model.p() || grid.hi.size() != model.p())
        throw std::invalid_argument("grid dimension does not match the model");
    if (grid.points < 3 || grid.points % 2 == 0)
        throw std::invalid_argument("grid needs an odd number of at least 3 points");
    if (!((grid.hi - grid.lo).minCoeff() > 0.0) || !(grid.resolution > 0.0))
        throw std::invalid_argument("grid bounds must be increasing with positive resolution");
    if (obj.sparse_lts)
        obj.sparse_lts->validate();

    const GridOutcome full = grid_minimize(obj, draws, grid);

    FunctionalResult fr;
    fr.beta = full.beta;
    fr.method = Method::oracle;
    fr.iterations = full.evaluations;
    fr.mc = draws.config();
    fr.bias = bias(fr, model);
    fr.std_error = VectorXd::Zero(model.p());

    if (batches >= 2) {
        const Index per = draws.size() / batches;
        if (per < 2)
            throw std::invalid_argument("too few draws for the requested number of batches");
        MatrixXd est(model.p(), batches);
        for (int b = 0; b < batches; ++b)
            est.col(b) = grid_minimize(obj, draws.slice(b * per, per), grid).beta;
        const VectorXd mean = est.rowwise().mean();
        const VectorXd var = (est.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(batches - 1);
        fr.std_error = (var / static_cast<double>(batches)).cwiseSqrt();
    }
    return fr;
}

} // namespace robpen
