#include "robpen/estimators.hpp"

#include "robpen/coordinate.hpp"
#include "robpen/errors.hpp"
#include "robpen/parallel.hpp"
#include "robpen/rng.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace robpen {

namespace {

double median_inplace(std::vector<double>& v)
{
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1)
        return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

Index subset_size(Index n, double alpha)
{
    const auto h = static_cast<Index>(std::ceil(alpha * static_cast<double>(n) - 1e-12));
    return std::clamp<Index>(h, 1, n);
}

// Indices of the h smallest |r|, ties broken by index, returned ascending.
std::vector<Index> smallest_residuals(const VectorXd& r, Index h)
{
    std::vector<Index> idx(static_cast<std::size_t>(r.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    const auto less = [&](Index a, Index b) {
        const double ra = std::abs(r(a));
        const double rb = std::abs(r(b));
        return ra < rb || (ra == rb && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + h - 1, idx.end(), less);
    idx.resize(static_cast<std::size_t>(h));
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct Canonical {
    Dataset data;
    std::vector<Index> original; // canonical row -> row of the input
};

Canonical canonical_order(const Dataset& data)
{
    std::vector<Index> order(static_cast<std::size_t>(data.n()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        for (Index j = 0; j < data.p(); ++j)
            if (data.X(a, j) != data.X(b, j))
                return data.X(a, j) < data.X(b, j);
        return data.y(a) < data.y(b);
    });
    Canonical c;
    c.original = order;
    c.data.X.resize(data.n(), data.p());
    c.data.y.resize(data.n());
    for (Index i = 0; i < data.n(); ++i) {
        c.data.X.row(i) = data.X.row(order[static_cast<std::size_t>(i)]);
        c.data.y(i) = data.y(order[static_cast<std::size_t>(i)]);
    }
    return c;
}

// Lasso (1/m) sum_{i in rows} (y_i - x_i'b)^2 + lambda |b|_1 on a row subset.
VectorXd subset_lasso(const Dataset& data, const std::vector<Index>& rows, double lambda, const VectorXd& start,
                      const FitOptions& opts)
{
    const Index p = data.p();
    MatrixXd g = MatrixXd::Zero(p, p);
    VectorXd c = VectorXd::Zero(p);
    for (Index i : rows) {
        const auto x = data.X.row(i).transpose();
        g.noalias() += x * x.transpose();
        c.noalias() += data.y(i) * x;
    }
    const double m = static_cast<double>(rows.size());
    g /= m;
    c /= m;
    for (Index j = 0; j < p; ++j)
        if (!(g(j, j) > 0.0))
            throw NumericalError("degenerate subset: a predictor is identically zero");
    const PenaltySpec pen = lambda > 0.0 ? PenaltySpec::l1(0.5 * lambda) : PenaltySpec::none();
    return solve_penalized_quadratic(g, c, pen, start, opts.tol, opts.max_iter).beta;
}

struct LtsState {
    VectorXd beta;
    std::vector<Index> subset;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    bool converged = false;
    int steps = 0;
};

double lts_value(const Dataset& data, const VectorXd& beta, const std::vector<Index>& subset, double lambda)
{
    double s = 0.0;
    for (Index i : subset) {
        const double r = data.y(i) - data.X.row(i).dot(beta);
        s += r * r;
    }
    return s / static_cast<double>(subset.size()) + lambda * beta.cwiseAbs().sum();
}

// C-steps: fit on the subset, keep the h smallest residuals. Stops when the
// subset repeats or after max_steps.
void csteps(const Dataset& data, const SparseLTSParams& params, Index h, LtsState& st, int max_steps,
            const FitOptions& opts)
{
    for (int s = 0; s < max_steps; ++s) {
        st.beta = subset_lasso(data, st.subset, params.lambda, st.beta, opts);
        const VectorXd r = data.y - data.X * st.beta;
        std::vector<Index> next = smallest_residuals(r, h);
        st.objective = lts_value(data, st.beta, next, params.lambda);
        st.trace.push_back(st.objective);
        ++st.steps;
        if (next == st.subset) {
            st.converged = true;
            return;
        }
        st.subset = std::move(next);
    }
}

bool better(const LtsState& a, const LtsState& b)
{
    if (a.objective != b.objective)
        return a.objective < b.objective;
    return a.subset < b.subset;
}

} // namespace

double mad_scale(const VectorXd& residuals)
{
    if (residuals.size() < 2)
        throw std::invalid_argument("MAD needs at least 2 residuals");
    if (!residuals.allFinite())
        throw std::invalid_argument("MAD of non-finite residuals");
    std::vector<double> v(residuals.data(), residuals.data() + residuals.size());
    const double med = median_inplace(v);
    for (Index i = 0; i < residuals.size(); ++i)
        v[static_cast<std::size_t>(i)] = std::abs(residuals(i) - med);
    const double mad = 1.4826 * median_inplace(v);
    if (!(mad > 0.0))
        throw NumericalError("MAD of the residuals is zero; use a different initial fit");
    return mad;
}

double sparse_lts_objective(const Dataset& data, const VectorXd& beta, const SparseLTSParams& params)
{
    params.validate();
    const Index h = subset_size(data.n(), params.alpha);
    const VectorXd r = data.y - data.X * beta;
    std::vector<double> sq(static_cast<std::size_t>(r.size()));
    for (Index i = 0; i < r.size(); ++i)
        sq[static_cast<std::size_t>(i)] = r(i) * r(i);
    std::partial_sort(sq.begin(), sq.begin() + h, sq.end());
    double s = 0.0;
    for (Index i = 0; i < h; ++i)
        s += sq[static_cast<std::size_t>(i)];
    return s / static_cast<double>(h) + params.lambda * beta.cwiseAbs().sum();
}

double penalized_m_objective(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty,
                             const VectorXd& beta)
{
    const VectorXd r = data.y - data.X * beta;
    double s = 0.0;
    for (Index i = 0; i < r.size(); ++i)
        s += rho(loss, r(i));
    double pen = 0.0;
    for (Index k = 0; k < beta.size(); ++k)
        pen += j(penalty, beta(k));
    return s / static_cast<double>(r.size()) + 2.0 * penalty.lambda * pen;
}

FitResult fit_sparse_lts(const Dataset& data, const SparseLTSParams& params, const FitOptions& opts)
{
    data.validate();
    params.validate();
    const Index n = data.n();
    const Index p = data.p();
    const Index h = subset_size(n, params.alpha);
    const Index elemental = std::min<Index>(n, std::max<Index>(3, p));
    if (opts.lts_starts < 1 || opts.lts_keep < 1)
        throw std::invalid_argument("sparse LTS needs at least one start");

    const Canonical canon = canonical_order(data);
    const Dataset& d = canon.data;

    std::vector<LtsState> starts(static_cast<std::size_t>(opts.lts_starts));
    std::vector<char> ok(starts.size(), 0);
    parallel_blocks(starts.size(), [&](std::size_t s) {
        Engine eng = make_engine(opts.seed, Stream::elemental, s);
        std::vector<Index> all(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Index{0});
        constexpr int kAttempts = 100;
        for (int attempt = 0; attempt < kAttempts; ++attempt) {
            std::vector<Index> pick;
            std::sample(all.begin(), all.end(), std::back_inserter(pick), elemental, eng);
            try {
                LtsState st;
                st.beta = subset_lasso(d, pick, params.lambda, VectorXd::Zero(p), opts);
                const VectorXd r = d.y - d.X * st.beta;
                st.subset = smallest_residuals(r, h);
                csteps(d, params, h, st, opts.lts_initial_csteps, opts);
                starts[s] = std::move(st);
                ok[s] = 1;
                return;
            } catch (const NumericalError&) {
                // degenerate elemental set: draw another
            }
        }
    });

    std::vector<LtsState> alive;
    for (std::size_t s = 0; s < starts.size(); ++s)
        if (ok[s])
            alive.push_back(std::move(starts[s]));
    if (alive.empty())
        throw NumericalError("sparse LTS: every elemental start was degenerate");
    std::sort(alive.begin(), alive.end(), better);
    alive.resize(std::min(alive.size(), static_cast<std::size_t>(opts.lts_keep)));

    parallel_blocks(alive.size(), [&](std::size_t s) {
        if (!alive[s].converged)
            csteps(d, params, h, alive[s], opts.lts_max_csteps, opts);
    });
    const LtsState& best = *std::min_element(alive.begin(), alive.end(), better);

    FitResult fr;
    fr.beta_hat = best.beta;
    std::vector<Index> subset;
    subset.reserve(best.subset.size());
    for (Index i : best.subset)
        subset.push_back(canon.original[static_cast<std::size_t>(i)]);
    std::sort(subset.begin(), subset.end());
    fr.subset = std::move(subset);
    fr.objective = sparse_lts_objective(data, fr.beta_hat, params);
    fr.converged = best.converged;
    fr.iterations = best.steps;
    fr.objective_trace = best.trace;
    const VectorXd r = data.y - data.X * fr.beta_hat;
    fr.scale_hat = mad_scale(r);
    return fr;
}

FitResult fit_penalized_m(const Dataset& data, const LossSpec& loss, const PenaltySpec& penalty,
                          const FitOptions& opts)
{
    data.validate();
    loss.validate();
    penalty.validate();
    const Index n = data.n();
    const Index p = data.p();
    const double inv_n = 1.0 / static_cast<double>(n);

    if (loss.kind == LossKind::quadratic) {
        const MatrixXd g = data.X.transpose() * data.X * inv_n;
        const VectorXd c = data.X.transpose() * data.y * inv_n;
        VectorXd start = VectorXd::Zero(p);
        const Eigen::LDLT<MatrixXd> ldlt(g);
        if (ldlt.info() == Eigen::Success && ldlt.rcond() > 1e-14)
            start = ldlt.solve(c);
        const LossSpec unit = LossSpec::quadratic();
        const QuadraticSolve qs = solve_penalized_quadratic(g, c, penalty, start, opts.tol, opts.max_iter);
        FitResult fr;
        fr.beta_hat = qs.beta;
        fr.scale_hat = 1.0;
        fr.objective = penalized_m_objective(data, unit, penalty, fr.beta_hat);
        fr.converged = qs.converged;
        fr.iterations = qs.iterations;
        return fr;
    }

    const FitResult init = fit_sparse_lts(data, SparseLTSParams{0.75, penalty.lambda}, opts);
    const double scale = opts.fixed_scale ? *opts.fixed_scale : init.scale_hat;
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("scale must be positive");
    const LossSpec scaled = loss.with_scale(scale);

    VectorXd beta = init.beta_hat;
    FitResult fr;
    fr.scale_hat = scale;
    VectorXd w(n);
    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        const VectorXd r = data.y - data.X * beta;
        for (Index i = 0; i < n; ++i)
            w(i) = irls_weight(scaled, r(i));
        const MatrixXd g = data.X.transpose() * w.asDiagonal() * data.X * inv_n;
        const VectorXd c = data.X.transpose() * w.cwiseProduct(data.y) * inv_n;
        for (Index k = 0; k < p; ++k)
            if (!(g(k, k) > 0.0))
                throw NumericalError("IRLS weights vanish on every observation of a predictor");
        const QuadraticSolve qs = solve_penalized_quadratic(g, c, penalty, beta, 0.01 * opts.tol, opts.max_iter);
        const double change = (qs.beta - beta).cwiseAbs().maxCoeff();
        beta = qs.beta;
        fr.iterations = outer;
        if (change < opts.tol) {
            fr.converged = true;
            break;
        }
    }
    fr.beta_hat = beta;
    fr.objective = penalized_m_objective(data, scaled, penalty, beta);
    return fr;
}

FitResult fit(const Dataset& data, const FunctionalSpec& spec, const FitOptions& opts)
{
    spec.validate();
    if (spec.kind == FunctionalKind::sparse_lts)
        return fit_sparse_lts(data, spec.lts(), opts);
    return fit_penalized_m(data, spec.loss(), spec.penalty(), opts);
}

} // namespace robpen
