#include "robpen/influence.hpp"

#include "robpen/errors.hpp"
#include "robpen/normal.hpp"
#include "robpen/parallel.hpp"

#include <Eigen/LU>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace robpen {

namespace {

constexpr double kMinRcond = 1e-12;

std::vector<Index> active_coordinates(const PenaltySpec& penalty, const VectorXd& beta)
{
    std::vector<Index> active;
    for (Index j = 0; j < beta.size(); ++j)
        if (!penalty.sparse() || std::abs(beta(j)) > kActiveThreshold)
            active.push_back(j);
    return active;
}

MatrixXd checked_inverse(const MatrixXd& a, const char* what)
{
    Eigen::PartialPivLU<MatrixXd> lu(a);
    const double rc = lu.rcond();
    if (!(rc >= kMinRcond)) {
        std::ostringstream msg;
        msg << what << " is singular (reciprocal condition estimate " << rc << ")";
        throw NumericalError(msg.str());
    }
    return lu.inverse();
}

void check_point(Index p, const VectorXd& x0, double y0)
{
    if (x0.size() != p)
        throw std::invalid_argument("contamination point has the wrong dimension");
    if (!x0.allFinite() || !std::isfinite(y0))
        throw std::invalid_argument("contamination point must be finite");
}

} // namespace

InfluenceFunction InfluenceFunction::penalized_quadratic(const QuadraticMoments& m, const PenaltySpec& penalty,
                                                         const VectorXd& beta)
{
    penalty.validate();
    InfluenceFunction f;
    f.p_ = beta.size();
    f.beta_ = beta;
    f.loss_ = LossSpec::quadratic();
    f.active_ = active_coordinates(penalty, beta);
    if (f.active_.empty())
        return f;
    const Index k = static_cast<Index>(f.active_.size());
    const VectorXd grad = m.c - m.G * beta;
    MatrixXd a(k, k);
    f.m_.resize(k);
    for (Index u = 0; u < k; ++u) {
        const Index ju = f.active_[static_cast<std::size_t>(u)];
        for (Index v = 0; v < k; ++v)
            a(u, v) = 2.0 * m.G(ju, f.active_[static_cast<std::size_t>(v)]);
        if (penalty.kind != PenaltyKind::none)
            a(u, u) += 2.0 * penalty.lambda * j_second(penalty, beta(ju));
        f.m_(u) = 2.0 * grad(ju);
    }
    f.a_inv_ = checked_inverse(a, "influence matrix");
    f.kind_ = Kind::linear;
    return f;
}

InfluenceFunction InfluenceFunction::penalized_m(const RegressionModel& model, const LossSpec& loss,
                                                 const PenaltySpec& penalty, const VectorXd& beta,
                                                 const DrawSet& draws)
{
    model.validate();
    loss.validate();
    if (beta.size() != model.p())
        throw std::invalid_argument("functional value has the wrong dimension");
    if (loss.kind == LossKind::quadratic) {
        if (loss.scale != 1.0)
            throw std::invalid_argument("quadratic influence uses the unit scale");
        return penalized_quadratic(analytic_moments(model), penalty, beta);
    }
    if (draws.atom())
        throw std::invalid_argument("influence expectations must be taken at the uncontaminated model");
    if (draws.dim() != model.p())
        throw std::invalid_argument("draws do not match the model dimension");
    penalty.validate();

    InfluenceFunction f;
    f.p_ = model.p();
    f.beta_ = beta;
    f.loss_ = loss;
    f.active_ = active_coordinates(penalty, beta);
    if (f.active_.empty())
        return f;
    const Index k = static_cast<Index>(f.active_.size());
    const auto& act = f.active_;
    VectorXd xa(k);
    const Expectation e = expect(draws, k * k + k, [&](const Eigen::Ref<const VectorXd>& x, double y,
                                                       Eigen::Ref<VectorXd> out) {
        const double r = y - x.dot(beta);
        for (Index u = 0; u < k; ++u)
            xa(u) = x(act[static_cast<std::size_t>(u)]);
        const double slope = score_slope(loss, r);
        const double sc = score(loss, r);
        for (Index v = 0; v < k; ++v)
            for (Index u = 0; u < k; ++u)
                out(v * k + u) = slope * xa(u) * xa(v);
        for (Index u = 0; u < k; ++u)
            out(k * k + u) = sc * xa(u);
    });
    MatrixXd a = Eigen::Map<const MatrixXd>(e.mean.data(), k, k);
    for (Index u = 0; u < k; ++u)
        if (penalty.kind != PenaltyKind::none)
            a(u, u) += 2.0 * penalty.lambda * j_second(penalty, beta(act[static_cast<std::size_t>(u)]));
    f.a_inv_ = checked_inverse(a, "influence matrix");
    f.m_ = e.mean.tail(k);
    f.draws_ = draws;
    f.kind_ = Kind::linear;
    return f;
}

InfluenceFunction InfluenceFunction::prepare(const RegressionModel& model, const FunctionalSpec& spec,
                                             const FunctionalResult& fr, const DrawSet& draws)
{
    model.validate();
    spec.validate();
    if (fr.beta.size() != model.p())
        throw std::invalid_argument("functional value has the wrong dimension");

    if (spec.kind == FunctionalKind::lasso && model.p() == 1) {
        InfluenceFunction f;
        f.p_ = 1;
        f.beta_ = fr.beta;
        f.beta0_ = model.beta0(0);
        f.ex2_ = model.second_moment(0);
        f.lambda_ = spec.lambda;
        const double t = f.lambda_ / f.ex2_;
        f.kind_ = (-t <= f.beta0_ && f.beta0_ < t) ? Kind::zero : Kind::lasso_simple;
        return f;
    }
    if (spec.kind == FunctionalKind::sparse_lts) {
        if (model.p() != 1 || !model.is_normal())
            throw std::invalid_argument("sparse LTS influence function needs simple regression with a normal model");
        const SparseLTSParams params = spec.lts();
        const auto tm = normal::trimmed_moments(params.alpha);
        InfluenceFunction f;
        f.p_ = 1;
        f.beta_ = fr.beta;
        f.beta0_ = model.beta0(0);
        f.ex2_ = model.second_moment(0);
        f.lambda_ = params.lambda;
        f.alpha_ = params.alpha;
        f.sigma_ = model.sigma;
        f.q_ = tm.q_alpha;
        f.c1_ = tm.c1;
        const double t = params.alpha * params.lambda / (2.0 * tm.c1 * f.ex2_);
        f.kind_ = (-t < f.beta0_ && f.beta0_ <= t) ? Kind::zero : Kind::sparse_lts;
        return f;
    }
    if (spec.kind == FunctionalKind::ridge) {
        // the l2 penalty makes E[xx'] + 2 lambda I regular: J'' = 2
        return penalized_quadratic(analytic_moments(model), spec.penalty(), fr.beta);
    }
    return penalized_m(model, spec.loss(), spec.penalty(), fr.beta, draws);
}

VectorXd InfluenceFunction::operator()(const VectorXd& x0, double y0) const
{
    check_point(p_, x0, y0);
    VectorXd out = VectorXd::Zero(p_);
    switch (kind_) {
    case Kind::zero:
        break;
    case Kind::linear: {
        const double r0 = y0 - x0.dot(beta_);
        const Index k = static_cast<Index>(active_.size());
        VectorXd b(k);
        const double s0 = score(loss_, r0);
        for (Index u = 0; u < k; ++u)
            b(u) = s0 * x0(active_[static_cast<std::size_t>(u)]) - m_(u);
        const VectorXd v = a_inv_ * b;
        for (Index u = 0; u < k; ++u)
            out(active_[static_cast<std::size_t>(u)]) = v(u);
        break;
    }
    case Kind::lasso_simple: {
        const double x = x0(0);
        out(0) = x * (y0 - beta0_ * x) / ex2_ - lambda_ * (ex2_ - x * x) / (ex2_ * ex2_) * sign(beta0_);
        break;
    }
    case Kind::sparse_lts: {
        const double b = beta_(0);
        const double d = b - beta0_;
        const double x = x0(0);
        const double res = y0 - x * b;
        const double r0 = res / std::sqrt(sigma_ * sigma_ + d * d * ex2_);
        const double ind = std::abs(r0) <= q_ ? 1.0 : 0.0;
        out(0) = d + q_ * q_ * (ind - alpha_) * d / c1_ + x * res * ind / (c1_ * ex2_);
        break;
    }
    }
    return out;
}

VectorXd InfluenceFunction::std_error(const ContaminationPoint& pt) const
{
    VectorXd se = VectorXd::Zero(p_);
    if (kind_ != Kind::linear || !draws_)
        return se;
    const VectorXd full = (*this)(pt);
    const Index k = static_cast<Index>(active_.size());
    VectorXd v(k);
    for (Index u = 0; u < k; ++u)
        v(u) = full(active_[static_cast<std::size_t>(u)]);

    // linearization of a_inv (b_hat - A_hat v) around the estimated moments
    const DrawSet& d = *draws_;
    const Index n = d.size();
    VectorXd mean = VectorXd::Zero(k);
    MatrixXd m2 = MatrixXd::Zero(k, k);
    VectorXd xa(k);
    VectorXd g(k);
    for (Index i = 0; i < n; ++i) {
        const auto x = d.xt().col(i);
        const double r = d.y()(i) - x.dot(beta_);
        for (Index u = 0; u < k; ++u)
            xa(u) = x(active_[static_cast<std::size_t>(u)]);
        g = -score(loss_, r) * xa - score_slope(loss_, r) * xa.dot(v) * xa;
        mean += g;
        m2.noalias() += g * g.transpose();
    }
    mean /= static_cast<double>(n);
    const MatrixXd cov = m2 / static_cast<double>(n) - mean * mean.transpose();
    const MatrixXd var = a_inv_ * cov * a_inv_.transpose() / static_cast<double>(n);
    for (Index u = 0; u < k; ++u)
        se(active_[static_cast<std::size_t>(u)]) = std::sqrt(std::max(0.0, var(u, u)));
    return se;
}

VectorXd if_penalized_m(const RegressionModel& model, const LossSpec& loss, const PenaltySpec& penalty,
                        const FunctionalResult& fr, const ContaminationPoint& pt, const DrawSet& draws,
                        VectorXd* std_error)
{
    const auto f = InfluenceFunction::penalized_m(model, loss, penalty, fr.beta, draws);
    if (std_error)
        *std_error = f.std_error(pt);
    return f(pt);
}

VectorXd if_ridge(const RegressionModel& model, const FunctionalResult& fr, double lambda,
                  const ContaminationPoint& pt)
{
    model.validate();
    if (!(lambda >= 0.0))
        throw std::invalid_argument("lambda must be nonnegative");
    check_point(model.p(), pt.x0, pt.y0);
    const QuadraticMoments m = analytic_moments(model);
    const MatrixXd a = m.G + 2.0 * lambda * MatrixXd::Identity(model.p(), model.p());
    const VectorXd rhs = (pt.y0 - pt.x0.dot(fr.beta)) * pt.x0 + m.G * (fr.beta - model.beta0);
    return checked_inverse(a, "ridge influence matrix") * rhs;
}

double if_lasso_simple(const RegressionModel& model, double lambda, const ContaminationPoint& pt)
{
    if (model.p() != 1)
        throw std::invalid_argument("simple lasso influence function needs p = 1");
    const auto f = InfluenceFunction::prepare(model, FunctionalSpec::of(FunctionalKind::lasso, lambda),
                                              lasso_simple(model, lambda),
                                              DrawSet::generate(model, MCConfig{1, 0}));
    return f(pt)(0);
}

double if_lasso_cd(const QuadraticMoments& m, double lambda, const ContaminationPoint& pt, const VectorXd& prev_if,
                   const VectorXd& prev_beta, Index j)
{
    const Index p = m.c.size();
    if (prev_if.size() != p || prev_beta.size() != p || j < 0 || j >= p)
        throw std::invalid_argument("coordinate recursion arguments have inconsistent dimensions");
    check_point(p, pt.x0, pt.y0);
    const double mjj = m.G(j, j);
    double s = m.c(j);
    double cross = 0.0;
    double partial = pt.y0;
    for (Index k = 0; k < p; ++k) {
        if (k == j)
            continue;
        s -= m.G(j, k) * prev_beta(k);
        cross += m.G(j, k) * prev_if(k);
        partial -= pt.x0(k) * prev_beta(k);
    }
    if (std::abs(s) < lambda)
        return 0.0;
    const double xj = pt.x0(j);
    return (-cross + partial * xj) / mjj - s * xj * xj / (mjj * mjj)
         - lambda * (mjj - xj * xj) / (mjj * mjj) * sign(s);
}

FixedPointResult if_lasso_cd_fixed_point(const QuadraticMoments& m, double lambda, const VectorXd& beta,
                                         const ContaminationPoint& pt, double tol, int max_sweeps)
{
    FixedPointResult res;
    res.value = VectorXd::Zero(beta.size());
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double change = 0.0;
        for (Index j = 0; j < beta.size(); ++j) {
            const double v = if_lasso_cd(m, lambda, pt, res.value, beta, j);
            change = std::max(change, std::abs(v - res.value(j)));
            res.value(j) = v;
        }
        res.sweeps = sweep;
        if (change < tol) {
            res.converged = true;
            return res;
        }
    }
    std::ostringstream msg;
    msg << "coordinate-descent influence recursion did not converge in " << max_sweeps << " sweeps";
    throw NumericalError(msg.str());
}

VectorXd if_lasso_multi(const QuadraticMoments& m, const VectorXd& beta, const ContaminationPoint& pt)
{
    check_point(beta.size(), pt.x0, pt.y0);
    const auto f = InfluenceFunction::penalized_quadratic(m, PenaltySpec::l1(1.0), beta);
    return f(pt);
}

std::vector<TanhLimitStep> if_lasso_tanh_limit(const RegressionModel& model, double lambda,
                                               const ContaminationPoint& pt, const std::vector<double>& K_sequence)
{
    for (std::size_t i = 1; i < K_sequence.size(); ++i)
        if (!(K_sequence[i] > K_sequence[i - 1]))
            throw std::invalid_argument("K sequence must be increasing");
    const QuadraticMoments m = analytic_moments(model);
    SolverOptions opts;
    opts.tol = 1e-12;
    opts.max_iter = 100000;
    const FunctionalResult lasso = quadratic_functional(model, m, PenaltySpec::l1(lambda), std::nullopt, opts);
    const VectorXd target = if_lasso_multi(m, lasso.beta, pt);

    std::vector<TanhLimitStep> steps;
    for (double K : K_sequence) {
        const PenaltySpec pen = PenaltySpec::tanh_k(lambda, K);
        const FunctionalResult fr = quadratic_functional(model, m, pen, std::nullopt, opts);
        TanhLimitStep st;
        st.K = K;
        st.beta = fr.beta;
        st.value = InfluenceFunction::penalized_quadratic(m, pen, fr.beta)(pt);
        st.deviation = (st.value - target).cwiseAbs().maxCoeff();
        steps.push_back(std::move(st));
    }
    return steps;
}

double if_sparse_lts(const RegressionModel& model, const FunctionalResult& fr, const SparseLTSParams& params,
                     const ContaminationPoint& pt)
{
    FunctionalSpec spec = FunctionalSpec::of(FunctionalKind::sparse_lts, params.lambda);
    spec.alpha = params.alpha;
    const auto f = InfluenceFunction::prepare(model, spec, fr, DrawSet::generate(model, MCConfig{1, 0}));
    return f(pt)(0);
}

std::vector<ContaminationPoint> contamination_grid(double lo, double hi, int points)
{
    if (points < 2 || !(hi > lo))
        throw std::invalid_argument("contamination grid needs at least 2 points and lo < hi");
    std::vector<ContaminationPoint> grid;
    grid.reserve(static_cast<std::size_t>(points * points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i)
        for (int k = 0; k < points; ++k)
            grid.push_back(ContaminationPoint::simple(lo + step * i, lo + step * k));
    return grid;
}

IFSurface if_surface(const InfluenceFunction& f, const std::vector<ContaminationPoint>& grid,
                     const std::string& functional_id)
{
    IFSurface s;
    s.grid = grid;
    s.functional_id = functional_id;
    s.values.resize(static_cast<Index>(grid.size()), f.dim());
    constexpr std::size_t kBlock = 64;
    const std::size_t blocks = (grid.size() + kBlock - 1) / kBlock;
    parallel_blocks(blocks, [&](std::size_t b) {
        const std::size_t end = std::min(grid.size(), (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            const VectorXd v = f(grid[i]);
            if (!v.allFinite()) {
                std::ostringstream msg;
                msg << "non-finite influence value at grid point " << i;
                throw NumericalError(msg.str());
            }
            s.values.row(static_cast<Index>(i)) = v.transpose();
        }
    });
    return s;
}

std::string functional_id(const RegressionModel& model, const FunctionalSpec& spec)
{
    std::ostringstream os;
    os.precision(17);
    os << spec.name() << " lambda=" << spec.lambda;
    if (spec.kind == FunctionalKind::scad)
        os << " a=" << spec.a;
    if (spec.kind == FunctionalKind::huber_l1 || spec.kind == FunctionalKind::biweight_l1)
        os << " k=" << spec.loss().tuning;
    if (spec.kind == FunctionalKind::sparse_lts)
        os << " alpha=" << spec.alpha;
    os << " beta0=";
    for (Index j = 0; j < model.p(); ++j)
        os << (j ? ";" : "") << model.beta0(j);
    return os.str();
}

} // namespace robpen
