#include "robpen/model.hpp"

#include "robpen/errors.hpp"
#include "robpen/parallel.hpp"
#include "robpen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace robpen {

namespace {

constexpr Index kBlockSize = 8192;

double draw_error(Engine& eng, const RegressionModel& m, std::normal_distribution<double>& normal)
{
    switch (m.error) {
    case ErrorFamily::normal:
        return m.sigma * normal(eng);
    case ErrorFamily::laplace: {
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        const double v = u(eng);
        const double b = m.sigma / std::sqrt(2.0);
        return -b * (v < 0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(v));
    }
    }
    return 0.0;
}

// Fills columns [begin, begin + count) of xt / entries of y with draws from
// the engine for one block.
void fill_block(Engine& eng, const RegressionModel& m, MatrixXd& xt, VectorXd& y, Index begin, Index count)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    const Index p = m.p();
    for (Index i = begin; i < begin + count; ++i) {
        for (Index j = 0; j < p; ++j)
            xt(j, i) = std::sqrt(m.x_var(j)) * normal(eng);
        y(i) = xt.col(i).dot(m.beta0) + draw_error(eng, m, normal);
    }
}

void generate_into(const RegressionModel& m, std::uint64_t seed, Stream stream, MatrixXd& xt, VectorXd& y)
{
    const Index n = y.size();
    const std::size_t blocks = static_cast<std::size_t>((n + kBlockSize - 1) / kBlockSize);
    parallel_blocks(blocks, [&](std::size_t b) {
        Engine eng = make_engine(seed, stream, b);
        const Index begin = static_cast<Index>(b) * kBlockSize;
        fill_block(eng, m, xt, y, begin, std::min(kBlockSize, n - begin));
    });
}

} // namespace

RegressionModel RegressionModel::standard(const VectorXd& beta0, double sigma)
{
    RegressionModel m;
    m.beta0 = beta0;
    m.x_var = VectorXd::Ones(beta0.size());
    m.sigma = sigma;
    m.validate();
    return m;
}

RegressionModel RegressionModel::simple(double beta0, double sigma)
{
    return standard(VectorXd::Constant(1, beta0), sigma);
}

void RegressionModel::validate() const
{
    if (beta0.size() < 1)
        throw std::invalid_argument("regression model needs at least one predictor");
    if (x_var.size() != beta0.size())
        throw std::invalid_argument("predictor variance vector does not match beta0 length");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("error standard deviation must be positive");
    if (!beta0.allFinite())
        throw std::invalid_argument("beta0 has non-finite entries");
    for (Index j = 0; j < x_var.size(); ++j)
        if (!(x_var(j) > 0.0) || !std::isfinite(x_var(j)))
            throw std::invalid_argument("predictor variances must be positive");
}

ContaminationPoint ContaminationPoint::simple(double x0, double y0)
{
    return {VectorXd::Constant(1, x0), y0};
}

void Dataset::validate() const
{
    if (X.rows() != y.size())
        throw std::invalid_argument("design matrix and response have different lengths");
    if (X.rows() < 2)
        throw std::invalid_argument("dataset needs at least two observations");
    if (X.cols() < 1)
        throw std::invalid_argument("dataset needs at least one predictor");
    if (!X.allFinite() || !y.allFinite())
        throw std::invalid_argument("dataset has non-finite entries");
}

Dataset Dataset::with_row(const VectorXd& x0, double y0) const
{
    if (x0.size() != p())
        throw std::invalid_argument("appended row has the wrong number of predictors");
    Dataset out;
    out.X.resize(n() + 1, p());
    out.X.topRows(n()) = X;
    out.X.row(n()) = x0.transpose();
    out.y.resize(n() + 1);
    out.y.head(n()) = y;
    out.y(n()) = y0;
    out.contaminated_rows = contaminated_rows;
    return out;
}

Dataset sample(const RegressionModel& model, Index n, std::uint64_t seed)
{
    model.validate();
    if (n < 1)
        throw std::invalid_argument("sample size must be positive");
    MatrixXd xt(model.p(), n);
    VectorXd y(n);
    generate_into(model, seed, Stream::sample, xt, y);
    return Dataset{xt.transpose(), std::move(y), {}};
}

Dataset inject_vertical_outliers(const Dataset& data, double fraction, double shift,
                                 OutlierPlacement placement, std::uint64_t seed)
{
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw std::invalid_argument("outlier fraction must lie in [0, 1)");
    std::vector<Index> candidates;
    for (Index i = 0; i < data.n(); ++i)
        if (placement == OutlierPlacement::random_rows || data.X(i, 0) > 0.0)
            candidates.push_back(i);

    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.n())));
    if (count > candidates.size())
        throw std::invalid_argument("not enough eligible rows for the requested outlier fraction");

    Engine eng = make_engine(seed, Stream::contamination, 0);
    std::shuffle(candidates.begin(), candidates.end(), eng);
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());

    Dataset out = data;
    for (Index i : candidates)
        out.y(i) += shift;
    out.contaminated_rows.insert(out.contaminated_rows.end(), candidates.begin(), candidates.end());
    return out;
}

DrawSet DrawSet::generate(const RegressionModel& model, const MCConfig& cfg)
{
    model.validate();
    if (cfg.n_draws < 1)
        throw std::invalid_argument("n_draws must be at least 1");
    const auto n = static_cast<Index>(cfg.n_draws);
    auto xt = std::make_shared<MatrixXd>(model.p(), n);
    auto y = std::make_shared<VectorXd>(n);
    generate_into(model, cfg.seed, Stream::population, *xt, *y);
    return DrawSet(std::move(xt), std::move(y), cfg);
}

DrawSet DrawSet::with_point_mass(const ContaminationPoint& pt, double eps) const
{
    if (pt.x0.size() != dim())
        throw std::invalid_argument("contamination point has the wrong dimension");
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("contamination mass must lie in [0, 1)");
    if (!pt.x0.allFinite() || !std::isfinite(pt.y0))
        throw std::invalid_argument("contamination point must be finite");
    DrawSet out = *this;
    out.atom_ = Atom{pt, eps};
    return out;
}

DrawSet DrawSet::without_point_mass() const
{
    DrawSet out = *this;
    out.atom_.reset();
    return out;
}

DrawSet DrawSet::slice(Index begin, Index count) const
{
    if (begin < 0 || count < 1 || begin + count > size())
        throw std::out_of_range("draw slice out of range");
    auto xt = std::make_shared<MatrixXd>(xt_->middleCols(begin, count));
    auto y = std::make_shared<VectorXd>(y_->segment(begin, count));
    MCConfig cfg = cfg_;
    cfg.n_draws = static_cast<std::size_t>(count);
    DrawSet out(std::move(xt), std::move(y), cfg);
    out.atom_ = atom_;
    return out;
}

Expectation expect(const DrawSet& draws, Index dim, const Integrand& f)
{
    const Index n = draws.size();
    const std::size_t blocks = static_cast<std::size_t>((n + kBlockSize - 1) / kBlockSize);

    // Per-block mean and sum of squared deviations, merged in block order.
    std::vector<VectorXd> means(blocks, VectorXd::Zero(dim));
    std::vector<VectorXd> m2s(blocks, VectorXd::Zero(dim));
    std::vector<Index> counts(blocks, 0);

    const MatrixXd& xt = draws.xt();
    const VectorXd& y = draws.y();
    parallel_blocks(blocks, [&](std::size_t b) {
        const Index begin = static_cast<Index>(b) * kBlockSize;
        const Index end = std::min(n, begin + kBlockSize);
        VectorXd val(dim);
        VectorXd delta(dim);
        VectorXd& mean = means[b];
        VectorXd& m2 = m2s[b];
        for (Index i = begin; i < end; ++i) {
            val.setZero();
            f(xt.col(i), y(i), val);
            if (!val.allFinite()) {
                std::ostringstream msg;
                msg << "non-finite integrand value at draw " << i;
                throw NumericalError(msg.str());
            }
            const double k = static_cast<double>(i - begin + 1);
            delta.noalias() = val - mean;
            mean.noalias() += delta / k;
            m2.array() += delta.array() * (val - mean).array();
        }
        counts[b] = end - begin;
    });

    VectorXd mean = VectorXd::Zero(dim);
    VectorXd m2 = VectorXd::Zero(dim);
    double total = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const double nb = static_cast<double>(counts[b]);
        const double merged = total + nb;
        const VectorXd delta = means[b] - mean;
        mean += delta * (nb / merged);
        m2 += m2s[b] + delta.cwiseAbs2() * (total * nb / merged);
        total = merged;
    }

    Expectation out;
    out.std_error = (n > 1) ? VectorXd((m2 / (total - 1.0)).cwiseSqrt() / std::sqrt(total))
                            : VectorXd::Zero(dim);
    out.mean = mean;

    if (const auto& atom = draws.atom()) {
        VectorXd val = VectorXd::Zero(dim);
        f(atom->point.x0, atom->point.y0, val);
        if (!val.allFinite())
            throw NumericalError("non-finite integrand value at the contamination point");
        out.mean = (1.0 - atom->eps) * out.mean + atom->eps * val;
        out.std_error *= (1.0 - atom->eps);
    }
    return out;
}

Expectation expect(const RegressionModel& model, Index dim, const Integrand& f, const MCConfig& cfg)
{
    return expect(DrawSet::generate(model, cfg), dim, f);
}

GramMoments gram_moments(const DrawSet& draws, const VectorXd& beta, const std::function<double(double)>* weight)
{
    const Index p = draws.dim();
    if (beta.size() != p)
        throw std::invalid_argument("coefficient vector has the wrong dimension");
    const Index dim = p * p + p;
    const Expectation e = expect(draws, dim, [&](const Eigen::Ref<const VectorXd>& x, double y, Eigen::Ref<VectorXd> out) {
        const double w = weight ? (*weight)(y - x.dot(beta)) : 1.0;
        for (Index k = 0; k < p; ++k)
            for (Index j = 0; j < p; ++j)
                out(k * p + j) = w * x(j) * x(k);
        out.tail(p) = w * y * x;
    });
    GramMoments g;
    g.xx = Eigen::Map<const MatrixXd>(e.mean.data(), p, p);
    g.xy = e.mean.tail(p);
    return g;
}

} // namespace robpen
