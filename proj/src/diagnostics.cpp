#include "robpen/diagnostics.hpp"

#include "robpen/errors.hpp"
#include "robpen/parallel.hpp"
#include "robpen/rng.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace robpen {

std::size_t SensitivitySurface::missing_count() const
{
    std::size_t c = 0;
    for (char m : missing)
        c += m ? 1 : 0;
    return c;
}

SensitivitySurface sensitivity_curve(const Dataset& base, const FunctionalSpec& spec,
                                     const std::vector<ContaminationPoint>& grid, const FitOptions& opts,
                                     std::uint64_t seed, ScalePolicy policy)
{
    base.validate();
    spec.validate();
    const FitResult b = fit(base, spec, opts);
    if (!b.converged)
        throw NumericalError("sensitivity curve: the base fit did not converge");
    FitOptions refit_opts = opts;
    if (policy == ScalePolicy::hold_base && spec.loss().kind != LossKind::quadratic && !opts.fixed_scale)
        refit_opts.fixed_scale = b.scale_hat;

    SensitivitySurface s;
    s.grid = grid;
    s.n = base.n();
    s.seed = seed;
    s.values.resize(static_cast<Index>(grid.size()), base.p());
    s.missing.assign(grid.size(), 0);
    const double scale = static_cast<double>(base.n() + 1);
    parallel_blocks(grid.size(), [&](std::size_t i) {
        const auto row = static_cast<Index>(i);
        try {
            const FitResult r = fit(base.with_row(grid[i].x0, grid[i].y0), spec, refit_opts);
            if (r.converged) {
                s.values.row(row) = (scale * (r.beta_hat - b.beta_hat)).transpose();
                return;
            }
        } catch (const NumericalError&) {
        }
        s.values.row(row).setConstant(std::numeric_limits<double>::quiet_NaN());
        s.missing[i] = 1;
    });
    return s;
}

ASVReport asv(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws)
{
    ASVReport rep;
    rep.functional = compute_functional(model, spec, draws);
    const InfluenceFunction f = InfluenceFunction::prepare(model, spec, rep.functional, draws);
    const Index p = model.p();
    rep.n_draws = static_cast<std::size_t>(draws.size());
    if (f.identically_zero()) {
        rep.asv = MatrixXd::Zero(p, p);
        rep.mc_stderr = MatrixXd::Zero(p, p);
        return rep;
    }
    const Expectation e = expect(draws.without_point_mass(), p * p,
                                 [&](const Eigen::Ref<const VectorXd>& x, double y, Eigen::Ref<VectorXd> out) {
                                     const VectorXd v = f(VectorXd(x), y);
                                     Eigen::Map<MatrixXd>(out.data(), p, p) = v * v.transpose();
                                 });
    rep.asv = Eigen::Map<const MatrixXd>(e.mean.data(), p, p);
    rep.mc_stderr = Eigen::Map<const MatrixXd>(e.std_error.data(), p, p);
    return rep;
}

MSEReport mse(const ASVReport& report, const RegressionModel& model, Index n)
{
    if (n < 1)
        throw std::invalid_argument("sample size must be positive");
    MSEReport m;
    m.asv_trace = report.asv.trace();
    m.bias_sq = (report.functional.beta - model.beta0).squaredNorm();
    m.mse = m.asv_trace / static_cast<double>(n) + m.bias_sq;
    m.std_error = report.mc_stderr.diagonal().norm() / static_cast<double>(n);
    return m;
}

MSEReport mse(const RegressionModel& model, const FunctionalSpec& spec, Index n, const DrawSet& draws)
{
    return mse(asv(model, spec, draws), model, n);
}

MSEHatReport mse_hat(const RegressionModel& model, const FunctionalSpec& spec, Index n,
                     const std::vector<std::uint64_t>& replicate_seeds, const FitOptions& opts)
{
    model.validate();
    spec.validate();
    const std::size_t R = replicate_seeds.size();
    if (R < 2)
        throw std::invalid_argument("mse_hat needs at least 2 replicates");
    std::vector<double> sq(R, 0.0);
    std::vector<char> ok(R, 0);
    parallel_blocks(R, [&](std::size_t r) {
        const Dataset d = sample(model, n, replicate_seeds[r]);
        FitOptions o = opts;
        o.seed = replicate_seeds[r];
        try {
            const FitResult f = fit(d, spec, o);
            if (f.converged) {
                sq[r] = (f.beta_hat - model.beta0).squaredNorm();
                ok[r] = 1;
            }
        } catch (const NumericalError&) {
        }
    });

    MSEHatReport rep;
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        if (!ok[r]) {
            ++rep.excluded;
            continue;
        }
        ++rep.used;
        sum += sq[r];
        sum2 += sq[r] * sq[r];
    }
    if (rep.excluded * 10 > static_cast<int>(R)) {
        std::ostringstream msg;
        msg << "mse_hat: " << rep.excluded << " of " << R << " replicate fits failed (more than 10%)";
        throw NumericalError(msg.str());
    }
    rep.mse_hat = sum / rep.used;
    if (rep.used > 1) {
        const double var = (sum2 - rep.used * rep.mse_hat * rep.mse_hat) / (rep.used - 1);
        rep.std_error = std::sqrt(std::max(0.0, var) / rep.used);
    }
    return rep;
}

MSEHatReport mse_hat(const RegressionModel& model, const FunctionalSpec& spec, Index n, int R, std::uint64_t seed,
                     const FitOptions& opts)
{
    if (R < 2)
        throw std::invalid_argument("mse_hat needs at least 2 replicates");
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r)
        seeds[static_cast<std::size_t>(r)] = substream_seed(seed, Stream::replicate, static_cast<std::uint64_t>(r));
    return mse_hat(model, spec, n, seeds, opts);
}

} // namespace robpen
