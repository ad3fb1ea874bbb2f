#include "robpen/verification.hpp"

#include "robpen/errors.hpp"
#include "robpen/normal.hpp"
#include "robpen/rng.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace robpen {

namespace {

// Tolerances of the acceptance criteria.
constexpr double kC1GridResolution = 1e-3;
constexpr double kC1StderrFactor = 3.0;
constexpr double kC1SpltsValue = 1.36427;
constexpr double kC1SpltsThreshold = 0.13573;
constexpr double kC1ReferenceTol = 1e-4;
constexpr double kC1Budget = 120.0;

constexpr double kC2Relative = 0.05;
constexpr double kC2StderrFactor = 5.0;
constexpr double kC2AbsoluteFloor = 1e-6; // IF values that vanish exactly
constexpr double kC2Budget = 600.0;

constexpr double kC4ConstantTol = 1e-12;
constexpr double kC5Limit = 1e-2;
constexpr double kC6Tol = 1e-6;
constexpr double kC7StderrFactor = 3.0;
constexpr double kC7LambdaStep = 0.02;
constexpr double kC8Relative = 0.15;
constexpr double kC8Budget = 1800.0;
constexpr std::size_t kC8Draws = 1000000;
constexpr double kC10LtsError = 0.2;
constexpr double kC10LassoError = 1.0;

class Timer {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// The seven functionals at beta0 = 1.5 as used by the influence checks.
std::vector<FunctionalSpec> influence_specs()
{
    std::vector<FunctionalSpec> specs;
    for (FunctionalKind k : kAllFunctionals) {
        const bool robust = k == FunctionalKind::huber_l1 || k == FunctionalKind::biweight_l1
                         || k == FunctionalKind::sparse_lts;
        specs.push_back(FunctionalSpec::of(k, robust ? 0.04 : 0.1));
    }
    return specs;
}

const std::vector<ContaminationPoint>& finite_eps_points()
{
    static const std::vector<ContaminationPoint> pts = {
        ContaminationPoint::simple(-3, -4.5), ContaminationPoint::simple(-2, 3), ContaminationPoint::simple(1, 1.5),
        ContaminationPoint::simple(1, -4),    ContaminationPoint::simple(2, 3),  ContaminationPoint::simple(2, -2),
        ContaminationPoint::simple(3, 4.5),   ContaminationPoint::simple(4, 2),  ContaminationPoint::simple(-4, 1)};
    return pts;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Sparse LTS at the normal model mixed with a point mass, p = 1. Under H0 the
// residual y - xb is N(0, s^2) with s^2 = sigma^2 + (beta0 - b)^2 E[x^2].
struct SpltsMixture {
    double beta0, ex2, sigma, alpha, lambda;
    double x0, y0, eps;

    double s(double b) const { return std::sqrt(sigma * sigma + (beta0 - b) * (beta0 - b) * ex2); }

    // alpha-quantile of |r| under the mixture and whether the atom is trimmed in
    void quantile(double b, double& q, bool& atom_in) const
    {
        const double sb = s(b);
        const double r0 = std::abs(y0 - x0 * b);
        if (eps == 0.0) {
            q = sb * normal::quantile(0.5 * (1.0 + alpha));
            atom_in = r0 <= q;
            return;
        }
        const double pa = 0.5 + alpha / (2.0 * (1.0 - eps));
        const double qa = pa < 1.0 ? sb * normal::quantile(pa) : std::numeric_limits<double>::infinity();
        if (r0 > qa) {
            q = qa;
            atom_in = false;
            return;
        }
        atom_in = true;
        const double pb = 0.5 + (alpha - eps) / (2.0 * (1.0 - eps));
        const double qb = pb > 0.5 ? sb * normal::quantile(pb) : 0.0;
        q = std::max(qb, r0);
    }

    double derivative(double b) const
    {
        double q;
        bool in;
        quantile(b, q, in);
        const double r0 = y0 - x0 * b;
        const double trimmed = normal::truncated_second_moment(q / s(b));
        return -2.0 * (1.0 - eps) * (beta0 - b) * ex2 * trimmed - (in ? 2.0 * eps * x0 * r0 : 0.0)
             + alpha * lambda * sign(b);
    }
};

double splts_mixture_value(const RegressionModel& model, const SparseLTSParams& params, const ContaminationPoint& pt,
                           double eps)
{
    if (model.p() != 1 || !model.is_normal())
        throw std::invalid_argument("sparse LTS mixture oracle needs simple regression with a normal model");
    const SpltsMixture m{model.beta0(0), model.second_moment(0), model.sigma, params.alpha, params.lambda,
                         pt.x0(0),       pt.y0,                  eps};
    const double tiny = 1e-300;
    if (m.derivative(tiny) >= 0.0 && m.derivative(-tiny) <= 0.0)
        return 0.0;
    const double centre = sparse_lts_simple(model, params).beta(0);
    double half = 0.5;
    for (int widen = 0; widen < 8; ++widen, half *= 2.0) {
        double lo = centre - half;
        double hi = centre + half;
        // stay on one side of zero, where the objective is smooth in b
        if (centre > 0.0)
            lo = std::max(lo, tiny);
        else if (centre < 0.0)
            hi = std::min(hi, -tiny);
        const double glo = m.derivative(lo);
        const double ghi = m.derivative(hi);
        if (glo < 0.0 && ghi > 0.0) {
            const auto root = boost::math::tools::bisect([&](double b) { return m.derivative(b); }, lo, hi,
                                                         boost::math::tools::eps_tolerance<double>(52));
            return 0.5 * (root.first + root.second);
        }
    }
    throw NumericalError("sparse LTS mixture oracle could not bracket the minimizer");
}

template <class F>
CheckResult timed(int id, const std::string& name, F&& body)
{
    Timer t;
    CheckResult r;
    r.id = id;
    r.name = name;
    std::ostringstream detail;
    try {
        r.passed = body(detail);
    } catch (const std::exception& e) {
        r.passed = false;
        detail << "error: " << e.what();
    }
    r.detail = detail.str();
    r.seconds = t.seconds();
    return r;
}

} // namespace

VectorXd contaminated_value(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws,
                            const ContaminationPoint& pt, double eps)
{
    spec.validate();
    SolverOptions tight;
    tight.tol = 1e-13;
    tight.max_iter = 100000;
    tight.max_outer = 2000;
    switch (spec.kind) {
    case FunctionalKind::least_squares:
    case FunctionalKind::ridge:
    case FunctionalKind::lasso:
    case FunctionalKind::scad:
        return quadratic_functional(model, mixture_moments(model, pt, eps), spec.penalty(), std::nullopt, tight).beta;
    case FunctionalKind::huber_l1:
    case FunctionalKind::biweight_l1: {
        const DrawSet h = eps > 0.0 ? draws.with_point_mass(pt, eps) : draws.without_point_mass();
        const FunctionalResult fr = irls(model, spec.loss(), spec.penalty(), h, std::nullopt, tight);
        if (!fr.converged)
            throw NumericalError("IRLS did not converge on the contaminated draws");
        return fr.beta;
    }
    case FunctionalKind::sparse_lts:
        return VectorXd::Constant(1, splts_mixture_value(model, spec.lts(), pt, eps));
    }
    throw std::logic_error("unhandled functional kind");
}

FiniteEpsSlope finite_eps_slope(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws,
                                const ContaminationPoint& pt, double eps1, double eps2)
{
    if (!(eps1 > 0.0 && eps2 > 0.0 && eps1 != eps2))
        throw std::invalid_argument("finite-eps slope needs two distinct positive eps");
    const VectorXd b0 = contaminated_value(model, spec, draws, pt, 0.0);
    FiniteEpsSlope s;
    s.d1 = (contaminated_value(model, spec, draws, pt, eps1) - b0) / eps1;
    s.d2 = (contaminated_value(model, spec, draws, pt, eps2) - b0) / eps2;
    s.richardson = (s.d2 * eps1 - s.d1 * eps2) / (eps1 - eps2);
    return s;
}

CheckResult check_closed_form_oracle(const VerifyOptions& o)
{
    return timed(1, "closed-form functionals vs oracle minimizer", [&](std::ostringstream& out) {
        const double lambda = 0.1;
        const SparseLTSParams lts{0.75, lambda};
        bool ok = true;
        double worst = 0.0; // largest |closed - oracle| / tolerance
        for (double b0 : {-1.5, -0.1, 0.0, 0.05, 0.3, 1.5}) {
            const RegressionModel model = RegressionModel::simple(b0);
            const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});
            const GridSpec grid = GridSpec::symmetric(1, 3.0, 41, kC1GridResolution);
            const std::pair<FunctionalResult, PopulationObjective> cases[] = {
                {lasso_simple(model, lambda),
                 PopulationObjective::penalized_m(LossSpec::quadratic(), PenaltySpec::l1(lambda))},
                {scad_simple(model, lambda),
                 PopulationObjective::penalized_m(LossSpec::quadratic(), PenaltySpec::scad(lambda))},
                {sparse_lts_simple(model, lts), PopulationObjective::sparse_lts_objective(lts)},
            };
            const char* names[] = {"lasso", "scad", "sparse_lts"};
            for (int c = 0; c < 3; ++c) {
                const FunctionalResult oracle = oracle_minimize(model, cases[c].second, draws, grid, 10);
                const double diff = std::abs(cases[c].first.beta(0) - oracle.beta(0));
                const double tol = kC1GridResolution + kC1StderrFactor * oracle.std_error(0);
                worst = std::max(worst, diff / tol);
                if (diff > tol) {
                    ok = false;
                    out << names[c] << "@beta0=" << b0 << " closed " << cases[c].first.beta(0) << " oracle "
                        << oracle.beta(0) << " tol " << tol << "; ";
                }
            }
        }
        const double splts = sparse_lts_simple(RegressionModel::simple(1.5), lts).beta(0);
        const auto tm = normal::trimmed_moments(0.75);
        const double threshold = 0.75 * lambda / (2.0 * tm.c1);
        const bool ref_ok = std::abs(splts - kC1SpltsValue) <= kC1ReferenceTol
                         && std::abs(threshold - kC1SpltsThreshold) <= kC1ReferenceTol;
        out.precision(7);
        out << "18 comparisons, worst diff/tol " << worst << "; beta_spLTS(1.5) " << splts << ", threshold "
            << threshold;
        return ok && ref_ok;
    });
}

CheckResult check_if_finite_eps(const VerifyOptions& o)
{
    return timed(2, "influence functions vs finite-eps refits", [&](std::ostringstream& out) {
        const RegressionModel model = RegressionModel::simple(1.5);
        const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});
        bool ok = true;
        double worst = 0.0;
        std::string worst_at;
        for (const FunctionalSpec& spec : influence_specs()) {
            const FunctionalResult fr = compute_functional(model, spec, draws);
            const InfluenceFunction f = InfluenceFunction::prepare(model, spec, fr, draws);
            for (const ContaminationPoint& pt : finite_eps_points()) {
                const double value = f(pt)(0);
                const double se = f.std_error(pt)(0);
                const double slope = finite_eps_slope(model, spec, draws, pt).richardson(0);
                const double tol = std::max({kC2Relative * std::abs(value), kC2StderrFactor * se, kC2AbsoluteFloor});
                const double ratio = std::abs(slope - value) / tol;
                if (ratio > worst) {
                    worst = ratio;
                    std::ostringstream w;
                    w << spec.name() << "@(" << pt.x0(0) << "," << pt.y0 << ") IF " << value << " slope " << slope;
                    worst_at = w.str();
                }
                if (ratio > 1.0) {
                    ok = false;
                    out << spec.name() << "@(" << pt.x0(0) << "," << pt.y0 << ") IF " << value << " slope " << slope
                        << " tol " << tol << "; ";
                }
            }
        }
        out << "63 comparisons, worst |slope-IF|/tol " << worst << " at " << worst_at;
        return ok;
    });
}

CheckResult check_zero_if(const VerifyOptions& o)
{
    return timed(3, "identically zero influence in the shrunk region", [&](std::ostringstream& out) {
        const auto grid = contamination_grid(-10.0, 10.0, 41);
        std::size_t nonzero = 0;
        const std::pair<double, FunctionalKind> cases[] = {{0.05, FunctionalKind::lasso},
                                                           {0.1, FunctionalKind::sparse_lts}};
        for (const auto& [b0, kind] : cases) {
            const RegressionModel model = RegressionModel::simple(b0);
            const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});
            const FunctionalSpec spec = FunctionalSpec::of(kind, 0.1);
            const FunctionalResult fr = compute_functional(model, spec, draws);
            const IFSurface s = if_surface(InfluenceFunction::prepare(model, spec, fr, draws), grid,
                                           functional_id(model, spec));
            std::size_t nz = 0;
            for (Index i = 0; i < s.values.rows(); ++i)
                nz += s.values(i, 0) != 0.0 ? 1 : 0;
            out << spec.name() << "(beta0=" << b0 << "): " << nz << " nonzero of " << grid.size() << "; ";
            nonzero += nz;
        }
        return nonzero == 0;
    });
}

CheckResult check_boundedness(const VerifyOptions& o)
{
    return timed(4, "boundedness dichotomy along (t, -t)", [&](std::ostringstream& out) {
        const RegressionModel model = RegressionModel::simple(1.5);
        const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});
        const double ts[] = {2, 4, 6, 8, 10};
        bool ok = true;
        for (const FunctionalSpec& spec : influence_specs()) {
            const FunctionalKind k = spec.kind;
            if (k != FunctionalKind::least_squares && k != FunctionalKind::huber_l1 && k != FunctionalKind::sparse_lts
                && k != FunctionalKind::biweight_l1)
                continue;
            const FunctionalResult fr = compute_functional(model, spec, draws);
            const InfluenceFunction f = InfluenceFunction::prepare(model, spec, fr, draws);
            std::vector<double> v;
            for (double t : ts)
                v.push_back(std::abs(f(ContaminationPoint::simple(t, -t))(0)));
            bool pass = true;
            if (k == FunctionalKind::least_squares || k == FunctionalKind::huber_l1) {
                for (std::size_t i = 1; i < v.size(); ++i)
                    pass = pass && v[i] > v[i - 1];
            } else if (k == FunctionalKind::sparse_lts) {
                for (std::size_t i = 1; i < v.size(); ++i)
                    pass = pass && std::abs(v[i] - v[0]) <= kC4ConstantTol * std::max(1.0, v[0]);
            } else {
                // constant from the first t whose residual lies outside +-k (psi = 0)
                const LossSpec loss = spec.loss();
                std::size_t first = v.size();
                for (std::size_t i = 0; i < v.size(); ++i)
                    if (psi(loss, -ts[i] - ts[i] * fr.beta(0)) == 0.0) {
                        first = i;
                        break;
                    }
                pass = first + 1 < v.size();
                for (std::size_t i = first + 1; pass && i < v.size(); ++i)
                    pass = std::abs(v[i] - v[first]) <= kC4ConstantTol * std::max(1.0, v[first]);
                out << "(zero score from t=" << (first < v.size() ? ts[first] : -1.0) << ") ";
            }
            out << spec.name() << " |IF|:";
            for (double x : v)
                out << " " << x;
            out << (pass ? "" : " FAIL") << "; ";
            ok = ok && pass;
        }
        return ok;
    });
}

CheckResult check_tanh_limit(const VerifyOptions&)
{
    return timed(5, "tanh-K influence converges to the lasso influence", [&](std::ostringstream& out) {
        VectorXd b0(2);
        b0 << 1.5, 0.0;
        const RegressionModel model = RegressionModel::standard(b0);
        const std::vector<double> Ks = {10.0, 1e2, 1e3, 1e4};
        std::vector<double> dev(Ks.size(), 0.0);
        for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b)
                for (double y0 : {-2.0, 0.0, 2.0}) {
                    ContaminationPoint pt;
                    pt.x0 = VectorXd(2);
                    pt.x0 << a, b;
                    pt.y0 = y0;
                    const auto steps = if_lasso_tanh_limit(model, 0.1, pt, Ks);
                    for (std::size_t i = 0; i < Ks.size(); ++i)
                        dev[i] = std::max(dev[i], steps[i].deviation);
                }
        bool ok = dev.back() < kC5Limit;
        out << "max deviation by K:";
        for (std::size_t i = 0; i < Ks.size(); ++i) {
            out << " K=" << Ks[i] << ":" << dev[i];
            if (i > 0)
                ok = ok && dev[i] < dev[i - 1];
        }
        return ok;
    });
}

CheckResult check_cd_fixed_point(const VerifyOptions& o)
{
    return timed(6, "coordinate-descent influence recursion fixed point", [&](std::ostringstream& out) {
        VectorXd b0(3);
        b0 << 1.5, 0.05, -0.8;
        const RegressionModel model = RegressionModel::standard(b0);
        const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});
        const GramMoments g = gram_moments(draws, b0);
        const QuadraticMoments m{g.xx, g.xy};
        SolverOptions tight;
        tight.tol = 1e-15;
        tight.max_iter = 100000;
        const double lambda = 0.1;
        const FunctionalResult fr = quadratic_functional(model, m, PenaltySpec::l1(lambda), std::nullopt, tight);
        double worst = 0.0;
        int max_sweeps = 0;
        bool converged = true;
        for (int a : {-2, 0, 2})
            for (int b : {-2, 1})
                for (int c : {-1, 3})
                    for (double y0 : {-3.0, 1.0, 4.0}) {
                        ContaminationPoint pt;
                        pt.x0 = VectorXd(3);
                        pt.x0 << a, b, c;
                        pt.y0 = y0;
                        const FixedPointResult fp = if_lasso_cd_fixed_point(m, lambda, fr.beta, pt);
                        const VectorXd closed = if_lasso_multi(m, fr.beta, pt);
                        worst = std::max(worst, (fp.value - closed).cwiseAbs().maxCoeff());
                        max_sweeps = std::max(max_sweeps, fp.sweeps);
                        converged = converged && fp.converged;
                    }
        out << "beta " << fr.beta.transpose() << "; 36 points, max |recursion - closed form| " << worst
            << ", max sweeps " << max_sweeps;
        return converged && worst <= kC6Tol;
    });
}

CheckResult check_asv(const VerifyOptions& o)
{
    return timed(7, "asymptotic variance: LS, ridge, l1 jump", [&](std::ostringstream& out) {
        const RegressionModel model = RegressionModel::simple(1.5);
        const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});

        const ASVReport ls = asv(model, FunctionalSpec::of(FunctionalKind::least_squares, 0.0), draws);
        const bool ls_ok = std::abs(ls.asv(0, 0) - 1.0) <= kC7StderrFactor * ls.mc_stderr(0, 0);
        out << "LS " << ls.asv(0, 0) << " +- " << ls.mc_stderr(0, 0) << "; ridge";

        bool ridge_ok = true;
        double prev = std::numeric_limits<double>::infinity();
        for (double lam : {0.0, 0.5, 1.0, 5.0}) {
            const double v = asv(model, FunctionalSpec::of(FunctionalKind::ridge, lam), draws).asv(0, 0);
            out << " " << v;
            ridge_ok = ridge_ok && v < prev;
            prev = v;
        }

        bool jump_ok = true;
        const auto tm = normal::trimmed_moments(0.75);
        const std::pair<FunctionalKind, double> jumps[] = {
            {FunctionalKind::lasso, std::abs(1.5) * model.second_moment(0)},
            {FunctionalKind::sparse_lts, 2.0 * tm.c1 * std::abs(1.5) * model.second_moment(0) / 0.75}};
        for (const auto& [kind, lstar] : jumps) {
            double first_zero = std::numeric_limits<double>::quiet_NaN();
            bool zero_stays = true;
            for (int i = 0; i <= 100; ++i) {
                const double lam = kC7LambdaStep * i;
                const double v = asv(model, FunctionalSpec::of(kind, lam), draws).asv(0, 0);
                if (v == 0.0 && std::isnan(first_zero))
                    first_zero = lam;
                else if (v != 0.0 && !std::isnan(first_zero))
                    zero_stays = false;
            }
            const bool located = first_zero > lstar && first_zero <= lstar + kC7LambdaStep + 1e-12;
            out << "; " << to_string(kind) << " lambda* " << lstar << " first zero " << first_zero;
            jump_ok = jump_ok && located && zero_stays;
        }
        return ls_ok && ridge_ok && jump_ok;
    });
}

CheckResult check_mse_consistency(const VerifyOptions& o)
{
    return timed(8, "n * mse_hat vs n * mse (n = 1000, R = 500)", [&](std::ostringstream& out) {
        Timer t;
        constexpr Index n = 1000;
        constexpr int R = 500;
        bool ok = true;
        double worst = 0.0;
        for (double b0 : {0.05, 1.5}) {
            const RegressionModel model = RegressionModel::simple(b0);
            const DrawSet draws = DrawSet::generate(model, MCConfig{kC8Draws, o.seed});
            for (FunctionalKind k : kAllFunctionals) {
                const FunctionalSpec spec = FunctionalSpec::of(k, 0.1);
                const double theory = n * mse(model, spec, n, draws).mse;
                const double empirical = n * mse_hat(model, spec, n, R, o.seed).mse_hat;
                const double rel = std::abs(empirical / theory - 1.0);
                worst = std::max(worst, rel);
                if (rel > kC8Relative) {
                    ok = false;
                    out << to_string(k) << "@beta0=" << b0 << " n*mse " << theory << " n*mse_hat " << empirical
                        << "; ";
                }
            }
        }
        out << "14 comparisons, worst relative error " << worst;
        return ok && t.seconds() < kC8Budget;
    });
}

CheckResult check_sc_convergence(const VerifyOptions& o)
{
    return timed(9, "sensitivity curves approach influence functions", [&](std::ostringstream& out) {
        const RegressionModel model = RegressionModel::simple(1.5);
        const DrawSet draws = DrawSet::generate(model, MCConfig{o.n_draws, o.seed});
        const auto grid = contamination_grid(-10.0, 10.0, 11);
        constexpr int kBases = 10;
        bool ok = true;
        for (const FunctionalSpec& spec : influence_specs()) {
            const FunctionalResult fr = compute_functional(model, spec, draws);
            const InfluenceFunction f = InfluenceFunction::prepare(model, spec, fr, draws);
            std::vector<double> iv(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                iv[i] = f(grid[i])(0);
            double mean_med[2] = {0.0, 0.0};
            int down = 0;
            std::size_t missing = 0;
            for (int b = 0; b < kBases; ++b) {
                double med[2];
                for (int which = 0; which < 2; ++which) {
                    const Index n = which == 0 ? 100 : 1000;
                    const std::uint64_t seed = substream_seed(o.seed, Stream::sensitivity_base,
                                                              static_cast<std::uint64_t>(b));
                    const SensitivitySurface sc = sensitivity_curve(sample(model, n, seed), spec, grid, {}, seed);
                    std::vector<double> dev;
                    for (std::size_t i = 0; i < grid.size(); ++i)
                        if (!sc.missing[i])
                            dev.push_back(std::abs(sc.values(static_cast<Index>(i), 0) - iv[i]));
                    missing += sc.missing_count();
                    med[which] = median(dev);
                    mean_med[which] += med[which] / kBases;
                }
                down += med[1] < med[0] ? 1 : 0;
            }
            const bool pass = mean_med[1] < mean_med[0];
            out << spec.name() << " " << mean_med[0] << " -> " << mean_med[1] << " (" << down << "/" << kBases
                << " bases decrease";
            if (missing)
                out << ", " << missing << " missing";
            out << ")" << (pass ? "" : " FAIL") << "; ";
            ok = ok && pass;
        }
        return ok;
    });
}

CheckResult check_robustness_contrast(const VerifyOptions& o)
{
    return timed(10, "sparse LTS vs lasso under 20% vertical outliers", [&](std::ostringstream& out) {
        const RegressionModel model = RegressionModel::simple(1.5);
        constexpr int kSeeds = 20;
        std::vector<double> lts_err;
        std::vector<double> lasso_err;
        int both = 0;
        for (int s = 0; s < kSeeds; ++s) {
            const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(s);
            const Dataset clean = sample(model, 200, seed);
            const Dataset dirty = inject_vertical_outliers(clean, 0.2, 100.0, OutlierPlacement::positive_x, seed);
            FitOptions fo;
            fo.seed = seed;
            const double e_lts = std::abs(fit(dirty, FunctionalSpec::of(FunctionalKind::sparse_lts, 0.1), fo).beta_hat(0) - 1.5);
            const double e_lasso = std::abs(fit(dirty, FunctionalSpec::of(FunctionalKind::lasso, 0.1), fo).beta_hat(0) - 1.5);
            lts_err.push_back(e_lts);
            lasso_err.push_back(e_lasso);
            both += (e_lts < kC10LtsError && e_lasso > kC10LassoError) ? 1 : 0;
        }
        const double ml = median(lts_err);
        const double mr = median(lasso_err);
        out << "median error sparse LTS " << ml << ", lasso " << mr << "; " << both << "/" << kSeeds
            << " data sets meet both bounds individually";
        return ml < kC10LtsError && mr > kC10LassoError;
    });
}

std::vector<CheckResult> run_checks(const VerifyOptions& o, const std::vector<int>& ids)
{
    using Fn = CheckResult (*)(const VerifyOptions&);
    static const Fn all[kCriterionCount] = {check_closed_form_oracle, check_if_finite_eps, check_zero_if,
                                            check_boundedness,        check_tanh_limit,    check_cd_fixed_point,
                                            check_asv,                check_mse_consistency, check_sc_convergence,
                                            check_robustness_contrast};
    std::vector<int> todo = ids;
    if (todo.empty())
        for (int i = 1; i <= kCriterionCount; ++i)
            todo.push_back(i);
    std::sort(todo.begin(), todo.end());
    todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
    std::vector<CheckResult> out;
    for (int id : todo) {
        if (id < 1 || id > kCriterionCount)
            throw std::invalid_argument("unknown criterion " + std::to_string(id));
        out.push_back(all[id - 1](o));
    }
    return out;
}

std::string format_line(const CheckResult& r)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    os << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << ": " << r.name << " [" << r.seconds << " s] "
       << r.detail;
    return os.str();
}

} // namespace robpen
