#include "robpen/errors.hpp"
#include "robpen/influence.hpp"
#include "robpen/normal.hpp"
#include "robpen/verification.hpp"

#include <doctest.h>

#include <initializer_list>

#include <Eigen/Cholesky>

#include <cmath>

using namespace robpen;

namespace {

ContaminationPoint pt1(double x, double y) { return ContaminationPoint::simple(x, y); }

// Independent finite-eps oracle for quadratic-loss functionals: solve the
// mixture normal equations directly.
double ridge_mixture(double b0, double lambda, double x0, double y0, double eps)
{
    const double g = (1 - eps) + eps * x0 * x0;
    const double c = (1 - eps) * b0 + eps * x0 * y0;
    return c / (g + 2 * lambda);
}

} // namespace

TEST_SUITE("influence")
{
    TEST_CASE("least squares")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto d = DrawSet::generate(m, {10000, 1});
        const auto s = FunctionalSpec::of(FunctionalKind::least_squares, 0.0);
        const auto f = InfluenceFunction::prepare(m, s, compute_functional(m, s, d), d);
        CHECK(f(pt1(1.0, 1.5))(0) == doctest::Approx(0.0).scale(1));
        CHECK(f(pt1(2.0, 0.0))(0) == doctest::Approx(-6.0));
    }

    TEST_CASE("ridge")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto fr = ridge_closed_form(m, 0.1);
        CHECK(if_ridge(m, fr, 0.1, pt1(0, 0))(0) == doctest::Approx(-0.208333).epsilon(1e-6));
        const auto fr0 = ridge_closed_form(m, 0.0);
        CHECK(if_ridge(m, fr0, 0.0, pt1(2, 1))(0) == doctest::Approx(2 * (1 - 3.0)));
        for (auto [x0, y0] : {std::pair{0.0, 0.0}, {2.0, -1.0}, {-3.0, 5.0}}) {
            const double e = 1e-7;
            const double fd = (ridge_mixture(1.5, 0.1, x0, y0, e) - ridge_mixture(1.5, 0.1, x0, y0, 0)) / e;
            CHECK(if_ridge(m, fr, 0.1, pt1(x0, y0))(0) == doctest::Approx(fd).epsilon(1e-5));
        }
        double prev = 0.0;
        for (double t = 1.0; t <= 64.0; t *= 2) {
            const double v = std::abs(if_ridge(m, fr, 0.1, pt1(t, t * fr.beta(0) + 1.0))(0));
            CHECK(v > prev);
            prev = v;
        }
    }

    TEST_CASE("lasso simple")
    {
        const auto m = RegressionModel::simple(1.5);
        CHECK(if_lasso_simple(m, 0.1, pt1(0, 0)) == doctest::Approx(-0.1));
        CHECK(if_lasso_simple(m, 0.1, pt1(1, 1.5)) == doctest::Approx(0.0).scale(1));
        const auto small = RegressionModel::simple(0.05);
        for (double x = -10; x <= 10; x += 2.5)
            for (double y = -10; y <= 10; y += 2.5)
                CHECK(if_lasso_simple(small, 0.1, pt1(x, y)) == 0.0);
        // symmetry under (x0, y0) -> (-x0, -y0)
        for (double x = -5; x <= 5; x += 1.25)
            CHECK(if_lasso_simple(m, 0.1, pt1(x, 2 * x - 1)) == doctest::Approx(if_lasso_simple(m, 0.1, pt1(-x, 1 - 2 * x))));
    }

    TEST_CASE("lasso multi and the coordinate-descent recursion")
    {
        const auto m = RegressionModel::standard(Eigen::Vector2d(1.5, 0.0));
        const auto mom = analytic_moments(m);
        const VectorXd beta = quadratic_functional(m, mom, PenaltySpec::l1(0.1)).beta;
        CHECK(beta(1) == 0.0);
        for (double y0 : {-3.0, 0.0, 2.0}) {
            const ContaminationPoint pt{Eigen::Vector2d(1.0, 1.0), y0};
            const VectorXd v = if_lasso_multi(mom, beta, pt);
            CHECK(v(1) == 0.0);
            CHECK(v(0) == doctest::Approx(1.0 * (y0 - 1.4) - (1.5 - 1.4)));
            const auto fp = if_lasso_cd_fixed_point(mom, 0.1, beta, pt);
            CHECK(fp.converged);
            CHECK((fp.value - v).cwiseAbs().maxCoeff() < 1e-10);
        }
        const auto m1 = RegressionModel::simple(1.5);
        const auto b1 = lasso_simple(m1, 0.1).beta;
        for (double y0 : {-1.0, 4.0})
            CHECK(if_lasso_multi(analytic_moments(m1), b1, pt1(2.0, y0))(0) ==
                  doctest::Approx(if_lasso_simple(m1, 0.1, pt1(2.0, y0))));
    }

    TEST_CASE("tanh limit")
    {
        const auto m = RegressionModel::standard(Eigen::Vector2d(1.5, 0.0));
        const ContaminationPoint pt{Eigen::Vector2d(2.0, -1.0), 3.0};
        const auto steps = if_lasso_tanh_limit(m, 0.1, pt, {10, 100, 1000, 10000});
        for (std::size_t i = 1; i < steps.size(); ++i)
            CHECK(steps[i].deviation < steps[i - 1].deviation);
        CHECK(steps.back().deviation < 1e-2);

        const auto z = RegressionModel::standard(Eigen::Vector2d(0.0, 0.0));
        const auto zs = if_lasso_tanh_limit(z, 0.1, pt, {10, 1000, 100000});
        CHECK(zs.back().value.cwiseAbs().maxCoeff() < zs.front().value.cwiseAbs().maxCoeff());
        CHECK(zs.back().value.cwiseAbs().maxCoeff() < 1e-2);
    }

    TEST_CASE("sparse LTS")
    {
        const SparseLTSParams p{0.75, 0.1};
        const auto m = RegressionModel::simple(1.5);
        const auto fr = sparse_lts_simple(m, p);
        const auto tm = normal::trimmed_moments(0.75);
        const double b = fr.beta(0);
        const double trimmed = (b - 1.5) + tm.q_alpha * tm.q_alpha * 0.75 * (1.5 - b) / tm.c1;
        CHECK(if_sparse_lts(m, fr, p, pt1(10, -10)) == doctest::Approx(trimmed));
        CHECK(if_sparse_lts(m, fr, p, pt1(5, -20)) == doctest::Approx(trimmed));

        const auto small = RegressionModel::simple(0.1);
        const auto frs = sparse_lts_simple(small, p);
        for (double x = -10; x <= 10; x += 2.5)
            for (double y = -10; y <= 10; y += 2.5)
                CHECK(if_sparse_lts(small, frs, p, pt1(x, y)) == 0.0);
        for (double x = -4; x <= 4; x += 0.5)
            CHECK(if_sparse_lts(m, fr, p, pt1(x, 0.3 * x + 0.2)) ==
                  doctest::Approx(if_sparse_lts(m, fr, p, pt1(-x, -0.3 * x - 0.2))));
    }

    TEST_CASE("finite-eps agreement")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto d = DrawSet::generate(m, {20000, 2});
        for (auto k : {FunctionalKind::ridge, FunctionalKind::lasso, FunctionalKind::scad, FunctionalKind::sparse_lts}) {
            const auto s = FunctionalSpec::of(k, 0.1);
            const auto f = InfluenceFunction::prepare(m, s, compute_functional(m, s, d), d);
            for (auto [x0, y0] : {std::pair{1.0, 1.5}, {2.0, -2.0}, {-1.0, 2.0}}) {
                const auto sl = finite_eps_slope(m, s, d, pt1(x0, y0));
                CHECK(sl.richardson(0) == doctest::Approx(f(pt1(x0, y0))(0)).epsilon(0.02).scale(1e-3));
            }
        }
    }

    TEST_CASE("robust M influence is bounded for bad leverage points")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto d = DrawSet::generate(m, {50000, 3});
        const auto s = FunctionalSpec::of(FunctionalKind::biweight_l1, 0.04);
        const auto f = InfluenceFunction::prepare(m, s, compute_functional(m, s, d), d);
        const double far = f(pt1(10, -10))(0);
        CHECK(far == doctest::Approx(f(pt1(20, -30))(0)));
        CHECK(std::isfinite(f.std_error(pt1(1, 1))(0)));

        const auto h = FunctionalSpec::of(FunctionalKind::huber_l1, 0.04);
        const auto fh = InfluenceFunction::prepare(m, h, compute_functional(m, h, d), d);
        double prev = 0.0;
        for (double t = 2; t <= 10; t += 2) {
            const double v = std::abs(fh(pt1(t, -t))(0));
            CHECK(v > prev);
            prev = v;
        }
    }

    TEST_CASE("zero functional gives identically zero influence")
    {
        const auto m = RegressionModel::simple(0.0);
        const auto d = DrawSet::generate(m, {20000, 4});
        for (auto k : {FunctionalKind::lasso, FunctionalKind::scad, FunctionalKind::huber_l1, FunctionalKind::biweight_l1,
                       FunctionalKind::sparse_lts}) {
            const auto s = FunctionalSpec::of(k, k == FunctionalKind::huber_l1 || k == FunctionalKind::biweight_l1 ? 0.04 : 0.1);
            const auto f = InfluenceFunction::prepare(m, s, compute_functional(m, s, d), d);
            const auto surf = if_surface(f, contamination_grid(-10, 10, 11), functional_id(m, s));
            CHECK(surf.values.cwiseAbs().maxCoeff() == 0.0);
        }
    }

    TEST_CASE("contamination grid ordering")
    {
        const auto g = contamination_grid(-1, 1, 3);
        REQUIRE(g.size() == 9);
        CHECK(g[0].x0(0) == -1);
        CHECK(g[0].y0 == -1);
        CHECK(g[1].x0(0) == -1);
        CHECK(g[1].y0 == 0);
        CHECK(g[3].x0(0) == 0);
    }

    TEST_CASE("singular active block")
    {
        QuadraticMoments mom{MatrixXd::Zero(1, 1), VectorXd::Zero(1)};
        CHECK_THROWS_AS(if_lasso_multi(mom, VectorXd::Constant(1, 1.0), pt1(1, 1)), NumericalError);
    }
}
