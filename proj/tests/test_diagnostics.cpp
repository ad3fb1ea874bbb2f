#include "robpen/diagnostics.hpp"
#include "robpen/errors.hpp"

#include <doctest.h>

#include <initializer_list>

#include <Eigen/Cholesky>

#include <cmath>

using namespace robpen;

TEST_SUITE("diagnostics")
{
    TEST_CASE("least-squares sensitivity curve is an exact refit")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto d = sample(m, 50, 1);
        const auto s = FunctionalSpec::of(FunctionalKind::least_squares, 0.0);
        const auto g = contamination_grid(-4, 4, 5);
        const auto sc = sensitivity_curve(d, s, g);
        CHECK(sc.missing_count() == 0);
        const double b = d.X.col(0).dot(d.y) / d.X.col(0).squaredNorm();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x0 = g[i].x0(0), y0 = g[i].y0;
            const double b1 = (d.X.col(0).dot(d.y) + x0 * y0) / (d.X.col(0).squaredNorm() + x0 * x0);
            CHECK(sc.values(static_cast<Index>(i), 0) == doctest::Approx(51 * (b1 - b)).epsilon(1e-8).scale(1));
        }
        const std::vector<ContaminationPoint> zero = {ContaminationPoint::simple(0.0, 0.0)};
        CHECK(sensitivity_curve(d, s, zero).values(0, 0) == doctest::Approx(0.0).scale(1));
    }

    TEST_CASE("ASV examples")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto d = DrawSet::generate(m, {100000, 2});
        const auto ls = asv(m, FunctionalSpec::of(FunctionalKind::least_squares, 0.0), d);
        CHECK(std::abs(ls.asv(0, 0) - 1.0) <= 3 * ls.mc_stderr(0, 0));

        double prev = INFINITY;
        for (double lambda : {0.0, 0.5, 1.0, 5.0}) {
            const double v = asv(m, FunctionalSpec::of(FunctionalKind::ridge, lambda), d).asv(0, 0);
            CHECK(v < prev);
            prev = v;
        }
        const auto small = RegressionModel::simple(0.05);
        const auto ds = DrawSet::generate(small, {20000, 3});
        for (auto k : {FunctionalKind::lasso, FunctionalKind::sparse_lts}) {
            const auto r = asv(small, FunctionalSpec::of(k, 0.1), ds);
            CHECK(r.asv(0, 0) == 0.0);
            CHECK(r.mc_stderr(0, 0) == 0.0);
        }
    }

    TEST_CASE("MSE formula")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto d = DrawSet::generate(m, {50000, 4});
        const auto s = FunctionalSpec::of(FunctionalKind::lasso, 0.1);
        const auto r = asv(m, s, d);
        for (Index n : {10, 100, 100000}) {
            const auto e = mse(r, m, n);
            CHECK(e.bias_sq == doctest::Approx(0.01));
            CHECK(e.mse == doctest::Approx(r.asv(0, 0) / static_cast<double>(n) + 0.01));
        }
        CHECK(mse(m, s, 1000000, d).mse == doctest::Approx(0.01).epsilon(1e-3));
    }

    TEST_CASE("mse_hat with two identical seeds")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto s = FunctionalSpec::of(FunctionalKind::lasso, 0.1);
        const auto h = mse_hat(m, s, 100, std::vector<std::uint64_t>{17, 17});
        const auto f = fit(sample(m, 100, 17), s);
        CHECK(h.mse_hat == doctest::Approx((f.beta_hat - m.beta0).squaredNorm()).epsilon(1e-14));
        CHECK(h.std_error == 0.0);
        CHECK(h.used == 2);
    }

    TEST_CASE("least squares n mse_hat approaches one")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto h = mse_hat(m, FunctionalSpec::of(FunctionalKind::least_squares, 0.0), 1000, 500, 5);
        CHECK(1000 * h.mse_hat == doctest::Approx(1.0).epsilon(0.15));
    }

    TEST_CASE("mse_hat is reproducible")
    {
        const auto m = RegressionModel::simple(0.05);
        const auto s = FunctionalSpec::of(FunctionalKind::huber_l1, 0.1);
        const auto a = mse_hat(m, s, 100, 20, 3);
        const auto b = mse_hat(m, s, 100, 20, 3);
        CHECK(a.mse_hat == b.mse_hat);
        CHECK(a.excluded == 0);
    }
}
