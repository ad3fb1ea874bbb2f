#include "robpen/errors.hpp"
#include "robpen/model.hpp"
#include "robpen/parallel.hpp"

#include <doctest.h>

#include <initializer_list>

#include <cmath>
#include <set>

using namespace robpen;

TEST_SUITE("model")
{
    TEST_CASE("sample examples")
    {
        const auto d0 = sample(RegressionModel::simple(0.0), 100000, 7);
        CHECK(std::abs(d0.y.mean()) < 4e-2);

        const auto d = sample(RegressionModel::simple(1.5), 100000, 11);
        const double mx = d.X.col(0).mean(), my = d.y.mean();
        const double cov = ((d.X.col(0).array() - mx) * (d.y.array() - my)).sum() / (d.n() - 1);
        CHECK(cov == doctest::Approx(1.5).epsilon(0.02));

        const auto again = sample(RegressionModel::simple(1.5), 100000, 11);
        CHECK(again.X == d.X);
        CHECK(again.y == d.y);
        CHECK(sample(RegressionModel::simple(1.5), 100, 12).y != sample(RegressionModel::simple(1.5), 100, 11).y.head(100));
    }

    TEST_CASE("predictors and errors are independent and centered")
    {
        const auto m = RegressionModel::standard(Eigen::Vector3d(1.0, -0.5, 0.0));
        const auto d = sample(m, 200000, 3);
        const VectorXd e = d.y - d.X * m.beta0;
        CHECK(std::abs(e.mean()) < 0.01);
        const MatrixXd c = d.X.transpose() * d.X / static_cast<double>(d.n());
        CHECK((c - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.02);
        CHECK((d.X.transpose() * e / static_cast<double>(d.n())).cwiseAbs().maxCoeff() < 0.01);
    }

    TEST_CASE("expect examples")
    {
        const auto m = RegressionModel::simple(1.5);
        const MCConfig cfg{100000, 5};
        const auto x2 = expect(m, 1, [](const auto& x, double, auto out) { out(0) = x(0) * x(0); }, cfg);
        CHECK(std::abs(x2.mean(0) - 1.0) <= 3 * x2.std_error(0));
        const auto xy = expect(m, 1, [](const auto& x, double y, auto out) { out(0) = x(0) * y; }, cfg);
        CHECK(std::abs(xy.mean(0) - 1.5) <= 3 * xy.std_error(0));
        const auto c = expect(m, 1, [](const auto&, double, auto out) { out(0) = 7.0; }, cfg);
        CHECK(c.mean(0) == 7.0);
        CHECK(c.std_error(0) == 0.0);
    }

    TEST_CASE("expect is reproducible and independent of the thread count")
    {
        const auto m = RegressionModel::simple(0.7);
        const MCConfig cfg{50000, 9};
        auto f = [](const auto& x, double y, auto out) { out(0) = std::sin(x(0) * y); };
        set_thread_count(1);
        const auto a = expect(m, 1, f, cfg);
        set_thread_count(3);
        const auto b = expect(m, 1, f, cfg);
        set_thread_count(1);
        CHECK(a.mean(0) == b.mean(0));
        CHECK(a.std_error(0) == b.std_error(0));
    }

    TEST_CASE("standard error scales as one over root n")
    {
        const auto m = RegressionModel::simple(1.0);
        auto f = [](const auto& x, double y, auto out) { out(0) = std::tanh(x(0) + y); };
        const double s3 = expect(m, 1, f, {1000, 1}).std_error(0);
        const double s4 = expect(m, 1, f, {10000, 1}).std_error(0);
        const double s5 = expect(m, 1, f, {100000, 1}).std_error(0);
        for (double r : {s3 / s4, s4 / s5}) {
            CHECK(r > std::sqrt(10.0) / 2);
            CHECK(r < std::sqrt(10.0) * 2);
        }
    }

    TEST_CASE("point mass mixture")
    {
        const auto m = RegressionModel::simple(1.5);
        const auto draws = DrawSet::generate(m, {20000, 2});
        const auto pt = ContaminationPoint::simple(3.0, -2.0);
        const double eps = 0.1;
        const auto mixed = draws.with_point_mass(pt, eps);
        CHECK(&mixed.xt() == &draws.xt());
        auto f = [](const auto& x, double y, auto out) { out(0) = x(0) * y; };
        const double base = expect(draws, 1, f).mean(0);
        CHECK(expect(mixed, 1, f).mean(0) == doctest::Approx((1 - eps) * base + eps * (-6.0)).epsilon(1e-12));
        CHECK_FALSE(mixed.without_point_mass().atom().has_value());

        const auto g = gram_moments(mixed, VectorXd::Constant(1, 1.5));
        CHECK(g.xy(0) == doctest::Approx(expect(mixed, 1, f).mean(0)).epsilon(1e-12));

        const auto s = draws.slice(100, 50);
        CHECK(s.size() == 50);
        CHECK(s.y()(0) == draws.y()(100));
    }

    TEST_CASE("outlier injection")
    {
        const auto d = sample(RegressionModel::simple(1.5), 200, 4);
        const auto o = inject_vertical_outliers(d, 0.2, 100.0, OutlierPlacement::random_rows, 8);
        CHECK(o.contaminated_rows.size() == 40);
        std::set<Index> rows(o.contaminated_rows.begin(), o.contaminated_rows.end());
        CHECK(rows.size() == 40);
        for (Index i = 0; i < d.n(); ++i)
            CHECK(o.y(i) - d.y(i) == doctest::Approx(rows.count(i) ? 100.0 : 0.0));
        const auto pos = inject_vertical_outliers(d, 0.2, 100.0, OutlierPlacement::positive_x, 8);
        for (Index i : pos.contaminated_rows)
            CHECK(d.X(i, 0) > 0.0);
    }

    TEST_CASE("validation")
    {
        CHECK_THROWS(RegressionModel::simple(1.0, 0.0).validate());
        CHECK_THROWS(RegressionModel::standard(VectorXd(0)).validate());
        Dataset d = sample(RegressionModel::simple(1.0), 10, 1);
        d.y(3) = NAN;
        CHECK_THROWS(d.validate());
        const auto w = sample(RegressionModel::simple(1.0), 10, 1).with_row(VectorXd::Constant(1, 2.0), 3.0);
        CHECK(w.n() == 11);
        CHECK(w.y(10) == 3.0);
    }
}
