#include "robpen/coordinate.hpp"
#include "robpen/errors.hpp"

#include <doctest.h>

#include <initializer_list>

#include <Eigen/Cholesky>

#include <random>

using namespace robpen;

namespace {

struct Problem {
    MatrixXd G;
    VectorXd c;
};

Problem random_problem(int p, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    MatrixXd A(3 * p, p);
    for (Index i = 0; i < A.size(); ++i)
        A.data()[i] = z(rng);
    VectorXd y(3 * p);
    for (Index i = 0; i < y.size(); ++i)
        y(i) = z(rng);
    return {A.transpose() * A / (3.0 * p), A.transpose() * y / (3.0 * p)};
}

} // namespace

TEST_SUITE("coordinate")
{
    TEST_CASE("unpenalized and ridge match a direct solve")
    {
        const auto pr = random_problem(5, 1);
        const auto ls = solve_penalized_quadratic(pr.G, pr.c, PenaltySpec::none(), VectorXd::Zero(5), 1e-12, 100);
        CHECK((ls.beta - pr.G.ldlt().solve(pr.c)).norm() < 1e-10);
        const MatrixXd Gr = pr.G + 0.6 * MatrixXd::Identity(5, 5);
        const auto r = solve_penalized_quadratic(pr.G, pr.c, PenaltySpec::l2(0.3), VectorXd::Zero(5), 1e-12, 100);
        CHECK((r.beta - Gr.ldlt().solve(pr.c)).norm() < 1e-10);
    }

    TEST_CASE("lasso satisfies KKT")
    {
        for (unsigned seed = 1; seed <= 5; ++seed) {
            const auto pr = random_problem(6, seed);
            const double lambda = 0.15;
            const auto s = solve_penalized_quadratic(pr.G, pr.c, PenaltySpec::l1(lambda), VectorXd::Zero(6), 1e-13, 10000);
            REQUIRE(s.converged);
            const VectorXd grad = pr.c - pr.G * s.beta;
            for (Index j = 0; j < 6; ++j) {
                if (s.beta(j) != 0.0)
                    CHECK(grad(j) == doctest::Approx(lambda * (s.beta(j) > 0 ? 1 : -1)).epsilon(1e-9));
                else
                    CHECK(std::abs(grad(j)) <= lambda + 1e-12);
            }
        }
    }

    TEST_CASE("tanh surrogate approaches the lasso")
    {
        const auto pr = random_problem(4, 7);
        const auto l = solve_penalized_quadratic(pr.G, pr.c, PenaltySpec::l1(0.1), VectorXd::Zero(4), 1e-13, 10000);
        double prev = INFINITY;
        for (double K : {10.0, 100.0, 1000.0}) {
            const auto t = solve_penalized_quadratic(pr.G, pr.c, PenaltySpec::tanh_k(0.1, K), l.beta, 1e-13, 10000);
            const double d = (t.beta - l.beta).cwiseAbs().maxCoeff();
            CHECK(d < prev);
            prev = d;
        }
        CHECK(prev < 0.02);
    }

    TEST_CASE("single coordinate updates")
    {
        CHECK(coordinate_update(1.0, 1.5, PenaltySpec::l1(0.1), 0.0) == doctest::Approx(1.4));
        CHECK(coordinate_update(2.0, 0.05, PenaltySpec::l1(0.1), 1.0) == 0.0);
        CHECK(coordinate_update(1.0, 1.5, PenaltySpec::scad(0.1), 0.0) == doctest::Approx(1.5));
        CHECK(coordinate_update(1.0, 0.3, PenaltySpec::scad(0.1), 0.0) == doctest::Approx((2.7 * 0.3 - 0.37) / 1.7));
        CHECK_THROWS_AS(coordinate_update(0.2, 0.3, PenaltySpec::scad(0.1, 3.7), 0.0), NumericalError);
    }

    TEST_CASE("iteration limit reports non-convergence")
    {
        const auto pr = random_problem(8, 3);
        const auto s = solve_penalized_quadratic(pr.G, pr.c, PenaltySpec::l1(0.01), VectorXd::Zero(8), 1e-15, 1);
        CHECK_FALSE(s.converged);
        CHECK(s.beta.allFinite());
    }
}
