#include "support.hpp"

#include "robpen/normal.hpp"

#include <doctest.h>

#include <initializer_list>

namespace nm = robpen::normal;

TEST_SUITE("normal")
{
    TEST_CASE("quantile agrees with erf bisection")
    {
        for (double p : {1e-6, 0.01, 0.2, 0.5, 0.875, 0.975, 1e-9})
            CHECK(nm::quantile(p) == doctest::Approx(oracle::normal_quantile(p)).epsilon(1e-12));
        CHECK_THROWS(nm::quantile(0.0));
        CHECK_THROWS(nm::quantile(1.0));
    }

    TEST_CASE("trimmed moments at alpha = 0.75")
    {
        const auto t = nm::trimmed_moments(0.75);
        const double q = oracle::normal_quantile(0.875);
        const double c1 = oracle::simpson([](double z) { return z * z * oracle::normal_pdf(z); }, -q, q);
        CHECK(t.q_alpha == doctest::Approx(q).epsilon(1e-12));
        CHECK(t.c1 == doctest::Approx(c1).epsilon(1e-10));
        // frozen
        CHECK(t.q_alpha == doctest::Approx(1.1503494).epsilon(1e-7));
        CHECK(t.c1 == doctest::Approx(0.2763930).epsilon(1e-6));
    }

    TEST_CASE("truncated second moment")
    {
        for (double t : {0.1, 0.5, 1.0, 2.5, 6.0}) {
            const double ref = oracle::simpson([](double z) { return z * z * oracle::normal_pdf(z); }, -t, t);
            CHECK(nm::truncated_second_moment(t) == doctest::Approx(ref).epsilon(1e-10));
        }
        CHECK(nm::truncated_second_moment(0.0) == 0.0);
        CHECK(nm::truncated_second_moment(INFINITY) == 1.0);
        CHECK(nm::trimmed_moments(1.0).c1 == 1.0);
        CHECK_THROWS(nm::trimmed_moments(0.0));
    }
}
