#include "robpen/normal.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace robpen::normal {

namespace {
const boost::math::normal_distribution<double> kStd(0.0, 1.0);
}

double pdf(double z) { return boost::math::pdf(kStd, z); }

double cdf(double z) { return boost::math::cdf(kStd, z); }

double quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal quantile needs p in (0, 1)");
    return boost::math::quantile(kStd, p);
}

TrimmedMoments trimmed_moments(double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0) && alpha != 1.0)
        throw std::domain_error("trimming fraction must lie in (0, 1]");
    if (alpha == 1.0)
        return {std::numeric_limits<double>::infinity(), 1.0};
    const double q = quantile((alpha + 1.0) / 2.0);
    return {q, alpha - 2.0 * q * pdf(q)};
}

double truncated_second_moment(double t)
{
    if (t <= 0.0)
        return 0.0;
    if (std::isinf(t))
        return 1.0;
    return (2.0 * cdf(t) - 1.0) - 2.0 * t * pdf(t);
}

} // namespace robpen::normal
