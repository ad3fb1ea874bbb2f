#pragma once

// Independent numerical oracles shared by the unit tests. None of them call
// into the library.

#include <cmath>
#include <functional>

namespace oracle {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// Bisection on the erf-based cdf.
inline double normal_quantile(double p)
{
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// Simple-regression objectives with standard normal x and error sd sigma:
// E[(y - xb)^2] = sigma^2 + (beta0 - b)^2.
inline double lasso_objective(double b, double beta0, double lambda, double sigma = 1.0)
{
    return sigma * sigma + (beta0 - b) * (beta0 - b) + 2.0 * lambda * std::abs(b);
}

inline double scad_j(double z, double lambda, double a)
{
    const double t = std::abs(z);
    if (t <= lambda)
        return t;
    if (t <= a * lambda)
        return lambda * (a + 1.0) / 2.0 - (t - a * lambda) * (t - a * lambda) / (2.0 * (a - 1.0) * lambda);
    return lambda * (a + 1.0) / 2.0;
}

// Trimmed population objective of sparse LTS for simple regression: the
// residual is N(0, s^2), s^2 = sigma^2 + (beta0 - b)^2, the alpha quantile of
// |r| is s q with q the (1 + alpha)/2 normal quantile, and the objective is
// s^2 E[Z^2 1{|Z| <= q}] + alpha lambda |b|, the moment integrated by Simpson.
inline double sparse_lts_objective(double b, double beta0, double lambda, double alpha, double sigma = 1.0)
{
    const double q = normal_quantile(0.5 * (1.0 + alpha));
    const double m = simpson([](double z) { return z * z * normal_pdf(z); }, -q, q, 4000);
    const double s2 = sigma * sigma + (beta0 - b) * (beta0 - b);
    return s2 * m + alpha * lambda * std::abs(b);
}

} // namespace oracle
