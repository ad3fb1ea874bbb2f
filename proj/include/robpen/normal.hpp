#pragma once

// Standard normal helpers used by the closed forms for normal models.
namespace robpen::normal {

double pdf(double z);
double cdf(double z);
double quantile(double p);

// Quantities of the trimmed normal used by the sparse LTS closed forms:
// q_alpha is the (alpha + 1) / 2 quantile, c1 = alpha - 2 q_alpha phi(q_alpha)
// equals E[Z^2 1{|Z| <= q_alpha}].
struct TrimmedMoments {
    double q_alpha;
    double c1;
};
TrimmedMoments trimmed_moments(double alpha);

// E[Z^2 1{|Z| <= t}] for Z standard normal.
double truncated_second_moment(double t);

} // namespace robpen::normal
