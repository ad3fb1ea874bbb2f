#include "robpen/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace robpen {

void LossSpec::validate() const
{
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("loss scale must be positive");
    if (kind != LossKind::quadratic && !(tuning > 0.0))
        throw std::invalid_argument("loss tuning constant must be positive");
}

double rho(const LossSpec& spec, double z)
{
    const double u = z / spec.scale;
    const double k = spec.tuning;
    switch (spec.kind) {
    case LossKind::quadratic:
        return u * u;
    case LossKind::huber: {
        const double a = std::abs(u);
        return a <= k ? u * u : 2.0 * k * a - k * k;
    }
    case LossKind::biweight: {
        if (std::abs(u) > k)
            return 1.0;
        const double t = 1.0 - (u / k) * (u / k);
        return 1.0 - t * t * t;
    }
    }
    return 0.0;
}

double psi(const LossSpec& spec, double z)
{
    const double u = z / spec.scale;
    const double k = spec.tuning;
    switch (spec.kind) {
    case LossKind::quadratic:
        return 2.0 * u;
    case LossKind::huber:
        if (std::abs(u) <= k)
            return 2.0 * u;
        return u > 0 ? 2.0 * k : -2.0 * k;
    case LossKind::biweight: {
        if (std::abs(u) > k)
            return 0.0;
        const double t = 1.0 - (u / k) * (u / k);
        return 6.0 * u / (k * k) * t * t;
    }
    }
    return 0.0;
}

double psi_prime(const LossSpec& spec, double z)
{
    const double u = z / spec.scale;
    const double k = spec.tuning;
    switch (spec.kind) {
    case LossKind::quadratic:
        return 2.0;
    case LossKind::huber:
        return std::abs(u) <= k ? 2.0 : 0.0;
    case LossKind::biweight: {
        if (std::abs(u) > k)
            return 0.0;
        const double v = (u / k) * (u / k);
        return 6.0 / (k * k) * (1.0 - v) * (1.0 - 5.0 * v);
    }
    }
    return 0.0;
}

double irls_weight(const LossSpec& spec, double z)
{
    const double u = z / spec.scale;
    const double s2 = spec.scale * spec.scale;
    if (u == 0.0)
        return 0.5 * psi_prime(spec, 0.0) / s2;
    return psi(spec, z) / (2.0 * u) / s2;
}

double score(const LossSpec& spec, double z) { return psi(spec, z) / spec.scale; }

double score_slope(const LossSpec& spec, double z) { return psi_prime(spec, z) / (spec.scale * spec.scale); }

double psi_bound(const LossSpec& spec)
{
    switch (spec.kind) {
    case LossKind::quadratic:
        return std::numeric_limits<double>::infinity();
    case LossKind::huber:
        return 2.0 * spec.tuning;
    case LossKind::biweight:
        // maximum of 6u/k^2 (1 - u^2/k^2)^2, attained at u = k / sqrt(5)
        return 6.0 / spec.tuning * (1.0 / std::sqrt(5.0)) * (16.0 / 25.0);
    }
    return 0.0;
}

const char* to_string(LossKind kind)
{
    switch (kind) {
    case LossKind::quadratic: return "quadratic";
    case LossKind::huber: return "huber";
    case LossKind::biweight: return "biweight";
    }
    return "?";
}

} // namespace robpen
