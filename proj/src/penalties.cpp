#include "robpen/penalties.hpp"

#include <cmath>
#include <stdexcept>

namespace robpen {

namespace {

void require_nonzero(const PenaltySpec& spec, double z)
{
    if (spec.sparse() && z == 0.0)
        throw std::domain_error("penalty derivative queried at zero for a non-differentiable penalty");
}

double sech2(double u)
{
    // 1 / cosh^2, written to avoid overflow for large |u|
    const double e = std::exp(-2.0 * std::abs(u));
    return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

} // namespace

void PenaltySpec::validate() const
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("penalty lambda must be nonnegative");
    if (kind == PenaltyKind::scad && !(a > 2.0))
        throw std::invalid_argument("scad parameter a must exceed 2");
    if (kind == PenaltyKind::tanh_k && !(K > 0.0))
        throw std::invalid_argument("tanh penalty needs K > 0");
}

double sign(double z)
{
    return z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0);
}

double soft_threshold(double z, double t)
{
    const double a = std::abs(z) - t;
    return a > 0 ? sign(z) * a : 0.0;
}

double j(const PenaltySpec& spec, double z)
{
    const double a = std::abs(z);
    switch (spec.kind) {
    case PenaltyKind::none:
        return 0.0;
    case PenaltyKind::l1:
        return a;
    case PenaltyKind::l2:
        return z * z;
    case PenaltyKind::scad: {
        const double lam = spec.lambda;
        if (a <= lam)
            return a;
        if (a <= spec.a * lam)
            return -(a - spec.a * lam) * (a - spec.a * lam) / (2.0 * (spec.a - 1.0) * lam) + lam * (spec.a + 1.0) / 2.0;
        return lam * (spec.a + 1.0) / 2.0;
    }
    case PenaltyKind::tanh_k:
        return z * std::tanh(spec.K * z);
    }
    return 0.0;
}

double j_prime(const PenaltySpec& spec, double z)
{
    require_nonzero(spec, z);
    const double a = std::abs(z);
    switch (spec.kind) {
    case PenaltyKind::none:
        return 0.0;
    case PenaltyKind::l1:
        return sign(z);
    case PenaltyKind::l2:
        return 2.0 * z;
    case PenaltyKind::scad: {
        const double lam = spec.lambda;
        if (a <= lam)
            return sign(z);
        if (a <= spec.a * lam)
            return sign(z) * (spec.a * lam - a) / ((spec.a - 1.0) * lam);
        return 0.0;
    }
    case PenaltyKind::tanh_k: {
        const double u = spec.K * z;
        return std::tanh(u) + u * sech2(u);
    }
    }
    return 0.0;
}

double j_second(const PenaltySpec& spec, double z)
{
    require_nonzero(spec, z);
    const double a = std::abs(z);
    switch (spec.kind) {
    case PenaltyKind::none:
    case PenaltyKind::l1:
        return 0.0;
    case PenaltyKind::l2:
        return 2.0;
    case PenaltyKind::scad: {
        const double lam = spec.lambda;
        if (a <= lam || a > spec.a * lam)
            return 0.0;
        return -1.0 / ((spec.a - 1.0) * lam);
    }
    case PenaltyKind::tanh_k: {
        const double u = spec.K * z;
        return 2.0 * spec.K * sech2(u) * (1.0 - u * std::tanh(u));
    }
    }
    return 0.0;
}

bool soft_threshold_test(const PenaltySpec& spec, double score, double second_moment)
{
    if (spec.kind != PenaltyKind::l1)
        throw std::invalid_argument("soft-threshold test applies to the l1 penalty only");
    if (!(second_moment > 0.0))
        throw std::invalid_argument("second moment must be positive");
    return std::abs(score) <= spec.lambda;
}

const char* to_string(PenaltyKind kind)
{
    switch (kind) {
    case PenaltyKind::none: return "none";
    case PenaltyKind::l1: return "l1";
    case PenaltyKind::l2: return "l2";
    case PenaltyKind::scad: return "scad";
    case PenaltyKind::tanh_k: return "tanh_k";
    }
    return "?";
}

} // namespace robpen
