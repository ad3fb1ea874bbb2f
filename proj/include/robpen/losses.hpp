#pragma once

namespace robpen {

enum class LossKind { quadratic, huber, biweight };

inline constexpr double kHuberTuning = 1.345;
inline constexpr double kBiweightTuning = 4.685;

// Loss rho applied to the standardized residual z / scale.
//
//   quadratic: rho(u) = u^2
//   huber:     rho(u) = u^2 for |u| <= k, 2k|u| - k^2 otherwise
//   biweight:  rho(u) = 1 - (1 - (u/k)^2)^3 for |u| <= k, 1 otherwise
//
// psi and psi_prime are derivatives with respect to the standardized
// residual u. psi_prime of the Huber loss at |u| = k is the left limit 2.
struct LossSpec {
    LossKind kind = LossKind::quadratic;
    double tuning = 0.0; // k_H or k_BI, unused for quadratic
    double scale = 1.0;

    static LossSpec quadratic() { return {LossKind::quadratic, 0.0, 1.0}; }
    static LossSpec huber(double k = kHuberTuning, double scale = 1.0) { return {LossKind::huber, k, scale}; }
    static LossSpec biweight(double k = kBiweightTuning, double scale = 1.0) { return {LossKind::biweight, k, scale}; }

    LossSpec with_scale(double s) const { return {kind, tuning, s}; }
    void validate() const;
};

double rho(const LossSpec& spec, double z);
double psi(const LossSpec& spec, double z);
double psi_prime(const LossSpec& spec, double z);

// Derivatives of z -> rho(z / scale) with respect to the raw residual z.
double score(const LossSpec& spec, double z);       // psi(u) / scale
double score_slope(const LossSpec& spec, double z); // psi'(u) / scale^2

// IRLS weight w(z) such that the surrogate w(z0) z^2 has the same gradient
// as rho(z / scale) at z0: w = psi(u) / (2 u scale^2), continued by
// psi'(0) / (2 scale^2) at u = 0. Identically 1 for the unit-scale quadratic.
double irls_weight(const LossSpec& spec, double z);

// sup_u |psi(u)|; infinity for the quadratic loss.
double psi_bound(const LossSpec& spec);

const char* to_string(LossKind kind);

} // namespace robpen
