#pragma once

namespace robpen {

enum class PenaltyKind { none, l1, l2, scad, tanh_k };

inline constexpr double kScadA = 3.7;

// Penalty J in the objective E[rho] + 2 lambda sum_j J(beta_j).
//
//   none:   J = 0
//   l1:     J(z) = |z|
//   l2:     J(z) = z^2
//   scad:   J(z) = |z|                                 for |z| <= lambda
//                  -(|z| - a lambda)^2 / (2(a-1)lambda)
//                    + lambda (a+1)/2                  for lambda < |z| <= a lambda
//                  lambda (a+1)/2                      otherwise
//   tanh_k: J(z) = z tanh(K z), a smooth surrogate of |z| with |J - |z|| <= 1/K
//
// sign(0) is 0 throughout. j_prime and j_second of l1 and scad are undefined
// at z = 0 and throw; solvers handle zero coefficients with
// soft_threshold_test. At the scad knots |z| = lambda and |z| = a lambda,
// j_second takes the value of the branch containing the knot.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::none;
    double lambda = 0.0;
    double a = kScadA;
    double K = 0.0;

    static PenaltySpec none() { return {PenaltyKind::none, 0.0, kScadA, 0.0}; }
    static PenaltySpec l1(double lambda) { return {PenaltyKind::l1, lambda, kScadA, 0.0}; }
    static PenaltySpec l2(double lambda) { return {PenaltyKind::l2, lambda, kScadA, 0.0}; }
    static PenaltySpec scad(double lambda, double a = kScadA) { return {PenaltyKind::scad, lambda, a, 0.0}; }
    static PenaltySpec tanh_k(double lambda, double K) { return {PenaltyKind::tanh_k, lambda, kScadA, K}; }

    // True for penalties with a kink at zero (exact zeros are possible).
    bool sparse() const { return kind == PenaltyKind::l1 || kind == PenaltyKind::scad; }
    void validate() const;
};

double j(const PenaltySpec& spec, double z);
double j_prime(const PenaltySpec& spec, double z);
double j_second(const PenaltySpec& spec, double z);

// Zero-region test for an l1 coordinate: true iff |score| <= lambda, where
// score = E[x_j * partial residual]. The coefficient is then exactly zero.
bool soft_threshold_test(const PenaltySpec& spec, double score, double second_moment);

double sign(double z);
double soft_threshold(double z, double t);

const char* to_string(PenaltyKind kind);

} // namespace robpen
