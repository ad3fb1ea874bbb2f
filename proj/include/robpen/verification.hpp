#pragma once

#include "robpen/diagnostics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace robpen {

// Value of the functional at (1 - eps) H0 + eps delta_pt, solved afresh:
// quadratic losses from the mixture moments, Huber / biweight by IRLS on the
// contaminated draws, sparse LTS (p = 1, normal) from the normal mixture.
VectorXd contaminated_value(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws,
                            const ContaminationPoint& pt, double eps);

struct FiniteEpsSlope {
    VectorXd d1;         // (beta(eps1) - beta(0)) / eps1
    VectorXd d2;         // same for eps2
    VectorXd richardson; // (d2 eps1 - d1 eps2) / (eps1 - eps2)
};

FiniteEpsSlope finite_eps_slope(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws,
                                const ContaminationPoint& pt, double eps1 = 1e-2, double eps2 = 1e-3);

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    std::size_t n_draws = 100000;
};

CheckResult check_closed_form_oracle(const VerifyOptions& o);   // 1
CheckResult check_if_finite_eps(const VerifyOptions& o);        // 2
CheckResult check_zero_if(const VerifyOptions& o);              // 3
CheckResult check_boundedness(const VerifyOptions& o);          // 4
CheckResult check_tanh_limit(const VerifyOptions& o);           // 5
CheckResult check_cd_fixed_point(const VerifyOptions& o);       // 6
CheckResult check_asv(const VerifyOptions& o);                  // 7
CheckResult check_mse_consistency(const VerifyOptions& o);      // 8
CheckResult check_sc_convergence(const VerifyOptions& o);       // 9
CheckResult check_robustness_contrast(const VerifyOptions& o);  // 10

inline constexpr int kCriterionCount = 10;

// Runs the listed criteria (all when empty) in increasing order.
std::vector<CheckResult> run_checks(const VerifyOptions& o, const std::vector<int>& ids = {});

std::string format_line(const CheckResult& r);

} // namespace robpen
