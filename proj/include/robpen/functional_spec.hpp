#pragma once

#include "robpen/functionals.hpp"

#include <array>
#include <string>

namespace robpen {

// The seven functionals compared throughout.
enum class FunctionalKind { least_squares, ridge, lasso, scad, huber_l1, biweight_l1, sparse_lts };

inline constexpr std::array<FunctionalKind, 7> kAllFunctionals = {
    FunctionalKind::least_squares, FunctionalKind::ridge,       FunctionalKind::lasso,     FunctionalKind::scad,
    FunctionalKind::huber_l1,      FunctionalKind::biweight_l1, FunctionalKind::sparse_lts};

struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::least_squares;
    double lambda = 0.0;
    double a = kScadA;     // scad
    double tuning = 0.0;   // huber / biweight; 0 selects the default constant
    double alpha = 0.75;   // sparse LTS

    static FunctionalSpec of(FunctionalKind kind, double lambda)
    {
        FunctionalSpec s;
        s.kind = kind;
        s.lambda = lambda;
        return s;
    }

    LossSpec loss() const;
    PenaltySpec penalty() const;
    SparseLTSParams lts() const;
    bool sparse() const; // l1-type penalty: the functional can be exactly zero
    std::string name() const;
    void validate() const;
};

const char* to_string(FunctionalKind kind);
// Accepts the names printed by to_string ("ls", "ridge", "lasso", "scad",
// "huber_l1", "biweight_l1", "sparse_lts"); throws ConfigError otherwise.
FunctionalKind parse_functional_kind(const std::string& name);

// Population value at H0. Quadratic losses use the exact model moments,
// sparse LTS the closed form (p = 1, normal) or the oracle (p = 2), and the
// robust M-functionals IRLS on `draws` started at beta0.
FunctionalResult compute_functional(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws,
                                    const SolverOptions& opts = {});

} // namespace robpen
