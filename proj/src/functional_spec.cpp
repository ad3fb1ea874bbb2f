#include "robpen/functional_spec.hpp"

#include "robpen/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace robpen {

LossSpec FunctionalSpec::loss() const
{
    switch (kind) {
    case FunctionalKind::huber_l1: return LossSpec::huber(tuning > 0.0 ? tuning : kHuberTuning);
    case FunctionalKind::biweight_l1: return LossSpec::biweight(tuning > 0.0 ? tuning : kBiweightTuning);
    default: return LossSpec::quadratic();
    }
}

PenaltySpec FunctionalSpec::penalty() const
{
    switch (kind) {
    case FunctionalKind::least_squares: return PenaltySpec::none();
    case FunctionalKind::ridge: return PenaltySpec::l2(lambda);
    case FunctionalKind::scad: return PenaltySpec::scad(lambda, a);
    default: return PenaltySpec::l1(lambda);
    }
}

SparseLTSParams FunctionalSpec::lts() const
{
    return SparseLTSParams{alpha, lambda};
}

bool FunctionalSpec::sparse() const
{
    return kind != FunctionalKind::least_squares && kind != FunctionalKind::ridge;
}

std::string FunctionalSpec::name() const
{
    return to_string(kind);
}

void FunctionalSpec::validate() const
{
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be finite and nonnegative");
    if (tuning < 0.0 || !std::isfinite(tuning))
        throw std::invalid_argument("tuning constant must be positive");
    if (kind == FunctionalKind::sparse_lts)
        lts().validate();
    else {
        loss().validate();
        penalty().validate();
    }
}

const char* to_string(FunctionalKind kind)
{
    switch (kind) {
    case FunctionalKind::least_squares: return "ls";
    case FunctionalKind::ridge: return "ridge";
    case FunctionalKind::lasso: return "lasso";
    case FunctionalKind::scad: return "scad";
    case FunctionalKind::huber_l1: return "huber_l1";
    case FunctionalKind::biweight_l1: return "biweight_l1";
    case FunctionalKind::sparse_lts: return "sparse_lts";
    }
    return "?";
}

FunctionalKind parse_functional_kind(const std::string& name)
{
    for (FunctionalKind k : kAllFunctionals)
        if (name == to_string(k))
            return k;
    throw ConfigError("unknown functional '" + name + "'");
}

FunctionalResult compute_functional(const RegressionModel& model, const FunctionalSpec& spec, const DrawSet& draws,
                                    const SolverOptions& opts)
{
    model.validate();
    spec.validate();
    const bool simple = model.p() == 1;
    switch (spec.kind) {
    case FunctionalKind::least_squares:
    case FunctionalKind::ridge:
    case FunctionalKind::lasso:
    case FunctionalKind::scad:
        if (simple && spec.kind == FunctionalKind::lasso)
            return lasso_simple(model, spec.lambda);
        if (simple && spec.kind == FunctionalKind::scad)
            return scad_simple(model, spec.lambda, spec.a);
        if (spec.kind == FunctionalKind::ridge)
            return ridge_closed_form(model, spec.lambda);
        return quadratic_functional(model, analytic_moments(model), spec.penalty(), std::nullopt, opts);
    case FunctionalKind::huber_l1:
    case FunctionalKind::biweight_l1:
        return irls(model, spec.loss(), spec.penalty(), draws, std::nullopt, opts);
    case FunctionalKind::sparse_lts:
        if (simple && model.is_normal())
            return sparse_lts_simple(model, spec.lts());
        if (model.p() <= 2) {
            const double w = model.beta0.cwiseAbs().maxCoeff() + 3.0;
            return oracle_minimize(model, PopulationObjective::sparse_lts_objective(spec.lts()), draws,
                                   GridSpec::symmetric(model.p(), w, 41, 1e-4), 0);
        }
        throw std::invalid_argument("sparse LTS functional is available for p <= 2 only");
    }
    throw std::logic_error("unhandled functional kind");
}

} // namespace robpen
