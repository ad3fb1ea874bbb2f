#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace robpen {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class ErrorFamily { normal, laplace };

// Population regression model y = x'beta0 + e with independent centered
// normal predictors and a symmetric error of standard deviation sigma.
struct RegressionModel {
    VectorXd beta0;
    VectorXd x_var; // variance of each predictor coordinate
    double sigma = 1.0;
    ErrorFamily error = ErrorFamily::normal;

    static RegressionModel standard(const VectorXd& beta0, double sigma = 1.0);
    static RegressionModel simple(double beta0, double sigma = 1.0);

    Index p() const { return beta0.size(); }
    double second_moment(Index j) const { return x_var(j); }
    bool is_normal() const { return error == ErrorFamily::normal; }
    void validate() const;
};

struct MCConfig {
    std::size_t n_draws = 100000;
    std::uint64_t seed = 0;
};

struct ContaminationPoint {
    VectorXd x0;
    double y0 = 0.0;

    static ContaminationPoint simple(double x0, double y0);
};

// Sample-level data. Rows listed in contaminated_rows were altered by an
// injection helper and are kept for bookkeeping only.
struct Dataset {
    MatrixXd X;
    VectorXd y;
    std::vector<Index> contaminated_rows;

    Index n() const { return X.rows(); }
    Index p() const { return X.cols(); }
    void validate() const;
    Dataset with_row(const VectorXd& x0, double y0) const;
};

Dataset sample(const RegressionModel& model, Index n, std::uint64_t seed);

enum class OutlierPlacement {
    random_rows,   // rows drawn uniformly without replacement
    positive_x,    // rows drawn among those with x_1 > 0
};

// Adds `shift` to the response of round(fraction * n) rows.
Dataset inject_vertical_outliers(const Dataset& data, double fraction, double shift,
                                 OutlierPlacement placement, std::uint64_t seed);

// Monte-Carlo draws from H0, optionally mixed with a point mass:
// H = (1 - eps) * empirical(draws) + eps * delta_(x0, y0).
// The draw matrices are shared between copies so that contaminated views of
// one draw set reuse the same random numbers.
class DrawSet {
public:
    struct Atom {
        ContaminationPoint point;
        double eps = 0.0;
    };

    static DrawSet generate(const RegressionModel& model, const MCConfig& cfg);

    DrawSet with_point_mass(const ContaminationPoint& pt, double eps) const;
    DrawSet without_point_mass() const;
    // Draws [begin, begin + count) as an independent draw set.
    DrawSet slice(Index begin, Index count) const;

    Index size() const { return y_->size(); }
    Index dim() const { return xt_->rows(); }
    // p x n, one column per draw.
    const MatrixXd& xt() const { return *xt_; }
    const VectorXd& y() const { return *y_; }
    const std::optional<Atom>& atom() const { return atom_; }
    const MCConfig& config() const { return cfg_; }

private:
    DrawSet(std::shared_ptr<const MatrixXd> xt, std::shared_ptr<const VectorXd> y, MCConfig cfg)
        : xt_(std::move(xt)), y_(std::move(y)), cfg_(cfg) {}

    std::shared_ptr<const MatrixXd> xt_;
    std::shared_ptr<const VectorXd> y_;
    MCConfig cfg_;
    std::optional<Atom> atom_;
};

struct Expectation {
    VectorXd mean;
    VectorXd std_error; // Monte-Carlo standard error of each component
};

// f(x, y, out) writes the integrand value into out (pre-sized to dim).
using Integrand = std::function<void(const Eigen::Ref<const VectorXd>& x, double y,
                                     Eigen::Ref<VectorXd> out)>;

Expectation expect(const DrawSet& draws, Index dim, const Integrand& f);
Expectation expect(const RegressionModel& model, Index dim, const Integrand& f, const MCConfig& cfg);

// E[w(r) x x'] and E[w(r) x y] with r = y - x'beta; weight == nullptr means w = 1.
struct GramMoments {
    MatrixXd xx;
    VectorXd xy;
};
GramMoments gram_moments(const DrawSet& draws, const VectorXd& beta,
                         const std::function<double(double)>* weight = nullptr);

} // namespace robpen
