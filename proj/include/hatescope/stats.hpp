#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hatescope/util.hpp"

namespace hatescope {

/// Count-regression design. Column 0 is the intercept when `has_intercept`.
struct DesignMatrix {
    Eigen::MatrixXd x;
    std::vector<double> y;
    std::vector<std::string> names;
    bool has_intercept = true;

    std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(x.cols()); }
    /// Copy keeping only the listed columns (in the given order).
    DesignMatrix select(const std::vector<std::size_t>& columns) const;
};

/// Builds a design from named covariate columns, prepending "(Intercept)" when requested.
DesignMatrix make_design(const std::vector<std::string>& names, const std::vector<std::vector<double>>& columns,
                         std::vector<double> response, bool intercept = true);

/// Checks n > p, finite entries and non-negative integral response; throws std::invalid_argument.
void validate(const DesignMatrix& design);

class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError() : std::runtime_error("rank-deficient design") {}
};

struct RegressionFit {
    std::vector<std::string> names;
    std::vector<double> beta;
    std::vector<double> se;
    std::vector<double> z;
    std::vector<double> p;
    double theta = 0;  // variance mu + mu^2 / theta
    double loglik = 0;
    double aic = 0;    // -2 loglik + 2 (p + 1), theta counted
    bool converged = false;
    bool theta_at_bound = false;
    int iterations = 0;
    std::vector<double> fitted;  // mu per row
};

struct NegBinOptions {
    int max_outer = 200;
    double tolerance = 1e-8;
    double theta_min = 1e-4;
    double theta_max = 1e6;
};

/// Negative binomial (NB2, log link) maximum likelihood. Alternates IRLS for beta with
/// safeguarded Newton on log theta, then polishes jointly. Standard errors come from the
/// observed information; p-values are two-sided Wald/normal.
/// Throws RankDeficientError for a singular design.
RegressionFit fit_negbin(const DesignMatrix& design, const NegBinOptions& options = {});

/// Full NB log-likelihood at (beta, theta) on the original design scale.
double negbin_loglik(const DesignMatrix& design, std::span<const double> beta, double theta);

struct StepwiseStep {
    std::vector<std::string> candidates;  // covariate whose removal was tried
    std::vector<double> candidate_aic;
    double current_aic = 0;
    std::string removed;  // empty on the terminating step
};

struct StepwiseResult {
    RegressionFit fit;
    std::vector<StepwiseStep> trace;
    std::vector<std::string> removal_order;
    bool aborted = false;
    std::string error;
};

/// Backward elimination by exact AIC: drop the covariate whose removal gives the lowest AIC
/// while that strictly improves on the current model. The intercept is never removed.
/// Candidate fits run in parallel and merge by column index.
StepwiseResult stepwise_backward(const DesignMatrix& design, const NegBinOptions& options = {},
                                 Exec exec = Exec::parallel);

std::string fit_table_csv(const RegressionFit& fit);
std::string stepwise_trace_csv(const StepwiseResult& result);

// ---------------------------------------------------------------------------
// Correlation and tests
// ---------------------------------------------------------------------------

struct Correlation {
    double r = 0;
    double p = 1;
};

struct TTest {
    double t = 0;
    double p = 1;
    int df = 0;
};

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> mid_ranks(std::span<const double> x);
/// Two-sided p of Student's t with df degrees of freedom.
double students_t_two_sided(double t, double df);

/// Product-moment correlation; p from the t approximation with n-2 df.
/// Throws std::invalid_argument("zero variance") for a constant input.
Correlation pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of mid-ranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);
/// Pooled-variance two-sample Student's t with |a|+|b|-2 df.
TTest ttest_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace hatescope
