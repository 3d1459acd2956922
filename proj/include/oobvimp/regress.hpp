#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "oobvimp/design.hpp"

namespace oobvimp {

// Converged weighted fit of one family. Linear and logistic carry the
// intercept as coefficient 0; cox has no intercept (absorbed by the
// baseline hazard). covariance is the inverse observed information.
struct FittedModel {
    Family family = Family::linear;
    bool has_intercept = false;
    Eigen::VectorXd coefficients;
    Eigen::MatrixXd covariance;
    bool converged = false;
    int iterations = 0;
    double log_likelihood = 0.0;
};

// Weighted maximum-likelihood fit. Weights are observation multiplicities
// (bootstrap inbag counts); zero-weight rows do not influence the fit.
//
// linear    weighted least squares
// logistic  IRLS Newton with step halving
// cox       Newton-Raphson on the Breslow-tie weighted partial likelihood
//
// Convergence: relative log-likelihood change < 1e-9, at most 50 iterations.
// Throws DegenerateFitError on a singular information matrix (carrying the
// offending column indices) and NoEventsError for a cox fit without any
// weighted event.
FittedModel fit(const Design& design, const Eigen::VectorXd& weights);

// Row scores for the given covariate matrix: x*beta plus intercept where the
// family has one. For cox, higher score means higher hazard.
Eigen::VectorXd linear_predictor(const FittedModel& model, const Eigen::MatrixXd& x);

// Same, with the given columns' contributions removed (their coefficients
// treated as zero). Bit-identical to scoring with those columns zeroed.
Eigen::VectorXd linear_predictor_zeroed(const FittedModel& model, const Eigen::MatrixXd& x,
                                        const std::vector<int>& zeroed_columns);

struct WaldRow {
    std::string group_name;
    double beta_hat = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

// One row per single-column group; multi-column (spline) groups carry no
// single coefficient and are skipped. p is the two-sided normal tail.
std::vector<WaldRow> wald_table(const FittedModel& model, const Design& design);

// Standard normal CDF via the erf identity: Phi(z) = erfc(-z/sqrt(2))/2.
double normal_cdf(double z);

// Breslow-approximation weighted Cox partial log-likelihood and its gradient,
// exposed for gradient checks and likelihood-based oracles.
double cox_log_likelihood(const Design& design, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& beta);
Eigen::VectorXd cox_score(const Design& design, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& beta);

}  // namespace oobvimp
