#pragma once

#include <Eigen/Dense>

namespace oobvimp {

// Prediction error in percentage points (0..100 for rank and class errors),
// so a VIMP of 5 reads as a 5% loss of prediction performance.
struct ErrorValue {
    double value = 0.0;
};

// 100 * (1 - C) with Harrell's C over permissible pairs: (i, j) with
// time_i < time_j and event_i = 1, plus tied-time pairs where exactly one
// member has an event. The earlier death should carry the higher risk score;
// tied scores credit 0.5. Throws UndefinedErrorValue with no permissible pair.
ErrorValue concordance_error(const Eigen::VectorXd& scores, const Eigen::VectorXd& time,
                             const Eigen::VectorXd& event);

// 100 * mean((y - pred)^2) / Var(y), variance with denominator n.
// Throws UndefinedErrorValue for constant y.
ErrorValue standardized_mse_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& y);

// 100 * fraction of labels mispredicted by thresholding probs at 0.5
// (a probability of exactly 0.5 predicts class 0).
ErrorValue misclassification_error(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels);

}  // namespace oobvimp
