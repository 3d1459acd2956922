#include "oobvimp/metric.hpp"

#include "oobvimp/errors.hpp"

namespace oobvimp {

ErrorValue concordance_error(const Eigen::VectorXd& scores, const Eigen::VectorXd& time,
                             const Eigen::VectorXd& event) {
    const auto n = scores.size();
    if (time.size() != n || event.size() != n)
        throw ConfigError("concordance inputs have mismatched lengths");

    double permissible = 0.0;
    double concordant = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (event[i] != 1.0) continue;  // the earlier member of a pair must be a death
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const bool ordered = time[i] < time[j];
            // tied times count once, with i the death and j censored
            const bool tied = time[i] == time[j] && event[j] == 0.0;
            if (!ordered && !tied) continue;
            permissible += 1.0;
            if (scores[i] > scores[j])
                concordant += 1.0;
            else if (scores[i] == scores[j])
                concordant += 0.5;
        }
    }
    if (permissible == 0.0)
        throw UndefinedErrorValue("concordance undefined: no permissible pairs");
    return {100.0 * (1.0 - concordant / permissible)};
}

ErrorValue standardized_mse_error(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
    const auto n = y.size();
    if (pred.size() != n) throw ConfigError("prediction and response lengths differ");
    if (n < 2) throw ConfigError("standardized mse needs at least 2 rows");

    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(n);
    if (var <= 0.0) throw UndefinedErrorValue("standardized mse undefined: constant response");
    const double mse = (y - pred).squaredNorm() / static_cast<double>(n);
    return {100.0 * mse / var};
}

ErrorValue misclassification_error(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels) {
    const auto n = labels.size();
    if (probs.size() != n) throw ConfigError("probability and label lengths differ");
    if (n == 0) throw ConfigError("misclassification of an empty set");

    double wrong = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double predicted = probs[i] > 0.5 ? 1.0 : 0.0;
        if (predicted != labels[i]) wrong += 1.0;
    }
    return {100.0 * wrong / static_cast<double>(n)};
}

}  // namespace oobvimp
