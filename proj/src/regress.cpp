#include "oobvimp/regress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oobvimp/errors.hpp"

namespace oobvimp {

namespace {

constexpr double kRelTol = 1e-9;
constexpr int kMaxIter = 50;
constexpr int kMaxHalvings = 30;

// Solves the SPD system A x = b. A singular (rank-deficient) A throws
// DegenerateFitError naming the columns beyond the numerical rank.
Eigen::VectorXd solve_information(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  const char* what) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) ||
        d.minCoeff() < dmax * 1e-12) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        qr.setThreshold(1e-10);
        std::vector<int> offending;
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < a.cols(); ++i)
            offending.push_back(static_cast<int>(perm[i]));
        throw DegenerateFitError(std::string("singular information matrix in ") + what,
                                 offending);
    }
    return ldlt.solve(b);
}

Eigen::MatrixXd invert_information(const Eigen::MatrixXd& a, const char* what) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || d.minCoeff() < dmax * 1e-12)
        throw DegenerateFitError(std::string("singular information matrix in ") + what);
    return ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd x1(x.rows(), x.cols() + 1);
    x1.col(0).setOnes();
    x1.rightCols(x.cols()) = x;
    return x1;
}

FittedModel fit_linear(const Design& design, const Eigen::VectorXd& w) {
    const Eigen::MatrixXd x1 = with_intercept(design.x);
    const Eigen::MatrixXd xtw = x1.transpose() * w.asDiagonal();
    const Eigen::MatrixXd info = xtw * x1;
    const Eigen::VectorXd beta = solve_information(info, xtw * design.y, "linear fit");

    const Eigen::VectorXd resid = design.y - x1 * beta;
    const double wsum = w.sum();
    const double rss = (w.array() * resid.array().square()).sum();
    const double dof = wsum - static_cast<double>(x1.cols());
    const double sigma2 = dof > 0.0 ? rss / dof : 0.0;

    FittedModel m;
    m.family = Family::linear;
    m.has_intercept = true;
    m.coefficients = beta;
    m.covariance = sigma2 * invert_information(info, "linear fit");
    m.converged = true;
    m.iterations = 1;
    // Gaussian log-likelihood at the mle variance rss/wsum
    const double s2 = rss > 0.0 ? rss / wsum : 1e-300;
    m.log_likelihood = -0.5 * wsum * (std::log(2.0 * M_PI * s2) + 1.0);
    return m;
}

double logistic_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (w[i] == 0.0) continue;
        const double e = eta[i];
        // softplus(e) = log(1 + exp(e)), stable for large |e|
        const double softplus = std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e)));
        ll += w[i] * (y[i] * e - softplus);
    }
    return ll;
}

FittedModel fit_logistic(const Design& design, const Eigen::VectorXd& w) {
    const Eigen::MatrixXd x1 = with_intercept(design.x);
    const auto p = x1.cols();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(x1.rows());
    double ll = logistic_loglik(eta, design.y, w);

    FittedModel m;
    m.family = Family::logistic;
    m.has_intercept = true;

    Eigen::MatrixXd info(p, p);
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
        const Eigen::ArrayXd mu = 1.0 / (1.0 + (-eta.array()).exp());
        const Eigen::VectorXd grad =
            x1.transpose() * (w.array() * (design.y.array() - mu)).matrix();
        const Eigen::VectorXd irls_w = (w.array() * mu * (1.0 - mu)).matrix();
        info = x1.transpose() * irls_w.asDiagonal() * x1;
        const Eigen::VectorXd step = solve_information(info, grad, "logistic fit");

        // step halving keeps the likelihood non-decreasing
        double scale = 1.0;
        Eigen::VectorXd beta_new;
        Eigen::VectorXd eta_new;
        double ll_new = -HUGE_VAL;
        int halvings = 0;
        for (; halvings <= kMaxHalvings; ++halvings) {
            beta_new = beta + scale * step;
            eta_new = x1 * beta_new;
            ll_new = logistic_loglik(eta_new, design.y, w);
            if (ll_new >= ll - 1e-12 * (1.0 + std::abs(ll))) break;
            scale *= 0.5;
        }
        if (halvings > kMaxHalvings) break;  // cannot improve: stop at current beta

        const double change = std::abs(ll_new - ll);
        beta = beta_new;
        eta = eta_new;
        ll = ll_new;
        if (change < kRelTol * (1.0 + std::abs(ll))) {
            m.converged = true;
            ++iter;
            break;
        }
    }

    m.coefficients = beta;
    m.iterations = iter;
    m.log_likelihood = ll;
    {
        const Eigen::ArrayXd mu = 1.0 / (1.0 + (-eta.array()).exp());
        const Eigen::VectorXd irls_w = (w.array() * mu * (1.0 - mu)).matrix();
        info = x1.transpose() * irls_w.asDiagonal() * x1;
    }
    m.covariance = invert_information(info, "logistic fit");
    if (!m.coefficients.allFinite()) m.converged = false;
    return m;
}

// One sweep of the Breslow partial likelihood in descending time order.
// Accumulates risk-set sums S0, S1, S2 and, at each weighted event, the
// log-likelihood / score / information contributions. Ties share a risk set:
// every row tied at a time enters the risk set before its events are scored.
struct CoxSweep {
    double ll = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd info;
    double weighted_events = 0.0;
};

CoxSweep cox_sweep(const Design& design, const Eigen::VectorXd& w, const Eigen::VectorXd& beta,
                   bool want_info) {
    const auto p = design.x.cols();
    // ascending time order, usually cached on the design; walk it backwards
    std::vector<int> local_order;
    if (design.time_order.size() != static_cast<std::size_t>(design.n())) {
        local_order.resize(static_cast<std::size_t>(design.n()));
        std::iota(local_order.begin(), local_order.end(), 0);
        std::stable_sort(local_order.begin(), local_order.end(),
                         [&](int a, int b) { return design.time[a] < design.time[b]; });
    }
    const auto& order = local_order.empty() ? design.time_order : local_order;

    Eigen::VectorXd eta = design.x * beta;
    // a constant shift leaves the partial likelihood unchanged; keeps exp in range
    double eta_max = 0.0;
    for (int idx : order)
        if (w[idx] > 0.0) eta_max = std::max(eta_max, eta[idx]);

    CoxSweep out;
    out.score = Eigen::VectorXd::Zero(p);
    if (want_info) out.info = Eigen::MatrixXd::Zero(p, p);

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2;
    if (want_info) s2 = Eigen::MatrixXd::Zero(p, p);

    const auto n = static_cast<std::ptrdiff_t>(order.size());
    std::ptrdiff_t i = n - 1;
    while (i >= 0) {
        const double t = design.time[order[static_cast<std::size_t>(i)]];
        // absorb every row tied at time t into the risk set
        std::ptrdiff_t j = i;
        while (j >= 0 && design.time[order[static_cast<std::size_t>(j)]] == t) {
            const int row = order[static_cast<std::size_t>(j)];
            const double wi = w[row];
            if (wi > 0.0) {
                const double r = wi * std::exp(eta[row] - eta_max);
                s0 += r;
                s1.noalias() += r * design.x.row(row).transpose();
                if (want_info)
                    s2.noalias() +=
                        r * (design.x.row(row).transpose() * design.x.row(row));
            }
            --j;
        }
        // score the events at time t against the accumulated risk set
        for (std::ptrdiff_t k = i; k > j; --k) {
            const int row = order[static_cast<std::size_t>(k)];
            const double wi = w[row];
            if (wi > 0.0 && design.event[row] == 1.0) {
                out.weighted_events += wi;
                out.ll += wi * ((eta[row] - eta_max) - std::log(s0));
                const Eigen::VectorXd mean = s1 / s0;
                out.score.noalias() += wi * (design.x.row(row).transpose() - mean);
                if (want_info)
                    out.info.noalias() += wi * (s2 / s0 - mean * mean.transpose());
            }
        }
        i = j;
    }
    return out;
}

FittedModel fit_cox(const Design& design, const Eigen::VectorXd& w) {
    const auto p = design.x.cols();

    double weighted_events = 0.0;
    for (Eigen::Index i = 0; i < design.event.size(); ++i)
        if (w[i] > 0.0 && design.event[i] == 1.0) weighted_events += w[i];
    if (weighted_events <= 0.0) throw NoEventsError("cox fit has no weighted events");

    if (p == 0) {
        // null model: no parameters, constant (zero) linear predictor
        FittedModel null_model;
        null_model.family = Family::cox;
        null_model.converged = true;
        null_model.log_likelihood = cox_sweep(design, w, Eigen::VectorXd(), false).ll;
        return null_model;
    }

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    CoxSweep sweep = cox_sweep(design, w, beta, true);
    double ll = sweep.ll;

    FittedModel m;
    m.family = Family::cox;
    m.has_intercept = false;

    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
        const Eigen::VectorXd step = solve_information(sweep.info, sweep.score, "cox fit");

        double scale = 1.0;
        Eigen::VectorXd beta_new;
        CoxSweep sweep_new;
        int halvings = 0;
        for (; halvings <= kMaxHalvings; ++halvings) {
            beta_new = beta + scale * step;
            sweep_new = cox_sweep(design, w, beta_new, true);
            if (sweep_new.ll >= ll - 1e-12 * (1.0 + std::abs(ll))) break;
            scale *= 0.5;
        }
        if (halvings > kMaxHalvings) break;

        const double change = std::abs(sweep_new.ll - ll);
        beta = beta_new;
        sweep = sweep_new;
        ll = sweep.ll;
        if (change < kRelTol * (1.0 + std::abs(ll))) {
            m.converged = true;
            ++iter;
            break;
        }
    }

    m.coefficients = beta;
    m.iterations = iter;
    m.log_likelihood = ll;
    m.covariance = invert_information(sweep.info, "cox fit");
    if (!m.coefficients.allFinite()) m.converged = false;
    return m;
}

}  // namespace

FittedModel fit(const Design& design, const Eigen::VectorXd& weights) {
    if (weights.size() != design.n())
        throw ConfigError("weight vector length does not match the design");
    int positive = 0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) throw ConfigError("negative observation weight");
        if (weights[i] > 0.0) ++positive;
    }
    if (positive < 2)
        throw DegenerateFitError("fit needs at least 2 rows with positive weight");

    switch (design.family) {
        case Family::linear: return fit_linear(design, weights);
        case Family::logistic: return fit_logistic(design, weights);
        case Family::cox: return fit_cox(design, weights);
    }
    throw ConfigError("unknown family");
}

namespace {

// single scoring kernel: coefficient zeroing and column zeroing agree
// bit-for-bit because both run exactly this computation
Eigen::VectorXd score_rows(const Eigen::VectorXd& coef, bool intercept,
                           const Eigen::MatrixXd& x) {
    if (x.cols() + (intercept ? 1 : 0) != coef.size())
        throw ConfigError("column count does not match the fitted coefficients");
    Eigen::VectorXd scores = x * coef.tail(x.cols());
    if (intercept) scores.array() += coef[0];
    return scores;
}

}  // namespace

Eigen::VectorXd linear_predictor(const FittedModel& model, const Eigen::MatrixXd& x) {
    return score_rows(model.coefficients, model.has_intercept, x);
}

Eigen::VectorXd linear_predictor_zeroed(const FittedModel& model, const Eigen::MatrixXd& x,
                                        const std::vector<int>& zeroed_columns) {
    const Eigen::Index offset = model.has_intercept ? 1 : 0;
    Eigen::VectorXd coef = model.coefficients;
    for (int c : zeroed_columns) coef[offset + c] = 0.0;
    return score_rows(coef, model.has_intercept, x);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

std::vector<WaldRow> wald_table(const FittedModel& model, const Design& design) {
    if (!model.converged) throw ConfigError("wald table requested for a non-converged model");
    const Eigen::Index offset = model.has_intercept ? 1 : 0;

    std::vector<WaldRow> rows;
    for (const auto& group : design.groups) {
        if (group.columns.size() != 1) continue;
        const Eigen::Index j = offset + group.columns.front();
        WaldRow row;
        row.group_name = group.name;
        row.beta_hat = model.coefficients[j];
        row.se = std::sqrt(model.covariance(j, j));
        row.z = row.beta_hat / row.se;
        row.p_value = std::erfc(std::abs(row.z) * M_SQRT1_2);  // 2*(1 - Phi(|z|))
        rows.push_back(row);
    }
    return rows;
}

double cox_log_likelihood(const Design& design, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& beta) {
    return cox_sweep(design, weights, beta, false).ll;
}

Eigen::VectorXd cox_score(const Design& design, const Eigen::VectorXd& weights,
                          const Eigen::VectorXd& beta) {
    return cox_sweep(design, weights, beta, false).score;
}

}  // namespace oobvimp
