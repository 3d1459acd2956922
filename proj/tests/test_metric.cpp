#include <cmath>

#include "doctest.h"
#include "oobvimp/errors.hpp"
#include "oobvimp/metric.hpp"
#include "oobvimp/rng.hpp"

using namespace oobvimp;

namespace {

// plain enumeration of the definition, independent of the implementation
double concordance_error_oracle(const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                                const Eigen::VectorXd& e) {
    double permissible = 0.0, concordant = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        for (Eigen::Index j = 0; j < s.size(); ++j) {
            if (i == j) continue;
            const bool ordered = t[i] < t[j] && e[i] == 1.0;
            const bool tied_time = t[i] == t[j] && e[i] == 1.0 && e[j] == 0.0;
            if (!ordered && !tied_time) continue;
            permissible += 1.0;
            if (s[i] > s[j])
                concordant += 1.0;
            else if (s[i] == s[j])
                concordant += 0.5;
        }
    }
    REQUIRE(permissible > 0.0);
    return 100.0 * (1.0 - concordant / permissible);
}

struct RandomSurvival {
    Eigen::VectorXd scores, time, event;
};

RandomSurvival random_survival(Xoshiro256pp& rng, int n) {
    RandomSurvival rs;
    rs.scores.resize(n);
    rs.time.resize(n);
    rs.event.resize(n);
    for (int i = 0; i < n; ++i) {
        // discrete grids force ties in both times and scores
        rs.scores[i] = static_cast<double>(uniform_below(rng, 6));
        rs.time[i] = 1.0 + static_cast<double>(uniform_below(rng, 8));
        rs.event[i] = uniform_real(rng) < 0.6 ? 1.0 : 0.0;
    }
    return rs;
}

}  // namespace

TEST_SUITE("metric") {

TEST_CASE("perfect anti-ranking gives zero error") {
    Eigen::VectorXd time(5), event(5), scores(5);
    time << 1, 2, 3, 4, 5;
    event.setOnes();
    scores << 5, 4, 3, 2, 1;  // earliest death has the highest risk
    CHECK(concordance_error(scores, time, event).value == 0.0);
}

TEST_CASE("identical scores give 50") {
    Eigen::VectorXd time(4), event(4), scores(4);
    time << 1, 2, 3, 4;
    event.setOnes();
    scores.setConstant(2.5);
    CHECK(concordance_error(scores, time, event).value == 50.0);
}

TEST_CASE("8-row mixed censoring equals the enumeration oracle exactly") {
    Eigen::VectorXd time(8), event(8), scores(8);
    time << 3, 1, 4, 1, 5, 9, 2, 6;
    event << 1, 0, 1, 1, 0, 1, 1, 0;
    scores << 0.3, -1.2, 0.3, 2.0, 0.1, -0.5, 1.4, 0.0;
    CHECK(concordance_error(scores, time, event).value ==
          concordance_error_oracle(scores, time, event));
}

TEST_CASE("random cases equal the oracle exactly") {
    Xoshiro256pp rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 5 + static_cast<int>(uniform_below(rng, 26));
        const auto rs = random_survival(rng, n);
        bool has_pair = false;
        for (Eigen::Index i = 0; i < n && !has_pair; ++i)
            for (Eigen::Index j = 0; j < n && !has_pair; ++j)
                has_pair = i != j && rs.event[i] == 1.0 &&
                           (rs.time[i] < rs.time[j] ||
                            (rs.time[i] == rs.time[j] && rs.event[j] == 0.0));
        if (!has_pair) continue;
        CHECK(concordance_error(rs.scores, rs.time, rs.event).value ==
              concordance_error_oracle(rs.scores, rs.time, rs.event));
    }
}

TEST_CASE("rank statistic: invariant under strictly increasing transforms") {
    Xoshiro256pp rng(7);
    const auto rs = random_survival(rng, 20);
    Eigen::VectorXd cont = rs.scores;
    for (Eigen::Index i = 0; i < cont.size(); ++i) cont[i] += 0.01 * standard_normal(rng);
    const double base = concordance_error(cont, rs.time, rs.event).value;
    const Eigen::VectorXd warped = (cont.array() * 3.0).exp().matrix();
    CHECK(concordance_error(warped, rs.time, rs.event).value == base);
}

TEST_CASE("negated scores mirror the error when no score ties exist") {
    Eigen::VectorXd time(6), event(6), scores(6);
    time << 2, 4, 1, 7, 3, 5;
    event << 1, 1, 1, 0, 1, 1;
    scores << 0.9, -0.3, 1.7, 0.2, -1.1, 0.4;
    const double a = concordance_error(scores, time, event).value;
    const double b = concordance_error((-scores).eval(), time, event).value;
    CHECK(a + b == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("all-censored outcomes are undefined") {
    Eigen::VectorXd time(3), event(3), scores(3);
    time << 1, 2, 3;
    event.setZero();
    scores << 1, 2, 3;
    CHECK_THROWS_AS(concordance_error(scores, time, event), UndefinedErrorValue);
}

TEST_CASE("standardized mse endpoints") {
    Eigen::VectorXd y(4);
    y << 1, 3, 5, 7;
    CHECK(standardized_mse_error(y, y).value == 0.0);
    CHECK(standardized_mse_error(Eigen::VectorXd::Constant(4, y.mean()), y).value ==
          doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("standardized mse hand-computed value") {
    Eigen::VectorXd y(3), pred(3);
    y << 1, 2, 3;
    pred << 1, 1, 1;
    // mse = 5/3, var = 2/3 -> 250
    CHECK(standardized_mse_error(pred, y).value == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("standardized mse rejects a constant response") {
    Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 3.0);
    CHECK_THROWS_AS(standardized_mse_error(y, y), UndefinedErrorValue);
}

TEST_CASE("misclassification counts threshold crossings") {
    Eigen::VectorXd labels(10), probs(10);
    labels << 1, 0, 1, 0, 1, 0, 1, 0, 1, 0;
    for (Eigen::Index i = 0; i < 10; ++i) probs[i] = labels[i];
    CHECK(misclassification_error(probs, labels).value == 0.0);
    CHECK(misclassification_error((1.0 - probs.array()).matrix(), labels).value == 100.0);

    // 3 of 10 wrong -> 30; p = 0.5 predicts class 0
    probs << 0.9, 0.1, 0.8, 0.2, 0.5, 0.4, 0.7, 0.9, 0.6, 0.6;
    CHECK(misclassification_error(probs, labels).value == doctest::Approx(30.0));
}

TEST_CASE("metrics are permutation invariant") {
    Xoshiro256pp rng(99);
    const auto rs = random_survival(rng, 15);
    const double base = concordance_error(rs.scores, rs.time, rs.event).value;

    std::vector<int> idx(15);
    for (int i = 0; i < 15; ++i) idx[static_cast<std::size_t>(i)] = i;
    shuffle(rng, idx);
    Eigen::VectorXd s(15), t(15), e(15);
    for (int i = 0; i < 15; ++i) {
        s[i] = rs.scores[idx[static_cast<std::size_t>(i)]];
        t[i] = rs.time[idx[static_cast<std::size_t>(i)]];
        e[i] = rs.event[idx[static_cast<std::size_t>(i)]];
    }
    CHECK(concordance_error(s, t, e).value == base);
}

}  // TEST_SUITE
