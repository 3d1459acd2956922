#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "oobvimp/errors.hpp"
#include "oobvimp/metric.hpp"
#include "oobvimp/report.hpp"
#include "oobvimp/simulate.hpp"
#include "oobvimp/spline.hpp"
#include "oobvimp/vimp.hpp"

using namespace oobvimp;

namespace {

Design small_cox_sim(int n, std::uint64_t seed) {
    CoxSimParams params;
    params.n = n;
    return simulation_design(simulate_cox_data(params, seed), SimVariant::linear_only, 0);
}

Design noise_cox(int n, std::uint64_t seed, int p = 3) {
    // outcome independent of every covariate
    Xoshiro256pp rng(seed);
    Design d;
    d.family = Family::cox;
    d.x.resize(n, p);
    d.time.resize(n);
    d.event.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) d.x(i, j) = standard_normal(rng);
        d.time[i] = exponential(rng, 1.0);
        d.event[i] = uniform_real(rng) < 0.6 ? 1.0 : 0.0;
    }
    for (int j = 0; j < p; ++j) d.groups.push_back({"x" + std::to_string(j + 1), {j}});
    d.time_order.resize(static_cast<std::size_t>(n));
    std::iota(d.time_order.begin(), d.time_order.end(), 0);
    std::stable_sort(d.time_order.begin(), d.time_order.end(),
                     [&](int a, int b) { return d.time[a] < d.time[b]; });
    return d;
}

Design correlated_pair_linear(int n, double rho, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    Design d;
    d.family = Family::linear;
    d.x.resize(n, 2);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        const double z1 = standard_normal(rng);
        const double z2 = standard_normal(rng);
        d.x(i, 0) = z1;
        d.x(i, 1) = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
        d.y[i] = d.x(i, 0) + d.x(i, 1) + standard_normal(rng);
    }
    d.groups = {{"x1", {0}}, {"x2", {1}}};
    return d;
}

}  // namespace

TEST_SUITE("vimp") {

TEST_CASE("permute noising keeps within-row column pairs intact") {
    Eigen::MatrixXd x(5, 3);
    for (int i = 0; i < 5; ++i) {
        x(i, 0) = i;            // untouched column
        x(i, 1) = 10.0 + i;     // group column a
        x(i, 2) = 100.0 + i;    // group column b, tied to a by construction
    }
    const Eigen::MatrixXd permuted = permute_group_rows(x, {1, 2}, 99);

    CHECK(permuted.col(0) == x.col(0));
    bool moved = false;
    for (int i = 0; i < 5; ++i) {
        // row i received both group values from the same source row
        CHECK(permuted(i, 2) - permuted(i, 1) == 90.0);
        moved |= permuted(i, 1) != x(i, 1);
    }
    CHECK(moved);
    // and the group columns are a permutation of the originals
    Eigen::VectorXd sorted_a = permuted.col(1);
    std::sort(sorted_a.data(), sorted_a.data() + 5);
    CHECK(sorted_a == x.col(1));
}

TEST_CASE("zeroing a zero coefficient leaves scores unchanged") {
    Design d = small_cox_sim(60, 4);
    FittedModel m = fit(d, Eigen::VectorXd::Ones(d.n()));
    REQUIRE(m.converged);
    m.coefficients[2] = 0.0;  // pretend X1 contributed nothing
    const Eigen::VectorXd base = linear_predictor(m, d.x);
    const Eigen::VectorXd noised =
        noised_scores(m, d.x, d, d.group_index("X1"), NoiseMethod::zero_coefficient, 1);
    for (Eigen::Index i = 0; i < base.size(); ++i) CHECK(noised[i] == base[i]);
}

TEST_CASE("coefficient zeroing equals column zeroing across replicates, exactly") {
    const Design d = small_cox_sim(200, 8);
    const auto reps = make_replicates(200, 5, 21);
    for (const auto& rep : reps) {
        Eigen::VectorXd w(200);
        for (int i = 0; i < 200; ++i) w[i] = rep.multiplicity[static_cast<std::size_t>(i)];
        const FittedModel m = fit(d, w);
        REQUIRE(m.converged);

        Eigen::MatrixXd oob_x(static_cast<Eigen::Index>(rep.oob_rows.size()), d.p());
        Eigen::VectorXd oob_t(oob_x.rows()), oob_e(oob_x.rows());
        for (std::size_t i = 0; i < rep.oob_rows.size(); ++i) {
            oob_x.row(static_cast<Eigen::Index>(i)) = d.x.row(rep.oob_rows[i]);
            oob_t[static_cast<Eigen::Index>(i)] = d.time[rep.oob_rows[i]];
            oob_e[static_cast<Eigen::Index>(i)] = d.event[rep.oob_rows[i]];
        }
        for (std::size_t g = 0; g < d.groups.size(); ++g) {
            const Eigen::VectorXd via_coef = noised_scores(
                m, oob_x, d, static_cast<int>(g), NoiseMethod::zero_coefficient, rep.seed);
            Eigen::MatrixXd zeroed = oob_x;
            for (int c : d.groups[g].columns) zeroed.col(c).setZero();
            const Eigen::VectorXd via_col = linear_predictor(m, zeroed);
            CHECK(concordance_error(via_coef, oob_t, oob_e).value ==
                  concordance_error(via_col, oob_t, oob_e).value);
        }
    }
}

TEST_CASE("noise variables earn non-positive importance on average") {
    // a single noise dataset can hold a chance association that its OOB rows
    // share, so per-dataset deltas are heavy-tailed to the right; the sign
    // property lives in the aggregate over independent datasets
    double err_sum = 0.0, first_step = 0.0;
    std::vector<double> deltas;
    const int datasets = 20;
    for (int k = 0; k < datasets; ++k) {
        const Design d = noise_cox(200, 31 + static_cast<std::uint64_t>(k));
        VimpOptions opts;
        opts.bootstrap = 150;
        opts.seed = 5 + static_cast<std::uint64_t>(k);
        opts.marginal = false;
        opts.stepwise = true;
        const VimpReport report = vimp_analysis(d, opts);
        err_sum += report.err_oob;
        for (const auto& row : report.rows) deltas.push_back(row.delta);
        first_step += *report.rows.front().err_step;
    }
    CHECK(err_sum / datasets == doctest::Approx(50.0).epsilon(4.0 / 50.0));

    const double mean = std::accumulate(deltas.begin(), deltas.end(), 0.0) /
                        static_cast<double>(deltas.size());
    std::sort(deltas.begin(), deltas.end());
    CHECK(mean < 0.5);
    CHECK(deltas[deltas.size() / 2] < 0.0);  // typical noise variable loses
    // even the best-ranked pure-noise model scores like a coin flip on average
    CHECK(first_step / datasets == doctest::Approx(50.0).epsilon(6.0 / 50.0));
}

TEST_CASE("permutation noising under the null stays near zero") {
    Xoshiro256pp rng(41);
    Design d;
    d.family = Family::linear;
    const int n = 500;
    d.x.resize(n, 2);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.x(i, 0) = standard_normal(rng);
        d.x(i, 1) = standard_normal(rng);
        d.y[i] = standard_normal(rng);  // independent of both covariates
    }
    d.groups = {{"a", {0}}, {"b", {1}}};

    VimpOptions opts;
    opts.bootstrap = 500;
    opts.seed = 77;
    opts.noise = NoiseMethod::permute;
    opts.marginal = false;
    opts.stepwise = false;
    const VimpReport report = vimp_analysis(d, opts);
    for (const auto& row : report.rows) CHECK(std::abs(row.delta) < 0.5);
}

TEST_CASE("report rows sort by delta descending") {
    const Design d = small_cox_sim(150, 14);
    VimpOptions opts;
    opts.bootstrap = 60;
    opts.seed = 3;
    const VimpReport report = vimp_analysis(d, opts);
    REQUIRE(report.rows.size() == 5);
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        CHECK(report.rows[i - 1].delta >= report.rows[i].delta);
    CHECK(report.rows.front().group_name == "psa");
}

TEST_CASE("stepwise errors dip while variables help, then climb with noise") {
    // the repaired design carries two solidly informative groups, so the
    // pattern is stable: error falls through them, then noise variables
    // push it back up
    CoxSimParams params;
    const Dataset data = simulate_cox_data(params, 5);
    const Design d = simulation_design(data, SimVariant::spline_repaired, 3);
    VimpOptions opts;
    opts.bootstrap = 150;
    opts.seed = 29;
    opts.marginal = false;
    opts.jobs = 0;
    const VimpReport report = vimp_analysis(d, opts);

    REQUIRE(report.rows.size() == 5);
    CHECK(report.rows[0].delta > 1.0);
    CHECK(report.rows[1].delta > 1.0);
    const double top1 = *report.rows[0].err_step;
    const double top2 = *report.rows[1].err_step;
    CHECK(top2 < top1 - 1.0);  // the second informative variable helps a lot
    for (std::size_t k = 2; k < 5; ++k)  // noise entries degrade the model
        CHECK(*report.rows[k].err_step > *report.rows[k - 1].err_step);
}

TEST_CASE("a single-group analysis reduces to the null model for marginal vimp") {
    const Design full = small_cox_sim(150, 77);
    const Design d = full.with_groups({0});  // psa only
    VimpOptions opts;
    opts.bootstrap = 50;
    opts.seed = 7;
    const VimpReport report = vimp_analysis(d, opts);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].delta_marginal.has_value());
    CHECK(*report.rows[0].err_step == report.err_oob);
}

TEST_CASE("the last stepwise error is the OOB error, exactly") {
    const Design d = small_cox_sim(150, 25);
    VimpOptions opts;
    opts.bootstrap = 50;
    opts.seed = 11;
    const VimpReport report = vimp_analysis(d, opts);
    // rows are delta-sorted; the full model is the lowest-ranked row's entry
    CHECK(*report.rows.back().err_step == report.err_oob);
}

TEST_CASE("deltas recompute from the replicate outcomes") {
    const Design d = small_cox_sim(120, 33);
    const auto reps = make_replicates(static_cast<int>(d.n()), 40, 17);
    const auto outcomes = fit_replicates(d, reps, NoiseMethod::zero_coefficient, 1);

    VimpOptions opts;
    opts.bootstrap = 40;
    opts.seed = 17;
    opts.marginal = false;
    opts.stepwise = false;
    const VimpReport report = vimp_analysis(d, opts);

    for (std::size_t g = 0; g < d.groups.size(); ++g) {
        double sum = 0.0;
        int used = 0;
        for (const auto& out : outcomes) {
            if (out.status != ReplicateOutcome::Status::usable) continue;
            sum += out.err_noised[g] - out.err_b;
            ++used;
        }
        REQUIRE(used == report.B_used);
        for (const auto& row : report.rows)
            if (row.group_name == d.groups[g].name)
                CHECK(row.delta == doctest::Approx(sum / used).epsilon(1e-12));
    }
}

TEST_CASE("removing an orthogonal zero-effect covariate has near-zero marginal vimp") {
    Xoshiro256pp rng(61);
    Design d;
    const int n = 500;
    d.family = Family::linear;
    d.x.resize(n, 2);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.x(i, 0) = standard_normal(rng);
        d.x(i, 1) = standard_normal(rng);
        d.y[i] = 2.0 * d.x(i, 0) + standard_normal(rng);  // second covariate inert
    }
    d.groups = {{"live", {0}}, {"inert", {1}}};

    VimpOptions opts;
    opts.bootstrap = 200;
    opts.seed = 19;
    opts.stepwise = false;
    const VimpReport report = vimp_analysis(d, opts);
    for (const auto& row : report.rows)
        if (row.group_name == "inert") CHECK(std::abs(*row.delta_marginal) < 0.5);
}

TEST_CASE("correlated informative covariates: marginal vimp falls below vimp") {
    const Design d = correlated_pair_linear(800, 0.9, 71);
    VimpOptions opts;
    opts.bootstrap = 150;
    opts.seed = 23;
    opts.stepwise = false;
    const VimpReport report = vimp_analysis(d, opts);
    for (const auto& row : report.rows) {
        CHECK(row.delta > 0.0);
        CHECK(*row.delta_marginal < row.delta);
    }
}

TEST_CASE("a spline group reports one row, noised jointly") {
    CoxSimParams params;
    params.n = 50;
    const Dataset data = simulate_cox_data(params, 3);
    const Design d = simulation_design(data, SimVariant::spline_repaired, 3);

    VimpOptions opts;
    opts.bootstrap = 30;
    opts.seed = 2;
    opts.stepwise = false;
    opts.marginal = false;
    const VimpReport report = vimp_analysis(d, opts);
    CHECK(report.rows.size() == 5);  // one row per variable, not per column
    int tumor_rows = 0;
    for (const auto& row : report.rows) {
        if (row.group_name == "tumor_volume") {
            ++tumor_rows;
            CHECK_FALSE(row.beta_hat.has_value());
            CHECK_FALSE(row.p_value.has_value());
        }
    }
    CHECK(tumor_rows == 1);
}

TEST_CASE("analysis bytes are identical across thread counts and reruns") {
    const Design d = small_cox_sim(100, 55);
    VimpOptions opts;
    opts.bootstrap = 40;
    opts.seed = 13;

    opts.jobs = 1;
    const std::string serial = render_report(vimp_analysis(d, opts), OutputFormat::json);
    opts.jobs = 4;
    const std::string parallel = render_report(vimp_analysis(d, opts), OutputFormat::json);
    const std::string again = render_report(vimp_analysis(d, opts), OutputFormat::json);
    CHECK(serial == parallel);
    CHECK(parallel == again);
}

TEST_CASE("degenerate analysis when every replicate is unusable") {
    Design d;
    d.family = Family::linear;
    d.x.resize(12, 1);
    d.y = Eigen::VectorXd::Constant(12, 3.0);  // constant response: error undefined
    for (int i = 0; i < 12; ++i) d.x(i, 0) = i;
    d.groups = {{"x", {0}}};

    VimpOptions opts;
    opts.bootstrap = 10;
    opts.seed = 1;
    CHECK_THROWS_AS(vimp_analysis(d, opts), DegenerateAnalysisError);
}

TEST_CASE("unknown group index is rejected") {
    const Design d = small_cox_sim(50, 5);
    const FittedModel m = fit(d, Eigen::VectorXd::Ones(d.n()));
    CHECK_THROWS_AS(noised_scores(m, d.x, d, 99, NoiseMethod::zero_coefficient, 1), ConfigError);
}

}  // TEST_SUITE
