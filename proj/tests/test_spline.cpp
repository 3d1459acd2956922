#include <cmath>

#include "doctest.h"
#include "oobvimp/errors.hpp"
#include "oobvimp/rng.hpp"
#include "oobvimp/regress.hpp"
#include "oobvimp/spline.hpp"

using namespace oobvimp;

namespace {

// textbook Cox-de Boor recursion, evaluated term by term; independent of the
// triangular scheme used by the implementation
double cox_de_boor(const std::vector<double>& t, std::size_t i, int k, double x) {
    if (k == 0) return (t[i] <= x && x < t[i + 1]) ? 1.0 : 0.0;
    double left = 0.0, right = 0.0;
    const double d1 = t[i + static_cast<std::size_t>(k)] - t[i];
    if (d1 > 0.0) left = (x - t[i]) / d1 * cox_de_boor(t, i, k - 1, x);
    const double d2 = t[i + static_cast<std::size_t>(k) + 1] - t[i + 1];
    if (d2 > 0.0) right = (t[i + static_cast<std::size_t>(k) + 1] - x) / d2 *
                          cox_de_boor(t, i + 1, k - 1, x);
    return left + right;
}

Design two_column_design(int n, std::uint64_t seed) {
    Xoshiro256pp rng(seed);
    Design d;
    d.family = Family::linear;
    d.x.resize(n, 2);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
        d.x(i, 0) = 10.0 * uniform_real(rng);
        d.x(i, 1) = standard_normal(rng);
        d.y[i] = d.x(i, 0) + standard_normal(rng);
    }
    d.groups = {{"v", {0}}, {"z", {1}}};
    return d;
}

}  // namespace

TEST_SUITE("spline") {

TEST_CASE("degree 1 with one interior knot: hat functions, completed partition of unity") {
    SplineSpec spec{"v", 1, {0.5}, 0};
    const BasisMatrix basis = bspline_basis({0.0, 0.5, 1.0}, spec);
    CHECK(basis.columns.cols() == 2);  // interior_knots + degree
    CHECK(basis.boundary.first == 0.0);
    CHECK(basis.boundary.second == 1.0);
    for (Eigen::Index r = 0; r < 3; ++r) {
        const double total = basis.leading[r] + basis.columns.row(r).sum();
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    }
    // the full hat peaks at the knot; the half hat rises to the right boundary
    CHECK(basis.columns(1, 0) == doctest::Approx(1.0));
    CHECK(basis.columns(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("cubic with 2 interior knots has 5 columns") {
    std::vector<double> values;
    for (int i = 0; i <= 30; ++i) values.push_back(i / 30.0);
    SplineSpec spec{"v", 3, {0.3, 0.7}, 0};
    const BasisMatrix basis = bspline_basis(values, spec);
    CHECK(basis.columns.cols() == 5);
    CHECK(basis.column_names.front() == "v_bs1");
    CHECK(basis.column_names.back() == "v_bs5");
}

TEST_CASE("matches the recursive oracle at 200 uniform points") {
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) values.push_back(2.0 + 5.0 * i / 199.0);
    values.push_back(3.1);  // make knot placement non-trivial
    values.push_back(6.9);
    SplineSpec spec{"v", 3, {3.0, 4.5, 5.5}, 0};
    const BasisMatrix basis = bspline_basis(values, spec);

    std::vector<double> points;
    for (int i = 0; i < 200; ++i) points.push_back(2.0 + (7.0 - 2.0) * i / 200.0);  // < 7
    const Eigen::MatrixXd got = evaluate_basis(basis, points);

    double max_diff = 0.0;
    for (std::size_t r = 0; r < points.size(); ++r)
        for (Eigen::Index j = 0; j < got.cols(); ++j) {
            const double want =
                cox_de_boor(basis.knots, static_cast<std::size_t>(j) + 1, 3, points[r]);
            max_diff = std::max(max_diff, std::abs(got(static_cast<Eigen::Index>(r), j) - want));
        }
    CHECK(max_diff < 1e-12);
}

TEST_CASE("partition of unity and local support on random bases") {
    Xoshiro256pp rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const int degree = 1 + static_cast<int>(uniform_below(rng, 4));
        const int k = static_cast<int>(uniform_below(rng, 4));
        std::vector<double> values;
        for (int i = 0; i < 100; ++i) values.push_back(uniform_real(rng));
        std::vector<double> knots;
        for (int i = 1; i <= k; ++i) knots.push_back(static_cast<double>(i) / (k + 1));
        SplineSpec spec{"v", degree, knots, 0};
        const BasisMatrix basis = bspline_basis(values, spec);

        REQUIRE(basis.columns.cols() == k + degree);
        for (Eigen::Index r = 0; r < basis.columns.rows(); ++r) {
            double total = basis.leading[r];
            for (Eigen::Index j = 0; j < basis.columns.cols(); ++j) {
                const double v = basis.columns(r, j);
                CHECK(v >= 0.0);
                total += v;
                // column j is full-basis function j+1 with support [t_{j+1}, t_{j+2+degree}]
                const double x = values[static_cast<std::size_t>(r)];
                const auto lo = static_cast<std::size_t>(j) + 1;
                const auto hi = lo + static_cast<std::size_t>(degree) + 1;
                if (x < basis.knots[lo] || x > basis.knots[hi]) CHECK(v == 0.0);
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("df-driven quantile knots give df columns") {
    Xoshiro256pp rng(5);
    std::vector<double> values;
    for (int i = 0; i < 400; ++i) values.push_back(std::exp(standard_normal(rng)));
    SplineSpec spec{"v", 3, {}, 5};
    const BasisMatrix basis = bspline_basis(values, spec);
    CHECK(basis.columns.cols() == 5);
}

TEST_CASE("evaluation outside the boundary is an error") {
    SplineSpec spec{"v", 2, {}, 2};
    const BasisMatrix basis = bspline_basis({0.0, 0.25, 0.5, 0.75, 1.0}, spec);
    CHECK_THROWS_AS(evaluate_basis(basis, {1.5}), DataError);
    CHECK_THROWS_AS(evaluate_basis(basis, {-0.1}), DataError);
    CHECK_NOTHROW(evaluate_basis(basis, {0.0, 1.0}));  // boundary points are inside
}

TEST_CASE("rejects bad specs") {
    CHECK_THROWS_AS(bspline_basis({0, 1, 2}, SplineSpec{"v", 0, {}, 0}), ConfigError);
    CHECK_THROWS_AS(bspline_basis({0, 1}, SplineSpec{"v", 3, {}, 3}), ConfigError);     // few distinct
    CHECK_THROWS_AS(bspline_basis({0, 1, 2}, SplineSpec{"v", 1, {5.0}, 0}), ConfigError);  // knot outside
    CHECK_THROWS_AS(bspline_basis({0, 1, 2}, SplineSpec{"v", 1, {0.8, 0.4}, 0}),
                    ConfigError);  // not increasing
}

TEST_CASE("expand_variable replaces one group and leaves the rest intact") {
    const Design design = two_column_design(80, 11);
    const Design expanded = expand_variable(design, SplineSpec{"v", 3, {}, 5});

    REQUIRE(expanded.groups.size() == 2);
    CHECK(expanded.groups[0].name == "v");
    CHECK(expanded.groups[0].columns.size() == 5);
    CHECK(expanded.groups[1].name == "z");
    CHECK(expanded.groups[1].columns.size() == 1);
    CHECK(expanded.p() == 6);
    // the untouched covariate keeps its values
    CHECK(expanded.x.col(expanded.groups[1].columns[0]) == design.x.col(1));

    CHECK_THROWS_AS(expand_variable(expanded, SplineSpec{"v", 3, {}, 5}), ConfigError);
    CHECK_THROWS_AS(expand_variable(design, SplineSpec{"nope", 3, {}, 5}), ConfigError);
}

TEST_CASE("degree-1 expansion with no knots spans the same model") {
    // basis column is (x - min)/(max - min): the fit is a re-parameterization
    const Design design = two_column_design(120, 13);
    const Design expanded = expand_variable(design, SplineSpec{"v", 1, {}, 1});
    REQUIRE(expanded.groups[0].columns.size() == 1);

    const Eigen::VectorXd w = Eigen::VectorXd::Ones(design.n());
    const FittedModel fit_raw = fit(design, w);
    const FittedModel fit_exp = fit(expanded, w);
    const Eigen::VectorXd pred_raw = linear_predictor(fit_raw, design.x);
    const Eigen::VectorXd pred_exp = linear_predictor(fit_exp, expanded.x);
    CHECK((pred_raw - pred_exp).lpNorm<Eigen::Infinity>() < 1e-8);
}

}  // TEST_SUITE
