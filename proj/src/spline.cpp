#include "oobvimp/spline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oobvimp/errors.hpp"

namespace oobvimp {

namespace {

// type-7 quantile (linear interpolation), the common statistical default
double quantile7(std::vector<double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// largest span index i with t[i] <= x < t[i+1]; x == right boundary maps to
// the last non-empty span (left-closed at the right end)
std::size_t find_span(const std::vector<double>& t, int degree, double x) {
    const auto d = static_cast<std::size_t>(degree);
    const std::size_t last = t.size() - d - 2;  // last basis index
    if (x >= t[last + 1]) return last;
    std::size_t lo = d, hi = last;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (t[mid] <= x)
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

// the degree+1 basis functions that are nonzero at x, for span `i`
// (triangular scheme from the Cox-de Boor recursion)
void basis_funs(const std::vector<double>& t, int degree, std::size_t i, double x,
                std::vector<double>& out) {
    const auto d = static_cast<std::size_t>(degree);
    out.assign(d + 1, 0.0);
    out[0] = 1.0;
    std::vector<double> left(d + 1), right(d + 1);
    for (std::size_t j = 1; j <= d; ++j) {
        left[j] = x - t[i + 1 - j];
        right[j] = t[i + j] - x;
        double saved = 0.0;
        for (std::size_t r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom != 0.0 ? out[r] / denom : 0.0;
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

Eigen::MatrixXd evaluate_full(const std::vector<double>& knots, int degree,
                              const std::vector<double>& points, double lo, double hi) {
    const auto n_basis = knots.size() - static_cast<std::size_t>(degree) - 1;
    Eigen::MatrixXd full(static_cast<Eigen::Index>(points.size()),
                         static_cast<Eigen::Index>(n_basis));
    full.setZero();
    std::vector<double> vals;
    for (std::size_t r = 0; r < points.size(); ++r) {
        const double x = points[r];
        if (!(x >= lo && x <= hi))
            throw DataError("value " + std::to_string(x) + " outside the basis boundary [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
        const std::size_t span = find_span(knots, degree, x);
        basis_funs(knots, degree, span, x, vals);
        for (std::size_t j = 0; j <= static_cast<std::size_t>(degree); ++j)
            full(static_cast<Eigen::Index>(r),
                 static_cast<Eigen::Index>(span - static_cast<std::size_t>(degree) + j)) = vals[j];
    }
    return full;
}

}  // namespace

BasisMatrix bspline_basis(const std::vector<double>& values, const SplineSpec& spec) {
    if (spec.degree < 1) throw ConfigError("spline degree must be >= 1");
    if (values.empty()) throw ConfigError("spline expansion of an empty vector");

    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    std::set<double> distinct(values.begin(), values.end());
    if (distinct.size() < static_cast<std::size_t>(spec.degree) + 1)
        throw ConfigError("variable '" + spec.variable + "' has " +
                          std::to_string(distinct.size()) + " distinct values, need at least " +
                          std::to_string(spec.degree + 1));

    std::vector<double> interior = spec.interior_knots;
    if (interior.empty() && spec.df > 0) {
        if (spec.df < spec.degree)
            throw ConfigError("df must be >= degree for '" + spec.variable + "'");
        const int k = spec.df - spec.degree;
        std::vector<double> sorted(values);
        std::sort(sorted.begin(), sorted.end());
        for (int i = 1; i <= k; ++i)
            interior.push_back(quantile7(sorted, static_cast<double>(i) / (k + 1)));
    }
    for (std::size_t i = 0; i < interior.size(); ++i) {
        if (!(interior[i] > lo && interior[i] < hi))
            throw ConfigError("knot " + std::to_string(interior[i]) +
                              " outside the data range of '" + spec.variable + "'");
        if (i > 0 && !(interior[i] > interior[i - 1]))
            throw ConfigError("interior knots must be strictly increasing");
    }

    BasisMatrix basis;
    basis.degree = spec.degree;
    basis.boundary = {lo, hi};
    const auto d = static_cast<std::size_t>(spec.degree);
    basis.knots.assign(d + 1, lo);
    basis.knots.insert(basis.knots.end(), interior.begin(), interior.end());
    basis.knots.insert(basis.knots.end(), d + 1, hi);

    const Eigen::MatrixXd full = evaluate_full(basis.knots, spec.degree, values, lo, hi);
    basis.leading = full.col(0);
    basis.columns = full.rightCols(full.cols() - 1);
    for (Eigen::Index j = 0; j < basis.columns.cols(); ++j)
        basis.column_names.push_back(spec.variable + "_bs" + std::to_string(j + 1));
    return basis;
}

Eigen::MatrixXd evaluate_basis(const BasisMatrix& basis, const std::vector<double>& points) {
    const Eigen::MatrixXd full = evaluate_full(basis.knots, basis.degree, points,
                                               basis.boundary.first, basis.boundary.second);
    return full.rightCols(full.cols() - 1);
}

Design expand_variable(const Design& design, const SplineSpec& spec) {
    const int g = design.group_index(spec.variable);
    if (g < 0) throw ConfigError("variable '" + spec.variable + "' not found in the design");
    const auto& group = design.groups[static_cast<std::size_t>(g)];
    if (group.columns.size() != 1)
        throw ConfigError("variable '" + spec.variable + "' is already expanded");

    const int col = group.columns.front();
    std::vector<double> values(static_cast<std::size_t>(design.n()));
    for (Eigen::Index i = 0; i < design.n(); ++i)
        values[static_cast<std::size_t>(i)] = design.x(i, col);

    const BasisMatrix basis = bspline_basis(values, spec);
    const auto k = basis.columns.cols();

    Design out;
    out.family = design.family;
    out.y = design.y;
    out.time = design.time;
    out.event = design.event;
    out.time_order = design.time_order;
    out.x.resize(design.n(), design.p() - 1 + k);
    out.x.leftCols(col) = design.x.leftCols(col);
    out.x.middleCols(col, k) = basis.columns;
    out.x.rightCols(design.p() - col - 1) = design.x.rightCols(design.p() - col - 1);

    auto shift = [&](int c) { return c < col ? c : c + static_cast<int>(k) - 1; };
    for (const auto& grp : design.groups) {
        VariableGroup vg;
        vg.name = grp.name;
        if (grp.name == spec.variable) {
            for (Eigen::Index j = 0; j < k; ++j) vg.columns.push_back(col + static_cast<int>(j));
        } else {
            for (int c : grp.columns) vg.columns.push_back(shift(c));
        }
        out.groups.push_back(std::move(vg));
    }
    out.validate();
    return out;
}

}  // namespace oobvimp
