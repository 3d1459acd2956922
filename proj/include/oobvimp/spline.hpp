#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "oobvimp/design.hpp"

namespace oobvimp {

struct SplineSpec {
    std::string variable;
    int degree = 3;
    // explicit interior knots, strictly increasing, strictly inside the data
    // range; when empty, `df` drives quantile placement (df - degree knots)
    std::vector<double> interior_knots;
    int df = 0;
};

// Basis expansion of one variable. The clamped Cox-de Boor basis on k interior
// knots has k + degree + 1 functions summing to one; the first is dropped so
// that the expansion stays identifiable next to an intercept (and in a Cox
// model, where a constant direction would make the information singular).
// `leading` keeps the dropped function: leading + rowwise sum of columns == 1.
struct BasisMatrix {
    Eigen::MatrixXd columns;  // n x (k + degree)
    std::vector<std::string> column_names;
    std::pair<double, double> boundary;
    Eigen::VectorXd leading;

    std::vector<double> knots;  // full clamped knot vector, kept for evaluation
    int degree = 3;
};

BasisMatrix bspline_basis(const std::vector<double>& values, const SplineSpec& spec);

// Re-evaluates the basis of `basis` at new points (boundary checked).
Eigen::MatrixXd evaluate_basis(const BasisMatrix& basis, const std::vector<double>& points);

// Replaces the variable's single column by its basis columns; the new columns
// form one group under the variable's name so that noising, removal and
// stepwise selection treat them jointly.
Design expand_variable(const Design& design, const SplineSpec& spec);

}  // namespace oobvimp
