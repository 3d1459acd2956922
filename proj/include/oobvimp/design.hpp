#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "oobvimp/dataset.hpp"

namespace oobvimp {

enum class Family { linear, logistic, cox };

std::string family_name(Family f);

// One scientific variable: usually one column, several after spline expansion.
// Noising, removal and stepwise selection always act on whole groups.
struct VariableGroup {
    std::string name;
    std::vector<int> columns;
};

// Model-ready matrix plus response. Immutable once built; bootstrap fits vary
// only the observation weights, never the design itself.
struct Design {
    Eigen::MatrixXd x;  // n x p
    std::vector<VariableGroup> groups;
    Family family = Family::linear;

    Eigen::VectorXd y;      // linear / logistic response
    Eigen::VectorXd time;   // cox
    Eigen::VectorXd event;  // cox, 0/1

    // ascending time order, precomputed for cox fits (stable in row index)
    std::vector<int> time_order;

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }

    int group_index(const std::string& name) const;  // -1 if absent

    // New design keeping only the given groups; column order is preserved.
    Design with_groups(const std::vector<int>& keep) const;

    // New design restricted to the given rows (in the given order).
    Design with_rows(const std::vector<int>& rows) const;

    void validate() const;  // throws ConfigError on structural violations
};

struct DesignSpec {
    Family family = Family::linear;
    std::string response;                 // linear / logistic
    std::string time;                     // cox
    std::string event;                    // cox
    std::vector<std::string> covariates;  // empty: every non-role column
};

Design make_design(const Dataset& dataset, const DesignSpec& spec);

}  // namespace oobvimp
