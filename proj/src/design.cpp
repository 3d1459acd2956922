#include "oobvimp/design.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "oobvimp/errors.hpp"

namespace oobvimp {

std::string family_name(Family f) {
    switch (f) {
        case Family::linear: return "linear";
        case Family::logistic: return "logistic";
        case Family::cox: return "cox";
    }
    return "?";
}

int Design::group_index(const std::string& name) const {
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (groups[g].name == name) return static_cast<int>(g);
    return -1;
}

namespace {

std::vector<int> stable_time_order(const Eigen::VectorXd& time) {
    std::vector<int> order(static_cast<std::size_t>(time.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return time[a] < time[b]; });
    return order;
}

}  // namespace

Design Design::with_groups(const std::vector<int>& keep) const {
    Design out;
    out.family = family;
    out.y = y;
    out.time = time;
    out.event = event;
    out.time_order = time_order;

    std::vector<int> cols;
    for (int g : keep)
        for (int c : groups[static_cast<std::size_t>(g)].columns) cols.push_back(c);
    std::sort(cols.begin(), cols.end());

    out.x.resize(x.rows(), static_cast<Eigen::Index>(cols.size()));
    std::vector<int> remap(static_cast<std::size_t>(x.cols()), -1);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.x.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
        remap[static_cast<std::size_t>(cols[j])] = static_cast<int>(j);
    }

    std::vector<int> keep_sorted = keep;
    std::sort(keep_sorted.begin(), keep_sorted.end());
    for (int g : keep_sorted) {
        VariableGroup vg;
        vg.name = groups[static_cast<std::size_t>(g)].name;
        for (int c : groups[static_cast<std::size_t>(g)].columns)
            vg.columns.push_back(remap[static_cast<std::size_t>(c)]);
        out.groups.push_back(std::move(vg));
    }
    return out;
}

Design Design::with_rows(const std::vector<int>& rows) const {
    Design out;
    out.family = family;
    out.groups = groups;
    const auto m = static_cast<Eigen::Index>(rows.size());
    out.x.resize(m, x.cols());
    for (Eigen::Index i = 0; i < m; ++i) out.x.row(i) = x.row(rows[static_cast<std::size_t>(i)]);
    auto take = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd r;
        if (v.size() == 0) return r;
        r.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) r[i] = v[rows[static_cast<std::size_t>(i)]];
        return r;
    };
    out.y = take(y);
    out.time = take(time);
    out.event = take(event);
    if (family == Family::cox) out.time_order = stable_time_order(out.time);
    return out;
}

void Design::validate() const {
    const auto p = static_cast<std::size_t>(x.cols());
    std::vector<int> owner(p, -1);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].columns.empty())
            throw ConfigError("group '" + groups[g].name + "' has no columns");
        for (int c : groups[g].columns) {
            if (c < 0 || static_cast<std::size_t>(c) >= p)
                throw ConfigError("group '" + groups[g].name + "' references column " +
                                  std::to_string(c) + " outside the design");
            if (owner[static_cast<std::size_t>(c)] != -1)
                throw ConfigError("column " + std::to_string(c) + " belongs to two groups");
            owner[static_cast<std::size_t>(c)] = static_cast<int>(g);
        }
    }
    for (std::size_t c = 0; c < p; ++c)
        if (owner[c] == -1)
            throw ConfigError("column " + std::to_string(c) + " belongs to no group");

    if (family == Family::cox) {
        if (time.size() != x.rows() || event.size() != x.rows())
            throw ConfigError("survival response length does not match the design");
    } else {
        if (y.size() != x.rows()) throw ConfigError("response length does not match the design");
    }
    if (x.rows() < 2) throw ConfigError("design needs at least 2 rows");
}

Design make_design(const Dataset& dataset, const DesignSpec& spec) {
    Design design;
    design.family = spec.family;

    std::unordered_set<std::string> taken;
    if (spec.family == Family::cox) {
        if (spec.time.empty() || spec.event.empty())
            throw ConfigError("cox family needs time and event columns");
        const auto& t = dataset.column(spec.time);
        const auto& e = dataset.column(spec.event);
        design.time = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
        design.event = Eigen::Map<const Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
        for (Eigen::Index i = 0; i < design.time.size(); ++i) {
            if (design.time[i] <= 0.0)
                throw DataError("time column '" + spec.time + "' has non-positive value at row " +
                                std::to_string(i + 1));
            if (design.event[i] != 0.0 && design.event[i] != 1.0)
                throw DataError("binary column out of range: '" + spec.event + "' at row " +
                                std::to_string(i + 1));
        }
        taken.insert(spec.time);
        taken.insert(spec.event);
    } else {
        if (spec.response.empty()) throw ConfigError("family needs a response column");
        const auto& r = dataset.column(spec.response);
        design.y = Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
        if (spec.family == Family::logistic)
            for (Eigen::Index i = 0; i < design.y.size(); ++i)
                if (design.y[i] != 0.0 && design.y[i] != 1.0)
                    throw DataError("logistic response '" + spec.response +
                                    "' is not 0/1 at row " + std::to_string(i + 1));
        taken.insert(spec.response);
    }

    std::vector<std::string> covariates = spec.covariates;
    if (covariates.empty()) {
        for (const auto& col : dataset.schema())
            if (!taken.count(col.name) && col.role != ColumnRole::ignore)
                covariates.push_back(col.name);
    }
    if (covariates.empty()) throw ConfigError("no covariates selected");

    const auto n = static_cast<Eigen::Index>(dataset.n_rows());
    design.x.resize(n, static_cast<Eigen::Index>(covariates.size()));
    for (std::size_t j = 0; j < covariates.size(); ++j) {
        if (taken.count(covariates[j]))
            throw ConfigError("column '" + covariates[j] + "' is both response and covariate");
        const auto& v = dataset.column(covariates[j]);  // throws DataError if unknown
        design.x.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Eigen::VectorXd>(v.data(), n);
        design.groups.push_back({covariates[j], {static_cast<int>(j)}});
    }

    if (design.family == Family::cox) design.time_order = stable_time_order(design.time);
    design.validate();
    return design;
}

}  // namespace oobvimp
