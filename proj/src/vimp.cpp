#include "oobvimp/vimp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oobvimp/errors.hpp"
#include "oobvimp/metric.hpp"

namespace oobvimp {

namespace {

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
    return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
    return out;
}

Eigen::VectorXd weights_of(const BootstrapReplicate& rep) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(rep.multiplicity.size()));
    for (std::size_t i = 0; i < rep.multiplicity.size(); ++i)
        w[static_cast<Eigen::Index>(i)] = static_cast<double>(rep.multiplicity[i]);
    return w;
}

// design restricted to a subset of groups, remembering which original
// columns its matrix consists of (for OOB scoring against the full matrix)
struct SubDesign {
    Design design;
    std::vector<int> original_columns;
};

SubDesign make_sub(const Design& design, const std::vector<int>& keep) {
    SubDesign sub;
    sub.design = design.with_groups(keep);
    for (int g : keep)
        for (int c : design.groups[static_cast<std::size_t>(g)].columns)
            sub.original_columns.push_back(c);
    std::sort(sub.original_columns.begin(), sub.original_columns.end());
    return sub;
}

// fit the reduced model on inbag weights and score the OOB rows of the full
// design; a zero-column cox sub-design is the null model with constant scores
Eigen::VectorXd refit_scores(const SubDesign& sub, const Eigen::VectorXd& weights,
                             const Eigen::MatrixXd& oob_x_full, bool& converged) {
    converged = true;
    if (sub.design.p() == 0 && sub.design.family == Family::cox)
        return Eigen::VectorXd::Zero(oob_x_full.rows());

    const FittedModel model = fit(sub.design, weights);
    if (!model.converged) {
        converged = false;
        return {};
    }
    Eigen::MatrixXd oob_sub(oob_x_full.rows(),
                            static_cast<Eigen::Index>(sub.original_columns.size()));
    for (std::size_t j = 0; j < sub.original_columns.size(); ++j)
        oob_sub.col(static_cast<Eigen::Index>(j)) = oob_x_full.col(sub.original_columns[j]);
    return linear_predictor(model, oob_sub);
}

}  // namespace

Eigen::MatrixXd permute_group_rows(const Eigen::MatrixXd& x, const std::vector<int>& columns,
                                   std::uint64_t seed) {
    std::vector<int> pi(static_cast<std::size_t>(x.rows()));
    std::iota(pi.begin(), pi.end(), 0);
    Xoshiro256pp rng(seed);
    shuffle(rng, pi);

    Eigen::MatrixXd out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (int c : columns) out(i, c) = x(pi[static_cast<std::size_t>(i)], c);
    return out;
}

Eigen::VectorXd noised_scores(const FittedModel& model, const Eigen::MatrixXd& oob_x,
                              const Design& design, int group_index, NoiseMethod method,
                              std::uint64_t replicate_seed) {
    if (group_index < 0 || static_cast<std::size_t>(group_index) >= design.groups.size())
        throw ConfigError("unknown group index " + std::to_string(group_index));
    const auto& group = design.groups[static_cast<std::size_t>(group_index)];

    if (method == NoiseMethod::zero_coefficient)
        return linear_predictor_zeroed(model, oob_x, group.columns);

    if (oob_x.rows() < 2) throw ConfigError("permutation noising needs at least 2 OOB rows");
    const std::uint64_t perm_seed =
        split_seed(replicate_seed, static_cast<std::uint64_t>(group_index) + 1);
    return linear_predictor(model, permute_group_rows(oob_x, group.columns, perm_seed));
}

double score_error(const Design& design, const std::vector<int>& rows,
                   const Eigen::VectorXd& scores) {
    switch (design.family) {
        case Family::linear:
            return standardized_mse_error(scores, gather(design.y, rows)).value;
        case Family::logistic: {
            const Eigen::VectorXd probs = (1.0 / (1.0 + (-scores.array()).exp())).matrix();
            return misclassification_error(probs, gather(design.y, rows)).value;
        }
        case Family::cox:
            return concordance_error(scores, gather(design.time, rows), gather(design.event, rows))
                .value;
    }
    throw ConfigError("unknown family");
}

std::vector<ReplicateOutcome> fit_replicates(const Design& design,
                                             const std::vector<BootstrapReplicate>& replicates,
                                             NoiseMethod noise, int jobs) {
    const auto n_groups = design.groups.size();
    return run_replicates(replicates, jobs, [&](const BootstrapReplicate& rep) {
        ReplicateOutcome out;
        if (rep.oob_rows.empty()) return out;  // nothing to test on

        const Eigen::VectorXd w = weights_of(rep);
        FittedModel model;
        try {
            model = fit(design, w);
        } catch (const NoEventsError&) {
            return out;
        } catch (const DegenerateFitError&) {
            out.status = ReplicateOutcome::Status::non_converged;
            return out;
        }
        if (!model.converged) {
            out.status = ReplicateOutcome::Status::non_converged;
            return out;
        }

        const Eigen::MatrixXd oob_x = gather_rows(design.x, rep.oob_rows);
        const Eigen::VectorXd scores = linear_predictor(model, oob_x);
        try {
            out.err_b = score_error(design, rep.oob_rows, scores);
        } catch (const UndefinedErrorValue&) {
            return out;  // no usable OOB outcome
        }

        out.err_noised.resize(n_groups);
        for (std::size_t g = 0; g < n_groups; ++g) {
            const Eigen::VectorXd noised =
                noised_scores(model, oob_x, design, static_cast<int>(g), noise, rep.seed);
            out.err_noised[g] = score_error(design, rep.oob_rows, noised);
        }
        out.coefficients = model.coefficients;
        out.status = ReplicateOutcome::Status::usable;
        return out;
    });
}

MarginalResult marginal_vimp(const Design& design,
                             const std::vector<BootstrapReplicate>& replicates,
                             const std::vector<ReplicateOutcome>& baseline, int jobs) {
    const auto n_groups = design.groups.size();

    // reduced designs (each one group removed), shared read-only by all tasks
    std::vector<SubDesign> reduced;
    reduced.reserve(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        std::vector<int> keep;
        for (std::size_t h = 0; h < n_groups; ++h)
            if (h != g) keep.push_back(static_cast<int>(h));
        reduced.push_back(make_sub(design, keep));
    }

    // per replicate: Err_marg for each group, nullopt when the refit degenerates
    auto errs = run_replicates(replicates, jobs, [&](const BootstrapReplicate& rep) {
        std::vector<std::optional<double>> row(n_groups);
        const auto& base = baseline[static_cast<std::size_t>(rep.index_b - 1)];
        if (base.status != ReplicateOutcome::Status::usable) return row;

        const Eigen::VectorXd w = weights_of(rep);
        const Eigen::MatrixXd oob_x = gather_rows(design.x, rep.oob_rows);
        for (std::size_t g = 0; g < n_groups; ++g) {
            try {
                bool converged = true;
                const Eigen::VectorXd scores = refit_scores(reduced[g], w, oob_x, converged);
                if (converged) row[g] = score_error(design, rep.oob_rows, scores);
            } catch (const DegenerateFitError&) {
            } catch (const NoEventsError&) {
            }
        }
        return row;
    });

    MarginalResult result;
    result.delta_marginal.resize(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t b = 0; b < replicates.size(); ++b) {
            if (baseline[b].status != ReplicateOutcome::Status::usable) continue;
            if (errs[b][g]) {
                sum += *errs[b][g] - baseline[b].err_b;
                ++count;
            } else {
                ++result.degenerate_refits;
            }
        }
        if (count > 0) result.delta_marginal[g] = sum / count;
    }
    return result;
}

StepwiseResult stepwise_errors(const Design& design,
                               const std::vector<BootstrapReplicate>& replicates,
                               const std::vector<ReplicateOutcome>& baseline,
                               const std::vector<int>& ordering, int jobs) {
    const auto n_groups = design.groups.size();
    if (ordering.size() != n_groups) throw ConfigError("stepwise ordering must cover every group");

    // nested designs for the top-k models, k = 1 .. G-1; the top-G model is
    // the full model whose error is the baseline itself
    std::vector<SubDesign> nested;
    for (std::size_t k = 1; k < n_groups; ++k)
        nested.push_back(make_sub(design, {ordering.begin(), ordering.begin() +
                                                                  static_cast<std::ptrdiff_t>(k)}));

    auto errs = run_replicates(replicates, jobs, [&](const BootstrapReplicate& rep) {
        std::vector<std::optional<double>> row(nested.size());
        const auto& base = baseline[static_cast<std::size_t>(rep.index_b - 1)];
        if (base.status != ReplicateOutcome::Status::usable) return row;

        const Eigen::VectorXd w = weights_of(rep);
        const Eigen::MatrixXd oob_x = gather_rows(design.x, rep.oob_rows);
        for (std::size_t k = 0; k < nested.size(); ++k) {
            try {
                bool converged = true;
                const Eigen::VectorXd scores = refit_scores(nested[k], w, oob_x, converged);
                if (converged) row[k] = score_error(design, rep.oob_rows, scores);
            } catch (const DegenerateFitError&) {
            } catch (const NoEventsError&) {
            }
        }
        return row;
    });

    StepwiseResult result;
    result.err_step.assign(n_groups, 0.0);
    double err_oob_sum = 0.0;
    int usable = 0;
    for (std::size_t b = 0; b < replicates.size(); ++b) {
        if (baseline[b].status != ReplicateOutcome::Status::usable) continue;
        err_oob_sum += baseline[b].err_b;
        ++usable;
    }
    for (std::size_t k = 0; k + 1 < n_groups; ++k) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t b = 0; b < replicates.size(); ++b) {
            if (baseline[b].status != ReplicateOutcome::Status::usable) continue;
            if (errs[b][k]) {
                sum += *errs[b][k];
                ++count;
            } else {
                ++result.degenerate_refits;
            }
        }
        result.err_step[k] = count > 0 ? sum / count : std::nan("");
    }
    if (usable == 0) throw DegenerateAnalysisError("no usable replicates for stepwise errors");
    result.err_step[n_groups - 1] = err_oob_sum / usable;
    return result;
}

VimpReport vimp_analysis(const Design& design, const VimpOptions& options) {
    design.validate();
    if (options.bootstrap < 1) throw ConfigError("bootstrap count must be >= 1");
    const auto n_groups = design.groups.size();

    const auto replicates =
        make_replicates(static_cast<int>(design.n()), options.bootstrap, options.seed);
    const auto outcomes = fit_replicates(design, replicates, options.noise, options.jobs);

    VimpReport report;
    report.family = design.family;
    report.n = static_cast<int>(design.n());
    report.B = options.bootstrap;

    // index-ordered reduction: err_oob, per-group deltas, inbag coefficients
    double err_sum = 0.0;
    std::vector<double> delta_sum(n_groups, 0.0);
    Eigen::VectorXd coef_sum;
    for (const auto& out : outcomes) {
        switch (out.status) {
            case ReplicateOutcome::Status::non_converged:
                ++report.diagnostics.non_converged;
                continue;
            case ReplicateOutcome::Status::no_events:
                ++report.diagnostics.no_oob_events;
                continue;
            case ReplicateOutcome::Status::usable: break;
        }
        ++report.B_used;
        err_sum += out.err_b;
        for (std::size_t g = 0; g < n_groups; ++g)
            delta_sum[g] += out.err_noised[g] - out.err_b;
        if (coef_sum.size() == 0)
            coef_sum = out.coefficients;
        else
            coef_sum += out.coefficients;
    }
    if (report.B_used == 0)
        throw DegenerateAnalysisError("all " + std::to_string(options.bootstrap) +
                                      " replicates were unusable");
    report.err_oob = err_sum / report.B_used;
    const Eigen::VectorXd coef_mean = coef_sum / report.B_used;

    // full-data Wald columns
    std::optional<FittedModel> full;
    try {
        FittedModel m = fit(design, Eigen::VectorXd::Ones(design.n()));
        if (m.converged) full = std::move(m);
    } catch (const DegenerateFitError& e) {
        throw DegenerateAnalysisError(std::string("full-data fit is degenerate: ") + e.what());
    } catch (const NoEventsError& e) {
        throw DegenerateAnalysisError(std::string("full-data fit impossible: ") + e.what());
    }

    std::vector<VimpRow> rows(n_groups);
    const Eigen::Index offset = (design.family == Family::cox) ? 0 : 1;
    for (std::size_t g = 0; g < n_groups; ++g) {
        rows[g].group_name = design.groups[g].name;
        rows[g].delta = delta_sum[g] / report.B_used;
        if (design.groups[g].columns.size() == 1)
            rows[g].beta_inbag = coef_mean[offset + design.groups[g].columns.front()];
    }
    if (full) {
        const auto wald = wald_table(*full, design);
        for (const auto& wrow : wald) {
            const int g = design.group_index(wrow.group_name);
            rows[static_cast<std::size_t>(g)].beta_hat = wrow.beta_hat;
            rows[static_cast<std::size_t>(g)].p_value = wrow.p_value;
        }
    }

    if (options.marginal) {
        const auto marg = marginal_vimp(design, replicates, outcomes, options.jobs);
        report.diagnostics.degenerate_refits += marg.degenerate_refits;
        for (std::size_t g = 0; g < n_groups; ++g)
            rows[g].delta_marginal = marg.delta_marginal[g];
    }

    // VIMP ranking: delta descending, ties keep original group order
    std::vector<int> ordering(n_groups);
    std::iota(ordering.begin(), ordering.end(), 0);
    std::stable_sort(ordering.begin(), ordering.end(), [&](int a, int b) {
        return rows[static_cast<std::size_t>(a)].delta > rows[static_cast<std::size_t>(b)].delta;
    });

    if (options.stepwise) {
        const auto step = stepwise_errors(design, replicates, outcomes, ordering, options.jobs);
        report.diagnostics.degenerate_refits += step.degenerate_refits;
        for (std::size_t k = 0; k < n_groups; ++k)
            rows[static_cast<std::size_t>(ordering[k])].err_step = step.err_step[k];
    }

    report.rows.reserve(n_groups);
    for (std::size_t k = 0; k < n_groups; ++k)
        report.rows.push_back(std::move(rows[static_cast<std::size_t>(ordering[k])]));
    return report;
}

}  // namespace oobvimp
