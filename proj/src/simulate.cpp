#include "oobvimp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oobvimp/errors.hpp"
#include "oobvimp/spline.hpp"

namespace oobvimp {

namespace {

constexpr std::uint64_t kPilotSeed = 0x5ca1ab1e0ddba11ULL;
constexpr int kPilotSize = 100000;

double quantile7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double true_log_relative_hazard(const CoxSimParams& p, double psa, double tumor) {
    return p.beta_psa * psa + p.beta_tumor_linear * tumor + p.psi_quadratic * tumor * tumor +
           p.psi_cubic * tumor * tumor * tumor;
}

SimCalibration calibrate_sim(const CoxSimParams& params) {
    if (!(params.target_censoring > 0.0 && params.target_censoring < 1.0))
        throw ConfigError("target censoring must lie strictly between 0 and 1");
    if (params.n < 10) throw ConfigError("simulation needs n >= 10");

    // pilot event times at alpha0 = 0: t = E * exp(-lp), E ~ Exp(1)
    Xoshiro256pp rng(kPilotSeed);
    std::vector<double> t0(kPilotSize);
    for (auto& t : t0) {
        const double psa =
            params.psa_min + uniform_real(rng) * (params.psa_max - params.psa_min);
        const double tumor =
            params.tumor_min + uniform_real(rng) * (params.tumor_max - params.tumor_min);
        t = -std::log(uniform_open(rng)) * std::exp(-true_log_relative_hazard(params, psa, tumor));
    }

    SimCalibration cal;
    // alpha0 scales all times by exp(-alpha0); pick it so the median lands at 1
    cal.alpha0 = std::log(quantile7(t0, 0.5));
    for (auto& t : t0) t *= std::exp(-cal.alpha0);

    // P(censored) = E[1 - exp(-rate * T)] is monotone in the rate: bisect
    auto censored_fraction = [&](double rate) {
        double sum = 0.0;
        for (double t : t0) sum += 1.0 - std::exp(-rate * t);
        return sum / static_cast<double>(t0.size());
    };
    double lo = 1e-9, hi = 1e9;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);  // bisect on the log scale
        if (censored_fraction(mid) < params.target_censoring)
            lo = mid;
        else
            hi = mid;
    }
    cal.censor_rate = std::sqrt(lo * hi);
    return cal;
}

CoxSimTable simulate_cox_table(const CoxSimParams& params, std::uint64_t seed) {
    const SimCalibration cal = calibrate_sim(params);
    const auto n = static_cast<Eigen::Index>(params.n);

    CoxSimTable tab;
    tab.calibration = cal;
    tab.psa.resize(n);
    tab.tumor.resize(n);
    tab.x1.resize(n);
    tab.x2.resize(n);
    tab.x3.resize(n);
    tab.latent_time.resize(n);
    tab.time.resize(n);
    tab.event.resize(n);

    Xoshiro256pp rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) {
        tab.psa[i] = params.psa_min + uniform_real(rng) * (params.psa_max - params.psa_min);
        tab.tumor[i] =
            params.tumor_min + uniform_real(rng) * (params.tumor_max - params.tumor_min);
        tab.x1[i] = standard_normal(rng);
        tab.x2[i] = standard_normal(rng);
        tab.x3[i] = standard_normal(rng);

        const double hazard =
            std::exp(cal.alpha0 + true_log_relative_hazard(params, tab.psa[i], tab.tumor[i]));
        const double t_event = exponential(rng, hazard);
        const double t_censor = exponential(rng, cal.censor_rate);
        tab.latent_time[i] = t_event;
        tab.time[i] = std::min(t_event, t_censor);
        tab.event[i] = t_event <= t_censor ? 1.0 : 0.0;
    }
    return tab;
}

Dataset simulate_cox_data(const CoxSimParams& params, std::uint64_t seed) {
    const CoxSimTable tab = simulate_cox_table(params, seed);
    auto vec = [](const Eigen::VectorXd& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    std::vector<ColumnSpec> schema{
        {"psa", ColumnKind::numeric, ColumnRole::covariate},
        {"tumor_volume", ColumnKind::numeric, ColumnRole::covariate},
        {"X1", ColumnKind::numeric, ColumnRole::covariate},
        {"X2", ColumnKind::numeric, ColumnRole::covariate},
        {"X3", ColumnKind::numeric, ColumnRole::covariate},
        {"time", ColumnKind::numeric, ColumnRole::time},
        {"event", ColumnKind::binary, ColumnRole::event},
    };
    return Dataset(std::move(schema),
                   {vec(tab.psa), vec(tab.tumor), vec(tab.x1), vec(tab.x2), vec(tab.x3),
                    vec(tab.time), vec(tab.event)});
}

Design simulation_design(const Dataset& data, SimVariant variant, int spline_df) {
    DesignSpec spec;
    spec.family = Family::cox;
    spec.time = "time";
    spec.event = "event";
    spec.covariates = {"psa", "tumor_volume", "X1", "X2", "X3"};
    Design design = make_design(data, spec);
    if (variant == SimVariant::spline_repaired) {
        SplineSpec bs;
        bs.variable = "tumor_volume";
        bs.degree = 3;
        bs.df = spline_df;
        design = expand_variable(design, bs);
    }
    return design;
}

MonteCarloSummary monte_carlo(const CoxSimParams& params, int M, int B,
                              std::uint64_t master_seed, SimVariant variant, int spline_df,
                              int jobs) {
    if (M < 1) throw ConfigError("monte carlo needs M >= 1");
    if (B < 1) throw ConfigError("bootstrap count must be >= 1");

    std::vector<VimpReport> reports(static_cast<std::size_t>(M));
    parallel_indexed(M, jobs, [&](int m) {
        try {
            const auto data_seed = split_seed(master_seed, 2 * static_cast<std::uint64_t>(m));
            const auto boot_seed =
                split_seed(master_seed, 2 * static_cast<std::uint64_t>(m) + 1);
            const Dataset data = simulate_cox_data(params, data_seed);
            const Design design = simulation_design(data, variant, spline_df);

            VimpOptions opts;
            opts.bootstrap = B;
            opts.seed = boot_seed;
            opts.noise = NoiseMethod::zero_coefficient;
            opts.jobs = 1;  // parallelism lives on the repetition loop
            opts.marginal = true;
            opts.stepwise = false;
            reports[static_cast<std::size_t>(m)] = vimp_analysis(design, opts);
        } catch (const DegenerateAnalysisError& e) {
            throw DegenerateAnalysisError("monte carlo run " + std::to_string(m + 1) + ": " +
                                          e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error("monte carlo run " + std::to_string(m + 1) + ": " +
                                     e.what());
        }
    });

    MonteCarloSummary summary;
    summary.variant = variant;
    summary.M = M;
    summary.B = B;
    summary.n = params.n;

    // accumulate by variable name in design order of the first run
    std::vector<std::string> names;
    for (const auto& row : reports.front().rows) names.push_back(row.group_name);
    std::sort(names.begin(), names.end());  // canonical order for lookup
    struct Acc {
        double beta = 0, p = 0, inbag = 0, delta = 0, marg = 0;
        int n_beta = 0, n_p = 0, n_inbag = 0, n_delta = 0, n_marg = 0;
    };
    std::vector<Acc> acc(names.size());
    double err_sum = 0.0;
    for (const auto& rep : reports) {
        err_sum += rep.err_oob;
        summary.diagnostics.non_converged += rep.diagnostics.non_converged;
        summary.diagnostics.no_oob_events += rep.diagnostics.no_oob_events;
        summary.diagnostics.degenerate_refits += rep.diagnostics.degenerate_refits;
        for (const auto& row : rep.rows) {
            const auto it = std::lower_bound(names.begin(), names.end(), row.group_name);
            auto& a = acc[static_cast<std::size_t>(it - names.begin())];
            a.delta += row.delta;
            ++a.n_delta;
            if (row.beta_hat) { a.beta += *row.beta_hat; ++a.n_beta; }
            if (row.p_value) { a.p += *row.p_value; ++a.n_p; }
            if (row.beta_inbag) { a.inbag += *row.beta_inbag; ++a.n_inbag; }
            if (row.delta_marginal) { a.marg += *row.delta_marginal; ++a.n_marg; }
        }
    }
    summary.err_oob = err_sum / M;

    // emit in the design's group order (taken from any run's design ordering)
    const Dataset first = simulate_cox_data(params, split_seed(master_seed, 0));
    const Design first_design = simulation_design(first, variant, spline_df);
    for (const auto& group : first_design.groups) {
        const auto it = std::lower_bound(names.begin(), names.end(), group.name);
        const auto& a = acc[static_cast<std::size_t>(it - names.begin())];
        VariableSummary vs;
        vs.name = group.name;
        vs.delta = a.n_delta > 0 ? a.delta / a.n_delta : 0.0;
        if (a.n_beta > 0) vs.beta_hat = a.beta / a.n_beta;
        if (a.n_p > 0) vs.p_value = a.p / a.n_p;
        if (a.n_inbag > 0) vs.beta_inbag = a.inbag / a.n_inbag;
        if (a.n_marg > 0) vs.delta_marginal = a.marg / a.n_marg;
        summary.variables.push_back(std::move(vs));
    }
    return summary;
}

RobustnessResult subsample_robustness(const Design& design, const std::vector<double>& fractions,
                                      int repeats, int B, std::uint64_t seed, NoiseMethod noise,
                                      int jobs) {
    design.validate();
    if (repeats < 1) throw ConfigError("robustness needs repeats >= 1");
    const auto n = static_cast<int>(design.n());
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw ConfigError("fractions must lie in (0, 1]");
        if (static_cast<int>(f * n) < 10)
            throw ConfigError("fraction " + std::to_string(f) + " keeps fewer than 10 rows");
    }

    auto subsample_usable = [&](const std::vector<int>& rows) {
        if (design.family == Family::cox) {
            for (int r : rows)
                if (design.event[r] == 1.0) return true;
            return false;
        }
        double first = design.y[rows.front()];
        for (int r : rows)
            if (design.y[r] != first) return true;
        return false;
    };

    const int tasks = static_cast<int>(fractions.size()) * repeats;
    struct TaskOut {
        std::vector<RobustnessRow> rows;
    };
    std::vector<TaskOut> outs(static_cast<std::size_t>(tasks));

    parallel_indexed(tasks, jobs, [&](int t) {
        const auto fi = static_cast<std::size_t>(t) / static_cast<std::size_t>(repeats);
        const int r = t % repeats;
        const double fraction = fractions[fi];
        const int m_rows = static_cast<int>(fraction * n);

        const auto draw_seed = split_seed(seed, 2 * static_cast<std::uint64_t>(t));
        const auto boot_seed = split_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1);

        // without-replacement subsample; redraw (same stream) until it carries
        // an outcome signal, at most 10 times
        Xoshiro256pp rng(draw_seed);
        std::vector<int> all(static_cast<std::size_t>(n));
        std::vector<int> rows;
        bool ok = false;
        for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
            std::iota(all.begin(), all.end(), 0);
            for (int i = 0; i < m_rows; ++i) {
                const auto j =
                    i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
                std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
            }
            rows.assign(all.begin(), all.begin() + m_rows);
            std::sort(rows.begin(), rows.end());  // keep original row order
            ok = subsample_usable(rows);
        }
        if (!ok)
            throw DataError("fraction " + std::to_string(fraction) + ", repeat " +
                            std::to_string(r + 1) +
                            ": no usable subsample after 10 attempts");

        const Design sub = design.with_rows(rows);

        std::vector<std::optional<double>> p_values(design.groups.size());
        try {
            const FittedModel full = fit(sub, Eigen::VectorXd::Ones(sub.n()));
            if (full.converged)
                for (const auto& wrow : wald_table(full, sub))
                    p_values[static_cast<std::size_t>(sub.group_index(wrow.group_name))] =
                        wrow.p_value;
        } catch (const DegenerateFitError&) {
        } catch (const NoEventsError&) {
        }

        VimpOptions opts;
        opts.bootstrap = B;
        opts.seed = boot_seed;
        opts.noise = noise;
        opts.jobs = 1;
        opts.marginal = false;
        opts.stepwise = false;
        const VimpReport report = vimp_analysis(sub, opts);

        auto& out = outs[static_cast<std::size_t>(t)];
        for (std::size_t g = 0; g < design.groups.size(); ++g) {
            RobustnessRow row;
            row.fraction = fraction;
            row.repeat = r + 1;
            row.variable = design.groups[g].name;
            row.p_value = p_values[g];
            for (const auto& vrow : report.rows)
                if (vrow.group_name == row.variable) row.delta = vrow.delta;
            out.rows.push_back(std::move(row));
        }
    });

    RobustnessResult result;
    for (const auto& out : outs)
        result.long_rows.insert(result.long_rows.end(), out.rows.begin(), out.rows.end());

    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        for (std::size_t g = 0; g < design.groups.size(); ++g) {
            std::vector<double> logp, delta;
            for (int r = 0; r < repeats; ++r) {
                const auto& row =
                    outs[fi * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(r)]
                        .rows[g];
                if (row.p_value) logp.push_back(std::log(std::max(*row.p_value, 1e-300)));
                delta.push_back(row.delta);
            }
            QuantileRow q;
            q.fraction = fractions[fi];
            q.variable = design.groups[g].name;
            q.logp_q25 = logp.empty() ? std::nan("") : quantile7(logp, 0.25);
            q.logp_q50 = logp.empty() ? std::nan("") : quantile7(logp, 0.50);
            q.logp_q75 = logp.empty() ? std::nan("") : quantile7(logp, 0.75);
            q.delta_q25 = quantile7(delta, 0.25);
            q.delta_q50 = quantile7(delta, 0.50);
            q.delta_q75 = quantile7(delta, 0.75);
            result.quantiles.push_back(std::move(q));
        }
    }
    return result;
}

}  // namespace oobvimp
