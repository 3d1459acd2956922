// oobvimp: out-of-bag prediction error, VIMP and marginal VIMP for linear,
// logistic and Cox regression models, with a simulation and subsample
// robustness harness.
//
// Exit codes: 0 ok, 1 configuration error, 2 data error, 3 degenerate
// analysis (no usable bootstrap replicate). Reports go to --out or stdout;
// diagnostics go to stderr as a single machine-parseable line.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "oobvimp/dataset.hpp"
#include "oobvimp/errors.hpp"
#include "oobvimp/report.hpp"
#include "oobvimp/simulate.hpp"
#include "oobvimp/spline.hpp"
#include "oobvimp/vimp.hpp"

namespace {

using namespace oobvimp;

struct CommonFlags {
    std::string data;
    std::string family = "cox";
    std::string response, time, event;
    std::vector<std::string> covariates;
    std::vector<std::string> splines;
    std::string noise = "zero";
    int bootstrap = 1000;
    std::uint64_t seed = 1;
    int jobs = 0;
    std::string format = "table";
    std::string out;
};

Family parse_family(const std::string& name) {
    if (name == "linear") return Family::linear;
    if (name == "logistic") return Family::logistic;
    if (name == "cox") return Family::cox;
    throw ConfigError("unknown family '" + name + "'");
}

NoiseMethod parse_noise(const std::string& name) {
    if (name == "zero") return NoiseMethod::zero_coefficient;
    if (name == "permute") return NoiseMethod::permute;
    throw ConfigError("unknown noise method '" + name + "' (expected zero or permute)");
}

// --spline var=df  or  --spline var=degree:k1,k2,...
SplineSpec parse_spline(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("bad spline spec '" + text + "' (expected var=df or var=degree:k1,...)");
    SplineSpec spec;
    spec.variable = text.substr(0, eq);
    const std::string rest = text.substr(eq + 1);
    const auto colon = rest.find(':');
    try {
        if (colon == std::string::npos) {
            spec.df = std::stoi(rest);
            spec.degree = 3;
        } else {
            spec.degree = std::stoi(rest.substr(0, colon));
            std::string knots = rest.substr(colon + 1);
            std::size_t pos = 0;
            while (pos < knots.size()) {
                auto comma = knots.find(',', pos);
                if (comma == std::string::npos) comma = knots.size();
                spec.interior_knots.push_back(std::stod(knots.substr(pos, comma - pos)));
                pos = comma + 1;
            }
        }
    } catch (const std::exception&) {
        throw ConfigError("bad spline spec '" + text + "'");
    }
    return spec;
}

Design load_design(const CommonFlags& flags) {
    const Family family = parse_family(flags.family);
    if (flags.data.empty()) throw ConfigError("--data is required");

    std::vector<ColumnSpec> schema;
    const auto header = csv_header(flags.data);
    DesignSpec dspec;
    dspec.family = family;
    dspec.response = flags.response;
    dspec.time = flags.time;
    dspec.event = flags.event;
    dspec.covariates = flags.covariates;

    if (family == Family::cox) {
        if (flags.time.empty() || flags.event.empty())
            throw ConfigError("cox family requires --time and --event");
        schema.push_back({flags.time, ColumnKind::numeric, ColumnRole::time});
        schema.push_back({flags.event, ColumnKind::binary, ColumnRole::event});
    } else {
        if (flags.response.empty()) throw ConfigError("--response is required");
        schema.push_back({flags.response,
                          family == Family::logistic ? ColumnKind::binary : ColumnKind::numeric,
                          ColumnRole::response});
    }
    if (flags.covariates.empty()) {
        for (const auto& name : header) {
            bool is_role = false;
            for (const auto& s : schema) is_role |= (s.name == name);
            if (!is_role) schema.push_back({name, ColumnKind::numeric, ColumnRole::covariate});
        }
    } else {
        for (const auto& name : flags.covariates)
            schema.push_back({name, ColumnKind::numeric, ColumnRole::covariate});
    }

    const Dataset data = load_csv(flags.data, schema);
    Design design = make_design(data, dspec);
    for (const auto& text : flags.splines) design = expand_variable(design, parse_spline(text));
    return design;
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + out_path + "'");
    out << content;
}

int cmd_analyze(const CommonFlags& flags) {
    const Design design = load_design(flags);

    VimpOptions opts;
    opts.bootstrap = flags.bootstrap;
    opts.seed = flags.seed;
    opts.noise = parse_noise(flags.noise);
    opts.jobs = flags.jobs;
    opts.marginal = true;
    opts.stepwise = true;
    if (opts.bootstrap < 1) throw ConfigError("--bootstrap must be >= 1");

    const VimpReport report = vimp_analysis(design, opts);
    emit(render_report(report, parse_format(flags.format)), flags.out);
    return 0;
}

int cmd_simulate(const CommonFlags& flags, const CoxSimParams& params, int m, int spline_df,
                 const std::string& variant, const std::string& emit_data, bool data_only) {
    if (!emit_data.empty()) {
        const Dataset data = simulate_cox_data(params, split_seed(flags.seed, 0));
        write_csv(data, emit_data);
        if (data_only) return 0;
    } else if (data_only) {
        throw ConfigError("--data-only requires --emit-data");
    }

    if (m < 1) throw ConfigError("--m must be >= 1");
    SimVariant var;
    if (variant == "spline")
        var = SimVariant::spline_repaired;
    else if (variant == "linear")
        var = SimVariant::linear_only;
    else
        throw ConfigError("unknown variant '" + variant + "' (expected linear or spline)");
    const MonteCarloSummary summary =
        monte_carlo(params, m, flags.bootstrap, flags.seed, var, spline_df, flags.jobs);
    emit(render_summary(summary, parse_format(flags.format)), flags.out);
    return 0;
}

int cmd_robustness(const CommonFlags& flags, const std::vector<double>& fractions, int repeats,
                   const std::string& long_out) {
    const Design design = load_design(flags);
    const RobustnessResult result =
        subsample_robustness(design, fractions, repeats, flags.bootstrap, flags.seed,
                             parse_noise(flags.noise), flags.jobs);
    if (!long_out.empty()) emit(render_long_csv(result.long_rows), long_out);
    emit(render_quantiles(result, parse_format(flags.format)), flags.out);
    return 0;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_data) {
    if (with_data) {
        cmd->add_option("--data", flags.data, "input CSV file");
        cmd->add_option("--family", flags.family, "model family: linear, logistic or cox");
        cmd->add_option("--response", flags.response, "response column (linear/logistic)");
        cmd->add_option("--time", flags.time, "follow-up time column (cox)");
        cmd->add_option("--event", flags.event, "event indicator column (cox)");
        cmd->add_option("--covariates", flags.covariates,
                        "covariate columns (default: all non-role columns)");
        cmd->add_option("--spline", flags.splines,
                        "expand a variable: var=df or var=degree:k1,k2,...");
        cmd->add_option("--noise", flags.noise, "noising method: zero or permute");
    }
    cmd->add_option("--bootstrap", flags.bootstrap, "bootstrap replicates B");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--jobs", flags.jobs, "worker threads (0 = all cores, 1 = serial)");
    cmd->add_option("--format", flags.format, "output format: table, csv or json");
    cmd->add_option("--out", flags.out, "write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"out-of-bag prediction error and variable importance for regression models"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* analyze = app.add_subcommand("analyze", "VIMP report for a dataset");
    add_common(analyze, flags, true);

    CoxSimParams params;
    int m = 1000, spline_df = 3;
    std::string variant = "linear", emit_data;
    bool data_only = false;
    auto* simulate = app.add_subcommand("simulate", "misspecified Cox simulation study");
    simulate->add_option("--n", params.n, "rows per simulated dataset");
    simulate->add_option("--m", m, "Monte Carlo repetitions");
    simulate->add_option("--variant", variant, "fitted model: linear or spline");
    simulate->add_option("--spline-df", spline_df, "spline df for the repaired variant");
    simulate->add_option("--censoring", params.target_censoring, "target censoring fraction");
    simulate->add_option("--psa-max", params.psa_max, "upper end of the psa range");
    simulate->add_option("--tumor-max", params.tumor_max, "upper end of the tumor volume range");
    simulate->add_option("--emit-data", emit_data, "also write one simulated dataset as CSV");
    simulate->add_flag("--data-only", data_only, "write --emit-data and exit");
    add_common(simulate, flags, false);

    std::vector<double> fractions{0.10, 0.25, 0.50, 0.75};
    int repeats = 500;
    std::string long_out;
    auto* robustness = app.add_subcommand("robustness", "subsample robustness experiment");
    robustness->add_option("--fractions", fractions, "subsample fractions");
    robustness->add_option("--repeats", repeats, "independent subsamples per fraction");
    robustness->add_option("--long-out", long_out, "write per-repeat long-format CSV here");
    add_common(robustness, flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(flags);
        if (app.got_subcommand(simulate))
            return cmd_simulate(flags, params, m, spline_df, variant, emit_data, data_only);
        if (app.got_subcommand(robustness))
            return cmd_robustness(flags, fractions, repeats, long_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: data: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateAnalysisError& e) {
        std::cerr << "error: degenerate: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 4;
    }
    return 1;
}
