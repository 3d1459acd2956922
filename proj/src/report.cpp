#include "oobvimp/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "oobvimp/errors.hpp"

namespace oobvimp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string full(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

std::string fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string opt_full(const std::optional<double>& v) { return v ? full(*v) : ""; }

std::string opt_fixed(const std::optional<double>& v, int decimals) {
    return v ? fixed(*v, decimals) : ".";
}

void pad(std::string& out, const std::string& cell, std::size_t width, bool left) {
    if (left) out += cell;
    if (cell.size() < width) out.append(width - cell.size(), ' ');
    if (!left) out += cell;
    out.push_back(' ');
}

std::string table_of(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& body) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : body) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) pad(out, header[c], width[c], c == 0);
    out.push_back('\n');
    for (const auto& row : body) {
        for (std::size_t c = 0; c < header.size(); ++c) pad(out, row[c], width[c], c == 0);
        out.push_back('\n');
    }
    return out;
}

std::string variant_name(SimVariant v) {
    return v == SimVariant::linear_only ? "linear" : "spline";
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
    if (name == "table") return OutputFormat::table;
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw ConfigError("unknown format '" + name + "' (expected table, csv or json)");
}

std::string render_report(const VimpReport& report, OutputFormat format) {
    if (format == OutputFormat::json) {
        ordered_json j;
        j["schema_version"] = 1;
        j["family"] = family_name(report.family);
        j["n"] = report.n;
        j["B_used"] = report.B_used;
        j["err_oob"] = report.err_oob;
        j["diagnostics"] = {{"non_converged", report.diagnostics.non_converged},
                            {"no_oob_events", report.diagnostics.no_oob_events}};
        j["rows"] = ordered_json::array();
        for (const auto& row : report.rows) {
            ordered_json r;
            r["group"] = row.group_name;
            if (row.beta_hat) r["beta_hat"] = *row.beta_hat;
            if (row.p_value) r["p_value"] = *row.p_value;
            if (row.beta_inbag) r["beta_inbag"] = *row.beta_inbag;
            r["delta"] = row.delta;
            r["err_step"] = row.err_step ? *row.err_step : 0.0;
            if (row.delta_marginal) r["delta_marginal"] = *row.delta_marginal;
            j["rows"].push_back(std::move(r));
        }
        return j.dump(2) + "\n";
    }

    if (format == OutputFormat::csv) {
        std::string out = "group,beta_hat,p_value,beta_inbag,delta,err_step,delta_marginal\n";
        for (const auto& row : report.rows) {
            out += row.group_name;
            out += ',' + opt_full(row.beta_hat);
            out += ',' + opt_full(row.p_value);
            out += ',' + opt_full(row.beta_inbag);
            out += ',' + full(row.delta);
            out += ',' + opt_full(row.err_step);
            out += ',' + opt_full(row.delta_marginal);
            out.push_back('\n');
        }
        return out;
    }

    std::vector<std::vector<std::string>> body;
    for (const auto& row : report.rows) {
        body.push_back({row.group_name, opt_fixed(row.beta_hat, 2), opt_fixed(row.p_value, 3),
                        opt_fixed(row.beta_inbag, 2), fixed(row.delta, 2),
                        opt_fixed(row.err_step, 2), opt_fixed(row.delta_marginal, 2)});
    }
    std::string out = table_of(
        {"variable", "beta", "p-value", "beta_inbag", "delta", "err_step", "delta_marg"}, body);
    out += "\nOOB error: " + fixed(report.err_oob, 2) + "  (B used: " +
           std::to_string(report.B_used) + "/" + std::to_string(report.B) +
           ", non-converged: " + std::to_string(report.diagnostics.non_converged) +
           ", no OOB events: " + std::to_string(report.diagnostics.no_oob_events) + ")\n";
    return out;
}

std::string render_summary(const MonteCarloSummary& summary, OutputFormat format) {
    if (format == OutputFormat::json) {
        ordered_json j;
        j["schema_version"] = 1;
        j["variant"] = variant_name(summary.variant);
        j["M"] = summary.M;
        j["B"] = summary.B;
        j["n"] = summary.n;
        j["err_oob"] = summary.err_oob;
        j["diagnostics"] = {{"non_converged", summary.diagnostics.non_converged},
                            {"no_oob_events", summary.diagnostics.no_oob_events}};
        j["variables"] = ordered_json::array();
        for (const auto& v : summary.variables) {
            ordered_json r;
            r["name"] = v.name;
            if (v.beta_hat) r["beta_hat"] = *v.beta_hat;
            if (v.p_value) r["p_value"] = *v.p_value;
            if (v.beta_inbag) r["beta_inbag"] = *v.beta_inbag;
            r["delta"] = v.delta;
            if (v.delta_marginal) r["delta_marginal"] = *v.delta_marginal;
            j["variables"].push_back(std::move(r));
        }
        return j.dump(2) + "\n";
    }

    if (format == OutputFormat::csv) {
        std::string out = "variable,beta_hat,p_value,beta_inbag,delta,delta_marginal\n";
        for (const auto& v : summary.variables) {
            out += v.name;
            out += ',' + opt_full(v.beta_hat);
            out += ',' + opt_full(v.p_value);
            out += ',' + opt_full(v.beta_inbag);
            out += ',' + full(v.delta);
            out += ',' + opt_full(v.delta_marginal);
            out.push_back('\n');
        }
        return out;
    }

    std::vector<std::vector<std::string>> body;
    for (const auto& v : summary.variables) {
        body.push_back({v.name, opt_fixed(v.beta_hat, 2), opt_fixed(v.p_value, 3),
                        opt_fixed(v.beta_inbag, 2), fixed(v.delta, 2),
                        opt_fixed(v.delta_marginal, 2)});
    }
    std::string out = table_of(
        {"variable", "beta", "p-value", "beta_inbag", "delta", "delta_marg"}, body);
    out += "\nMonte Carlo mean over M=" + std::to_string(summary.M) +
           " (variant: " + variant_name(summary.variant) + ", B=" + std::to_string(summary.B) +
           ", n=" + std::to_string(summary.n) + ")\nmean OOB error: " +
           fixed(summary.err_oob, 2) + "\n";
    return out;
}

std::string render_quantiles(const RobustnessResult& result, OutputFormat format) {
    if (format == OutputFormat::json) {
        ordered_json j = ordered_json::array();
        for (const auto& q : result.quantiles) {
            ordered_json r;
            r["fraction"] = q.fraction;
            r["variable"] = q.variable;
            r["logp_q25"] = q.logp_q25;
            r["logp_q50"] = q.logp_q50;
            r["logp_q75"] = q.logp_q75;
            r["delta_q25"] = q.delta_q25;
            r["delta_q50"] = q.delta_q50;
            r["delta_q75"] = q.delta_q75;
            j.push_back(std::move(r));
        }
        return j.dump(2) + "\n";
    }

    if (format == OutputFormat::csv) {
        std::string out =
            "fraction,variable,logp_q25,logp_q50,logp_q75,delta_q25,delta_q50,delta_q75\n";
        for (const auto& q : result.quantiles) {
            out += full(q.fraction) + ',' + q.variable;
            out += ',' + full(q.logp_q25) + ',' + full(q.logp_q50) + ',' + full(q.logp_q75);
            out += ',' + full(q.delta_q25) + ',' + full(q.delta_q50) + ',' + full(q.delta_q75);
            out.push_back('\n');
        }
        return out;
    }

    std::vector<std::vector<std::string>> body;
    for (const auto& q : result.quantiles) {
        body.push_back({fixed(q.fraction, 2), q.variable, fixed(q.logp_q25, 2),
                        fixed(q.logp_q50, 2), fixed(q.logp_q75, 2), fixed(q.delta_q25, 2),
                        fixed(q.delta_q50, 2), fixed(q.delta_q75, 2)});
    }
    return table_of({"fraction", "variable", "logp_q25", "logp_q50", "logp_q75", "delta_q25",
                     "delta_q50", "delta_q75"},
                    body);
}

std::string render_long_csv(const std::vector<RobustnessRow>& rows) {
    std::string out = "fraction,repeat,variable,p_value,delta\n";
    for (const auto& row : rows) {
        out += full(row.fraction) + ',' + std::to_string(row.repeat) + ',' + row.variable;
        out += ',' + opt_full(row.p_value) + ',' + full(row.delta);
        out.push_back('\n');
    }
    return out;
}

}  // namespace oobvimp
