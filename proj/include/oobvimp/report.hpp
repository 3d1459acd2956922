#pragma once

#include <string>
#include <vector>

#include "oobvimp/simulate.hpp"
#include "oobvimp/vimp.hpp"

namespace oobvimp {

enum class OutputFormat { table, csv, json };

OutputFormat parse_format(const std::string& name);  // throws ConfigError

// All three serializations read the same in-memory report. The table rounds
// to 2 decimals (3 for p-values); csv and json carry full precision.
std::string render_report(const VimpReport& report, OutputFormat format);

std::string render_summary(const MonteCarloSummary& summary, OutputFormat format);

std::string render_quantiles(const RobustnessResult& result, OutputFormat format);

// long-format rows: fraction,repeat,variable,p_value,delta
std::string render_long_csv(const std::vector<RobustnessRow>& rows);

}  // namespace oobvimp
