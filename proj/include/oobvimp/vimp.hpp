#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oobvimp/regress.hpp"
#include "oobvimp/resample.hpp"

namespace oobvimp {

// How a variable's association with the outcome is destroyed in OOB data.
// zero_coefficient treats the group's coefficients as zero when scoring
// (exactly equivalent to zeroing its OOB columns); permute applies one random
// permutation jointly to all of the group's OOB columns.
enum class NoiseMethod { zero_coefficient, permute };

struct VimpOptions {
    int bootstrap = 1000;
    std::uint64_t seed = 1;
    NoiseMethod noise = NoiseMethod::zero_coefficient;
    int jobs = 1;  // 0 = all hardware threads
    bool marginal = true;
    bool stepwise = true;
};

struct VimpRow {
    std::string group_name;
    std::optional<double> beta_hat;    // absent for multi-column groups
    std::optional<double> p_value;
    std::optional<double> beta_inbag;
    double delta = 0.0;
    std::optional<double> err_step;
    std::optional<double> delta_marginal;
};

struct Diagnostics {
    int non_converged = 0;     // inbag fits that failed to converge (or were degenerate)
    int no_oob_events = 0;     // replicates whose OOB error was undefined
    int degenerate_refits = 0; // marginal/stepwise refits excluded per group
};

struct VimpReport {
    Family family = Family::linear;
    int n = 0;
    int B = 0;
    int B_used = 0;
    double err_oob = 0.0;
    Diagnostics diagnostics;
    std::vector<VimpRow> rows;  // delta descending, ties by original group order
};

// Outcome of the full-model pass on one replicate: the shared baseline that
// every downstream quantity (delta, marginal delta, stepwise error) compares
// against, computed once per replicate.
struct ReplicateOutcome {
    enum class Status { usable, non_converged, no_events };
    Status status = Status::no_events;
    double err_b = 0.0;
    Eigen::VectorXd coefficients;
    std::vector<double> err_noised;  // per group
};

// --- noising primitives -----------------------------------------------------

// Copy of x with the given columns permuted jointly: row i receives all of
// row pi(i)'s values for those columns, so within-row combinations survive.
Eigen::MatrixXd permute_group_rows(const Eigen::MatrixXd& x, const std::vector<int>& columns,
                                   std::uint64_t seed);

// Scores for oob_x with the group noised up. The permutation stream is
// derived from (replicate_seed, group_index), so results do not depend on
// evaluation order.
Eigen::VectorXd noised_scores(const FittedModel& model, const Eigen::MatrixXd& oob_x,
                              const Design& design, int group_index, NoiseMethod method,
                              std::uint64_t replicate_seed);

// Prediction error of the given scores on the given rows of the design,
// using the family's metric. Throws UndefinedErrorValue when undefined.
double score_error(const Design& design, const std::vector<int>& rows,
                   const Eigen::VectorXd& scores);

// --- analysis passes ---------------------------------------------------------

// Full-model pass: per replicate, fit inbag by multiplicity weights, compute
// the baseline OOB error, then the noised-up error for every group against
// that same baseline.
std::vector<ReplicateOutcome> fit_replicates(const Design& design,
                                             const std::vector<BootstrapReplicate>& replicates,
                                             NoiseMethod noise, int jobs);

struct MarginalResult {
    std::vector<std::optional<double>> delta_marginal;  // per group
    int degenerate_refits = 0;
};

// Marginal VIMP: per replicate and group, refit with the group removed and
// compare to the same Err_b baseline. Degenerate refits drop that replicate
// for that group only.
MarginalResult marginal_vimp(const Design& design,
                             const std::vector<BootstrapReplicate>& replicates,
                             const std::vector<ReplicateOutcome>& baseline, int jobs);

struct StepwiseResult {
    std::vector<double> err_step;  // per rank position; last entry equals err_oob
    int degenerate_refits = 0;
};

// OOB error of the nested models containing the top-k groups of `ordering`,
// refit on the same replicates. The full model is the per-replicate baseline
// itself, so the final entry reproduces err_oob exactly.
StepwiseResult stepwise_errors(const Design& design,
                               const std::vector<BootstrapReplicate>& replicates,
                               const std::vector<ReplicateOutcome>& baseline,
                               const std::vector<int>& ordering, int jobs);

// The whole procedure: replicate pass, marginal pass, VIMP ranking, stepwise
// errors and the full-data Wald columns, assembled into one report.
VimpReport vimp_analysis(const Design& design, const VimpOptions& options);

}  // namespace oobvimp
