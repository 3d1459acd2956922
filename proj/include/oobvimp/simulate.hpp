#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oobvimp/dataset.hpp"
#include "oobvimp/design.hpp"
#include "oobvimp/vimp.hpp"

namespace oobvimp {

// Proportional-hazards simulation: exponential baseline, log relative hazard
//   beta_psa*psa + beta_tumor_linear*tv + psi_quadratic*tv^2 + psi_cubic*tv^3,
// independent exponential censoring. The paper-style misspecification drops
// the quadratic/cubic tumor terms from the fitted model.
//
// Covariate distributions are an implementation calibration (documented in
// the README): psa and tumor volume uniform over the ranges below, X1..X3
// standard normal, all independent.
struct CoxSimParams {
    int n = 1000;
    double beta_psa = 0.05;
    double beta_tumor_linear = 0.01;
    double psi_quadratic = 0.04;
    double psi_cubic = -0.005;
    double target_censoring = 0.70;
    double psa_min = 0.0;
    double psa_max = 18.0;
    double tumor_min = 0.0;
    double tumor_max = 10.0;
};

// alpha0 sets the median event time to 1; censor_rate is solved on a pilot
// sample so the expected censoring fraction hits target_censoring. Both are
// deterministic functions of the parameters.
struct SimCalibration {
    double alpha0 = 0.0;
    double censor_rate = 1.0;
};

SimCalibration calibrate_sim(const CoxSimParams& params);

// beta_psa*psa + beta_tumor_linear*tv + psi(tv), the simulated truth.
double true_log_relative_hazard(const CoxSimParams& params, double psa, double tumor);

// Full latent table, including event times before censoring.
struct CoxSimTable {
    Eigen::VectorXd psa, tumor, x1, x2, x3;
    Eigen::VectorXd latent_time;  // event time, uncensored
    Eigen::VectorXd time;         // observed follow-up
    Eigen::VectorXd event;        // 1 = death observed, 0 = censored
    SimCalibration calibration;
};

CoxSimTable simulate_cox_table(const CoxSimParams& params, std::uint64_t seed);

// Columns: psa, tumor_volume, X1, X2, X3, time, event.
Dataset simulate_cox_data(const CoxSimParams& params, std::uint64_t seed);

// The misspecified design fitted in the experiments (linear terms only),
// optionally with the tumor volume column replaced by its B-spline group.
enum class SimVariant { linear_only, spline_repaired };

Design simulation_design(const Dataset& data, SimVariant variant, int spline_df);

struct VariableSummary {
    std::string name;
    std::optional<double> beta_hat;
    std::optional<double> p_value;
    std::optional<double> beta_inbag;
    double delta = 0.0;
    std::optional<double> delta_marginal;
};

struct MonteCarloSummary {
    SimVariant variant = SimVariant::linear_only;
    int M = 0;
    int B = 0;
    int n = 0;
    std::vector<VariableSummary> variables;  // design order
    double err_oob = 0.0;
    Diagnostics diagnostics;  // summed over runs
};

// M independent repetitions of simulate + vimp_analysis (with marginal VIMP),
// averaged. Repetition seeds derive from master_seed, so results are
// reproducible and independent of scheduling.
MonteCarloSummary monte_carlo(const CoxSimParams& params, int M, int B,
                              std::uint64_t master_seed, SimVariant variant, int spline_df,
                              int jobs);

// --- subsample robustness (sample-size experiment) ---------------------------

struct RobustnessRow {
    double fraction = 0.0;
    int repeat = 0;
    std::string variable;
    std::optional<double> p_value;
    double delta = 0.0;
};

struct QuantileRow {
    double fraction = 0.0;
    std::string variable;
    double logp_q25 = 0.0, logp_q50 = 0.0, logp_q75 = 0.0;
    double delta_q25 = 0.0, delta_q50 = 0.0, delta_q75 = 0.0;
};

struct RobustnessResult {
    std::vector<RobustnessRow> long_rows;   // fraction x repeat x variable
    std::vector<QuantileRow> quantiles;     // fraction x variable
};

// For every fraction and repeat: a without-replacement subsample (redrawn up
// to 10 times until it carries an outcome signal), the full-model p-values
// and a VIMP analysis. Quantiles of log p and delta feed the sample-size
// robustness plots.
RobustnessResult subsample_robustness(const Design& design, const std::vector<double>& fractions,
                                      int repeats, int B, std::uint64_t seed, NoiseMethod noise,
                                      int jobs);

}  // namespace oobvimp
