// Synthetic n-of-1 data generator with known causal structure, plus the
// forced-randomization Monte Carlo oracle used to verify the estimators.
//
// Weekly outcomes follow an autoregressive process around a baseline with an
// additive treatment effect: the carryover kernel gives per-period-lag
// coefficients and a within-period shape scales the effect by week. Period
// treatments come from a fair coin, a logistic propensity on the last
// pre-period outcome (confounded), or deterministic alternation. For every
// period both counterfactual outcome paths (current period treated/untreated,
// history and noise identical) are logged, so observed outcomes equal the
// potential outcome of the assigned level exactly.
#ifndef APTE_SIMULATE_HPP
#define APTE_SIMULATE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "apte/design.hpp"
#include "apte/series.hpp"

namespace apte {

enum class EffectShape {
    Flat,       // shape(j) = 1
    SlowDecay,  // shape(j) = 6/j - 1, the decaying-effect worked example
    SlowOnset,  // shape(j) = 1 - 0.5^j
};

enum class Assignment {
    Randomized,   // fair coin per period
    Confounded,   // logistic propensity on the last pre-period outcome
    Alternating,  // 0, 1, 0, 1, ... (period 1 untreated)
};

struct SimConfig {
    int n_periods = 10;
    int period_min = 4;  // period lengths drawn uniformly from [min, max]
    int period_max = 10;
    double baseline = 0.0;
    std::vector<double> ar;         // AR coefficients on (Y - baseline)
    std::vector<double> carryover;  // effect per period lag; [0] is the current period
    EffectShape shape = EffectShape::Flat;
    Assignment assignment = Assignment::Randomized;
    double confounding = 0.0;  // logistic slope, used when assignment == Confounded
    double noise_sd = 1.0;
    double exposure_high = 6.0 / 7.0;  // weekly exposure written for treated periods
    double exposure_low = 1.0 / 7.0;
    double missing_prob = 0.0;  // per-day chance of a missing weight in the daily export
    std::uint64_t seed = 0;

    /// Throws ConfigError on invalid settings, including an unstable AR spec
    /// (companion-matrix spectral radius >= 1).
    void validate() const;
};

double shape_value(EffectShape shape, int week_in_period);

struct TruthWeek {
    int week = 0;
    int period = 0;
    int week_in_period = 0;
    int assigned = 0;
    double po0 = 0.0;  // outcome had this period been untreated
    double po1 = 0.0;  // outcome had this period been treated
    double observed = 0.0;
};

struct SimResult {
    WeeklySeries series;  // observable weekly outcome/exposure
    PeriodPlan plan;      // true periods, labeled with the assignments
    std::vector<int> assignments;
    std::vector<TruthWeek> truth;
};

SimResult simulate_series(const SimConfig& config);

struct TruthTrajectory {
    std::vector<int> weeks;  // within-period weeks with >= 2 replications per arm
    std::vector<double> e1, e0, apte;
    std::vector<double> se1, se0, se_apte;  // Monte Carlo standard errors
    std::vector<int> n1, n0;                // replications contributing per week
    int n_reps = 0;
    bool truncated = false;
    std::string warning;
};

/// Ground-truth APTE by forced randomization: replicate the simulation with
/// the mid-series target period's treatment forced to each level while every
/// other period follows its natural mechanism; average the target period's
/// outcomes per within-period week. Requires n_reps >= 100. A horizon beyond
/// period_max is truncated with a warning.
TruthTrajectory oracle_apte(const SimConfig& config, int horizon, int n_reps,
                            unsigned n_threads = 1);

/// Canned configurations used by tests and the acceptance suite.
std::map<std::string, SimConfig> scenario_library();

/// Daily CSV in the analyzer's input schema: 7 days per week starting
/// Monday 2012-01-02, the week's weight on every day, activity on the first
/// round(exposure*7) days. Weeks listed in fully_missing_weeks (1-based) get
/// empty weight and activity cells; missing_prob blanks single weights.
std::string daily_csv(const SimResult& result, const SimConfig& config,
                      const std::vector<int>& fully_missing_weeks = {});

/// Hidden-truth JSON (config echo, assignments, per-week potential outcomes).
/// Never read by the analyzer.
std::string truth_json(const SimResult& result, const SimConfig& config);

} // namespace apte

#endif
