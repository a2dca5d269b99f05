// Per-week mean potential outcomes and the APTE trajectory.
//
// Predicted potential outcomes (PPOs) come from the fitted forest with the
// treatment feature forced to each level and every other feature, mediators
// included, held at its observed value; the resulting contrast is a total
// effect. The g-formula estimate averages PPOs over all rows at a
// within-period week (the empirical CSC distribution, equal weights); the
// naive estimate averages only over rows whose observed treatment matches.
#ifndef APTE_ESTIMATOR_HPP
#define APTE_ESTIMATOR_HPP

#include <array>
#include <string>
#include <vector>

#include "apte/design.hpp"
#include "apte/forest.hpp"
#include "apte/stationarity.hpp"

namespace apte {

struct PpoTable {
    // Per design row: prediction with treatment set to 0 and to 1.
    std::vector<std::array<double, 2>> values;
};

/// Predict both potential outcomes for every row of X (the matrix the forest
/// was fitted on, with the treatment in column treatment_col).
PpoTable predict_pos(const Forest& forest, const Matrix& X, int treatment_col);

struct PoEstimate {
    int week = 0;   // within-period week j
    int level = 0;  // treatment level a
    bool estimable = false;
    double mean_po = 0.0;  // meaningful only when estimable
    int n_rows = 0;        // rows averaged over
    std::string reason;    // why not estimable
};

/// G-formula mean PO at week j, level a: average PPO(a) over all rows at
/// week j. Estimable only if some period with label a has length >= j
/// (positivity) and rows exist at week j.
PoEstimate gformula_mean_po(const DesignMatrix& dm, const PpoTable& ppos, const PeriodPlan& plan,
                            int week, int level);

/// Naive mean PO: average PPO(a) over rows at week j whose observed
/// treatment is a.
PoEstimate naive_mean_po(const DesignMatrix& dm, const PpoTable& ppos, int week, int level);

struct ApteRow {
    int week = 0;
    PoEstimate e1, e0;              // g-formula estimates
    PoEstimate e1_naive, e0_naive;
    bool has_apte = false;
    double apte = 0.0;  // e1.mean_po - e0.mean_po
    bool has_apte_naive = false;
    double apte_naive = 0.0;
};

struct ApteReport {
    std::vector<ApteRow> rows;  // weeks 1 .. last week with any design row
    int horizon = 0;            // max week with both g-formula levels estimable
    CscStationaritySummary csc;
    std::string config_fingerprint;
};

/// Assemble the per-week report. Throws EstimationError("no estimable
/// horizon") when no week has both levels estimable. The stationarity
/// summary and fingerprint fields are attached by the caller.
ApteReport apte_trajectory(const DesignMatrix& dm, const PpoTable& ppos, const PeriodPlan& plan);

/// Report CSV: week,E1,E0,APTE,E1_naive,E0_naive,APTE_naive, three decimals,
/// empty cells where a value is not estimable.
std::string report_csv(const ApteReport& report);

} // namespace apte

#endif
