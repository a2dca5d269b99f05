// Treatment-period construction, exposure dichotomization by OOB-MSE
// threshold search, the lagged design matrix, and predictor selection with
// causal roles.
#ifndef APTE_DESIGN_HPP
#define APTE_DESIGN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "apte/changepoint.hpp"
#include "apte/forest.hpp"
#include "apte/series.hpp"

namespace apte {

struct Period {
    int index = 0;       // 1-based
    int start_week = 0;  // 1-based, inclusive
    int end_week = 0;    // inclusive
    double mean_exposure = 0.0;

    int length() const { return end_week - start_week + 1; }
};

struct PeriodPlan {
    std::vector<Period> periods;
    std::vector<int> treatment_labels;  // per period, 1 = high; empty until labeled
    double threshold = 0.0;
    int min_period_length = 1;

    bool labeled() const { return !treatment_labels.empty(); }
    int n_weeks() const { return periods.empty() ? 0 : periods.back().end_week; }
    /// 1-based period index containing the given 1-based week.
    int period_of_week(int week) const;
    int label_of_period(int period_index) const;
};

/// Turn an exposure segmentation into periods, merging segments shorter than
/// min_length into the neighbor with the closer mean (earlier on ties).
PeriodPlan build_periods(const std::vector<double>& exposure, const Segmentation& segmentation,
                         int min_length);

/// Label each period 1 iff its mean exposure >= threshold.
void apply_threshold(PeriodPlan& plan, double threshold);

/// R type-7 quantile of already-sorted values, p in [0, 1].
double quantile_type7(const std::vector<double>& sorted, double p);

/// Candidate thresholds: the requested quantiles of the period-mean-exposure
/// distribution.
std::vector<double> threshold_candidates(const PeriodPlan& plan,
                                         const std::vector<double>& quantiles);

struct DesignRow {
    int week = 0;  // absolute 1-based week within the analyzed series
    double outcome = 0.0;
    int treatment = 0;
    std::vector<double> y_lags;  // lag 1 .. L_Y
    std::vector<double> x_lags;  // lag 1 .. L_X
    int period = 0;
    int week_in_period = 0;  // j, 1-based
};

// Feature layout: [treatment, y_lag1..L_Y, x_lag1..L_X, period, week_in_period].
struct DesignMatrix {
    std::vector<DesignRow> rows;
    std::vector<std::string> feature_names;
    int lags_y = 0;
    int lags_x = 0;

    int treatment_feature() const { return 0; }
    int period_feature() const { return 1 + lags_y + lags_x; }
    int week_feature() const { return 2 + lags_y + lags_x; }
    int n_features() const { return 3 + lags_y + lags_x; }

    Matrix features() const;
    std::vector<double> targets() const;
};

/// One row per week with a complete lag window (weeks max(L_Y, L_X)+1 .. n).
/// Lags cross period boundaries. Requires a labeled plan tiling the series.
DesignMatrix build_design_matrix(const WeeklySeries& series, const PeriodPlan& plan, int lags_y,
                                 int lags_x);

struct ThresholdSearch {
    double threshold = 0.0;           // winner (smallest on MSE ties)
    std::vector<double> candidates;   // as supplied
    std::vector<double> oob_mses;     // NaN where a candidate was skipped
    std::vector<std::string> warnings;
};

/// Fit one forest per candidate threshold and pick the OOB-MSE minimizer.
/// Candidates labeling every period the same are skipped with a warning;
/// identical labelings share one fit (and one derived seed), so they tie
/// exactly and the smaller threshold wins.
ThresholdSearch select_threshold(const WeeklySeries& series, const PeriodPlan& plan,
                                 const std::vector<double>& candidates, int lags_y, int lags_x,
                                 const ForestParams& params);

enum class CausalRole { Treatment, Csc, Mediator, Coordinate };

/// Role of a feature for rows at within-period week j: lag-k features are
/// CSCs when they reach before the period start (k >= j) and mediators
/// otherwise; the period index is a CSC; week-in-period is the conditioning
/// coordinate. The treatment feature has no role in the map.
CausalRole feature_role(const DesignMatrix& dm, int feature, int week_in_period);

std::string role_name(CausalRole role);

struct PredictorSelection {
    std::vector<int> kept;    // ascending feature indices, treatment always present
    std::vector<int> ranked;  // all features, descending importance
    bool treatment_added_back = false;  // treatment was outside the top k
};

/// Keep the k most important features plus the treatment.
PredictorSelection select_predictors(const ImportanceTable& importances, int k);

/// Column subset of a row-major matrix.
Matrix subset_columns(const Matrix& X, const std::vector<int>& cols);

/// Periods table export: period, start_week, length, mean_exposure, treatment.
std::string periods_csv(const PeriodPlan& plan);

} // namespace apte

#endif
