#include "apte/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "apte/csv.hpp"
#include "apte/errors.hpp"
#include "apte/rng.hpp"

namespace apte {

namespace {

double mean_over(const std::vector<double>& values, int start_week, int end_week) {
    // A constant stretch means exactly its value; accumulating and dividing
    // would drift by an ulp and make threshold comparisons data-dependent.
    const double first = values[static_cast<std::size_t>(start_week - 1)];
    bool constant = true;
    double sum = 0.0;
    for (int w = start_week; w <= end_week; ++w) {
        const double v = values[static_cast<std::size_t>(w - 1)];
        constant = constant && v == first;
        sum += v;
    }
    if (constant) return first;
    return sum / (end_week - start_week + 1);
}

// FNV-1a over the label bits, used to derive per-labeling forest seeds so
// identical labelings fit identically.
std::uint64_t labeling_hash(const std::vector<int>& labels) {
    std::uint64_t h = 1469598103934665603ULL;
    for (int v : labels) {
        h ^= static_cast<std::uint64_t>(v & 0xff);
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

int PeriodPlan::period_of_week(int week) const {
    for (const Period& p : periods)
        if (week >= p.start_week && week <= p.end_week) return p.index;
    throw DataError("week " + std::to_string(week) + " is outside the period plan");
}

int PeriodPlan::label_of_period(int period_index) const {
    if (!labeled()) throw EstimationError("period plan has no treatment labels");
    return treatment_labels[static_cast<std::size_t>(period_index - 1)];
}

PeriodPlan build_periods(const std::vector<double>& exposure, const Segmentation& segmentation,
                         int min_length) {
    if (segmentation.changepoints.empty()) throw DataError("empty segmentation");
    if (segmentation.changepoints.back() != static_cast<int>(exposure.size()))
        throw DataError("segmentation does not cover the exposure series");
    if (min_length < 1) throw ConfigError("min period length must be >= 1");

    struct Span {
        int start, end;  // 1-based inclusive weeks
    };
    std::vector<Span> spans;
    int start = 1;
    for (int cp : segmentation.changepoints) {
        spans.push_back({start, cp});
        start = cp + 1;
    }

    // Merge short spans into the neighbor with the closer mean; earlier
    // neighbor on ties. Repeat until every span is long enough.
    for (;;) {
        std::size_t short_i = spans.size();
        for (std::size_t i = 0; i < spans.size(); ++i) {
            if (spans[i].end - spans[i].start + 1 < min_length) {
                short_i = i;
                break;
            }
        }
        if (short_i == spans.size() || spans.size() == 1) break;
        const double own = mean_over(exposure, spans[short_i].start, spans[short_i].end);
        std::size_t target;
        if (short_i == 0) {
            target = 1;
        } else if (short_i + 1 == spans.size()) {
            target = short_i - 1;
        } else {
            const double prev_mean =
                mean_over(exposure, spans[short_i - 1].start, spans[short_i - 1].end);
            const double next_mean =
                mean_over(exposure, spans[short_i + 1].start, spans[short_i + 1].end);
            target = std::abs(own - prev_mean) <= std::abs(own - next_mean) ? short_i - 1
                                                                            : short_i + 1;
        }
        const std::size_t lo = std::min(short_i, target);
        const std::size_t hi = std::max(short_i, target);
        spans[lo].end = spans[hi].end;
        spans.erase(spans.begin() + static_cast<std::ptrdiff_t>(hi));
    }

    PeriodPlan plan;
    plan.min_period_length = min_length;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        Period p;
        p.index = static_cast<int>(i) + 1;
        p.start_week = spans[i].start;
        p.end_week = spans[i].end;
        p.mean_exposure = mean_over(exposure, p.start_week, p.end_week);
        plan.periods.push_back(p);
    }
    return plan;
}

void apply_threshold(PeriodPlan& plan, double threshold) {
    plan.threshold = threshold;
    plan.treatment_labels.clear();
    for (const Period& p : plan.periods)
        plan.treatment_labels.push_back(p.mean_exposure >= threshold ? 1 : 0);
}

double quantile_type7(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    if (p < 0.0 || p > 1.0) throw ConfigError("quantile probability must be in [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - std::floor(h)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> threshold_candidates(const PeriodPlan& plan,
                                         const std::vector<double>& quantiles) {
    std::vector<double> means;
    for (const Period& p : plan.periods) means.push_back(p.mean_exposure);
    std::sort(means.begin(), means.end());
    std::vector<double> out;
    for (double q : quantiles) out.push_back(quantile_type7(means, q));
    return out;
}

DesignMatrix build_design_matrix(const WeeklySeries& series, const PeriodPlan& plan, int lags_y,
                                 int lags_x) {
    if (lags_y < 0 || lags_x < 0) throw ConfigError("lag counts must be >= 0");
    const int n = static_cast<int>(series.points.size());
    const int max_lag = std::max(lags_y, lags_x);
    if (n <= max_lag)
        throw DataError("series of " + std::to_string(n) + " weeks cannot support lag " +
                        std::to_string(max_lag));
    if (plan.n_weeks() != n) throw DataError("period plan does not tile the series");
    if (!plan.labeled()) throw EstimationError("period plan has no treatment labels");

    DesignMatrix dm;
    dm.lags_y = lags_y;
    dm.lags_x = lags_x;
    dm.feature_names.push_back("treatment");
    for (int k = 1; k <= lags_y; ++k) dm.feature_names.push_back("y_lag" + std::to_string(k));
    for (int k = 1; k <= lags_x; ++k) dm.feature_names.push_back("x_lag" + std::to_string(k));
    dm.feature_names.push_back("period");
    dm.feature_names.push_back("week_in_period");

    auto value_at = [&](int week, bool outcome) {
        const WeeklyPoint& pt = series.points[static_cast<std::size_t>(week - 1)];
        const auto& v = outcome ? pt.outcome : pt.exposure;
        if (!v)
            throw DataError("missing " + std::string(outcome ? "outcome" : "exposure") +
                            " at week " + std::to_string(week) + " (impute first)");
        return *v;
    };

    for (int w = max_lag + 1; w <= n; ++w) {
        DesignRow row;
        row.week = w;
        row.outcome = value_at(w, true);
        row.period = plan.period_of_week(w);
        row.treatment = plan.label_of_period(row.period);
        row.week_in_period =
            w - plan.periods[static_cast<std::size_t>(row.period - 1)].start_week + 1;
        for (int k = 1; k <= lags_y; ++k) row.y_lags.push_back(value_at(w - k, true));
        for (int k = 1; k <= lags_x; ++k) row.x_lags.push_back(value_at(w - k, false));
        dm.rows.push_back(std::move(row));
    }
    return dm;
}

Matrix DesignMatrix::features() const {
    Matrix X;
    X.reserve(rows.size());
    for (const DesignRow& r : rows) {
        std::vector<double> x;
        x.reserve(static_cast<std::size_t>(n_features()));
        x.push_back(static_cast<double>(r.treatment));
        x.insert(x.end(), r.y_lags.begin(), r.y_lags.end());
        x.insert(x.end(), r.x_lags.begin(), r.x_lags.end());
        x.push_back(static_cast<double>(r.period));
        x.push_back(static_cast<double>(r.week_in_period));
        X.push_back(std::move(x));
    }
    return X;
}

std::vector<double> DesignMatrix::targets() const {
    std::vector<double> y;
    y.reserve(rows.size());
    for (const DesignRow& r : rows) y.push_back(r.outcome);
    return y;
}

ThresholdSearch select_threshold(const WeeklySeries& series, const PeriodPlan& plan,
                                 const std::vector<double>& candidates, int lags_y, int lags_x,
                                 const ForestParams& params) {
    if (candidates.size() < 2) throw ConfigError("threshold search needs at least 2 candidates");

    ThresholdSearch result;
    result.candidates = candidates;
    result.oob_mses.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());

    std::map<std::vector<int>, double> mse_by_labeling;
    double best_mse = std::numeric_limits<double>::infinity();
    std::size_t best_i = candidates.size();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        PeriodPlan candidate_plan = plan;
        apply_threshold(candidate_plan, candidates[i]);
        const auto& labels = candidate_plan.treatment_labels;
        const bool all_same = std::all_of(labels.begin(), labels.end(),
                                          [&](int v) { return v == labels.front(); });
        if (all_same) {
            result.warnings.push_back("threshold " + csv::format(candidates[i], 6) +
                                      " labels every period " + std::to_string(labels.front()) +
                                      "; skipped");
            continue;
        }
        auto cached = mse_by_labeling.find(labels);
        double mse;
        if (cached != mse_by_labeling.end()) {
            mse = cached->second;
        } else {
            const DesignMatrix dm = build_design_matrix(series, candidate_plan, lags_y, lags_x);
            ForestParams fit_params = params;
            fit_params.seed =
                derive_seed(params.seed, {streams::kThreshold, labeling_hash(labels)});
            const Forest forest = fit_forest(dm.features(), dm.targets(), fit_params,
                                             dm.feature_names);
            mse = oob_mse(forest, dm.targets());
            mse_by_labeling.emplace(labels, mse);
        }
        result.oob_mses[i] = mse;
        // Strict comparison: ties keep the earlier (smaller) candidate.
        if (mse < best_mse ||
            (mse == best_mse && candidates[i] < result.threshold)) {
            best_mse = mse;
            best_i = i;
            result.threshold = candidates[i];
        }
    }
    if (best_i == candidates.size())
        throw EstimationError("every threshold candidate labels all periods identically");
    return result;
}

CausalRole feature_role(const DesignMatrix& dm, int feature, int week_in_period) {
    if (feature < 0 || feature >= dm.n_features()) throw ConfigError("feature index out of range");
    if (week_in_period < 1) throw ConfigError("within-period week must be >= 1");
    if (feature == dm.treatment_feature()) return CausalRole::Treatment;
    if (feature == dm.period_feature()) return CausalRole::Csc;
    if (feature == dm.week_feature()) return CausalRole::Coordinate;
    // Lag features: lag k at within-period week j refers to week start+j-1-k,
    // which precedes the period start exactly when k >= j.
    int k;
    if (feature <= dm.lags_y)
        k = feature;
    else
        k = feature - dm.lags_y;
    return k >= week_in_period ? CausalRole::Csc : CausalRole::Mediator;
}

std::string role_name(CausalRole role) {
    switch (role) {
        case CausalRole::Treatment: return "treatment";
        case CausalRole::Csc: return "csc";
        case CausalRole::Mediator: return "mediator";
        case CausalRole::Coordinate: return "coordinate";
    }
    return "unknown";
}

PredictorSelection select_predictors(const ImportanceTable& importances, int k) {
    if (k <= 0) throw ConfigError("predictor count must be > 0");
    PredictorSelection sel;
    std::vector<std::size_t> order(importances.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (importances[a].importance != importances[b].importance)
            return importances[a].importance > importances[b].importance;
        return importances[a].feature < importances[b].feature;
    });
    for (std::size_t i : order) sel.ranked.push_back(importances[i].feature);

    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    for (std::size_t i = 0; i < keep; ++i) sel.kept.push_back(sel.ranked[i]);
    if (std::find(sel.kept.begin(), sel.kept.end(), 0) == sel.kept.end()) {
        sel.kept.push_back(0);
        sel.treatment_added_back = true;
    }
    std::sort(sel.kept.begin(), sel.kept.end());
    return sel;
}

Matrix subset_columns(const Matrix& X, const std::vector<int>& cols) {
    Matrix out;
    out.reserve(X.size());
    for (const auto& row : X) {
        std::vector<double> r;
        r.reserve(cols.size());
        for (int c : cols) r.push_back(row[static_cast<std::size_t>(c)]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string periods_csv(const PeriodPlan& plan) {
    std::ostringstream out;
    out << "period,start_week,length,mean_exposure,treatment\n";
    for (const Period& p : plan.periods) {
        out << p.index << ',' << p.start_week << ',' << p.length() << ','
            << csv::format_full(p.mean_exposure) << ',';
        if (plan.labeled()) out << plan.label_of_period(p.index);
        out << '\n';
    }
    return out.str();
}

} // namespace apte
