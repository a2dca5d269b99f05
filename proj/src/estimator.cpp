#include "apte/estimator.hpp"

#include <algorithm>
#include <sstream>

#include "apte/csv.hpp"
#include "apte/errors.hpp"

namespace apte {

namespace {

bool positivity(const PeriodPlan& plan, int week, int level) {
    for (const Period& p : plan.periods)
        if (plan.label_of_period(p.index) == level && p.length() >= week) return true;
    return false;
}

} // namespace

PpoTable predict_pos(const Forest& forest, const Matrix& X, int treatment_col) {
    if (forest.trees.empty()) throw EstimationError("potential outcomes need a fitted forest");
    if (treatment_col < 0 || treatment_col >= forest.n_features())
        throw ConfigError("treatment column out of range");
    PpoTable table;
    table.values.reserve(X.size());
    std::vector<double> x;
    for (const auto& row : X) {
        x = row;
        x[static_cast<std::size_t>(treatment_col)] = 0.0;
        const double po0 = predict(forest, x);
        x[static_cast<std::size_t>(treatment_col)] = 1.0;
        const double po1 = predict(forest, x);
        table.values.push_back({po0, po1});
    }
    return table;
}

PoEstimate gformula_mean_po(const DesignMatrix& dm, const PpoTable& ppos, const PeriodPlan& plan,
                            int week, int level) {
    if (ppos.values.size() != dm.rows.size())
        throw EstimationError("PPO table does not match the design matrix");
    PoEstimate est;
    est.week = week;
    est.level = level;
    if (!positivity(plan, week, level)) {
        est.reason = "no period with treatment " + std::to_string(level) + " lasts " +
                     std::to_string(week) + " weeks";
        return est;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < dm.rows.size(); ++i) {
        if (dm.rows[i].week_in_period != week) continue;
        sum += ppos.values[i][static_cast<std::size_t>(level)];
        ++est.n_rows;
    }
    if (est.n_rows == 0) {
        est.reason = "no design rows at within-period week " + std::to_string(week);
        return est;
    }
    est.estimable = true;
    est.mean_po = sum / est.n_rows;
    return est;
}

PoEstimate naive_mean_po(const DesignMatrix& dm, const PpoTable& ppos, int week, int level) {
    if (ppos.values.size() != dm.rows.size())
        throw EstimationError("PPO table does not match the design matrix");
    PoEstimate est;
    est.week = week;
    est.level = level;
    double sum = 0.0;
    for (std::size_t i = 0; i < dm.rows.size(); ++i) {
        if (dm.rows[i].week_in_period != week || dm.rows[i].treatment != level) continue;
        sum += ppos.values[i][static_cast<std::size_t>(level)];
        ++est.n_rows;
    }
    if (est.n_rows == 0) {
        est.reason = "no rows observed at treatment " + std::to_string(level) + ", week " +
                     std::to_string(week);
        return est;
    }
    est.estimable = true;
    est.mean_po = sum / est.n_rows;
    return est;
}

ApteReport apte_trajectory(const DesignMatrix& dm, const PpoTable& ppos, const PeriodPlan& plan) {
    if (dm.rows.empty()) throw EstimationError("empty design matrix");
    int max_week = 0;
    for (const DesignRow& r : dm.rows) max_week = std::max(max_week, r.week_in_period);

    ApteReport report;
    for (int j = 1; j <= max_week; ++j) {
        ApteRow row;
        row.week = j;
        row.e1 = gformula_mean_po(dm, ppos, plan, j, 1);
        row.e0 = gformula_mean_po(dm, ppos, plan, j, 0);
        row.e1_naive = naive_mean_po(dm, ppos, j, 1);
        row.e0_naive = naive_mean_po(dm, ppos, j, 0);
        if (row.e1.estimable && row.e0.estimable) {
            row.has_apte = true;
            row.apte = row.e1.mean_po - row.e0.mean_po;
            report.horizon = j;
        }
        if (row.e1_naive.estimable && row.e0_naive.estimable) {
            row.has_apte_naive = true;
            row.apte_naive = row.e1_naive.mean_po - row.e0_naive.mean_po;
        }
        report.rows.push_back(std::move(row));
    }
    if (report.horizon == 0) throw EstimationError("no estimable horizon");
    // APTE only up to the horizon; later isolated weeks stay PO-only.
    for (ApteRow& row : report.rows)
        if (row.week > report.horizon) row.has_apte = false;
    return report;
}

std::string report_csv(const ApteReport& report) {
    std::ostringstream out;
    out << "week,E1,E0,APTE,E1_naive,E0_naive,APTE_naive\n";
    auto cell = [&](bool ok, double v) {
        if (ok) out << csv::format(v, 3);
        out << ',';
    };
    for (const ApteRow& row : report.rows) {
        out << row.week << ',';
        cell(row.e1.estimable, row.e1.mean_po);
        cell(row.e0.estimable, row.e0.mean_po);
        cell(row.has_apte, row.apte);
        cell(row.e1_naive.estimable, row.e1_naive.mean_po);
        cell(row.e0_naive.estimable, row.e0_naive.mean_po);
        if (row.has_apte_naive) out << csv::format(row.apte_naive, 3);
        out << '\n';
    }
    return out.str();
}

} // namespace apte
