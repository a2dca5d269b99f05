// Daily record ingestion, weekly aggregation, and linear imputation.
//
// The weekly outcome is the mean of (daily weight - center) over days with a
// recorded weight, where center is the grand mean of all recorded daily
// weights. The weekly exposure is the fraction of activity days among days
// with a recorded weight. Weeks are calendar-aligned to a configurable start
// day (Monday by default).
#ifndef APTE_SERIES_HPP
#define APTE_SERIES_HPP

#include <chrono>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace apte {

struct DailyRecord {
    std::chrono::year_month_day date;
    std::optional<double> weight;  // kg, > 0 when present
    std::optional<bool> activity;  // any physical activity that day
};

struct WeeklyPoint {
    int week_index = 0;  // 1-based
    std::optional<double> outcome;   // centered weekly mean weight
    std::optional<double> exposure;  // activity-day fraction, in [0, 1]
    bool imputed_outcome = false;
    bool imputed_exposure = false;
};

struct WeeklySeries {
    std::vector<WeeklyPoint> points;
    double center = 0.0;                           // grand mean of daily weights
    std::chrono::weekday start_day = std::chrono::Monday;
    int trimmed_leading = 0;   // weeks dropped by interpolate_missing
    int trimmed_trailing = 0;

    std::vector<double> outcomes() const;
    std::vector<double> exposures() const;
};

/// Column mapping for daily CSV ingestion.
struct DailySchema {
    std::string date_col = "date";
    std::string weight_col = "weight";
    std::string activity_col = "activity";
};

/// Parse daily records from CSV. Rows are sorted by date; empty cells become
/// missing values. Throws DataError naming the offending line or date on
/// malformed rows and duplicates.
std::vector<DailyRecord> ingest_daily(std::istream& in, const DailySchema& schema,
                                      const std::string& origin = "input");
std::vector<DailyRecord> ingest_daily_file(const std::string& path, const DailySchema& schema);

/// Aggregate daily records into one point per calendar week between the first
/// and last record. Requires at least one recorded weight overall.
WeeklySeries to_weekly(std::vector<DailyRecord> records,
                       std::chrono::weekday start_day = std::chrono::Monday);

/// Trim leading/trailing weeks with a missing outcome or exposure, then fill
/// interior gaps by linear interpolation (exposure clamped to [0, 1]).
/// Idempotent. Throws DataError if nothing observable remains.
WeeklySeries interpolate_missing(const WeeklySeries& series);

/// Weekly series export: week_index, outcome, exposure, imputed_outcome,
/// imputed_exposure.
std::string weekly_csv(const WeeklySeries& series);

std::chrono::weekday parse_weekday(const std::string& name);
std::string weekday_name(std::chrono::weekday wd);

} // namespace apte

#endif
