#include "apte/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "apte/csv.hpp"
#include "apte/errors.hpp"

namespace apte {

namespace {

using std::chrono::sys_days;
using std::chrono::year_month_day;

year_month_day parse_date(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
        throw DataError("unparseable date '" + text + "'");
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                             std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw DataError("invalid calendar date '" + text + "'");
    return ymd;
}

std::string date_string(year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

double parse_weight(const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw DataError("unparseable weight '" + text + "'");
    }
    if (pos != text.size()) throw DataError("unparseable weight '" + text + "'");
    if (!std::isfinite(v) || v <= 0.0) throw DataError("weight must be finite and > 0, got '" + text + "'");
    return v;
}

bool parse_activity(const std::string& text) {
    if (text == "1" || text == "true") return true;
    if (text == "0" || text == "false") return false;
    throw DataError("unparseable activity '" + text + "' (expected 0/1)");
}

} // namespace

std::vector<double> WeeklySeries::outcomes() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.outcome.value_or(std::nan("")));
    return v;
}

std::vector<double> WeeklySeries::exposures() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.exposure.value_or(std::nan("")));
    return v;
}

std::vector<DailyRecord> ingest_daily(std::istream& in, const DailySchema& schema,
                                      const std::string& origin) {
    const csv::Table table = csv::read_stream(in, origin);
    const int date_col = table.column(schema.date_col);
    const int weight_col = table.column(schema.weight_col);
    const int activity_col = table.column(schema.activity_col);
    if (date_col < 0) throw DataError(origin + ": missing column '" + schema.date_col + "'");
    if (weight_col < 0) throw DataError(origin + ": missing column '" + schema.weight_col + "'");
    if (activity_col < 0) throw DataError(origin + ": missing column '" + schema.activity_col + "'");

    std::vector<DailyRecord> records;
    records.reserve(table.rows.size());
    const std::size_t needed =
        static_cast<std::size_t>(std::max({date_col, weight_col, activity_col})) + 1;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        // Header is line 1; data row r is line r+2.
        const std::size_t line_no = r + 2;
        const auto& row = table.rows[r];
        if (row.size() < needed)
            throw DataError(origin + " line " + std::to_string(line_no) + ": too few fields");
        DailyRecord rec;
        try {
            rec.date = parse_date(row[static_cast<std::size_t>(date_col)]);
            const std::string& w = row[static_cast<std::size_t>(weight_col)];
            if (!w.empty()) rec.weight = parse_weight(w);
            const std::string& a = row[static_cast<std::size_t>(activity_col)];
            if (!a.empty()) rec.activity = parse_activity(a);
        } catch (const DataError& e) {
            throw DataError(origin + " line " + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(rec);
    }

    std::stable_sort(records.begin(), records.end(),
                     [](const DailyRecord& a, const DailyRecord& b) {
                         return sys_days(a.date) < sys_days(b.date);
                     });
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].date == records[i - 1].date)
            throw DataError(origin + ": duplicate date " + date_string(records[i].date));
    return records;
}

std::vector<DailyRecord> ingest_daily_file(const std::string& path, const DailySchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return ingest_daily(in, schema, path);
}

WeeklySeries to_weekly(std::vector<DailyRecord> records, std::chrono::weekday start_day) {
    if (records.empty()) throw DataError("no daily records");
    std::stable_sort(records.begin(), records.end(),
                     [](const DailyRecord& a, const DailyRecord& b) {
                         return sys_days(a.date) < sys_days(b.date);
                     });

    double weight_sum = 0.0;
    std::size_t weight_count = 0;
    for (const auto& r : records) {
        if (r.weight) {
            weight_sum += *r.weight;
            ++weight_count;
        }
    }
    if (weight_count == 0) throw DataError("no outcome data: every weight is missing");

    WeeklySeries series;
    series.center = weight_sum / static_cast<double>(weight_count);
    series.start_day = start_day;

    // Anchor week 1 at the most recent start_day on or before the first record.
    const sys_days first = sys_days(records.front().date);
    const sys_days last = sys_days(records.back().date);
    const auto offset =
        (std::chrono::weekday{first} - start_day + std::chrono::days{7}) % 7;
    const sys_days week0 = first - std::chrono::days{offset.count()};
    const auto n_weeks = ((last - week0).count() / 7) + 1;

    struct Accum {
        double outcome_sum = 0.0;
        int weight_days = 0;
        int active_days = 0;
    };
    std::vector<Accum> acc(static_cast<std::size_t>(n_weeks));
    for (const auto& r : records) {
        if (!r.weight) continue;
        const auto w = static_cast<std::size_t>((sys_days(r.date) - week0).count() / 7);
        acc[w].outcome_sum += *r.weight - series.center;
        ++acc[w].weight_days;
        if (r.activity && *r.activity) ++acc[w].active_days;
    }

    series.points.resize(static_cast<std::size_t>(n_weeks));
    for (std::size_t w = 0; w < acc.size(); ++w) {
        WeeklyPoint& p = series.points[w];
        p.week_index = static_cast<int>(w) + 1;
        if (acc[w].weight_days > 0) {
            p.outcome = acc[w].outcome_sum / acc[w].weight_days;
            p.exposure = static_cast<double>(acc[w].active_days) / acc[w].weight_days;
        }
    }
    return series;
}

WeeklySeries interpolate_missing(const WeeklySeries& series) {
    const auto& pts = series.points;
    std::size_t lo = 0, hi = pts.size();
    while (lo < hi && (!pts[lo].outcome || !pts[lo].exposure)) ++lo;
    while (hi > lo && (!pts[hi - 1].outcome || !pts[hi - 1].exposure)) --hi;
    if (lo >= hi) throw DataError("no weeks with observed outcome and exposure");

    WeeklySeries out;
    out.center = series.center;
    out.start_day = series.start_day;
    out.trimmed_leading = series.trimmed_leading + static_cast<int>(lo);
    out.trimmed_trailing = series.trimmed_trailing + static_cast<int>(pts.size() - hi);
    out.points.assign(pts.begin() + static_cast<std::ptrdiff_t>(lo),
                      pts.begin() + static_cast<std::ptrdiff_t>(hi));
    for (std::size_t i = 0; i < out.points.size(); ++i)
        out.points[i].week_index = static_cast<int>(i) + 1;

    auto fill = [&](auto get, auto set, bool clamp01, auto flag) {
        auto& p = out.points;
        std::size_t prev = 0;  // first point always observed after trim
        for (std::size_t i = 1; i < p.size(); ++i) {
            if (!get(p[i])) continue;
            for (std::size_t k = prev + 1; k < i; ++k) {
                const double frac = static_cast<double>(k - prev) / static_cast<double>(i - prev);
                double v = *get(p[prev]) + frac * (*get(p[i]) - *get(p[prev]));
                if (clamp01) v = std::clamp(v, 0.0, 1.0);
                set(p[k], v);
                flag(p[k]);
            }
            prev = i;
        }
    };
    fill([](const WeeklyPoint& p) { return p.outcome; },
         [](WeeklyPoint& p, double v) { p.outcome = v; }, false,
         [](WeeklyPoint& p) { p.imputed_outcome = true; });
    fill([](const WeeklyPoint& p) { return p.exposure; },
         [](WeeklyPoint& p, double v) { p.exposure = v; }, true,
         [](WeeklyPoint& p) { p.imputed_exposure = true; });
    return out;
}

std::string weekly_csv(const WeeklySeries& series) {
    std::ostringstream out;
    out << "week_index,outcome,exposure,imputed_outcome,imputed_exposure\n";
    for (const auto& p : series.points) {
        out << p.week_index << ',';
        if (p.outcome) out << csv::format_full(*p.outcome);
        out << ',';
        if (p.exposure) out << csv::format_full(*p.exposure);
        out << ',' << (p.imputed_outcome ? 1 : 0) << ',' << (p.imputed_exposure ? 1 : 0) << '\n';
    }
    return out.str();
}

std::chrono::weekday parse_weekday(const std::string& name) {
    static const std::pair<const char*, unsigned> table[] = {
        {"sunday", 0}, {"monday", 1}, {"tuesday", 2}, {"wednesday", 3},
        {"thursday", 4}, {"friday", 5}, {"saturday", 6}};
    std::string lower;
    lower.reserve(name.size());
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (const auto& [full, idx] : table) {
        const std::string f = full;
        if (lower == f || (lower.size() == 3 && f.compare(0, 3, lower) == 0))
            return std::chrono::weekday{idx};
    }
    throw ConfigError("unknown weekday '" + name + "'");
}

std::string weekday_name(std::chrono::weekday wd) {
    static const char* names[] = {"Sunday", "Monday", "Tuesday", "Wednesday",
                                  "Thursday", "Friday", "Saturday"};
    return names[wd.c_encoding()];
}

} // namespace apte
