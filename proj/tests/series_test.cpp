#include <doctest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "apte/errors.hpp"
#include "apte/series.hpp"
#include "test_util.hpp"

using namespace apte;
using testutil::make_weekly;

namespace {

std::vector<DailyRecord> ingest_text(const std::string& body) {
    std::istringstream in("date,weight,activity\n" + body);
    return ingest_daily(in, DailySchema{}, "test");
}

std::string error_text(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_SUITE("series") {

TEST_CASE("weekly outcome is the centered mean and exposure the active fraction") {
    // One Monday-aligned week: weights 81 and 79 center at 80, so the weekly
    // outcome is 0; one of the two weight days is active.
    const auto records = ingest_text("2012-01-02,81,1\n2012-01-03,79,0\n");
    const WeeklySeries weekly = to_weekly(records);
    CHECK(weekly.center == doctest::Approx(80.0));
    REQUIRE(weekly.points.size() == 1);
    CHECK(*weekly.points[0].outcome == doctest::Approx(0.0));
    CHECK(*weekly.points[0].exposure == doctest::Approx(0.5));
}

TEST_CASE("exposure counts active days over days with a recorded weight") {
    std::string body;
    for (int d = 0; d < 7; ++d)
        body += "2012-01-0" + std::to_string(2 + d) + ",80," + (d < 3 ? "1" : "0") + "\n";
    const WeeklySeries weekly = to_weekly(ingest_text(body));
    REQUIRE(weekly.points.size() == 1);
    CHECK(*weekly.points[0].exposure == doctest::Approx(3.0 / 7.0));
    CHECK(*weekly.points[0].outcome == doctest::Approx(0.0));
}

TEST_CASE("empty cells are missing values, not errors") {
    const auto records = ingest_text("2012-01-02,,\n2012-01-03,81,1\n");
    CHECK_FALSE(records[0].weight.has_value());
    CHECK_FALSE(records[0].activity.has_value());
    REQUIRE(records[1].weight.has_value());
    CHECK(*records[1].weight == doctest::Approx(81.0));
}

TEST_CASE("a week with no recorded weights aggregates to missing") {
    // Weeks of Jan 2, 9, 16; the middle week has rows but no weights.
    const auto records = ingest_text(
        "2012-01-02,80,1\n"
        "2012-01-09,,\n"
        "2012-01-16,82,0\n");
    const WeeklySeries weekly = to_weekly(records);
    REQUIRE(weekly.points.size() == 3);
    CHECK(weekly.points[0].outcome.has_value());
    CHECK_FALSE(weekly.points[1].outcome.has_value());
    CHECK_FALSE(weekly.points[1].exposure.has_value());
    CHECK(weekly.points[2].outcome.has_value());
}

TEST_CASE("ingest is row-order invariant") {
    const std::string rows[] = {"2012-01-02,80,1\n", "2012-01-05,82,0\n", "2012-01-11,79,1\n"};
    const auto sorted = ingest_text(rows[0] + rows[1] + rows[2]);
    const auto shuffled = ingest_text(rows[2] + rows[0] + rows[1]);
    CHECK(weekly_csv(to_weekly(sorted)) == weekly_csv(to_weekly(shuffled)));
}

TEST_CASE("malformed rows name their line and value") {
    CHECK_THROWS_AS(ingest_text("2012-13-40,80,1\n"), DataError);
    CHECK(error_text([] { ingest_text("not-a-date,80,1\n"); }).find("line 2") !=
          std::string::npos);
    CHECK(error_text([] { ingest_text("2012-01-02,80,maybe\n"); }).find("maybe") !=
          std::string::npos);
    CHECK_THROWS_AS(ingest_text("2012-01-02,-3,1\n"), DataError);
    CHECK_THROWS_AS(ingest_text("2012-01-02,eighty,1\n"), DataError);
}

TEST_CASE("duplicate dates are rejected by name") {
    const std::string msg =
        error_text([] { to_weekly(ingest_text("2012-01-02,80,1\n2012-01-02,81,0\n")); });
    CHECK(msg.find("2012-01-02") != std::string::npos);
}

TEST_CASE("all weights missing is a data error") {
    CHECK_THROWS_AS(to_weekly(ingest_text("2012-01-02,,1\n2012-01-03,,0\n")), DataError);
}

TEST_CASE("week boundaries follow the configured start day") {
    // Wednesday Jan 4 through Tuesday Jan 10: two Monday-aligned weeks but a
    // single Wednesday-aligned one. The grand center is alignment-free.
    const std::string body =
        "2012-01-04,80,1\n2012-01-05,80,1\n2012-01-06,80,1\n2012-01-07,80,1\n"
        "2012-01-08,80,1\n2012-01-09,80,1\n2012-01-10,80,1\n";
    const auto records = ingest_text(body);
    const WeeklySeries monday = to_weekly(records, std::chrono::Monday);
    const WeeklySeries wednesday = to_weekly(records, std::chrono::Wednesday);
    CHECK(monday.points.size() == 2);
    CHECK(wednesday.points.size() == 1);
    CHECK(monday.center == wednesday.center);
    CHECK(*wednesday.points[0].exposure == doctest::Approx(1.0));
}

TEST_CASE("interior outcome gaps fill linearly and are flagged") {
    WeeklySeries s = make_weekly({1.0, 0.0, 3.0}, {0.5, 0.5, 0.5});
    s.points[1].outcome.reset();
    const WeeklySeries filled = interpolate_missing(s);
    REQUIRE(filled.points.size() == 3);
    CHECK(*filled.points[1].outcome == doctest::Approx(2.0));
    CHECK(filled.points[1].imputed_outcome);
    CHECK_FALSE(filled.points[0].imputed_outcome);
    CHECK_FALSE(filled.points[2].imputed_outcome);
}

TEST_CASE("interior exposure gaps fill linearly") {
    WeeklySeries s = make_weekly({0, 0, 0, 0}, {0.0, 0.0, 0.0, 0.9});
    s.points[1].exposure.reset();
    s.points[2].exposure.reset();
    const WeeklySeries filled = interpolate_missing(s);
    CHECK(*filled.points[1].exposure == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(*filled.points[2].exposure == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(filled.points[1].imputed_exposure);
    CHECK(filled.points[2].imputed_exposure);
}

TEST_CASE("leading and trailing missing weeks are trimmed and renumbered") {
    WeeklySeries s = make_weekly({9, 1, 2, 3, 9}, {0.5, 0.5, 0.5, 0.5, 0.5});
    s.points[0].outcome.reset();
    s.points[4].exposure.reset();
    const WeeklySeries trimmed = interpolate_missing(s);
    REQUIRE(trimmed.points.size() == 3);
    CHECK(trimmed.trimmed_leading == 1);
    CHECK(trimmed.trimmed_trailing == 1);
    CHECK(trimmed.points[0].week_index == 1);
    CHECK(*trimmed.points[0].outcome == doctest::Approx(1.0));
    CHECK(trimmed.points[2].week_index == 3);
}

TEST_CASE("imputation is idempotent") {
    WeeklySeries s = make_weekly({1, 0, 0, 4, 5}, {0.1, 0.0, 0.3, 0.0, 0.5});
    s.points[1].outcome.reset();
    s.points[2].outcome.reset();
    s.points[1].exposure.reset();
    s.points[3].exposure.reset();
    const WeeklySeries once = interpolate_missing(s);
    const WeeklySeries twice = interpolate_missing(once);
    CHECK(weekly_csv(once) == weekly_csv(twice));
    CHECK(once.trimmed_leading == twice.trimmed_leading);
}

TEST_CASE("imputed values stay inside their bracketing observations") {
    std::mt19937 gen(99);
    std::uniform_real_distribution<double> val(-3.0, 3.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> outcomes(30);
        std::vector<double> exposures(30);
        for (int i = 0; i < 30; ++i) {
            outcomes[static_cast<std::size_t>(i)] = val(gen);
            exposures[static_cast<std::size_t>(i)] = u01(gen);
        }
        WeeklySeries s = make_weekly(outcomes, exposures);
        for (int i = 1; i < 29; ++i)
            if (u01(gen) < 0.3) s.points[static_cast<std::size_t>(i)].outcome.reset();
        const WeeklySeries filled = interpolate_missing(s);
        for (std::size_t i = 0; i < filled.points.size(); ++i) {
            if (!filled.points[i].imputed_outcome) continue;
            // Nearest observed neighbors bracket every interpolated value.
            std::size_t lo = i, hi = i;
            while (filled.points[lo].imputed_outcome) --lo;
            while (filled.points[hi].imputed_outcome) ++hi;
            const double a = *filled.points[lo].outcome;
            const double b = *filled.points[hi].outcome;
            CHECK(*filled.points[i].outcome >= std::min(a, b) - 1e-12);
            CHECK(*filled.points[i].outcome <= std::max(a, b) + 1e-12);
        }
    }
}

TEST_CASE("a series with nothing observable cannot be imputed") {
    WeeklySeries s = make_weekly({1, 2}, {0.5, 0.5});
    s.points[0].outcome.reset();
    s.points[1].exposure.reset();
    CHECK_THROWS_AS(interpolate_missing(s), DataError);
}

TEST_CASE("weekly csv is a stable golden string") {
    WeeklySeries s = make_weekly({0.5, -1.25}, {0.0, 1.0});
    s.points[1].imputed_outcome = true;
    CHECK(weekly_csv(s) ==
          "week_index,outcome,exposure,imputed_outcome,imputed_exposure\n"
          "1,0.5,0,0,0\n"
          "2,-1.25,1,1,0\n");
}

TEST_CASE("weekday names parse case-insensitively with abbreviations") {
    CHECK(parse_weekday("monday") == std::chrono::Monday);
    CHECK(parse_weekday("SUN") == std::chrono::Sunday);
    CHECK(parse_weekday("Wed") == std::chrono::Wednesday);
    CHECK(weekday_name(std::chrono::Friday) == "Friday");
    CHECK_THROWS_AS(parse_weekday("midweek"), ConfigError);
}

} // TEST_SUITE
