#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "apte/errors.hpp"
#include "apte/pipeline.hpp"
#include "apte/svgplot.hpp"
#include "test_util.hpp"

using namespace apte;
using testutil::make_plan;
using testutil::make_weekly;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string point(const PlotGeometry& g, double x, double y) {
    return num(g.x_of(x)) + "," + num(g.y_of(y));
}

ApteRow effect_row(int week, double apte, double apte_naive) {
    ApteRow r;
    r.week = week;
    r.e1.estimable = r.e0.estimable = true;
    r.e1.mean_po = apte;
    r.e0.mean_po = 0.0;
    r.has_apte = true;
    r.apte = apte;
    r.e1_naive.estimable = r.e0_naive.estimable = true;
    r.e1_naive.mean_po = apte_naive;
    r.e0_naive.mean_po = 0.0;
    r.has_apte_naive = true;
    r.apte_naive = apte_naive;
    return r;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = hay.find(needle); at != std::string::npos;
         at = hay.find(needle, at + needle.size()))
        ++n;
    return n;
}

} // namespace

TEST_SUITE("svgplot") {

TEST_CASE("the pixel mapping is linear inside fixed margins") {
    PlotGeometry g;
    g.x_min = 1.0;
    g.x_max = 10.0;
    g.y_min = -2.0;
    g.y_max = 2.0;
    CHECK(g.x_of(1.0) == doctest::Approx(64.0));
    CHECK(g.x_of(10.0) == doctest::Approx(860.0 - 16.0));
    CHECK(g.x_of(5.5) == doctest::Approx((64.0 + 844.0) / 2.0));
    CHECK(g.y_of(-2.0) == doctest::Approx(520.0 - 48.0));
    CHECK(g.y_of(2.0) == doctest::Approx(34.0));
    CHECK(g.y_of(0.0) == doctest::Approx((472.0 + 34.0) / 2.0));
}

TEST_CASE("time-series geometry spans the observed outcomes with padding") {
    const WeeklySeries two = make_weekly({0.0, 10.0}, {0.0, 1.0});
    const PlotGeometry g = timeseries_geometry(two);
    CHECK(g.x_min == 1.0);
    CHECK(g.x_max == 2.0);
    CHECK(g.y_min == doctest::Approx(-0.5));
    CHECK(g.y_max == doctest::Approx(10.5));

    const PlotGeometry single = timeseries_geometry(make_weekly({5.0}, {0.5}));
    CHECK(single.x_max == 2.0);  // degenerate ranges are widened
    CHECK(single.y_min == doctest::Approx(4.0));
    CHECK(single.y_max == doctest::Approx(6.0));

    WeeklySeries gappy = make_weekly({1.0, 2.0, 100.0}, {0, 0, 0});
    gappy.points[2].outcome.reset();  // missing weeks do not stretch the range
    CHECK(timeseries_geometry(gappy).y_max < 10.0);

    CHECK_THROWS_AS(timeseries_geometry(WeeklySeries{}), DataError);
    WeeklySeries blind = make_weekly({1.0}, {0.0});
    blind.points[0].outcome.reset();
    CHECK_THROWS_AS(timeseries_geometry(blind), DataError);
}

TEST_CASE("overlay geometry covers point rows and report means") {
    std::vector<PlotRow> rows(1);
    rows[0].week_in_period = 3;
    rows[0].outcome = 2.0;
    rows[0].ppo0 = -1.0;
    rows[0].ppo1 = 4.0;

    ApteReport report;
    ApteRow naive_only;
    naive_only.week = 5;
    naive_only.e1_naive.estimable = true;
    naive_only.e1_naive.mean_po = 9.0;
    report.rows.push_back(naive_only);

    const PlotGeometry g = pancit_geometry(rows, report);
    CHECK(g.x_max == 5.0);  // the naive mean extends the x range
    CHECK(g.y_max == doctest::Approx(9.0 + 0.05 * 10.0));
    CHECK(g.y_min == doctest::Approx(-1.0 - 0.05 * 10.0));

    // Means alone are enough to draw from a saved report without plot rows.
    const PlotGeometry means_only = pancit_geometry({}, report);
    CHECK(means_only.x_max == 5.0);

    CHECK_THROWS_AS(pancit_geometry({}, ApteReport{}), DataError);
}

TEST_CASE("effect geometry always brackets zero and stops at the horizon") {
    ApteReport report;
    report.rows = {effect_row(1, 0.5, 0.9), effect_row(2, 0.25, 0.4)};
    report.horizon = 2;
    ApteRow beyond = effect_row(3, 0.0, 5.0);  // naive continues past the horizon
    beyond.has_apte = false;
    report.rows.push_back(beyond);

    const PlotGeometry g = apte_geometry(report);
    CHECK(g.x_max == 2.0);
    CHECK(g.y_min == doctest::Approx(0.0 - 0.05 * 0.9));  // zero stays in range
    CHECK(g.y_max == doctest::Approx(0.9 + 0.05 * 0.9));

    ApteReport hopeless;
    hopeless.rows = {beyond};
    CHECK_THROWS_AS(apte_geometry(hopeless), EstimationError);
}

TEST_CASE("the effect plot draws both trajectories over a dashed zero line") {
    ApteReport report;
    report.rows = {effect_row(1, 0.5, 0.9), effect_row(2, -0.25, 0.4),
                   effect_row(3, 0.1, 0.2)};
    report.horizon = 3;

    const std::string svg = render_apte(report);
    CHECK(render_apte(report) == svg);  // bytes are reproducible

    const PlotGeometry g = apte_geometry(report);
    const std::string zero_line = "<line x1=\"" + num(g.left) + "\" y1=\"" + num(g.y_of(0.0)) +
                                  "\" x2=\"" + num(g.width - g.right) + "\" y2=\"" +
                                  num(g.y_of(0.0)) +
                                  "\" stroke=\"#999999\" stroke-width=\"1.00\""
                                  " stroke-dasharray=\"5 4\"/>\n";
    CHECK(svg.find(zero_line) != std::string::npos);

    for (int w = 1; w <= 3; ++w) {
        const double v = report.rows[static_cast<std::size_t>(w - 1)].apte;
        const double nv = report.rows[static_cast<std::size_t>(w - 1)].apte_naive;
        CHECK(svg.find(point(g, w, v)) != std::string::npos);
        CHECK(svg.find(point(g, w, nv)) != std::string::npos);
    }
    CHECK(svg.find("stroke=\"#1a1a1a\"") != std::string::npos);
    CHECK(svg.find("stroke=\"#7b3294\"") != std::string::npos);
    // The light naive band is laid down before the dark line.
    CHECK(svg.find("#7b3294") < svg.find("#1a1a1a"));

    ApteReport no_naive = report;
    for (ApteRow& r : no_naive.rows) r.has_apte_naive = false;
    CHECK(count_of(render_apte(no_naive), "<polyline") == 1);
}

TEST_CASE("the time-series plot marks periods, outcomes, and fitted paths") {
    const PeriodPlan plan = make_plan({3, 3}, {0, 1});
    const WeeklySeries weekly = make_weekly({1, 2, 3, 4, 5, 6}, testutil::plan_exposures(plan));

    std::vector<PlotRow> rows;
    for (int w = 2; w <= 6; ++w) {
        PlotRow r;
        r.week = w;
        r.period = plan.period_of_week(w);
        r.week_in_period = w - (r.period - 1) * 3;
        r.treatment = plan.label_of_period(r.period);
        r.outcome = w;
        r.ppo0 = w - 0.5;
        r.ppo1 = w + 0.5;
        rows.push_back(r);
    }

    const std::string svg = render_timeseries(weekly, plan, rows);
    CHECK(render_timeseries(weekly, plan, rows) == svg);

    const PlotGeometry g = timeseries_geometry(weekly);
    // One dashed boundary between the two periods.
    CHECK(svg.find("x1=\"" + num(g.x_of(3.5)) + "\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray=\"4 3\"") != std::string::npos);
    CHECK(count_of(svg, "<circle") == 6);
    CHECK(count_of(svg, "fill=\"#2166ac\"") == 3);  // untreated-period markers
    CHECK(count_of(svg, "fill=\"#c2571a\"") == 3);
    // Fitted paths follow the period's own level: ppo0 in period 1, ppo1 in 2.
    CHECK(svg.find(point(g, 2, 1.5)) != std::string::npos);
    CHECK(svg.find(point(g, 6, 6.5)) != std::string::npos);
    CHECK(svg.find(point(g, 6, 5.5)) == std::string::npos);
}

TEST_CASE("the overlay plot renders mean lines even without point rows") {
    ApteReport report;
    report.rows = {effect_row(1, 0.5, 0.9), effect_row(2, 0.25, 0.4)};
    report.horizon = 2;

    const std::string svg = render_pancit({}, report);
    const PlotGeometry g = pancit_geometry({}, report);
    CHECK(count_of(svg, "<polyline") == 4);  // two naive, two g-formula
    CHECK(count_of(svg, "<circle") == 0);
    CHECK(svg.find(point(g, 1, 0.5)) != std::string::npos);   // E1 at week 1
    CHECK(svg.find(point(g, 2, 0.0)) != std::string::npos);   // E0 at week 2
    // Wider, lighter naive bands come first.
    CHECK(svg.find("stroke-opacity=\"0.30\"") < svg.find("stroke-opacity=\"0.95\""));
}

TEST_CASE("the bundled report renders with the sign change on screen") {
    const std::string text = testutil::slurp(testutil::fixture("data/report_fixture.json"));
    const ReportBundle bundle = load_report_json(text);
    REQUIRE(bundle.report.rows.size() == 44);

    const ApteRow& before = bundle.report.rows[4];
    const ApteRow& after = bundle.report.rows[5];
    REQUIRE(before.has_apte);
    REQUIRE(after.has_apte);
    CHECK(before.apte > 0.0);
    CHECK(after.apte < 0.0);

    const std::string svg = render_apte(bundle.report);
    const PlotGeometry g = apte_geometry(bundle.report);
    CHECK(g.y_of(before.apte) < g.y_of(0.0));  // above the zero line
    CHECK(g.y_of(after.apte) > g.y_of(0.0));
    CHECK(svg.find(point(g, 5, before.apte)) != std::string::npos);
    CHECK(svg.find(point(g, 6, after.apte)) != std::string::npos);

    const std::string pancit = render_pancit(bundle.plot_rows, bundle.report);
    CHECK(pancit.find("<polyline") != std::string::npos);
}

} // TEST_SUITE
