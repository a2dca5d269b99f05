// Deterministic SVG renderers for the three analysis plots: the weekly time
// series with period boundaries, the per-period overlay of observed outcomes
// and predicted potential outcomes against within-period week (the "pancit"
// view), and the APTE trajectory. Identical inputs produce identical bytes.
#ifndef APTE_SVGPLOT_HPP
#define APTE_SVGPLOT_HPP

#include <string>
#include <vector>

#include "apte/design.hpp"
#include "apte/estimator.hpp"
#include "apte/series.hpp"

namespace apte {

/// Per-row plotting data: the observed outcome and both predicted potential
/// outcomes for one analyzed week. Matches the rows embedded in the report
/// JSON so plots can be re-rendered from a saved report.
struct PlotRow {
    int week = 0;
    int period = 0;
    int week_in_period = 0;
    int treatment = 0;
    double outcome = 0.0;
    double ppo0 = 0.0;
    double ppo1 = 0.0;
};

/// Linear data-to-pixel mapping with fixed margins; exposed so tests can
/// compute expected coordinates.
struct PlotGeometry {
    double width = 860.0;
    double height = 520.0;
    double left = 64.0, right = 16.0, top = 34.0, bottom = 48.0;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

    double x_of(double x) const {
        return left + (x - x_min) / (x_max - x_min) * (width - left - right);
    }
    double y_of(double y) const {
        return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
    }
};

PlotGeometry timeseries_geometry(const WeeklySeries& weekly);
PlotGeometry pancit_geometry(const std::vector<PlotRow>& rows, const ApteReport& report);
PlotGeometry apte_geometry(const ApteReport& report);

/// Weekly outcomes as a line with treatment-colored markers, predicted
/// potential outcomes per period, and vertical period boundaries.
std::string render_timeseries(const WeeklySeries& weekly, const PeriodPlan& plan,
                              const std::vector<PlotRow>& rows);

/// Within-period overlay: observed dots per period, thin per-period PPO
/// lines, bold g-formula mean PO per level, wider and lighter naive means.
std::string render_pancit(const std::vector<PlotRow>& rows, const ApteReport& report);

/// APTE trajectory: dark bold correct line, light wide naive line, zero
/// reference.
std::string render_apte(const ApteReport& report);

} // namespace apte

#endif
