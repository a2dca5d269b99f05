#include "apte/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "apte/errors.hpp"

namespace apte {

namespace {

// High/low treatment colors and their softer fills.
constexpr const char* kHighColor = "#c2571a";
constexpr const char* kLowColor = "#2166ac";
constexpr const char* kAxisColor = "#444444";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

double nice_step(double range) {
    if (!(range > 0.0)) return 1.0;
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step;
    if (frac <= 1.0)
        step = 1.0;
    else if (frac <= 2.0)
        step = 2.0;
    else if (frac <= 5.0)
        step = 5.0;
    else
        step = 10.0;
    return step * mag;
}

void expand(double& lo, double& hi) {
    if (lo == hi) {
        lo -= 1.0;
        hi += 1.0;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

class SvgDoc {
public:
    explicit SvgDoc(const PlotGeometry& g) : g_(g) {
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(g.width)
             << "\" height=\"" << num(g.height) << "\" viewBox=\"0 0 " << num(g.width) << ' '
             << num(g.height) << "\">\n";
        out_ << "<rect width=\"" << num(g.width) << "\" height=\"" << num(g.height)
             << "\" fill=\"#ffffff\"/>\n";
    }

    void axes(const std::string& x_label, const std::string& y_label) {
        const double x0 = g_.left, x1 = g_.width - g_.right;
        const double y0 = g_.height - g_.bottom, y1 = g_.top;
        line(x0, y0, x1, y0, kAxisColor, 1.0);
        line(x0, y0, x0, y1, kAxisColor, 1.0);
        const double xstep = nice_step(g_.x_max - g_.x_min);
        for (double t = std::ceil(g_.x_min / xstep) * xstep; t <= g_.x_max + 1e-9; t += xstep) {
            const double px = g_.x_of(t);
            line(px, y0, px, y0 + 5, kAxisColor, 1.0);
            text(px, y0 + 18, tick_label(t), "middle", kAxisColor);
        }
        const double ystep = nice_step(g_.y_max - g_.y_min);
        for (double t = std::ceil(g_.y_min / ystep) * ystep; t <= g_.y_max + 1e-9; t += ystep) {
            const double py = g_.y_of(t);
            line(x0 - 5, py, x0, py, kAxisColor, 1.0);
            text(x0 - 8, py + 4, tick_label(t), "end", kAxisColor);
        }
        text((x0 + x1) / 2.0, g_.height - 12, x_label, "middle", kAxisColor);
        out_ << "<text x=\"16\" y=\"" << num((y0 + y1) / 2.0)
             << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" fill=\""
             << kAxisColor << "\" transform=\"rotate(-90 16 " << num((y0 + y1) / 2.0) << ")\">"
             << y_label << "</text>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color, double width,
              const std::string& extra = "") {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
             << "\" y2=\"" << num(y2) << "\" stroke=\"" << color << "\" stroke-width=\""
             << num(width) << "\"" << extra << "/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double width, double opacity) {
        if (pts.size() < 2) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width)
             << "\" stroke-opacity=\"" << num(opacity) << "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) out_ << ' ';
            out_ << num(pts[i].first) << ',' << num(pts[i].second);
        }
        out_ << "\"/>\n";
    }

    void circle(double x, double y, double r, const std::string& color, double opacity) {
        out_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
             << "\" fill=\"" << color << "\" fill-opacity=\"" << num(opacity) << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, const std::string& anchor,
              const std::string& color) {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor
             << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << s
             << "</text>\n";
    }

    void title(const std::string& s) {
        out_ << "<text x=\"" << num(g_.width / 2.0)
             << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
                "fill=\"#222222\">"
             << s << "</text>\n";
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    PlotGeometry g_;
    std::ostringstream out_;
};

} // namespace

PlotGeometry timeseries_geometry(const WeeklySeries& weekly) {
    if (weekly.points.empty()) throw DataError("timeseries plot: empty series");
    PlotGeometry g;
    g.x_min = 1.0;
    g.x_max = static_cast<double>(weekly.points.size());
    if (g.x_max == g.x_min) g.x_max += 1.0;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const WeeklyPoint& p : weekly.points) {
        if (!p.outcome) continue;
        if (first) {
            lo = hi = *p.outcome;
            first = false;
        } else {
            lo = std::min(lo, *p.outcome);
            hi = std::max(hi, *p.outcome);
        }
    }
    if (first) throw DataError("timeseries plot: no outcomes");
    expand(lo, hi);
    g.y_min = lo;
    g.y_max = hi;
    return g;
}

PlotGeometry pancit_geometry(const std::vector<PlotRow>& rows, const ApteReport& report) {
    PlotGeometry g;
    g.x_min = 1.0;
    g.x_max = 1.0;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    auto take = [&](double x, double y) {
        g.x_max = std::max(g.x_max, x);
        if (!any) {
            lo = hi = y;
            any = true;
        } else {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    };
    for (const PlotRow& r : rows) {
        take(r.week_in_period, r.outcome);
        take(r.week_in_period, r.ppo0);
        take(r.week_in_period, r.ppo1);
    }
    for (const ApteRow& r : report.rows) {
        for (const PoEstimate* e : {&r.e1, &r.e0, &r.e1_naive, &r.e0_naive})
            if (e->estimable) take(r.week, e->mean_po);
    }
    if (!any) throw DataError("pancit plot: nothing to draw");
    if (g.x_max == g.x_min) g.x_max += 1.0;
    expand(lo, hi);
    g.y_min = lo;
    g.y_max = hi;
    return g;
}

PlotGeometry apte_geometry(const ApteReport& report) {
    PlotGeometry g;
    g.x_min = 1.0;
    g.x_max = 1.0;
    double lo = 0.0, hi = 0.0;  // always include the zero reference
    bool any = false;
    for (const ApteRow& r : report.rows) {
        if (r.has_apte) {
            any = true;
            g.x_max = std::max(g.x_max, static_cast<double>(r.week));
            lo = std::min(lo, r.apte);
            hi = std::max(hi, r.apte);
        }
        if (r.has_apte_naive && r.week <= report.horizon) {
            g.x_max = std::max(g.x_max, static_cast<double>(r.week));
            lo = std::min(lo, r.apte_naive);
            hi = std::max(hi, r.apte_naive);
        }
    }
    if (!any) throw EstimationError("APTE plot: no estimable weeks");
    if (g.x_max == g.x_min) g.x_max += 1.0;
    expand(lo, hi);
    g.y_min = lo;
    g.y_max = hi;
    return g;
}

std::string render_timeseries(const WeeklySeries& weekly, const PeriodPlan& plan,
                              const std::vector<PlotRow>& rows) {
    const PlotGeometry g = timeseries_geometry(weekly);
    SvgDoc doc(g);
    doc.title("Weekly outcome by treatment period");

    for (std::size_t i = 0; i + 1 < plan.periods.size(); ++i) {
        const double px = g.x_of(plan.periods[i].end_week + 0.5);
        doc.line(px, g.top, px, g.height - g.bottom, "#bbbbbb", 1.0,
                 " stroke-dasharray=\"4 3\"");
    }

    // Per-period predicted PO under the period's own treatment.
    std::vector<std::pair<double, double>> ppo;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!ppo.empty() && rows[i].period != rows[i - 1].period) {
            doc.polyline(ppo, rows[i - 1].treatment == 1 ? kHighColor : kLowColor, 1.5, 0.65);
            ppo.clear();
        }
        ppo.emplace_back(g.x_of(rows[i].week),
                         g.y_of(rows[i].treatment == 1 ? rows[i].ppo1 : rows[i].ppo0));
    }
    if (!ppo.empty())
        doc.polyline(ppo, rows.back().treatment == 1 ? kHighColor : kLowColor, 1.5, 0.65);

    std::vector<std::pair<double, double>> observed;
    for (const WeeklyPoint& p : weekly.points)
        if (p.outcome) observed.emplace_back(g.x_of(p.week_index), g.y_of(*p.outcome));
    doc.polyline(observed, "#888888", 1.0, 0.8);
    for (const WeeklyPoint& p : weekly.points) {
        if (!p.outcome) continue;
        const char* color = "#888888";
        if (plan.labeled()) {
            const int t = plan.period_of_week(p.week_index);
            color = plan.label_of_period(t) == 1 ? kHighColor : kLowColor;
        }
        doc.circle(g.x_of(p.week_index), g.y_of(*p.outcome), 2.0, color, 0.9);
    }

    doc.axes("week", "outcome");
    return doc.finish();
}

std::string render_pancit(const std::vector<PlotRow>& rows, const ApteReport& report) {
    const PlotGeometry g = pancit_geometry(rows, report);
    SvgDoc doc(g);
    doc.title("Observed outcomes and predicted potential outcomes by week in period");

    // Thin per-period noodles: predicted PO under the period's own level.
    std::vector<std::pair<double, double>> noodle;
    int noodle_label = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!noodle.empty() && rows[i].period != rows[i - 1].period) {
            doc.polyline(noodle, noodle_label == 1 ? kHighColor : kLowColor, 1.0, 0.35);
            noodle.clear();
        }
        noodle_label = rows[i].treatment;
        noodle.emplace_back(g.x_of(rows[i].week_in_period),
                            g.y_of(rows[i].treatment == 1 ? rows[i].ppo1 : rows[i].ppo0));
    }
    if (!noodle.empty()) doc.polyline(noodle, noodle_label == 1 ? kHighColor : kLowColor, 1.0, 0.35);

    for (const PlotRow& r : rows)
        doc.circle(g.x_of(r.week_in_period), g.y_of(r.outcome), 2.2,
                   r.treatment == 1 ? kHighColor : kLowColor, 0.75);

    // Big noodles: naive first (wider, lighter), then g-formula (bold, dark).
    auto mean_line = [&](bool naive, int level, double width, double opacity) {
        std::vector<std::pair<double, double>> pts;
        for (const ApteRow& r : report.rows) {
            const PoEstimate& e = naive ? (level == 1 ? r.e1_naive : r.e0_naive)
                                        : (level == 1 ? r.e1 : r.e0);
            if (!e.estimable) continue;
            pts.emplace_back(g.x_of(r.week), g.y_of(e.mean_po));
        }
        doc.polyline(pts, level == 1 ? kHighColor : kLowColor, width, opacity);
    };
    mean_line(true, 0, 6.0, 0.30);
    mean_line(true, 1, 6.0, 0.30);
    mean_line(false, 0, 3.0, 0.95);
    mean_line(false, 1, 3.0, 0.95);

    doc.axes("week in period", "outcome");
    return doc.finish();
}

std::string render_apte(const ApteReport& report) {
    const PlotGeometry g = apte_geometry(report);
    SvgDoc doc(g);
    doc.title("Average period treatment effect by week in period");

    const double zero_y = g.y_of(0.0);
    doc.line(g.left, zero_y, g.width - g.right, zero_y, "#999999", 1.0,
             " stroke-dasharray=\"5 4\"");

    std::vector<std::pair<double, double>> naive, correct;
    for (const ApteRow& r : report.rows) {
        if (r.has_apte_naive && r.week <= report.horizon)
            naive.emplace_back(g.x_of(r.week), g.y_of(r.apte_naive));
        if (r.has_apte) correct.emplace_back(g.x_of(r.week), g.y_of(r.apte));
    }
    doc.polyline(naive, "#7b3294", 6.0, 0.30);
    doc.polyline(correct, "#1a1a1a", 3.0, 0.95);

    doc.axes("week in period", "APTE");
    return doc.finish();
}

} // namespace apte
