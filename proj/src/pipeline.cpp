#include "apte/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apte/changepoint.hpp"
#include "apte/csv.hpp"
#include "apte/errors.hpp"
#include "apte/rng.hpp"

namespace apte {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kMinCscStratum = 10;  // shorter per-week strata fall back to the pooled column

[[noreturn]] void bad_value(const std::string& origin, const std::string& key,
                            const std::string& value) {
    throw ConfigError(origin + ": invalid value '" + value + "' for " + key);
}

long long parse_ll(const std::string& origin, const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) bad_value(origin, key, value);
        return v;
    } catch (const std::logic_error&) {
        bad_value(origin, key, value);
    }
}

double parse_num(const std::string& origin, const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v)) bad_value(origin, key, value);
        return v;
    } catch (const std::logic_error&) {
        bad_value(origin, key, value);
    }
}

std::string join_nums(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += csv::format_full(values[i]);
    }
    return out;
}

std::string penalty_text(const std::optional<double>& penalty) {
    return penalty ? csv::format_full(*penalty) : "default";
}

// Run one pipeline stage, prefixing its name onto any error.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + ": " + e.what());
    } catch (const EstimationError& e) {
        throw EstimationError(std::string(name) + ": " + e.what());
    }
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json po_json(const PoEstimate& e) {
    json j;
    j["estimable"] = e.estimable;
    j["mean"] = e.estimable ? json(e.mean_po) : json(nullptr);
    j["n"] = e.n_rows;
    if (!e.estimable && !e.reason.empty()) j["reason"] = e.reason;
    return j;
}

PoEstimate po_from_json(const json& j, int week, int level) {
    PoEstimate e;
    e.week = week;
    e.level = level;
    e.estimable = j.at("estimable").get<bool>();
    if (e.estimable) e.mean_po = j.at("mean").get<double>();
    e.n_rows = j.at("n").get<int>();
    if (j.contains("reason")) e.reason = j.at("reason").get<std::string>();
    return e;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError("cannot write " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot write " + path.string());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

void RunConfig::validate() const {
    if (lags_y < 0 || lags_x < 0) throw ConfigError("lag counts must be >= 0");
    if (lags_y + lags_x == 0) throw ConfigError("at least one lag is required");
    if (quantiles.empty()) throw ConfigError("at least one threshold quantile is required");
    for (double q : quantiles)
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantiles must lie in [0, 1]");
    if (top_k < 1) throw ConfigError("top_k must be >= 1");
    if (trees < 1) throw ConfigError("trees must be >= 1");
    if (mtry < 0) throw ConfigError("mtry must be >= 0");
    if (min_node_size < 1) throw ConfigError("min_node_size must be >= 1");
    if (min_period < 1) throw ConfigError("min_period must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    for (const std::optional<double>& p : {outcome_penalty, exposure_penalty})
        if (p && !(*p >= 0.0 && std::isfinite(*p)))
            throw ConfigError("penalty overrides must be finite and >= 0");
    parse_weekday(start_day);  // throws ConfigError on an unknown day name
}

void set_config_key(RunConfig& config, const std::string& key, const std::string& value,
                    const std::string& origin) {
    auto to_int = [&](int lo) {
        const long long v = parse_ll(origin, key, value);
        if (v < lo || v > 1000000000) bad_value(origin, key, value);
        return static_cast<int>(v);
    };
    if (key == "input") {
        config.input = value;
    } else if (key == "out_dir") {
        config.out_dir = value;
    } else if (key == "start_day") {
        config.start_day = value;
    } else if (key == "lags_y") {
        config.lags_y = to_int(0);
    } else if (key == "lags_x") {
        config.lags_x = to_int(0);
    } else if (key == "quantiles") {
        std::vector<double> qs;
        std::string item;
        std::istringstream ss(value);
        while (std::getline(ss, item, ',')) qs.push_back(parse_num(origin, key, csv::trim(item)));
        if (qs.empty()) bad_value(origin, key, value);
        config.quantiles = std::move(qs);
    } else if (key == "top_k") {
        config.top_k = to_int(1);
    } else if (key == "trees") {
        config.trees = to_int(1);
    } else if (key == "mtry") {
        config.mtry = to_int(0);
    } else if (key == "min_node_size") {
        config.min_node_size = to_int(1);
    } else if (key == "min_period") {
        config.min_period = to_int(1);
    } else if (key == "seed") {
        try {
            std::size_t pos = 0;
            config.seed = std::stoull(value, &pos);
            if (pos != value.size()) bad_value(origin, key, value);
        } catch (const std::logic_error&) {
            bad_value(origin, key, value);
        }
    } else if (key == "threads") {
        config.threads = static_cast<unsigned>(to_int(1));
    } else if (key == "outcome_penalty") {
        config.outcome_penalty =
            value == "default" ? std::nullopt
                               : std::optional<double>(parse_num(origin, key, value));
    } else if (key == "exposure_penalty") {
        config.exposure_penalty =
            value == "default" ? std::nullopt
                               : std::optional<double>(parse_num(origin, key, value));
    } else {
        throw ConfigError(origin + ": unknown configuration key '" + key + "'");
    }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = csv::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = csv::trim(stripped.substr(0, eq));
        const std::string value = csv::trim(stripped.substr(eq + 1));
        set_config_key(config, key, value, origin + " line " + std::to_string(line_no));
    }
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

namespace {

std::string config_text(const RunConfig& c, bool fingerprint_only) {
    std::string out;
    auto put = [&](const std::string& key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    if (!fingerprint_only) {
        put("input", c.input);
        put("out_dir", c.out_dir);
    }
    put("start_day", c.start_day);
    put("lags_y", std::to_string(c.lags_y));
    put("lags_x", std::to_string(c.lags_x));
    put("quantiles", join_nums(c.quantiles));
    put("top_k", std::to_string(c.top_k));
    put("trees", std::to_string(c.trees));
    put("mtry", std::to_string(c.mtry));
    put("min_node_size", std::to_string(c.min_node_size));
    put("min_period", std::to_string(c.min_period));
    put("seed", std::to_string(c.seed));
    if (!fingerprint_only) put("threads", std::to_string(c.threads));
    put("outcome_penalty", penalty_text(c.outcome_penalty));
    put("exposure_penalty", penalty_text(c.exposure_penalty));
    return out;
}

} // namespace

std::string serialize_config(const RunConfig& config) { return config_text(config, false); }

std::string config_fingerprint(const RunConfig& config) { return config_text(config, true); }

namespace {

// Longest segment between detected mean changepoints, earliest on ties,
// returned as a 1-based inclusive week window.
std::pair<int, int> longest_segment(const Segmentation& seg) {
    int best_lo = 1, best_hi = seg.changepoints.back();
    int best_len = 0, prev = 0;
    for (int cp : seg.changepoints) {
        const int len = cp - prev;
        if (len > best_len) {
            best_len = len;
            best_lo = prev + 1;
            best_hi = cp;
        }
        prev = cp;
    }
    return {best_lo, best_hi};
}

WeeklySeries restrict_weeks(const WeeklySeries& series, int first, int last) {
    WeeklySeries out;
    out.center = series.center;
    out.start_day = series.start_day;
    out.trimmed_leading = series.trimmed_leading;
    out.trimmed_trailing = series.trimmed_trailing;
    for (int w = first; w <= last; ++w) {
        WeeklyPoint p = series.points[static_cast<std::size_t>(w - 1)];
        p.week_index = w - first + 1;
        out.points.push_back(p);
    }
    return out;
}

std::vector<CscPanelEntry> csc_panel(const DesignMatrix& dm, const Matrix& X,
                                     const std::vector<int>& kept, int horizon) {
    std::vector<CscPanelEntry> panel;
    for (int f : kept) {
        if (f == dm.treatment_feature()) continue;
        std::vector<double> pooled;
        pooled.reserve(X.size());
        for (const std::vector<double>& row : X) pooled.push_back(row[static_cast<std::size_t>(f)]);
        for (int j = 1; j <= horizon; ++j) {
            if (feature_role(dm, f, j) != CausalRole::Csc) continue;
            CscPanelEntry entry;
            entry.week = j;
            entry.variable = dm.feature_names[static_cast<std::size_t>(f)];
            for (std::size_t r = 0; r < dm.rows.size(); ++r)
                if (dm.rows[r].week_in_period == j)
                    entry.values.push_back(X[r][static_cast<std::size_t>(f)]);
            if (static_cast<int>(entry.values.size()) < kMinCscStratum) {
                entry.values = pooled;
                entry.pooled_fallback = true;
            }
            panel.push_back(std::move(entry));
        }
    }
    return panel;
}

} // namespace

AnalyzeOutput analyze_weekly(const WeeklySeries& interpolated, const RunConfig& config) {
    config.validate();
    AnalyzeOutput out;

    // Restrict the analysis to the longest stretch of outcome weeks with no
    // interior mean changepoint.
    const std::vector<double> outcomes = interpolated.outcomes();
    out.outcome_segments = stage("outcome-restriction", [&] {
        const double pen = config.outcome_penalty
                               ? *config.outcome_penalty
                               : mbic_penalty(static_cast<int>(outcomes.size()));
        return detect_pelt(outcomes, pen);
    });
    const auto [first, last] = longest_segment(out.outcome_segments);
    out.restrict_first = first;
    out.restrict_last = last;
    out.weekly = restrict_weeks(interpolated, first, last);

    const std::vector<double> exposures = out.weekly.exposures();
    out.exposure_segments = stage("exposure-periods", [&] {
        const double pen = config.exposure_penalty
                               ? *config.exposure_penalty
                               : mbic_penalty(static_cast<int>(exposures.size()));
        return detect_pelt(exposures, pen);
    });
    out.plan = stage("exposure-periods", [&] {
        return build_periods(exposures, out.exposure_segments, config.min_period);
    });

    ForestParams forest_params;
    forest_params.n_trees = config.trees;
    forest_params.mtry = config.mtry;
    forest_params.min_node_size = config.min_node_size;
    forest_params.n_threads = config.threads;

    stage("threshold", [&] {
        const std::vector<double> candidates = threshold_candidates(out.plan, config.quantiles);
        ForestParams params = forest_params;
        params.seed = config.seed;
        out.threshold_search = select_threshold(out.weekly, out.plan, candidates, config.lags_y,
                                                config.lags_x, params);
        apply_threshold(out.plan, out.threshold_search.threshold);
        return 0;
    });

    out.design = stage("design", [&] {
        return build_design_matrix(out.weekly, out.plan, config.lags_y, config.lags_x);
    });
    const Matrix X = out.design.features();
    const std::vector<double> y = out.design.targets();

    Forest full = stage("forest", [&] {
        ForestParams params = forest_params;
        params.seed = derive_seed(config.seed, {streams::kForestFit, 0});
        return fit_forest(X, y, params, out.design.feature_names);
    });
    out.oob_full = stage("forest", [&] { return oob_mse(full, y); });

    stage("importance", [&] {
        out.importances = permutation_importance(full, X, y);
        out.selection = select_predictors(out.importances, config.top_k);
        for (int f : out.selection.kept)
            out.selected_names.push_back(out.design.feature_names[static_cast<std::size_t>(f)]);
        return 0;
    });

    const Matrix Xr = subset_columns(X, out.selection.kept);
    std::vector<std::string> reduced_names = out.selected_names;
    out.forest = stage("refit", [&] {
        ForestParams params = forest_params;
        params.seed = derive_seed(config.seed, {streams::kForestFit, 1});
        return fit_forest(Xr, y, params, reduced_names);
    });
    out.oob_reduced = stage("refit", [&] { return oob_mse(out.forest, y); });

    stage("estimate", [&] {
        const auto it = std::find(out.selection.kept.begin(), out.selection.kept.end(),
                                  out.design.treatment_feature());
        const int treatment_col = static_cast<int>(it - out.selection.kept.begin());
        out.ppos = predict_pos(out.forest, Xr, treatment_col);
        out.report = apte_trajectory(out.design, out.ppos, out.plan);
        return 0;
    });

    stage("stationarity-audit", [&] {
        const std::vector<CscPanelEntry> panel =
            csc_panel(out.design, X, out.selection.kept, out.report.horizon);
        if (!panel.empty()) out.report.csc = csc_stationarity(panel);
        return 0;
    });
    out.report.config_fingerprint = config_fingerprint(config);

    for (std::size_t r = 0; r < out.design.rows.size(); ++r) {
        const DesignRow& row = out.design.rows[r];
        PlotRow p;
        p.week = row.week;
        p.period = row.period;
        p.week_in_period = row.week_in_period;
        p.treatment = row.treatment;
        p.outcome = row.outcome;
        p.ppo0 = out.ppos.values[r][0];
        p.ppo1 = out.ppos.values[r][1];
        out.plot_rows.push_back(p);
    }

    for (const std::string& w : out.threshold_search.warnings)
        out.warnings.push_back("threshold: " + w);
    for (const std::string& w : full.warnings) out.warnings.push_back("forest: " + w);
    for (const std::string& w : out.forest.warnings) out.warnings.push_back("refit: " + w);
    return out;
}

std::string report_json(const AnalyzeOutput& output, const RunConfig& config) {
    json doc;
    doc["format"] = "apte-report";
    doc["version"] = 1;
    doc["config"] = config_fingerprint(config);
    doc["horizon"] = output.report.horizon;

    doc["restriction"] = {{"first_week", output.restrict_first},
                          {"last_week", output.restrict_last},
                          {"n_weeks", static_cast<int>(output.weekly.points.size())}};
    doc["segments"] = {{"outcome_changepoints", output.outcome_segments.changepoints},
                       {"exposure_changepoints", output.exposure_segments.changepoints}};

    json periods = json::array();
    for (const Period& p : output.plan.periods) {
        periods.push_back({{"period", p.index},
                           {"start_week", p.start_week},
                           {"end_week", p.end_week},
                           {"mean_exposure", p.mean_exposure},
                           {"treatment", output.plan.label_of_period(p.index)}});
    }
    doc["periods"] = {{"threshold", output.plan.threshold}, {"rows", periods}};

    json mses = json::array();
    for (double m : output.threshold_search.oob_mses) mses.push_back(num_or_null(m));
    doc["threshold_search"] = {{"selected", output.threshold_search.threshold},
                               {"candidates", output.threshold_search.candidates},
                               {"oob_mses", mses}};

    json importance = json::array();
    for (const ImportanceEntry& e : output.importances)
        importance.push_back({{"feature", e.feature}, {"name", e.name}, {"value", e.importance}});
    doc["importance"] = importance;
    doc["selection"] = {{"kept", output.selected_names},
                        {"treatment_added_back", output.selection.treatment_added_back}};
    doc["oob"] = {{"full", num_or_null(output.oob_full)},
                  {"reduced", num_or_null(output.oob_reduced)}};

    json flags = json::array();
    for (const CscFlag& f : output.report.csc.flags) {
        flags.push_back({{"week", f.week},
                         {"variable", f.variable},
                         {"stationary", f.stationary},
                         {"basis", f.basis},
                         {"pooled_fallback", f.pooled_fallback}});
    }
    doc["csc"] = {{"overall", output.report.csc.flags.empty()
                                  ? json(nullptr)
                                  : json(output.report.csc.overall)},
                  {"flags", flags}};

    json rows = json::array();
    for (const ApteRow& r : output.report.rows) {
        json row;
        row["week"] = r.week;
        row["e1"] = po_json(r.e1);
        row["e0"] = po_json(r.e0);
        row["e1_naive"] = po_json(r.e1_naive);
        row["e0_naive"] = po_json(r.e0_naive);
        row["apte"] = r.has_apte ? json(r.apte) : json(nullptr);
        row["apte_naive"] = r.has_apte_naive ? json(r.apte_naive) : json(nullptr);
        rows.push_back(std::move(row));
    }
    doc["rows"] = rows;

    json plot_rows = json::array();
    for (const PlotRow& p : output.plot_rows) {
        plot_rows.push_back({{"week", p.week},
                             {"period", p.period},
                             {"week_in_period", p.week_in_period},
                             {"treatment", p.treatment},
                             {"outcome", p.outcome},
                             {"ppo0", p.ppo0},
                             {"ppo1", p.ppo1}});
    }
    doc["plot_rows"] = plot_rows;

    json points = json::array();
    for (const WeeklyPoint& p : output.weekly.points) {
        points.push_back({{"week", p.week_index},
                          {"outcome", p.outcome ? json(*p.outcome) : json(nullptr)},
                          {"exposure", p.exposure ? json(*p.exposure) : json(nullptr)},
                          {"imputed_outcome", p.imputed_outcome},
                          {"imputed_exposure", p.imputed_exposure}});
    }
    doc["weekly"] = {{"center", output.weekly.center},
                     {"start_day", weekday_name(output.weekly.start_day)},
                     {"points", points}};

    doc["warnings"] = output.warnings;
    return doc.dump(2) + "\n";
}

ReportBundle load_report_json(const std::string& text, const std::string& origin) {
    try {
        const json doc = json::parse(text);
        if (!doc.is_object() || doc.value("format", "") != "apte-report")
            throw DataError(origin + ": not a report document");
        if (doc.value("version", 0) != 1)
            throw DataError(origin + ": unsupported report version");

        ReportBundle bundle;
        bundle.config_text = doc.value("config", "");
        bundle.report.horizon = doc.at("horizon").get<int>();
        bundle.report.config_fingerprint = bundle.config_text;

        for (const json& row : doc.at("rows")) {
            ApteRow r;
            r.week = row.at("week").get<int>();
            r.e1 = po_from_json(row.at("e1"), r.week, 1);
            r.e0 = po_from_json(row.at("e0"), r.week, 0);
            r.e1_naive = po_from_json(row.at("e1_naive"), r.week, 1);
            r.e0_naive = po_from_json(row.at("e0_naive"), r.week, 0);
            if (!row.at("apte").is_null()) {
                r.has_apte = true;
                r.apte = row.at("apte").get<double>();
            }
            if (!row.at("apte_naive").is_null()) {
                r.has_apte_naive = true;
                r.apte_naive = row.at("apte_naive").get<double>();
            }
            bundle.report.rows.push_back(std::move(r));
        }

        if (doc.contains("csc")) {
            std::vector<CscFlag> flags;
            for (const json& f : doc.at("csc").at("flags")) {
                CscFlag flag;
                flag.week = f.at("week").get<int>();
                flag.variable = f.at("variable").get<std::string>();
                flag.stationary = f.at("stationary").get<bool>();
                flag.basis = f.at("basis").get<std::string>();
                flag.pooled_fallback = f.at("pooled_fallback").get<bool>();
                flags.push_back(std::move(flag));
            }
            if (!flags.empty())
                bundle.report.csc = CscStationaritySummary::from_flags(std::move(flags));
        }

        if (doc.contains("plot_rows")) {
            for (const json& p : doc.at("plot_rows")) {
                PlotRow row;
                row.week = p.at("week").get<int>();
                row.period = p.at("period").get<int>();
                row.week_in_period = p.at("week_in_period").get<int>();
                row.treatment = p.at("treatment").get<int>();
                row.outcome = p.at("outcome").get<double>();
                row.ppo0 = p.at("ppo0").get<double>();
                row.ppo1 = p.at("ppo1").get<double>();
                bundle.plot_rows.push_back(row);
            }
        }

        if (doc.contains("weekly")) {
            const json& weekly = doc.at("weekly");
            bundle.weekly.center = weekly.at("center").get<double>();
            bundle.weekly.start_day = parse_weekday(weekly.at("start_day").get<std::string>());
            for (const json& p : weekly.at("points")) {
                WeeklyPoint point;
                point.week_index = p.at("week").get<int>();
                if (!p.at("outcome").is_null()) point.outcome = p.at("outcome").get<double>();
                if (!p.at("exposure").is_null()) point.exposure = p.at("exposure").get<double>();
                point.imputed_outcome = p.at("imputed_outcome").get<bool>();
                point.imputed_exposure = p.at("imputed_exposure").get<bool>();
                bundle.weekly.points.push_back(point);
            }
        }

        if (doc.contains("periods")) {
            const json& periods = doc.at("periods");
            bundle.plan.threshold = periods.at("threshold").get<double>();
            for (const json& p : periods.at("rows")) {
                Period period;
                period.index = p.at("period").get<int>();
                period.start_week = p.at("start_week").get<int>();
                period.end_week = p.at("end_week").get<int>();
                period.mean_exposure = p.at("mean_exposure").get<double>();
                bundle.plan.periods.push_back(period);
                bundle.plan.treatment_labels.push_back(p.at("treatment").get<int>());
            }
        }
        return bundle;
    } catch (const json::exception& e) {
        throw DataError(origin + ": malformed report JSON: " + e.what());
    }
}

namespace {

std::string run_log(const RunConfig& config, const AnalyzeOutput& out, std::size_t n_daily,
                    std::size_t n_weeks_raw) {
    std::ostringstream log;
    log << "input: " << config.input << "\n";
    log << "daily records: " << n_daily << "\n";
    log << "weeks aggregated: " << n_weeks_raw << "\n";
    log << "restriction: weeks " << out.restrict_first << ".." << out.restrict_last << " ("
        << out.weekly.points.size() << " weeks kept)\n";
    log << "periods: " << out.plan.periods.size() << ", threshold "
        << csv::format_full(out.plan.threshold) << "\n";
    log << "design rows: " << out.design.rows.size() << ", features "
        << out.design.n_features() << "\n";
    log << "oob mse: full " << csv::format_full(out.oob_full) << ", reduced "
        << csv::format_full(out.oob_reduced) << "\n";
    log << "selected predictors:";
    for (const std::string& name : out.selected_names) log << ' ' << name;
    log << "\n";
    log << "horizon: " << out.report.horizon << "\n";
    if (!out.report.csc.flags.empty())
        log << "csc stationarity: " << csv::format_full(out.report.csc.overall) << " over "
            << out.report.csc.flags.size() << " flags\n";
    for (const std::string& w : out.warnings) log << "warning: " << w << "\n";
    return log.str();
}

} // namespace

RunResult run_analyze(const RunConfig& config) {
    config.validate();
    if (config.input.empty()) throw ConfigError("no input file given");

    const std::vector<DailyRecord> records =
        stage("ingest", [&] { return ingest_daily_file(config.input, DailySchema{}); });
    const WeeklySeries raw = stage(
        "aggregate", [&] { return to_weekly(records, parse_weekday(config.start_day)); });
    const WeeklySeries interpolated =
        stage("impute", [&] { return interpolate_missing(raw); });

    RunResult result;
    result.output = analyze_weekly(interpolated, config);
    const AnalyzeOutput& out = result.output;

    const fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string());

    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        const fs::path path = dir / name;
        write_atomic(path, content);
        written.push_back(path);
        result.artifacts.push_back(name);
    };
    try {
        emit("report.csv", report_csv(out.report));
        emit("report.json", report_json(out, config));
        emit("periods.csv", periods_csv(out.plan));
        emit("weekly.csv", weekly_csv(out.weekly));
        emit("timeseries.svg", render_timeseries(out.weekly, out.plan, out.plot_rows));
        emit("pancit.svg", render_pancit(out.plot_rows, out.report));
        emit("apte.svg", render_apte(out.report));
        emit("run.log", run_log(config, out, records.size(), raw.points.size()));
    } catch (...) {
        for (const fs::path& p : written) fs::remove(p, ec);
        throw;
    }
    return result;
}

std::vector<std::string> run_report(const std::string& report_path, const std::string& out_dir) {
    const ReportBundle bundle = load_report_json(read_text_file(report_path), report_path);

    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string());

    std::vector<fs::path> written;
    std::vector<std::string> artifacts;
    auto emit = [&](const std::string& name, const std::string& content) {
        const fs::path path = dir / name;
        write_atomic(path, content);
        written.push_back(path);
        artifacts.push_back(name);
    };
    try {
        emit("apte.svg", render_apte(bundle.report));
        bool any_mean = false;
        for (const ApteRow& r : bundle.report.rows)
            any_mean = any_mean || r.e1.estimable || r.e0.estimable;
        if (!bundle.plot_rows.empty() || any_mean)
            emit("pancit.svg", render_pancit(bundle.plot_rows, bundle.report));
        if (!bundle.weekly.points.empty() && !bundle.plan.periods.empty())
            emit("timeseries.svg", render_timeseries(bundle.weekly, bundle.plan, bundle.plot_rows));
    } catch (...) {
        for (const fs::path& p : written) fs::remove(p, ec);
        throw;
    }
    return artifacts;
}

} // namespace apte
