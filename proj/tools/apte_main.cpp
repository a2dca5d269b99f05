// apte: single-subject treatment-effect analysis from daily logs.
//
// Subcommands: analyze (full pipeline to report + plots), simulate (write a
// synthetic dataset with hidden truth), changepoint and stationarity
// (diagnostics on one CSV column), report (re-render plots from a saved
// report JSON). Exit codes: 0 success, 1 usage, 2 data error, 3 estimation
// error.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "apte/changepoint.hpp"
#include "apte/csv.hpp"
#include "apte/errors.hpp"
#include "apte/pipeline.hpp"
#include "apte/simulate.hpp"
#include "apte/stationarity.hpp"

namespace {

using nlohmann::json;

std::vector<double> numeric_column(const std::string& path, const std::string& column) {
    const apte::csv::Table table = apte::csv::read_file(path);
    const int col = table.column(column);
    if (col < 0) throw apte::DataError(path + ": no column named '" + column + "'");
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (col >= static_cast<int>(table.rows[r].size()))
            throw apte::DataError(path + " row " + std::to_string(r + 2) + ": short row");
        const std::string& cell = table.rows[r][static_cast<std::size_t>(col)];
        try {
            std::size_t pos = 0;
            const double v = std::stod(cell, &pos);
            if (pos != cell.size()) throw std::invalid_argument(cell);
            values.push_back(v);
        } catch (const std::logic_error&) {
            throw apte::DataError(path + " row " + std::to_string(r + 2) +
                                  ": non-numeric value '" + cell + "'");
        }
    }
    return values;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw apte::DataError("cannot write " + path.string());
}

json unit_root_json(const apte::UnitRootResult& r) {
    return {{"statistic", r.statistic},
            {"lag_order", r.lag_order},
            {"p_lower", r.p_lower},
            {"p_upper", r.p_upper},
            {"reject_at_005", r.reject_at_005}};
}

struct AnalyzeArgs {
    std::string config_path;
    std::optional<std::string> input, out_dir, start_day, quantiles;
    std::optional<int> lags_y, lags_x, top_k, trees, min_period, threads;
    std::optional<std::uint64_t> seed;
};

int run_analyze_command(const AnalyzeArgs& args) {
    apte::RunConfig config;
    if (!args.config_path.empty()) config = apte::parse_config_file(args.config_path);
    auto set = [&](const char* key, const auto& opt) {
        if (opt) apte::set_config_key(config, key, std::to_string(*opt), "command line");
    };
    if (args.input) config.input = *args.input;
    if (args.out_dir) config.out_dir = *args.out_dir;
    if (args.start_day) config.start_day = *args.start_day;
    if (args.quantiles)
        apte::set_config_key(config, "quantiles", *args.quantiles, "command line");
    set("lags_y", args.lags_y);
    set("lags_x", args.lags_x);
    set("top_k", args.top_k);
    set("trees", args.trees);
    set("min_period", args.min_period);
    set("threads", args.threads);
    set("seed", args.seed);

    const apte::RunResult result = apte::run_analyze(config);
    for (const std::string& name : result.artifacts)
        std::cout << config.out_dir << "/" << name << "\n";
    const apte::ApteReport& report = result.output.report;
    std::cout << "horizon: " << report.horizon << " weeks\n";
    for (const apte::ApteRow& row : report.rows) {
        if (!row.has_apte) continue;
        std::cout << "week " << row.week << ": APTE " << apte::csv::format(row.apte, 3) << "\n";
    }
    return 0;
}

int run_simulate_command(const std::string& scenario, std::optional<std::uint64_t> seed,
                         const std::string& out_dir, const std::vector<int>& missing_weeks,
                         bool list_only) {
    const auto library = apte::scenario_library();
    if (list_only) {
        for (const auto& [name, cfg] : library) {
            std::cout << name << ": " << cfg.n_periods << " periods, seed " << cfg.seed << "\n";
        }
        return 0;
    }
    const auto it = library.find(scenario);
    if (it == library.end()) {
        std::string names;
        for (const auto& [name, cfg] : library) {
            if (!names.empty()) names += ", ";
            names += name;
        }
        throw apte::ConfigError("unknown scenario '" + scenario + "' (available: " + names + ")");
    }
    apte::SimConfig config = it->second;
    if (seed) config.seed = *seed;

    const apte::SimResult result = apte::simulate_series(config);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw apte::DataError("cannot create output directory " + dir.string());

    write_file(dir / "daily.csv", apte::daily_csv(result, config, missing_weeks));
    write_file(dir / "weekly.csv", apte::weekly_csv(result.series));
    write_file(dir / "truth.json", apte::truth_json(result, config));
    std::cout << dir.string() << "/daily.csv\n"
              << dir.string() << "/weekly.csv\n"
              << dir.string() << "/truth.json\n";
    return 0;
}

int run_changepoint_command(const std::string& input, const std::string& column,
                            const std::string& method, std::optional<double> penalty) {
    const std::vector<double> series = numeric_column(input, column);
    const double pen =
        penalty ? *penalty : apte::mbic_penalty(static_cast<int>(series.size()));
    const apte::Segmentation seg =
        method == "amoc" ? apte::detect_amoc(series, pen) : apte::detect_pelt(series, pen);
    json doc;
    doc["method"] = method;
    doc["penalty"] = seg.penalty_value;
    doc["changepoints"] = seg.changepoints;
    doc["segment_means"] = seg.segment_means;
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_stationarity_command(const std::string& input, const std::string& column,
                             std::optional<int> lag) {
    const std::vector<double> series = numeric_column(input, column);
    json doc;
    try {
        doc["adf"] = unit_root_json(apte::adf_test(series, lag));
    } catch (const std::runtime_error& e) {
        doc["adf"] = {{"error", e.what()}};
    }
    try {
        doc["kpss"] = unit_root_json(apte::kpss_test(series, lag));
    } catch (const std::runtime_error& e) {
        doc["kpss"] = {{"error", e.what()}};
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_report_command(const std::string& input, const std::string& out_dir) {
    for (const std::string& name : apte::run_report(input, out_dir))
        std::cout << out_dir << "/" << name << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-subject treatment-effect analysis from daily logs"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    CLI::App* analyze = app.add_subcommand("analyze", "Run the full analysis pipeline");
    analyze->add_option("--input", analyze_args.input, "Daily CSV (date, weight, activity)");
    analyze->add_option("--config", analyze_args.config_path, "Configuration file (key = value)");
    analyze->add_option("--seed", analyze_args.seed, "Master random seed");
    analyze->add_option("--out-dir", analyze_args.out_dir, "Output directory");
    analyze->add_option("--start-day", analyze_args.start_day, "First day of the week");
    analyze->add_option("--lags-y", analyze_args.lags_y, "Outcome lags in the design matrix");
    analyze->add_option("--lags-x", analyze_args.lags_x, "Exposure lags in the design matrix");
    analyze->add_option("--quantiles", analyze_args.quantiles,
                        "Threshold candidate quantiles, comma separated");
    analyze->add_option("--top-k", analyze_args.top_k, "Predictors kept after importance ranking");
    analyze->add_option("--trees", analyze_args.trees, "Trees per forest");
    analyze->add_option("--min-period", analyze_args.min_period, "Minimum period length (weeks)");
    analyze->add_option("--threads", analyze_args.threads, "Worker threads for forest fitting");

    std::string sim_scenario, sim_out = "sim-out";
    std::optional<std::uint64_t> sim_seed;
    std::vector<int> sim_missing;
    bool sim_list = false;
    CLI::App* simulate = app.add_subcommand("simulate", "Write a synthetic dataset with truth");
    simulate->add_option("--scenario", sim_scenario, "Scenario name (see --list)");
    simulate->add_option("--seed", sim_seed, "Override the scenario seed");
    simulate->add_option("--out-dir", sim_out, "Output directory");
    simulate->add_option("--missing-weeks", sim_missing,
                         "1-based weeks exported with blank weight and activity");
    simulate->add_flag("--list", sim_list, "List available scenarios and exit");

    std::string cp_input, cp_column = "outcome", cp_method = "pelt";
    std::optional<double> cp_penalty;
    CLI::App* changepoint = app.add_subcommand("changepoint", "Mean-shift detection on a column");
    changepoint->add_option("--input", cp_input, "CSV file")->required();
    changepoint->add_option("--column", cp_column, "Column name");
    changepoint->add_option("--method", cp_method, "amoc or pelt")
        ->check(CLI::IsMember({"amoc", "pelt"}));
    changepoint->add_option("--penalty", cp_penalty, "Penalty per changepoint");

    std::string st_input, st_column = "outcome";
    std::optional<int> st_lag;
    CLI::App* stationarity = app.add_subcommand("stationarity", "Unit-root tests on a column");
    stationarity->add_option("--input", st_input, "CSV file")->required();
    stationarity->add_option("--column", st_column, "Column name");
    stationarity->add_option("--lag", st_lag, "Lag order for both tests");

    std::string rp_input, rp_out = "apte-out";
    CLI::App* report = app.add_subcommand("report", "Re-render plots from a report JSON");
    report->add_option("--input", rp_input, "Report JSON file")->required();
    report->add_option("--out-dir", rp_out, "Output directory");

    try {
        app.parse(argc, argv);
        if (analyze->parsed()) return run_analyze_command(analyze_args);
        if (simulate->parsed())
            return run_simulate_command(sim_scenario, sim_seed, sim_out, sim_missing, sim_list);
        if (changepoint->parsed())
            return run_changepoint_command(cp_input, cp_column, cp_method, cp_penalty);
        if (stationarity->parsed()) return run_stationarity_command(st_input, st_column, st_lag);
        if (report->parsed()) return run_report_command(rp_input, rp_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const apte::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const apte::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const apte::EstimationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
