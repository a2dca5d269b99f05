// Full-pipeline orchestration: run configuration, the analysis chain from a
// weekly series to the APTE report, artifact emission, and report-JSON
// round-tripping so plots can be re-rendered from a saved report.
//
// Every stochastic step derives its stream from the single master seed, so a
// rerun with the same input bytes and configuration reproduces every
// artifact byte for byte, regardless of thread count.
#ifndef APTE_PIPELINE_HPP
#define APTE_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apte/design.hpp"
#include "apte/estimator.hpp"
#include "apte/forest.hpp"
#include "apte/series.hpp"
#include "apte/simulate.hpp"
#include "apte/stationarity.hpp"
#include "apte/svgplot.hpp"

namespace apte {

/// All analysis knobs. Serializable to a flat key = value text file that
/// round-trips losslessly; the analysis-relevant subset of that text is the
/// fingerprint embedded in every report JSON.
struct RunConfig {
    std::string input;               // daily CSV path
    std::string out_dir = "apte-out";
    std::string start_day = "monday";
    int lags_y = 12;                 // outcome lags in the design matrix
    int lags_x = 12;                 // exposure lags
    std::vector<double> quantiles = {0.25, 0.5, 0.75};  // threshold candidates
    int top_k = 9;                   // predictors kept after importance ranking
    int trees = 500;
    int mtry = 0;                    // 0 = forest default
    int min_node_size = 5;
    int min_period = 1;              // shorter segments merge into a neighbor
    std::uint64_t seed = 1;
    unsigned threads = 1;
    // Changepoint penalty overrides; unset means the modified-BIC default.
    std::optional<double> outcome_penalty;
    std::optional<double> exposure_penalty;

    void validate() const;  // throws ConfigError on out-of-range values
};

/// Set one configuration key from its text form. Throws ConfigError on an
/// unknown key or unparsable value, naming the origin.
void set_config_key(RunConfig& config, const std::string& key, const std::string& value,
                    const std::string& origin = "config");

/// Parse a flat key = value document ('#' comments, blank lines ignored).
/// Keys not present keep their defaults.
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig parse_config_file(const std::string& path);

/// Canonical text form of every field; parse_config round-trips it.
std::string serialize_config(const RunConfig& config);

/// The analysis-relevant subset (paths, output directory, and thread count
/// excluded): identical fingerprints plus identical input bytes yield
/// identical reports.
std::string config_fingerprint(const RunConfig& config);

/// Everything the analysis chain produces, kept for reporting and tests.
struct AnalyzeOutput {
    WeeklySeries weekly;             // post-restriction series the models saw
    int restrict_first = 0;          // restriction window, 1-based inclusive,
    int restrict_last = 0;           //   in pre-restriction week numbers
    Segmentation outcome_segments;   // mean changepoints of the full outcome
    Segmentation exposure_segments;  // of the restricted exposure
    PeriodPlan plan;                 // labeled treatment periods
    ThresholdSearch threshold_search;
    DesignMatrix design;
    ImportanceTable importances;     // from the all-predictor forest
    PredictorSelection selection;
    std::vector<std::string> selected_names;
    double oob_full = 0.0;           // OOB MSE of the all-predictor forest
    double oob_reduced = 0.0;        // and of the refit on kept predictors
    Forest forest;                   // the refit forest used for PPOs
    PpoTable ppos;                   // aligned with design.rows
    ApteReport report;
    std::vector<PlotRow> plot_rows;
    std::vector<std::string> warnings;
};

/// Run the chain on an already-interpolated weekly series: restrict to the
/// longest outcome segment with no interior mean changepoint, segment the
/// exposure into periods, pick the dichotomization threshold by OOB MSE,
/// build the lagged design, fit and prune the forest, estimate potential
/// outcomes and the APTE trajectory, and audit CSC stationarity. Errors from
/// any stage are rethrown with the stage name prefixed.
AnalyzeOutput analyze_weekly(const WeeklySeries& interpolated, const RunConfig& config);

/// The full report document (configuration fingerprint, restriction window,
/// periods, threshold search, importances, selection, OOB errors, CSC audit,
/// per-week estimates, plot rows, weekly series). Deterministic bytes.
std::string report_json(const AnalyzeOutput& output, const RunConfig& config);

/// What a saved report holds; enough to re-render every plot.
struct ReportBundle {
    ApteReport report;
    std::vector<PlotRow> plot_rows;  // may be empty
    WeeklySeries weekly;             // may be empty
    PeriodPlan plan;                 // may be empty
    std::string config_text;
};

/// Parse a report JSON document. Throws DataError on malformed input.
ReportBundle load_report_json(const std::string& text, const std::string& origin = "report");

/// One emitted artifact path (relative to the output directory).
struct RunResult {
    AnalyzeOutput output;
    std::vector<std::string> artifacts;
};

/// File-to-artifacts front end: ingest the daily CSV, aggregate, impute, run
/// analyze_weekly, and write report.csv, report.json, periods.csv,
/// weekly.csv, timeseries.svg, pancit.svg, apte.svg, and run.log into
/// config.out_dir. Writes are atomic (temp + rename); on error every
/// artifact this run already wrote is removed before the error propagates.
RunResult run_analyze(const RunConfig& config);

/// Re-render plots from a saved report JSON into out_dir: apte.svg always,
/// pancit.svg when plot rows are present, timeseries.svg when the weekly
/// series and periods are present. Returns the artifact names written.
std::vector<std::string> run_report(const std::string& report_path, const std::string& out_dir);

} // namespace apte

#endif
