// Unit-root tests and the stationarity audit for confounder/simultaneous
// cause (CSC) series.
//
// ADF fits the augmented Dickey-Fuller regression with constant and linear
// trend; the null is a unit root, so rejection is evidence of stationarity.
// KPSS tests the level-stationarity null, so failing to reject is consistent
// with stationarity. Both decide at the 5% level against published
// critical-value tables; p-values are reported as brackets.
#ifndef APTE_STATIONARITY_HPP
#define APTE_STATIONARITY_HPP

#include <optional>
#include <string>
#include <vector>

namespace apte {

struct UnitRootResult {
    double statistic = 0.0;
    int lag_order = 0;
    double p_lower = 0.0;  // p-value bracket from table interpolation
    double p_upper = 1.0;
    bool reject_at_005 = false;
};

/// Deterministic part of the ADF regression.
enum class AdfRegression { ConstantTrend, ConstantOnly };

/// Augmented Dickey-Fuller test (constant + trend by default). Default lag
/// order is floor((n-1)^(1/3)). Throws EstimationError("degenerate series")
/// when the regression is rank deficient, DataError when the series is too
/// short.
UnitRootResult adf_test(const std::vector<double>& series,
                        std::optional<int> lag_order = std::nullopt,
                        AdfRegression regression = AdfRegression::ConstantTrend);

/// KPSS level-stationarity test with Bartlett-window long-run variance.
/// Default lag order is floor(3*sqrt(n)/13). Requires length >= 10.
UnitRootResult kpss_test(const std::vector<double>& series,
                         std::optional<int> lag_order = std::nullopt);

/// One CSC series to audit: the values of one selected predictor across the
/// rows at one within-period week. pooled_fallback marks entries that fell
/// back to the variable's pooled column because the per-week stratum was too
/// short to test.
struct CscPanelEntry {
    int week = 0;
    std::string variable;
    std::vector<double> values;
    bool pooled_fallback = false;
};

struct CscFlag {
    int week = 0;
    std::string variable;
    bool stationary = false;   // S = 1
    std::string basis;         // which tests were computable: adf+kpss, adf, kpss, none
    bool pooled_fallback = false;
};

struct CscStationaritySummary {
    std::vector<CscFlag> flags;
    double overall = 0.0;  // arithmetic mean of the S flags

    static CscStationaritySummary from_flags(std::vector<CscFlag> flags);
};

/// Flag each panel entry stationary (S = 1) if ADF rejects its unit-root
/// null or KPSS fails to reject its stationarity null; when only one test is
/// computable on the series, that test alone decides; when neither is, the
/// entry is flagged 0 with basis "none". Throws DataError on an empty panel.
CscStationaritySummary csc_stationarity(const std::vector<CscPanelEntry>& panel);

} // namespace apte

#endif
