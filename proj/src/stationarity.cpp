#include "apte/stationarity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "apte/errors.hpp"

namespace apte {

namespace {

void check_series(const std::vector<double>& series, std::size_t min_len, const char* test) {
    if (series.size() < min_len)
        throw DataError(std::string(test) + " needs at least " + std::to_string(min_len) +
                        " points, got " + std::to_string(series.size()));
    for (double v : series)
        if (!std::isfinite(v)) throw DataError(std::string(test) + ": non-finite value");
}

// Dickey-Fuller critical values by sample size (Banerjee, Dolado, Galbraith
// & Hendry 1993, Table 4.2): constant+trend and constant-only regressions.
constexpr double kAdfProbs[8] = {0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
constexpr double kAdfSizes[6] = {25, 50, 100, 250, 500, 100000};
constexpr double kAdfTrendTable[8][6] = {
    {-4.38, -4.15, -4.04, -3.99, -3.98, -3.96},
    {-3.95, -3.80, -3.73, -3.69, -3.68, -3.66},
    {-3.60, -3.50, -3.45, -3.43, -3.42, -3.41},
    {-3.24, -3.18, -3.15, -3.13, -3.13, -3.12},
    {-1.14, -1.19, -1.22, -1.23, -1.24, -1.25},
    {-0.80, -0.87, -0.90, -0.92, -0.93, -0.94},
    {-0.50, -0.58, -0.62, -0.64, -0.65, -0.66},
    {-0.15, -0.24, -0.28, -0.31, -0.32, -0.33},
};
constexpr double kAdfConstTable[8][6] = {
    {-3.75, -3.58, -3.51, -3.46, -3.44, -3.43},
    {-3.33, -3.22, -3.17, -3.14, -3.13, -3.12},
    {-3.00, -2.93, -2.89, -2.88, -2.87, -2.86},
    {-2.63, -2.60, -2.58, -2.57, -2.57, -2.57},
    {-0.37, -0.40, -0.42, -0.42, -0.43, -0.44},
    {0.00, -0.03, -0.05, -0.06, -0.07, -0.07},
    {0.34, 0.29, 0.26, 0.24, 0.24, 0.23},
    {0.72, 0.66, 0.63, 0.62, 0.61, 0.60},
};

// KPSS level-stationarity critical values (upper tail).
constexpr double kKpssProbs[4] = {0.10, 0.05, 0.025, 0.01};
constexpr double kKpssCrit[4] = {0.347, 0.463, 0.574, 0.739};

double interp_clamped(const double* xs, const double* ys, int count, double x) {
    if (x <= xs[0]) return ys[0];
    if (x >= xs[count - 1]) return ys[count - 1];
    for (int i = 1; i < count; ++i) {
        if (x <= xs[i]) {
            const double f = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
            return ys[i - 1] + f * (ys[i] - ys[i - 1]);
        }
    }
    return ys[count - 1];
}

} // namespace

UnitRootResult adf_test(const std::vector<double>& series, std::optional<int> lag_order,
                        AdfRegression regression) {
    const int n = static_cast<int>(series.size());
    int lag = lag_order ? *lag_order
                        : static_cast<int>(std::floor(std::cbrt(static_cast<double>(n - 1))));
    if (lag < 0) throw ConfigError("ADF lag order must be >= 0");
    check_series(series, static_cast<std::size_t>(3 * (lag + 2)), "ADF");
    const bool trend = regression == AdfRegression::ConstantTrend;

    // Regress dy_t on [1, (t), y_{t-1}, dy_{t-1} .. dy_{t-lag}] over t = lag+2 .. n.
    const int m = n - lag - 1;
    const int base = trend ? 2 : 1;  // column of y_{t-1}
    const int p = base + 1 + lag;
    Eigen::MatrixXd X(m, p);
    Eigen::VectorXd dy(m);
    for (int r = 0; r < m; ++r) {
        const int t = r + lag + 1;  // 0-based index of y_t
        dy(r) = series[static_cast<std::size_t>(t)] - series[static_cast<std::size_t>(t - 1)];
        X(r, 0) = 1.0;
        if (trend) X(r, 1) = static_cast<double>(r + 1);
        X(r, base) = series[static_cast<std::size_t>(t - 1)];
        for (int i = 1; i <= lag; ++i)
            X(r, base + i) = series[static_cast<std::size_t>(t - i)] -
                             series[static_cast<std::size_t>(t - i - 1)];
    }
    if (m <= p) throw DataError("ADF: too few observations for the lag order");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw EstimationError("degenerate series");
    const Eigen::VectorXd beta = qr.solve(dy);
    const Eigen::VectorXd resid = dy - X * beta;
    const double sigma2 = resid.squaredNorm() / (m - p);
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    const double se = std::sqrt(sigma2 * xtx_inv(base, base));
    if (!(se > 0.0) || !std::isfinite(se)) throw EstimationError("degenerate series");

    UnitRootResult res;
    res.lag_order = lag;
    res.statistic = beta(base) / se;

    double cv[8];
    for (int i = 0; i < 8; ++i)
        cv[i] = interp_clamped(kAdfSizes, trend ? kAdfTrendTable[i] : kAdfConstTable[i], 6,
                               static_cast<double>(m));
    // Lower tail: statistic below cv[i] means p below kAdfProbs[i].
    res.p_lower = 0.0;
    res.p_upper = 1.0;
    for (int i = 0; i < 8; ++i) {
        if (res.statistic < cv[i]) {
            res.p_upper = kAdfProbs[i];
            break;
        }
        res.p_lower = kAdfProbs[i];
    }
    res.reject_at_005 = res.statistic < cv[2];
    return res;
}

UnitRootResult kpss_test(const std::vector<double>& series, std::optional<int> lag_order) {
    const int n = static_cast<int>(series.size());
    int lag = lag_order ? *lag_order
                        : static_cast<int>(std::floor(3.0 * std::sqrt(static_cast<double>(n)) / 13.0));
    if (lag < 0) throw ConfigError("KPSS lag order must be >= 0");
    check_series(series, 10, "KPSS");
    if (lag >= n) throw ConfigError("KPSS lag order must be < series length");
    // A constant series has no variation to test; catch it exactly rather
    // than letting rounding in the mean leave microscopic residuals whose
    // ratio explodes into a spurious rejection.
    if (std::all_of(series.begin(), series.end(),
                    [&](double v) { return v == series.front(); }))
        throw EstimationError("degenerate series");

    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= n;
    std::vector<double> e(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) e[i] = series[i] - mean;

    double cumsum = 0.0, eta = 0.0, s2 = 0.0;
    for (double v : e) {
        cumsum += v;
        eta += cumsum * cumsum;
        s2 += v * v;
    }
    eta /= static_cast<double>(n) * n;
    s2 /= n;
    for (int i = 1; i <= lag; ++i) {
        const double w = 1.0 - static_cast<double>(i) / (lag + 1);
        double gamma = 0.0;
        for (int t = i; t < n; ++t)
            gamma += e[static_cast<std::size_t>(t)] * e[static_cast<std::size_t>(t - i)];
        s2 += 2.0 * w * gamma / n;
    }
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw EstimationError("degenerate series");

    UnitRootResult res;
    res.lag_order = lag;
    res.statistic = eta / s2;
    // Upper tail: statistic above kKpssCrit[i] means p below kKpssProbs[i].
    res.p_lower = 0.0;
    res.p_upper = 1.0;
    for (int i = 0; i < 4; ++i) {
        if (res.statistic > kKpssCrit[i]) {
            res.p_upper = kKpssProbs[i];
        } else {
            res.p_lower = kKpssProbs[i];
            break;
        }
    }
    res.reject_at_005 = res.statistic > kKpssCrit[1];
    return res;
}

CscStationaritySummary CscStationaritySummary::from_flags(std::vector<CscFlag> flags) {
    CscStationaritySummary summary;
    summary.flags = std::move(flags);
    if (summary.flags.empty()) throw DataError("CSC stationarity: empty panel");
    double sum = 0.0;
    for (const auto& f : summary.flags) sum += f.stationary ? 1.0 : 0.0;
    summary.overall = sum / static_cast<double>(summary.flags.size());
    return summary;
}

CscStationaritySummary csc_stationarity(const std::vector<CscPanelEntry>& panel) {
    if (panel.empty()) throw DataError("CSC stationarity: empty panel");
    std::vector<CscFlag> flags;
    flags.reserve(panel.size());
    for (const auto& entry : panel) {
        CscFlag flag;
        flag.week = entry.week;
        flag.variable = entry.variable;
        flag.pooled_fallback = entry.pooled_fallback;

        bool adf_ok = false, adf_pass = false;
        bool kpss_ok = false, kpss_pass = false;
        try {
            adf_pass = adf_test(entry.values).reject_at_005;
            adf_ok = true;
        } catch (const std::runtime_error&) {
        }
        try {
            kpss_pass = !kpss_test(entry.values).reject_at_005;
            kpss_ok = true;
        } catch (const std::runtime_error&) {
        }
        if (adf_ok && kpss_ok) {
            flag.basis = "adf+kpss";
            flag.stationary = adf_pass || kpss_pass;
        } else if (adf_ok) {
            flag.basis = "adf";
            flag.stationary = adf_pass;
        } else if (kpss_ok) {
            flag.basis = "kpss";
            flag.stationary = kpss_pass;
        } else {
            flag.basis = "none";
            flag.stationary = false;
        }
        flags.push_back(std::move(flag));
    }
    return CscStationaritySummary::from_flags(std::move(flags));
}

} // namespace apte
