// Mean-shift changepoint detection on a univariate series.
//
// Cost is the Gaussian mean-change negative log-likelihood: per-segment sum
// of squared deviations from the segment mean, normalized by a single global
// variance estimate (half the mean squared first difference). AMOC finds at
// most one change; PELT solves the penalized multi-change problem exactly by
// pruned dynamic programming. Minimum segment length is 2.
#ifndef APTE_CHANGEPOINT_HPP
#define APTE_CHANGEPOINT_HPP

#include <vector>

namespace apte {

struct Segmentation {
    enum class Method { AMOC, PELT };

    // Last index (1-based) of each segment; the final entry equals the
    // series length. A single unbroken segment is {n}.
    std::vector<int> changepoints;
    std::vector<double> segment_means;
    double penalty_value = 0.0;
    Method method = Method::PELT;

    int n_segments() const { return static_cast<int>(changepoints.size()); }
};

/// Global variance estimate: mean of squared first differences divided by 2.
/// Robust to mean shifts (each difference straddles at most one shift).
double estimate_variance(const std::vector<double>& series);

/// Sum of squared deviations from the segment mean over the inclusive
/// 0-based range [lo, hi], divided by the variance. Throws if variance <= 0.
double segment_cost(const std::vector<double>& series, int lo, int hi, double variance);

/// Default penalty, MBIC-style: 3 * ln(n). Requires n >= 4.
double mbic_penalty(int n);

/// At-most-one-change detection: report the best split only if it lowers the
/// cost by more than the penalty. Requires length >= 4.
Segmentation detect_amoc(const std::vector<double>& series, double penalty);

/// Exact penalized segmentation (PELT). Minimizes total segment cost plus
/// penalty per changepoint; identical to exhaustive dynamic programming.
/// Requires length >= 4.
Segmentation detect_pelt(const std::vector<double>& series, double penalty);

} // namespace apte

#endif
