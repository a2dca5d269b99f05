#include "apte/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "apte/errors.hpp"

namespace apte {

namespace {

constexpr int kMinSegment = 2;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const std::vector<double>& series) {
    for (std::size_t i = 0; i < series.size(); ++i)
        if (!std::isfinite(series[i]))
            throw DataError("non-finite value at position " + std::to_string(i + 1));
}

// Prefix sums for O(1) segment cost: cost of [lo, hi] is
// sum(y^2) - sum(y)^2 / n over the range, scaled by 1/variance.
struct CostFn {
    std::vector<double> s1, s2;
    double variance;

    CostFn(const std::vector<double>& y, double var) : variance(var) {
        s1.resize(y.size() + 1, 0.0);
        s2.resize(y.size() + 1, 0.0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            s1[i + 1] = s1[i] + y[i];
            s2[i + 1] = s2[i] + y[i] * y[i];
        }
    }

    // Half-open [lo, hi) in point counts.
    double operator()(int lo, int hi) const {
        const double n = hi - lo;
        const double sum = s1[static_cast<std::size_t>(hi)] - s1[static_cast<std::size_t>(lo)];
        const double sumsq = s2[static_cast<std::size_t>(hi)] - s2[static_cast<std::size_t>(lo)];
        const double sse = sumsq - sum * sum / n;
        return std::max(sse, 0.0) / variance;
    }

    double mean(int lo, int hi) const {
        return (s1[static_cast<std::size_t>(hi)] - s1[static_cast<std::size_t>(lo)]) / (hi - lo);
    }
};

Segmentation single_segment(const std::vector<double>& series, double penalty,
                            Segmentation::Method method) {
    Segmentation seg;
    seg.method = method;
    seg.penalty_value = penalty;
    seg.changepoints = {static_cast<int>(series.size())};
    double sum = 0.0;
    for (double v : series) sum += v;
    seg.segment_means = {sum / static_cast<double>(series.size())};
    return seg;
}

Segmentation from_changepoints(const std::vector<double>& series, std::vector<int> cps,
                               double penalty, Segmentation::Method method) {
    Segmentation seg;
    seg.method = method;
    seg.penalty_value = penalty;
    seg.changepoints = std::move(cps);
    int lo = 0;
    for (int cp : seg.changepoints) {
        double sum = 0.0;
        for (int i = lo; i < cp; ++i) sum += series[static_cast<std::size_t>(i)];
        seg.segment_means.push_back(sum / (cp - lo));
        lo = cp;
    }
    return seg;
}

void check_detect_args(const std::vector<double>& series, double penalty) {
    if (series.size() < 4)
        throw DataError("changepoint detection needs at least 4 points, got " +
                        std::to_string(series.size()));
    if (penalty < 0.0) throw ConfigError("penalty must be non-negative");
    check_finite(series);
}

} // namespace

double estimate_variance(const std::vector<double>& series) {
    if (series.size() < 2) throw DataError("variance estimate needs at least 2 points");
    check_finite(series);
    double sum = 0.0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double d = series[i] - series[i - 1];
        sum += d * d;
    }
    return sum / (2.0 * static_cast<double>(series.size() - 1));
}

double segment_cost(const std::vector<double>& series, int lo, int hi, double variance) {
    if (variance <= 0.0) throw EstimationError("segment cost requires variance > 0");
    if (lo < 0 || hi >= static_cast<int>(series.size()) || lo > hi)
        throw DataError("segment bounds out of range");
    check_finite(series);
    const CostFn cost(series, variance);
    return cost(lo, hi + 1);
}

double mbic_penalty(int n) {
    if (n < 4) throw DataError("penalty default needs n >= 4, got " + std::to_string(n));
    return 3.0 * std::log(static_cast<double>(n));
}

Segmentation detect_amoc(const std::vector<double>& series, double penalty) {
    check_detect_args(series, penalty);
    const int n = static_cast<int>(series.size());
    const double variance = estimate_variance(series);
    if (variance <= 0.0) return single_segment(series, penalty, Segmentation::Method::AMOC);

    const CostFn cost(series, variance);
    const double whole = cost(0, n);
    double best = kInf;
    int best_split = -1;
    for (int k = kMinSegment; k <= n - kMinSegment; ++k) {
        const double c = cost(0, k) + cost(k, n);
        if (c < best) {
            best = c;
            best_split = k;
        }
    }
    if (whole - best > penalty)
        return from_changepoints(series, {best_split, n}, penalty, Segmentation::Method::AMOC);
    return single_segment(series, penalty, Segmentation::Method::AMOC);
}

Segmentation detect_pelt(const std::vector<double>& series, double penalty) {
    check_detect_args(series, penalty);
    const int n = static_cast<int>(series.size());
    const double variance = estimate_variance(series);
    if (variance <= 0.0) return single_segment(series, penalty, Segmentation::Method::PELT);

    const CostFn cost(series, variance);
    // F[v] = optimal penalized cost of the first v points; prev[v] backtracks.
    // Valid segment starts u are 0 or u >= kMinSegment, with v - u >= kMinSegment.
    //
    // Pruning is delayed by the minimum segment length: when
    // F[u] + C(u,v) > F[v], the usual dominating alternative is a changepoint
    // at v, which is only available once v itself satisfies the length
    // constraint, i.e. for targets >= v + kMinSegment. Removing u sooner can
    // lose the optimum.
    struct Candidate {
        int u;
        int dead_from;
    };
    std::vector<double> F(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<int> prev(static_cast<std::size_t>(n) + 1, -1);
    F[0] = -penalty;
    std::vector<Candidate> candidates = {{0, n + 1}};
    for (int v = kMinSegment; v <= n; ++v) {
        if (v - kMinSegment >= kMinSegment) candidates.push_back({v - kMinSegment, n + 1});
        std::erase_if(candidates, [v](const Candidate& c) { return c.dead_from <= v; });
        double best = kInf;
        int arg = -1;
        for (const Candidate& c : candidates) {
            const double total = F[static_cast<std::size_t>(c.u)] + cost(c.u, v) + penalty;
            if (total < best) {
                best = total;
                arg = c.u;
            }
        }
        F[static_cast<std::size_t>(v)] = best;
        prev[static_cast<std::size_t>(v)] = arg;
        for (Candidate& c : candidates)
            if (F[static_cast<std::size_t>(c.u)] + cost(c.u, v) > best)
                c.dead_from = std::min(c.dead_from, v + kMinSegment);
    }

    std::vector<int> cps;
    for (int v = n; v > 0; v = prev[static_cast<std::size_t>(v)]) cps.push_back(v);
    std::reverse(cps.begin(), cps.end());
    return from_changepoints(series, std::move(cps), penalty, Segmentation::Method::PELT);
}

} // namespace apte
