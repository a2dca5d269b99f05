#include "apte/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apte/csv.hpp"
#include "apte/errors.hpp"
#include "apte/parallel.hpp"
#include "apte/rng.hpp"

namespace apte {

namespace {

using json = nlohmann::json;

const char* shape_name(EffectShape shape) {
    switch (shape) {
        case EffectShape::Flat: return "flat";
        case EffectShape::SlowDecay: return "slow-decay";
        case EffectShape::SlowOnset: return "slow-onset";
    }
    return "unknown";
}

const char* assignment_name(Assignment a) {
    switch (a) {
        case Assignment::Randomized: return "randomized";
        case Assignment::Confounded: return "confounded";
        case Assignment::Alternating: return "alternating";
    }
    return "unknown";
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One full simulated history. forced_period (1-based) overrides that
// period's assignment with forced_level; pass 0 to force nothing.
SimResult generate(const SimConfig& cfg, std::uint64_t seed, int forced_period,
                   int forced_level) {
    Rng rng(seed);
    const int P = static_cast<int>(cfg.ar.size());

    std::vector<int> lengths(static_cast<std::size_t>(cfg.n_periods));
    for (auto& len : lengths) {
        len = cfg.period_min;
        if (cfg.period_max > cfg.period_min)
            len += static_cast<int>(
                rng.uniform_int(static_cast<std::uint64_t>(cfg.period_max - cfg.period_min + 1)));
    }

    SimResult result;
    std::vector<int> assignments;
    std::vector<double> y;       // realized outcomes, all weeks so far
    std::vector<double> path0;   // current period counterfactuals
    std::vector<double> path1;
    int week = 0;
    for (int t = 1; t <= cfg.n_periods; ++t) {
        int x;
        if (t == forced_period) {
            x = forced_level;
        } else {
            switch (cfg.assignment) {
                case Assignment::Randomized:
                    x = rng.bernoulli(0.5) ? 1 : 0;
                    break;
                case Assignment::Confounded: {
                    const double y_pre = y.empty() ? cfg.baseline : y.back();
                    x = rng.bernoulli(logistic(cfg.confounding * (y_pre - cfg.baseline))) ? 1 : 0;
                    break;
                }
                case Assignment::Alternating:
                    x = (t % 2 == 0) ? 1 : 0;
                    break;
            }
        }
        assignments.push_back(x);

        const int len = lengths[static_cast<std::size_t>(t - 1)];
        path0.assign(static_cast<std::size_t>(len), 0.0);
        path1.assign(static_cast<std::size_t>(len), 0.0);
        const int period_start = week;  // 0-based absolute index of week j=1
        for (int j = 1; j <= len; ++j, ++week) {
            // Carryover from past periods' realized treatments plus the
            // current period's level, scaled by the within-period shape.
            double past = 0.0;
            for (std::size_t lag = 1; lag < cfg.carryover.size(); ++lag) {
                const int source = t - static_cast<int>(lag);
                if (source >= 1)
                    past += cfg.carryover[lag] *
                            assignments[static_cast<std::size_t>(source - 1)];
            }
            const double scale = shape_value(cfg.shape, j);
            const double base_eff = cfg.carryover.empty() ? 0.0 : cfg.carryover[0];
            const double eff0 = scale * past;
            const double eff1 = scale * (past + base_eff);

            const double eps = cfg.noise_sd > 0.0 ? rng.normal(0.0, cfg.noise_sd) : 0.0;
            double ar0 = 0.0, ar1 = 0.0;
            for (int p = 1; p <= P; ++p) {
                const int idx = week - p;  // absolute index of lag-p week
                if (idx < 0) continue;
                const double h0 = idx >= period_start
                                      ? path0[static_cast<std::size_t>(idx - period_start)]
                                      : y[static_cast<std::size_t>(idx)];
                const double h1 = idx >= period_start
                                      ? path1[static_cast<std::size_t>(idx - period_start)]
                                      : y[static_cast<std::size_t>(idx)];
                ar0 += cfg.ar[static_cast<std::size_t>(p - 1)] * (h0 - cfg.baseline);
                ar1 += cfg.ar[static_cast<std::size_t>(p - 1)] * (h1 - cfg.baseline);
            }
            const double po0 = cfg.baseline + ar0 + eff0 + eps;
            const double po1 = cfg.baseline + ar1 + eff1 + eps;
            path0[static_cast<std::size_t>(j - 1)] = po0;
            path1[static_cast<std::size_t>(j - 1)] = po1;
            const double obs = x == 1 ? po1 : po0;
            y.push_back(obs);

            TruthWeek tw;
            tw.week = week + 1;
            tw.period = t;
            tw.week_in_period = j;
            tw.assigned = x;
            tw.po0 = po0;
            tw.po1 = po1;
            tw.observed = obs;
            result.truth.push_back(tw);
        }

        Period period;
        period.index = t;
        period.start_week = period_start + 1;
        period.end_week = week;
        period.mean_exposure = x == 1 ? cfg.exposure_high : cfg.exposure_low;
        result.plan.periods.push_back(period);
    }

    result.assignments = assignments;
    result.plan.treatment_labels = assignments;
    result.plan.threshold = 0.5 * (cfg.exposure_low + cfg.exposure_high);
    result.series.center = 0.0;
    result.series.start_day = std::chrono::Monday;
    for (std::size_t w = 0; w < y.size(); ++w) {
        WeeklyPoint pt;
        pt.week_index = static_cast<int>(w) + 1;
        pt.outcome = y[w];
        const int t = result.plan.period_of_week(pt.week_index);
        pt.exposure = assignments[static_cast<std::size_t>(t - 1)] == 1 ? cfg.exposure_high
                                                                        : cfg.exposure_low;
        result.series.points.push_back(pt);
    }
    return result;
}

} // namespace

double shape_value(EffectShape shape, int week_in_period) {
    switch (shape) {
        case EffectShape::Flat: return 1.0;
        case EffectShape::SlowDecay: return 6.0 / week_in_period - 1.0;
        case EffectShape::SlowOnset: return 1.0 - std::pow(0.5, week_in_period);
    }
    return 1.0;
}

void SimConfig::validate() const {
    if (n_periods < 1) throw ConfigError("simulation needs at least 1 period");
    if (period_min < 1 || period_max < period_min)
        throw ConfigError("period length bounds must satisfy 1 <= min <= max");
    if (noise_sd < 0.0) throw ConfigError("noise sd must be >= 0");
    if (exposure_low < 0.0 || exposure_high > 1.0 || exposure_low >= exposure_high)
        throw ConfigError("exposure levels must satisfy 0 <= low < high <= 1");
    if (missing_prob < 0.0 || missing_prob >= 1.0)
        throw ConfigError("missing probability must be in [0, 1)");
    const int P = static_cast<int>(ar.size());
    if (P > 0) {
        // Companion-matrix spectral radius < 1 for a stable AR process.
        Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(P, P);
        for (int i = 0; i < P; ++i) companion(0, i) = ar[static_cast<std::size_t>(i)];
        for (int i = 1; i < P; ++i) companion(i, i - 1) = 1.0;
        const auto eigenvalues = companion.eigenvalues();
        double radius = 0.0;
        for (int i = 0; i < P; ++i) radius = std::max(radius, std::abs(eigenvalues(i)));
        if (radius >= 1.0 - 1e-9)
            throw ConfigError("unstable AR coefficients (spectral radius " +
                              csv::format(radius, 4) + ")");
    }
}

SimResult simulate_series(const SimConfig& config) {
    config.validate();
    return generate(config, derive_seed(config.seed, {streams::kSimulate}), 0, 0);
}

TruthTrajectory oracle_apte(const SimConfig& config, int horizon, int n_reps,
                            unsigned n_threads) {
    config.validate();
    if (n_reps < 100) throw ConfigError("oracle needs n_reps >= 100");
    if (horizon < 1) throw ConfigError("oracle horizon must be >= 1");

    TruthTrajectory out;
    out.n_reps = n_reps;
    int h = horizon;
    if (h > config.period_max) {
        h = config.period_max;
        out.truncated = true;
        out.warning = "horizon truncated to the maximum period length " +
                      std::to_string(config.period_max);
    }
    const int target = std::max(1, config.n_periods / 2);

    // Work item i covers (rep, arm); each slot stores the target period's
    // outcomes for that replication.
    const std::size_t n_items = static_cast<std::size_t>(n_reps) * 2;
    std::vector<std::vector<double>> slots(n_items);
    parallel_for(n_items, n_threads, [&](std::size_t i) {
        const int rep = static_cast<int>(i / 2);
        const int arm = static_cast<int>(i % 2);
        const std::uint64_t seed =
            derive_seed(config.seed, {streams::kOracleRep, static_cast<std::uint64_t>(rep),
                                      static_cast<std::uint64_t>(arm)});
        const SimResult sim = generate(config, seed, target, arm);
        std::vector<double>& ys = slots[i];
        for (const TruthWeek& tw : sim.truth) {
            if (tw.period != target || tw.week_in_period > h) continue;
            ys.push_back(tw.observed);
        }
    });

    for (int j = 1; j <= h; ++j) {
        double sum[2] = {0.0, 0.0}, sumsq[2] = {0.0, 0.0};
        int count[2] = {0, 0};
        for (std::size_t i = 0; i < n_items; ++i) {
            if (static_cast<int>(slots[i].size()) < j) continue;
            const int arm = static_cast<int>(i % 2);
            const double v = slots[i][static_cast<std::size_t>(j - 1)];
            sum[arm] += v;
            sumsq[arm] += v * v;
            ++count[arm];
        }
        if (count[0] < 2 || count[1] < 2) break;
        const double m0 = sum[0] / count[0];
        const double m1 = sum[1] / count[1];
        const double var0 = std::max(sumsq[0] - sum[0] * sum[0] / count[0], 0.0) / (count[0] - 1);
        const double var1 = std::max(sumsq[1] - sum[1] * sum[1] / count[1], 0.0) / (count[1] - 1);
        out.weeks.push_back(j);
        out.e0.push_back(m0);
        out.e1.push_back(m1);
        out.apte.push_back(m1 - m0);
        out.se0.push_back(std::sqrt(var0 / count[0]));
        out.se1.push_back(std::sqrt(var1 / count[1]));
        out.se_apte.push_back(std::sqrt(var0 / count[0] + var1 / count[1]));
        out.n0.push_back(count[0]);
        out.n1.push_back(count[1]);
    }
    return out;
}

std::map<std::string, SimConfig> scenario_library() {
    std::map<std::string, SimConfig> lib;

    SimConfig null_cfg;
    null_cfg.n_periods = 60;
    null_cfg.ar = {0.5};
    null_cfg.noise_sd = 1.0;
    null_cfg.seed = 101;
    lib["null"] = null_cfg;

    SimConfig confounded;
    confounded.n_periods = 200;
    confounded.ar = {0.8};
    confounded.assignment = Assignment::Confounded;
    confounded.confounding = 2.0;
    confounded.noise_sd = 1.0;
    confounded.seed = 202;
    lib["confounded-null"] = confounded;

    SimConfig additive;
    additive.n_periods = 150;
    additive.ar = {0.5};
    additive.carryover = {-0.3};
    additive.noise_sd = 0.5;
    additive.seed = 303;
    lib["additive-effect"] = additive;

    SimConfig decay;
    decay.n_periods = 200;
    decay.period_min = 4;
    decay.period_max = 8;
    decay.baseline = 1.0;
    decay.carryover = {1.0};
    decay.shape = EffectShape::SlowDecay;
    decay.assignment = Assignment::Alternating;
    decay.noise_sd = 0.8;
    decay.seed = 404;
    lib["slow-decay"] = decay;

    SimConfig onset;
    onset.n_periods = 150;
    onset.carryover = {0.8};
    onset.shape = EffectShape::SlowOnset;
    onset.noise_sd = 0.8;
    onset.seed = 505;
    lib["slow-onset"] = onset;

    SimConfig n1rt;
    n1rt.n_periods = 200;
    n1rt.carryover = {-0.5};
    n1rt.noise_sd = 0.8;
    n1rt.seed = 606;
    lib["randomized-N1RT"] = n1rt;

    return lib;
}

std::string daily_csv(const SimResult& result, const SimConfig& config,
                      const std::vector<int>& fully_missing_weeks) {
    using std::chrono::sys_days;
    const sys_days start = sys_days(std::chrono::year{2012} / 1 / 2);  // a Monday
    Rng missing_rng(derive_seed(config.seed, {streams::kSimulate, 99}));

    std::ostringstream out;
    out << "date,weight,activity\n";
    for (const WeeklyPoint& pt : result.series.points) {
        const bool week_missing =
            std::find(fully_missing_weeks.begin(), fully_missing_weeks.end(), pt.week_index) !=
            fully_missing_weeks.end();
        const double weight = 80.0 + pt.outcome.value_or(0.0);
        const int active_days =
            static_cast<int>(std::lround(pt.exposure.value_or(0.0) * 7.0));
        for (int d = 0; d < 7; ++d) {
            const sys_days date = start + std::chrono::days{(pt.week_index - 1) * 7 + d};
            const std::chrono::year_month_day ymd{date};
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
            // The missingness draw happens for every day so planted missing
            // weeks do not shift later draws.
            const bool drop = missing_rng.bernoulli(config.missing_prob);
            out << buf << ',';
            if (!week_missing && !drop) out << csv::format_full(weight);
            out << ',';
            if (!week_missing) out << (d < active_days ? 1 : 0);
            out << '\n';
        }
    }
    return out.str();
}

std::string truth_json(const SimResult& result, const SimConfig& config) {
    json doc;
    doc["config"] = {{"n_periods", config.n_periods},
                     {"period_min", config.period_min},
                     {"period_max", config.period_max},
                     {"baseline", config.baseline},
                     {"ar", config.ar},
                     {"carryover", config.carryover},
                     {"shape", shape_name(config.shape)},
                     {"assignment", assignment_name(config.assignment)},
                     {"confounding", config.confounding},
                     {"noise_sd", config.noise_sd},
                     {"exposure_high", config.exposure_high},
                     {"exposure_low", config.exposure_low},
                     {"missing_prob", config.missing_prob},
                     {"seed", config.seed}};
    doc["assignments"] = result.assignments;
    json weeks = json::array();
    for (const TruthWeek& tw : result.truth) {
        weeks.push_back({{"week", tw.week},
                         {"period", tw.period},
                         {"week_in_period", tw.week_in_period},
                         {"assigned", tw.assigned},
                         {"po0", tw.po0},
                         {"po1", tw.po1},
                         {"observed", tw.observed}});
    }
    doc["weeks"] = std::move(weeks);
    return doc.dump(2) + "\n";
}

} // namespace apte
