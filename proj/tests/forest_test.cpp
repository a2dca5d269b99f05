#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "apte/errors.hpp"
#include "apte/forest.hpp"
#include "apte/rng.hpp"

using namespace apte;

namespace {

struct Dataset {
    Matrix X;
    std::vector<double> y;
};

// p features, the first linearly informative, the rest noise.
Dataset informative_dataset(int n, int p, double beta, double noise_sd, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.X.resize(static_cast<std::size_t>(n));
    d.y.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& row = d.X[static_cast<std::size_t>(i)];
        row.resize(static_cast<std::size_t>(p));
        for (auto& v : row) v = rng.uniform(-1.0, 1.0);
        d.y[static_cast<std::size_t>(i)] = beta * row[0] + rng.normal(0.0, noise_sd);
    }
    return d;
}

double variance(const std::vector<double>& y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    return var / static_cast<double>(y.size());
}

bool same_trees(const Tree& a, const Tree& b) {
    if (a.oob_rows != b.oob_rows || a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        const TreeNode& x = a.nodes[i];
        const TreeNode& y = b.nodes[i];
        if (x.feature != y.feature || x.threshold != y.threshold || x.left != y.left ||
            x.right != y.right || x.value != y.value)
            return false;
    }
    return true;
}

ForestParams quick_params(int trees, std::uint64_t seed) {
    ForestParams p;
    p.n_trees = trees;
    p.seed = seed;
    return p;
}

} // namespace

TEST_SUITE("forest") {

TEST_CASE("constant targets give constant predictions and a warning") {
    Dataset d = informative_dataset(40, 2, 1.0, 1.0, 1);
    std::fill(d.y.begin(), d.y.end(), 7.0);
    const Forest forest = fit_forest(d.X, d.y, quick_params(20, 3));
    REQUIRE_FALSE(forest.warnings.empty());
    CHECK(forest.warnings[0].find("constant target") != std::string::npos);
    for (const auto& row : d.X) CHECK(predict(forest, row) == doctest::Approx(7.0));
}

TEST_CASE("a noiseless linear signal is learned nearly perfectly") {
    const Dataset d = informative_dataset(200, 1, 1.0, 0.0, 7);
    const Forest forest = fit_forest(d.X, d.y, quick_params(100, 7));
    CHECK(oob_mse(forest, d.y) < variance(d.y) / 4.0);
}

TEST_CASE("a clean step function drives the error toward zero") {
    Rng rng(11);
    Matrix X;
    std::vector<double> y;
    for (int i = 0; i < 400; ++i) {
        const double x = rng.uniform(0.0, 1.0);
        X.push_back({x});
        y.push_back(x > 0.5 ? 1.0 : 0.0);
    }
    const Forest forest = fit_forest(X, y, quick_params(100, 13));
    CHECK(oob_mse(forest, y) < 0.05 * variance(y));
}

TEST_CASE("pure noise is neither explained nor overfit") {
    Dataset d = informative_dataset(500, 4, 0.0, 1.0, 17);
    const Forest forest = fit_forest(d.X, d.y, quick_params(150, 17));
    const double ratio = oob_mse(forest, d.y) / variance(d.y);
    CHECK(ratio >= 0.8);
    CHECK(ratio <= 1.3);
    CHECK(ratio >= 0.5);  // overfitting guard
}

TEST_CASE("fitting is deterministic and thread-count independent") {
    const Dataset d = informative_dataset(120, 3, 1.0, 0.5, 23);
    ForestParams params = quick_params(40, 23);
    const std::string once = forest_to_json(fit_forest(d.X, d.y, params));
    const std::string twice = forest_to_json(fit_forest(d.X, d.y, params));
    CHECK(once == twice);
    params.n_threads = 3;
    CHECK(forest_to_json(fit_forest(d.X, d.y, params)) == once);
}

TEST_CASE("growing the forest preserves the earlier trees") {
    const Dataset d = informative_dataset(80, 2, 1.0, 0.5, 29);
    const Forest small = fit_forest(d.X, d.y, quick_params(10, 29));
    const Forest large = fit_forest(d.X, d.y, quick_params(30, 29));
    REQUIRE(large.trees.size() == 30);
    for (std::size_t i = 0; i < small.trees.size(); ++i)
        CHECK(same_trees(small.trees[i], large.trees[i]));
}

TEST_CASE("predictions never leave the training target range") {
    const Dataset d = informative_dataset(100, 2, 2.0, 0.5, 31);
    const Forest forest = fit_forest(d.X, d.y, quick_params(50, 31));
    double lo = d.y[0], hi = d.y[0];
    for (double v : d.y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Rng rng(32);
    for (int probe = 0; probe < 50; ++probe) {
        const std::vector<double> x = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
        const double pred = predict(forest, x);
        CHECK(pred >= lo);
        CHECK(pred <= hi);
    }
}

TEST_CASE("prediction is the mean of the trees") {
    Forest forest;
    forest.feature_names = {"x1"};
    forest.y_min = -10.0;
    forest.y_max = 10.0;
    Tree leaf_only;
    leaf_only.nodes.push_back({-1, 0.0, -1, -1, 1.0});
    Tree split;
    split.nodes.push_back({0, 0.5, 1, 2, 0.0});
    split.nodes.push_back({-1, 0.0, -1, -1, -3.0});  // x <= 0.5
    split.nodes.push_back({-1, 0.0, -1, -1, 3.0});   // x > 0.5
    forest.trees = {leaf_only, split};
    CHECK(predict(forest, {0.7}) == doctest::Approx(2.0));   // (1 + 3) / 2
    CHECK(predict(forest, {0.1}) == doctest::Approx(-1.0));  // (1 - 3) / 2
    forest.trees = {split};
    CHECK(predict(forest, {0.7}) == doctest::Approx(3.0));
}

TEST_CASE("training rows are not interpolated verbatim") {
    const Dataset d = informative_dataset(150, 2, 1.0, 1.0, 37);
    const Forest forest = fit_forest(d.X, d.y, quick_params(60, 37));
    int off_target = 0;
    for (std::size_t i = 0; i < d.X.size(); ++i)
        if (std::abs(predict(forest, d.X[i]) - d.y[i]) > 1e-6) ++off_target;
    CHECK(off_target > 100);
}

TEST_CASE("out-of-bag bookkeeping matches the bootstrap rate") {
    const Dataset d = informative_dataset(200, 2, 1.0, 0.5, 41);
    const Forest forest = fit_forest(d.X, d.y, quick_params(80, 41));
    double mean_oob = 0.0;
    for (int c : forest.oob_counts) mean_oob += c;
    mean_oob /= static_cast<double>(forest.oob_counts.size()) * forest.params.n_trees;
    // Out-of-bag probability per tree is (1 - 1/n)^n, about 0.367.
    CHECK(mean_oob > 0.30);
    CHECK(mean_oob < 0.45);
    for (std::size_t i = 0; i < forest.oob_predictions.size(); ++i)
        CHECK(std::isnan(forest.oob_predictions[i]) == (forest.oob_counts[i] == 0));
}

TEST_CASE("oob error requires at least one held-out row") {
    // Hunt for a tiny forest whose single bootstrap covers every row.
    Matrix X = {{0.0}, {1.0}, {2.0}};
    std::vector<double> y = {0.0, 1.0, 2.0};
    ForestParams params;
    params.n_trees = 1;
    params.min_node_size = 1;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        params.seed = seed;
        const Forest forest = fit_forest(X, y, params);
        if (forest.trees[0].oob_rows.empty()) {
            CHECK_THROWS_AS(oob_mse(forest, y), EstimationError);
            return;
        }
    }
    FAIL("no fully-covering bootstrap found in 200 seeds");
}

TEST_CASE("permutation importance separates signal from noise") {
    const Dataset d = informative_dataset(300, 4, 1.5, 0.5, 43);
    const Forest forest = fit_forest(d.X, d.y, quick_params(100, 43));
    const ImportanceTable imp = permutation_importance(forest, d.X, d.y);
    REQUIRE(imp.size() == 4);
    CHECK(imp[0].name == "x1");
    for (std::size_t j = 1; j < imp.size(); ++j) CHECK(imp[0].importance > imp[j].importance);
}

TEST_CASE("a constant feature never outranks an informative one") {
    Dataset d = informative_dataset(200, 3, 1.5, 0.5, 47);
    for (auto& row : d.X) row[2] = 42.0;
    const Forest forest = fit_forest(d.X, d.y, quick_params(80, 47));
    const ImportanceTable imp = permutation_importance(forest, d.X, d.y);
    CHECK(imp[2].importance <= imp[0].importance);
}

TEST_CASE("duplicating a feature dilutes its importance") {
    const Dataset single = informative_dataset(250, 2, 2.0, 0.5, 53);
    Dataset doubled = single;
    for (auto& row : doubled.X) row.push_back(row[0]);

    const Forest f1 = fit_forest(single.X, single.y, quick_params(120, 53));
    const double solo = permutation_importance(f1, single.X, single.y)[0].importance;

    const Forest f2 = fit_forest(doubled.X, doubled.y, quick_params(120, 53));
    const ImportanceTable imp = permutation_importance(f2, doubled.X, doubled.y);
    CHECK(imp[0].importance < solo);
    CHECK(imp[2].importance < solo);
}

TEST_CASE("serialization round-trips bytes and predictions") {
    const Dataset d = informative_dataset(90, 3, 1.0, 0.5, 59);
    const Forest forest = fit_forest(d.X, d.y, quick_params(25, 59), {"a", "b", "c"});
    const std::string json = forest_to_json(forest);
    const Forest loaded = forest_from_json(json);
    CHECK(forest_to_json(loaded) == json);
    CHECK(loaded.feature_names == forest.feature_names);
    for (const auto& row : d.X)
        CHECK(predict(loaded, row) == predict(forest, row));
}

TEST_CASE("foreign or damaged json is rejected") {
    CHECK_THROWS_AS(forest_from_json("{not json"), DataError);
    CHECK_THROWS_AS(forest_from_json(R"({"format":"something-else","version":1})"), DataError);
    CHECK_THROWS_AS(forest_from_json(R"({"format":"apte-forest","version":99})"), DataError);
}

TEST_CASE("strictly increasing feature transforms preserve tree structure") {
    // Split selection depends only on the ordering of feature values, so a
    // monotone warp leaves every tree's shape, split features, and leaf
    // values bit-identical; only the stored thresholds move.  (Predictions
    // at arbitrary points may differ: a threshold is the midpoint of two
    // in-sample values, and midpoints are not order-preserved by warps.)
    const Dataset d = informative_dataset(120, 2, 1.5, 0.5, 61);
    Dataset warped = d;
    for (auto& row : warped.X) {
        row[0] = std::exp(row[0]);
        row[1] = row[1] * row[1] * row[1];
    }
    const ForestParams params = quick_params(40, 61);
    const Forest plain = fit_forest(d.X, d.y, params);
    const Forest transformed = fit_forest(warped.X, warped.y, params);
    REQUIRE(plain.trees.size() == transformed.trees.size());
    for (std::size_t t = 0; t < plain.trees.size(); ++t) {
        const Tree& a = plain.trees[t];
        const Tree& b = transformed.trees[t];
        REQUIRE(a.nodes.size() == b.nodes.size());
        CHECK(a.oob_rows == b.oob_rows);
        for (std::size_t i = 0; i < a.nodes.size(); ++i) {
            CHECK(a.nodes[i].feature == b.nodes[i].feature);
            CHECK(a.nodes[i].left == b.nodes[i].left);
            CHECK(a.nodes[i].right == b.nodes[i].right);
            CHECK(a.nodes[i].value == b.nodes[i].value);
        }
    }
}

TEST_CASE("input validation names the offending cell") {
    Matrix X = {{1.0, 2.0}, {3.0, std::nan("")}, {5.0, 6.0}, {7.0, 8.0},
                {1.5, 2.5}, {3.5, 4.5}, {5.5, 6.5}, {7.5, 8.5},
                {1.2, 2.2}, {3.2, 4.2}};
    std::vector<double> y = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    try {
        fit_forest(X, y, quick_params(5, 1));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
    }

    Matrix ragged = {{1.0, 2.0}, {3.0}, {4.0, 5.0}, {6.0, 7.0},
                     {1.0, 2.0}, {3.0, 4.0}, {4.0, 5.0}, {6.0, 7.0},
                     {1.0, 2.0}, {3.0, 4.0}};
    CHECK_THROWS_AS(fit_forest(ragged, y, quick_params(5, 1)), DataError);

    Matrix tiny = {{1.0}, {2.0}};
    CHECK_THROWS_AS(fit_forest(tiny, {1.0, 2.0}, quick_params(5, 1)), DataError);

    const Dataset d = informative_dataset(30, 2, 1.0, 0.5, 1);
    ForestParams bad = quick_params(5, 1);
    bad.mtry = 3;
    CHECK_THROWS_AS(fit_forest(d.X, d.y, bad), ConfigError);
    bad.mtry = 0;
    bad.n_trees = 0;
    CHECK_THROWS_AS(fit_forest(d.X, d.y, bad), ConfigError);
}

TEST_CASE("prediction validates the probe vector") {
    const Dataset d = informative_dataset(30, 2, 1.0, 0.5, 63);
    const Forest forest = fit_forest(d.X, d.y, quick_params(10, 63));
    CHECK_THROWS_AS(predict(forest, {1.0}), DataError);
    CHECK_THROWS_AS(predict(forest, {1.0, std::nan("")}), DataError);
    CHECK_THROWS_AS(predict(Forest{}, {1.0, 2.0}), EstimationError);
}

TEST_CASE("mtry narrows the split search") {
    const Dataset d = informative_dataset(100, 4, 1.0, 0.5, 67);
    ForestParams narrow = quick_params(20, 67);
    narrow.mtry = 1;
    ForestParams wide = quick_params(20, 67);
    wide.mtry = 4;
    CHECK(forest_to_json(fit_forest(d.X, d.y, narrow)) !=
          forest_to_json(fit_forest(d.X, d.y, wide)));
}

} // TEST_SUITE
