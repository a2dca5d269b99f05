#include "apte/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "apte/errors.hpp"
#include "apte/parallel.hpp"
#include "apte/rng.hpp"

namespace apte {

namespace {

using json = nlohmann::json;

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double child_sse = 0.0;
};

// Sorted (value, target) pairs for one feature within one node.
struct ValueTarget {
    double value;
    double y;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const std::vector<double>& y, const ForestParams& params,
                int mtry)
        : X_(X), y_(y), params_(params), mtry_(mtry), p_(static_cast<int>(X[0].size())) {}

    Tree build(std::uint64_t tree_seed) {
        Rng rng(derive_seed(tree_seed, {streams::kBootstrap}));
        const int n = static_cast<int>(y_.size());
        std::vector<int> rows(static_cast<std::size_t>(n));
        std::vector<bool> in_bag(static_cast<std::size_t>(n), false);
        for (int i = 0; i < n; ++i) {
            const int r = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            rows[static_cast<std::size_t>(i)] = r;
            in_bag[static_cast<std::size_t>(r)] = true;
        }
        Tree tree;
        for (int i = 0; i < n; ++i)
            if (!in_bag[static_cast<std::size_t>(i)]) tree.oob_rows.push_back(i);
        grow(tree, rows, rng);
        return tree;
    }

private:
    // Appends the node for `rows` and its subtree in preorder; returns its index.
    int grow(Tree& tree, std::vector<int>& rows, Rng& rng) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        double sum = 0.0, sumsq = 0.0;
        for (int r : rows) {
            sum += y_[static_cast<std::size_t>(r)];
            sumsq += y_[static_cast<std::size_t>(r)] * y_[static_cast<std::size_t>(r)];
        }
        const double n = static_cast<double>(rows.size());
        const double mean = sum / n;
        const double node_sse = std::max(sumsq - sum * sum / n, 0.0);

        SplitChoice split;
        if (static_cast<int>(rows.size()) >= 2 * params_.min_node_size && node_sse > 0.0)
            split = best_split(rows, node_sse, rng);

        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(index)].value = mean;
            return index;
        }

        std::vector<int> left, right;
        left.reserve(rows.size());
        right.reserve(rows.size());
        for (int r : rows) {
            if (X_[static_cast<std::size_t>(r)][static_cast<std::size_t>(split.feature)] <=
                split.threshold)
                left.push_back(r);
            else
                right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.value = mean;
        const int left_index = grow(tree, left, rng);
        const int right_index = grow(tree, right, rng);
        tree.nodes[static_cast<std::size_t>(index)].left = left_index;
        tree.nodes[static_cast<std::size_t>(index)].right = right_index;
        return index;
    }

    SplitChoice best_split(const std::vector<int>& rows, double node_sse, Rng& rng) {
        // Sample mtry distinct features, then scan them in ascending index
        // order so ties resolve to the lowest feature and lowest threshold.
        std::vector<int> features(static_cast<std::size_t>(p_));
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < mtry_; ++i) {
            const int j = i + static_cast<int>(rng.uniform_int(
                                  static_cast<std::uint64_t>(p_ - i)));
            std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
        }
        features.resize(static_cast<std::size_t>(mtry_));
        std::sort(features.begin(), features.end());

        SplitChoice best;
        best.child_sse = node_sse;
        std::vector<ValueTarget> vt(rows.size());
        for (int f : features) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const auto r = static_cast<std::size_t>(rows[i]);
                vt[i] = {X_[r][static_cast<std::size_t>(f)], y_[r]};
            }
            std::sort(vt.begin(), vt.end(),
                      [](const ValueTarget& a, const ValueTarget& b) { return a.value < b.value; });

            double left_sum = 0.0, left_sumsq = 0.0;
            double total_sum = 0.0, total_sumsq = 0.0;
            for (const auto& e : vt) {
                total_sum += e.y;
                total_sumsq += e.y * e.y;
            }
            const int n = static_cast<int>(vt.size());
            for (int i = 0; i + 1 < n; ++i) {
                left_sum += vt[static_cast<std::size_t>(i)].y;
                left_sumsq += vt[static_cast<std::size_t>(i)].y * vt[static_cast<std::size_t>(i)].y;
                const double lo = vt[static_cast<std::size_t>(i)].value;
                const double hi = vt[static_cast<std::size_t>(i + 1)].value;
                if (!(lo < hi)) continue;
                const int left_n = i + 1;
                const int right_n = n - left_n;
                if (left_n < params_.min_node_size || right_n < params_.min_node_size) continue;
                double mid = 0.5 * (lo + hi);
                if (!(mid < hi)) mid = lo;  // guard midpoint rounding up
                const double right_sum = total_sum - left_sum;
                const double right_sumsq = total_sumsq - left_sumsq;
                const double sse =
                    std::max(left_sumsq - left_sum * left_sum / left_n, 0.0) +
                    std::max(right_sumsq - right_sum * right_sum / right_n, 0.0);
                if (sse < best.child_sse) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = mid;
                    best.child_sse = sse;
                }
            }
        }
        return best;
    }

    const Matrix& X_;
    const std::vector<double>& y_;
    const ForestParams& params_;
    int mtry_;
    int p_;
};

json node_to_json(const Tree& tree, int index) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    if (node.feature < 0) return json{{"leaf", {{"value", node.value}}}};
    return json{{"split",
                 {{"feature", node.feature},
                  {"threshold", node.threshold},
                  {"left", node_to_json(tree, node.left)},
                  {"right", node_to_json(tree, node.right)}}}};
}

int node_from_json(const json& j, Tree& tree) {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("leaf")) {
        tree.nodes[static_cast<std::size_t>(index)].value = j.at("leaf").at("value").get<double>();
        return index;
    }
    const json& s = j.at("split");
    tree.nodes[static_cast<std::size_t>(index)].feature = s.at("feature").get<int>();
    tree.nodes[static_cast<std::size_t>(index)].threshold = s.at("threshold").get<double>();
    const int left = node_from_json(s.at("left"), tree);
    const int right = node_from_json(s.at("right"), tree);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
}

double tree_mse_on(const Tree& tree, const Matrix& X, const std::vector<double>& y,
                   const std::vector<int>& rows, const std::vector<double>* column_override,
                   int override_feature) {
    double sse = 0.0;
    std::vector<double> x;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<std::size_t>(rows[i]);
        x = X[r];
        if (column_override) x[static_cast<std::size_t>(override_feature)] = (*column_override)[i];
        const double d = tree.predict(x) - y[r];
        sse += d * d;
    }
    return sse / static_cast<double>(rows.size());
}

} // namespace

double Tree::predict(const std::vector<double>& x) const {
    int index = 0;
    for (;;) {
        const TreeNode& node = nodes[static_cast<std::size_t>(index)];
        if (node.feature < 0) return node.value;
        index = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                            : node.right;
    }
}

Forest fit_forest(const Matrix& X, const std::vector<double>& y, ForestParams params,
                  std::vector<std::string> feature_names) {
    if (X.empty() || y.size() != X.size())
        throw DataError("forest: X and y must be non-empty and the same length");
    const int p = static_cast<int>(X[0].size());
    if (p == 0) throw DataError("forest: no features");
    if (feature_names.empty()) {
        for (int f = 0; f < p; ++f) feature_names.push_back("x" + std::to_string(f + 1));
    }
    if (static_cast<int>(feature_names.size()) != p)
        throw ConfigError("forest: feature name count does not match feature count");
    for (std::size_t r = 0; r < X.size(); ++r) {
        if (static_cast<int>(X[r].size()) != p)
            throw DataError("forest: ragged design matrix at row " + std::to_string(r + 1));
        for (int f = 0; f < p; ++f)
            if (!std::isfinite(X[r][static_cast<std::size_t>(f)]))
                throw DataError("forest: missing value at row " + std::to_string(r + 1) +
                                ", column " + feature_names[static_cast<std::size_t>(f)]);
        if (!std::isfinite(y[r]))
            throw DataError("forest: missing target at row " + std::to_string(r + 1));
    }
    if (params.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    if (params.min_node_size < 1) throw ConfigError("forest: min_node_size must be >= 1");
    if (static_cast<int>(X.size()) < 2 * params.min_node_size)
        throw DataError("forest: need at least " + std::to_string(2 * params.min_node_size) +
                        " rows, got " + std::to_string(X.size()));
    int mtry = params.mtry;
    if (mtry == 0) mtry = std::max(p / 3, 1);
    if (mtry < 1 || mtry > p) throw ConfigError("forest: mtry must be in [1, feature count]");

    Forest forest;
    forest.params = params;
    forest.params.mtry = mtry;
    forest.feature_names = std::move(feature_names);
    forest.y_min = *std::min_element(y.begin(), y.end());
    forest.y_max = *std::max_element(y.begin(), y.end());
    if (forest.y_min == forest.y_max)
        forest.warnings.push_back("constant target: every tree is a single leaf");

    forest.trees.resize(static_cast<std::size_t>(params.n_trees));
    TreeBuilder builder(X, y, forest.params, mtry);
    parallel_for(static_cast<std::size_t>(params.n_trees), params.n_threads, [&](std::size_t t) {
        const std::uint64_t tree_seed =
            derive_seed(params.seed, {streams::kTree, static_cast<std::uint64_t>(t)});
        forest.trees[t] = builder.build(tree_seed);
    });

    const std::size_t n = X.size();
    forest.oob_predictions.assign(n, std::numeric_limits<double>::quiet_NaN());
    forest.oob_counts.assign(n, 0);
    std::vector<double> sums(n, 0.0);
    for (const Tree& tree : forest.trees) {
        for (int r : tree.oob_rows) {
            sums[static_cast<std::size_t>(r)] += tree.predict(X[static_cast<std::size_t>(r)]);
            ++forest.oob_counts[static_cast<std::size_t>(r)];
        }
    }
    for (std::size_t r = 0; r < n; ++r)
        if (forest.oob_counts[r] > 0) forest.oob_predictions[r] = sums[r] / forest.oob_counts[r];
    return forest;
}

double predict(const Forest& forest, const std::vector<double>& x) {
    if (forest.trees.empty()) throw EstimationError("forest: not fitted");
    if (static_cast<int>(x.size()) != forest.n_features())
        throw DataError("forest: feature vector has " + std::to_string(x.size()) +
                        " values, expected " + std::to_string(forest.n_features()));
    for (double v : x)
        if (!std::isfinite(v)) throw DataError("forest: missing feature value in prediction");
    double sum = 0.0;
    for (const Tree& tree : forest.trees) sum += tree.predict(x);
    return sum / static_cast<double>(forest.trees.size());
}

double oob_mse(const Forest& forest, const std::vector<double>& y) {
    if (y.size() != forest.oob_predictions.size())
        throw DataError("forest: target length does not match training rows");
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        if (forest.oob_counts[r] == 0) continue;
        const double d = forest.oob_predictions[r] - y[r];
        sse += d * d;
        ++count;
    }
    if (count == 0) throw EstimationError("forest: no out-of-bag rows");
    return sse / static_cast<double>(count);
}

ImportanceTable permutation_importance(const Forest& forest, const Matrix& X,
                                       const std::vector<double>& y) {
    if (forest.trees.empty()) throw EstimationError("forest: not fitted");
    if (X.size() != y.size() || X.size() != forest.oob_predictions.size())
        throw DataError("forest: importance inputs do not match training rows");
    const int p = forest.n_features();
    const std::size_t n_trees = forest.trees.size();

    // increases[t] holds one MSE increase per feature for tree t. Slot type
    // is char, not bool: vector<bool> is bit-packed and unsafe to write from
    // parallel workers.
    std::vector<std::vector<double>> increases(n_trees);
    std::vector<char> has_oob(n_trees, 0);
    parallel_for(n_trees, forest.params.n_threads, [&](std::size_t t) {
        const Tree& tree = forest.trees[t];
        if (tree.oob_rows.empty()) return;
        has_oob[t] = 1;
        increases[t].assign(static_cast<std::size_t>(p), 0.0);
        const double base = tree_mse_on(tree, X, y, tree.oob_rows, nullptr, -1);
        std::vector<double> column(tree.oob_rows.size());
        for (int f = 0; f < p; ++f) {
            for (std::size_t i = 0; i < tree.oob_rows.size(); ++i)
                column[i] =
                    X[static_cast<std::size_t>(tree.oob_rows[i])][static_cast<std::size_t>(f)];
            Rng rng(derive_seed(forest.params.seed,
                                {streams::kPermImportance, static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(f)}));
            rng.shuffle(column);
            increases[t][static_cast<std::size_t>(f)] =
                tree_mse_on(tree, X, y, tree.oob_rows, &column, f) - base;
        }
    });

    ImportanceTable table;
    for (int f = 0; f < p; ++f) {
        ImportanceEntry entry;
        entry.feature = f;
        entry.name = forest.feature_names[static_cast<std::size_t>(f)];
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t < n_trees; ++t) {
            if (!has_oob[t]) continue;
            sum += increases[t][static_cast<std::size_t>(f)];
            ++count;
        }
        if (count == 0) throw EstimationError("forest: no out-of-bag rows");
        entry.importance = sum / static_cast<double>(count);
        table.push_back(std::move(entry));
    }
    return table;
}

std::string forest_to_json(const Forest& forest) {
    json doc;
    doc["format"] = "apte-forest";
    doc["version"] = 1;
    doc["feature_names"] = forest.feature_names;
    doc["params"] = {{"n_trees", forest.params.n_trees},
                     {"mtry", forest.params.mtry},
                     {"min_node_size", forest.params.min_node_size},
                     {"seed", forest.params.seed}};
    doc["y_min"] = forest.y_min;
    doc["y_max"] = forest.y_max;
    doc["warnings"] = forest.warnings;
    json trees = json::array();
    for (const Tree& tree : forest.trees) {
        json t;
        t["root"] = node_to_json(tree, 0);
        t["oob_rows"] = tree.oob_rows;
        trees.push_back(std::move(t));
    }
    doc["trees"] = std::move(trees);
    json oob;
    oob["counts"] = forest.oob_counts;
    json preds = json::array();
    for (std::size_t r = 0; r < forest.oob_predictions.size(); ++r) {
        if (forest.oob_counts[r] > 0)
            preds.push_back(forest.oob_predictions[r]);
        else
            preds.push_back(nullptr);
    }
    oob["predictions"] = std::move(preds);
    doc["oob"] = std::move(oob);
    return doc.dump(2) + "\n";
}

Forest forest_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("forest JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != "apte-forest")
            throw DataError("forest JSON: unrecognized format");
        if (doc.at("version").get<int>() != 1)
            throw DataError("forest JSON: unsupported version");
        Forest forest;
        forest.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
        const json& params = doc.at("params");
        forest.params.n_trees = params.at("n_trees").get<int>();
        forest.params.mtry = params.at("mtry").get<int>();
        forest.params.min_node_size = params.at("min_node_size").get<int>();
        forest.params.seed = params.at("seed").get<std::uint64_t>();
        forest.y_min = doc.at("y_min").get<double>();
        forest.y_max = doc.at("y_max").get<double>();
        forest.warnings = doc.at("warnings").get<std::vector<std::string>>();
        for (const json& t : doc.at("trees")) {
            Tree tree;
            node_from_json(t.at("root"), tree);
            tree.oob_rows = t.at("oob_rows").get<std::vector<int>>();
            forest.trees.push_back(std::move(tree));
        }
        const json& oob = doc.at("oob");
        forest.oob_counts = oob.at("counts").get<std::vector<int>>();
        for (const json& v : oob.at("predictions")) {
            forest.oob_predictions.push_back(
                v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
        }
        return forest;
    } catch (const json::exception& e) {
        throw DataError(std::string("forest JSON: ") + e.what());
    }
}

} // namespace apte
