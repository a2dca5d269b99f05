// Regression random forest: CART trees on bootstrap samples, out-of-bag
// predictions, and permutation importance.
//
// Everything is deterministic given ForestParams::seed. Each tree draws from
// its own derived substream, so fitting is reproducible regardless of thread
// count and earlier trees do not change when n_trees grows.
#ifndef APTE_FOREST_HPP
#define APTE_FOREST_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace apte {

// Row-major design matrix.
using Matrix = std::vector<std::vector<double>>;

struct ForestParams {
    int n_trees = 500;
    int mtry = 0;  // features tried per split; 0 means max(floor(p/3), 1)
    int min_node_size = 5;
    std::uint64_t seed = 0;
    unsigned n_threads = 1;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf mean of training targets
};

struct Tree {
    std::vector<TreeNode> nodes;  // preorder, left subtree before right
    std::vector<int> oob_rows;    // ascending training-row indices not in the bootstrap

    double predict(const std::vector<double>& x) const;
};

struct Forest {
    std::vector<Tree> trees;
    std::vector<std::string> feature_names;
    std::vector<double> oob_predictions;  // NaN where no tree holds the row out
    std::vector<int> oob_counts;
    double y_min = 0.0;  // range of training targets; predictions stay inside
    double y_max = 0.0;
    ForestParams params;
    std::vector<std::string> warnings;

    int n_features() const { return static_cast<int>(feature_names.size()); }
};

/// Fit a forest on (X, y). Feature names default to x1..xp. Throws DataError
/// on missing cells (naming row and column) or too few rows; a constant
/// target yields single-leaf trees plus a warning.
Forest fit_forest(const Matrix& X, const std::vector<double>& y, ForestParams params,
                  std::vector<std::string> feature_names = {});

/// Mean of per-tree predictions.
double predict(const Forest& forest, const std::vector<double>& x);

/// Mean squared error over rows that have an out-of-bag prediction.
double oob_mse(const Forest& forest, const std::vector<double>& y);

struct ImportanceEntry {
    int feature = 0;
    std::string name;
    double importance = 0.0;  // mean increase in per-tree OOB MSE under permutation
};

using ImportanceTable = std::vector<ImportanceEntry>;

/// Permutation importance: per tree, permute one feature among that tree's
/// out-of-bag rows and record the OOB MSE increase; average across trees.
/// Entries are returned in feature order.
ImportanceTable permutation_importance(const Forest& forest, const Matrix& X,
                                       const std::vector<double>& y);

/// Versioned JSON serialization with trees as nested split/leaf objects.
std::string forest_to_json(const Forest& forest);
Forest forest_from_json(const std::string& text);

} // namespace apte

#endif
