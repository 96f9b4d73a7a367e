#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ransomguard/random.hpp"
#include "ransomguard/tree.hpp"

namespace ransomguard {

struct forest_params {
    std::size_t n_trees = 100;
    std::size_t min_samples_split = 2;
    std::size_t mtry = 0; // 0 means ceil(sqrt(n_features))
};

struct random_forest {
    std::vector<decision_tree> trees;

    double score_row(const double* row) const {
        double acc = 0.0;
        for (const decision_tree& t : trees) acc += t.score_row(row);
        return acc / static_cast<double>(trees.size());
    }
};

// bootstrap sample of size n per tree; per-tree randomness comes from a
// sub-stream keyed by tree index so results do not depend on scheduling
inline random_forest train_forest(const matrix& x, const std::vector<int>& y,
                                  const forest_params& params, std::uint64_t seed) {
    random_forest forest;
    std::size_t n = x.rows();
    std::size_t mtry = params.mtry;
    if (mtry == 0)
        mtry = static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(x.cols()))));

    tree_params tp;
    tp.min_samples_split = params.min_samples_split;
    tp.mtry = mtry;

    random_source root(seed);
    forest.trees.resize(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        random_source rng = root.substream(t);
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i)
            rows[i] = static_cast<std::size_t>(rng.uniform_index(n));
        forest.trees[t] = train_tree(x, y, rows, tp, &rng);
    }
    return forest;
}

} // namespace ransomguard
