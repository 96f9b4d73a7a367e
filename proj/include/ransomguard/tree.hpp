#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ransomguard/matrix.hpp"
#include "ransomguard/random.hpp"

namespace ransomguard {

struct tree_node {
    bool is_leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0; // leaf positive fraction
};

struct decision_tree {
    std::vector<tree_node> nodes;

    double score_row(const double* row) const {
        std::size_t idx = 0;
        while (!nodes[idx].is_leaf) {
            const tree_node& n = nodes[idx];
            idx = row[n.feature] <= n.threshold ? static_cast<std::size_t>(n.left)
                                                : static_cast<std::size_t>(n.right);
        }
        return nodes[idx].value;
    }
};

struct tree_params {
    std::size_t min_samples_split = 2;
    std::size_t mtry = 0; // 0 means all features
};

namespace detail {

struct split_choice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity_decrease = 0.0;
};

// best gini split over the candidate features; midpoint thresholds between
// distinct adjacent values; earlier feature and lower threshold win ties by
// the strictly-greater comparison and ascending scan order
inline split_choice best_split(const matrix& x, const std::vector<int>& y,
                               const std::vector<std::size_t>& rows,
                               const std::vector<std::size_t>& features,
                               std::vector<std::pair<double, int>>& scratch) {
    split_choice best;
    std::size_t n = rows.size();
    std::size_t total_pos = 0;
    for (std::size_t r : rows) total_pos += static_cast<std::size_t>(y[r]);
    double nd = static_cast<double>(n);
    double p_all = static_cast<double>(total_pos) / nd;
    double parent_gini = 2.0 * p_all * (1.0 - p_all);

    for (std::size_t f : features) {
        scratch.clear();
        for (std::size_t r : rows) scratch.emplace_back(x.at(r, f), y[r]);
        std::sort(scratch.begin(), scratch.end());
        if (scratch.front().first == scratch.back().first) continue;

        std::size_t left_n = 0, left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            ++left_n;
            left_pos += static_cast<std::size_t>(scratch[i].second);
            if (scratch[i].first == scratch[i + 1].first) continue;
            double ln = static_cast<double>(left_n);
            double rn = nd - ln;
            double lp = static_cast<double>(left_pos) / ln;
            double rp = static_cast<double>(total_pos - left_pos) / rn;
            double gini = (ln / nd) * 2.0 * lp * (1.0 - lp) +
                          (rn / nd) * 2.0 * rp * (1.0 - rp);
            double decrease = parent_gini - gini;
            if (decrease > best.impurity_decrease + 1e-15) {
                best.found = true;
                best.feature = f;
                best.threshold = scratch[i].first + 0.5 * (scratch[i + 1].first - scratch[i].first);
                best.impurity_decrease = decrease;
            }
        }
    }
    return best;
}

} // namespace detail

// CART with gini impurity, grown breadth-first with an explicit stack
inline decision_tree train_tree(const matrix& x, const std::vector<int>& y,
                                const std::vector<std::size_t>& rows,
                                const tree_params& params, random_source* rng) {
    decision_tree tree;
    std::size_t d = x.cols();
    std::vector<std::size_t> all_features(d);
    for (std::size_t f = 0; f < d; ++f) all_features[f] = f;

    struct work_item {
        std::size_t node;
        std::vector<std::size_t> rows;
    };
    std::vector<work_item> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, rows});
    std::vector<std::pair<double, int>> scratch;
    std::vector<std::size_t> candidates;

    while (!stack.empty()) {
        work_item item = std::move(stack.back());
        stack.pop_back();

        std::size_t pos = 0;
        for (std::size_t r : item.rows) pos += static_cast<std::size_t>(y[r]);
        double frac = static_cast<double>(pos) / static_cast<double>(item.rows.size());
        tree.nodes[item.node].value = frac;

        if (item.rows.size() < params.min_samples_split || pos == 0 ||
            pos == item.rows.size())
            continue;

        const std::vector<std::size_t>* features = &all_features;
        if (params.mtry > 0 && params.mtry < d && rng != nullptr) {
            candidates = all_features;
            for (std::size_t i = 0; i < params.mtry; ++i) {
                std::size_t j = i + static_cast<std::size_t>(
                                        rng->uniform_index(candidates.size() - i));
                std::swap(candidates[i], candidates[j]);
            }
            candidates.resize(params.mtry);
            std::sort(candidates.begin(), candidates.end());
            features = &candidates;
        }

        detail::split_choice split =
            detail::best_split(x, y, item.rows, *features, scratch);
        if (!split.found) continue;

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : item.rows) {
            if (x.at(r, split.feature) <= split.threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        if (left_rows.empty() || right_rows.empty()) continue;

        std::size_t left_idx = tree.nodes.size();
        tree.nodes.emplace_back();
        std::size_t right_idx = tree.nodes.size();
        tree.nodes.emplace_back();
        tree_node& node = tree.nodes[item.node];
        node.is_leaf = false;
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = static_cast<std::int32_t>(left_idx);
        node.right = static_cast<std::int32_t>(right_idx);

        stack.push_back({right_idx, std::move(right_rows)});
        stack.push_back({left_idx, std::move(left_rows)});
    }
    return tree;
}

inline decision_tree train_tree(const matrix& x, const std::vector<int>& y,
                                const tree_params& params = {}) {
    std::vector<std::size_t> rows(x.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    return train_tree(x, y, rows, params, nullptr);
}

} // namespace ransomguard
