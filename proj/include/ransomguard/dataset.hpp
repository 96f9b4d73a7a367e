#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "ransomguard/csv.hpp"
#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"
#include "ransomguard/random.hpp"

namespace ransomguard {

enum class class_label { ransomware, legitimate };

inline std::string class_label_name(class_label c) {
    return c == class_label::ransomware ? "ransomware" : "legitimate";
}

inline class_label parse_class_label(const std::string& s) {
    if (s == "ransomware") return class_label::ransomware;
    if (s == "legitimate") return class_label::legitimate;
    throw data_error("unknown class label: " + s);
}

struct feature_table {
    std::vector<std::string> columns;
    matrix values;                 // n_samples x n_features
    std::vector<int> labels;       // 0/1, y=1 means positive_class
    class_label positive_class = class_label::ransomware;
};

struct fold_plan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignments; // per-sample fold index in [0, k)

    std::vector<std::size_t> fold_indices(std::size_t f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] == f) out.push_back(i);
        return out;
    }

    std::vector<std::size_t> train_indices(std::size_t f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < assignments.size(); ++i)
            if (assignments[i] != f) out.push_back(i);
        return out;
    }
};

// The raw dataset convention: label column `legitimate` holds 1 for benign
// rows, so y = 1 - legitimate when ransomware is the positive class.
inline feature_table load_csv(const std::string& path, const std::string& label_column,
                              class_label positive_class,
                              std::ostream& log = std::cerr) {
    csv_document doc = read_csv(path);
    if (doc.rows.empty()) throw data_error("empty table (no data rows): " + path);

    std::size_t ncols = doc.header.size();
    for (std::size_t i = 0; i < ncols; ++i) {
        if (doc.header[i].empty())
            throw data_error("empty column name at index " + std::to_string(i));
        for (std::size_t j = i + 1; j < ncols; ++j)
            if (doc.header[i] == doc.header[j])
                throw data_error("duplicate column name: " + doc.header[i]);
    }

    std::size_t label_idx = ncols;
    for (std::size_t i = 0; i < ncols; ++i)
        if (doc.header[i] == label_column) label_idx = i;
    if (label_idx == ncols) throw data_error("label column not found: " + label_column);

    // columns whose first data cell is non-numeric are metadata; drop them
    std::vector<std::size_t> numeric_cols;
    for (std::size_t c = 0; c < ncols; ++c) {
        if (c == label_idx) continue;
        if (parse_double(doc.rows[0][c]).has_value()) {
            numeric_cols.push_back(c);
        } else {
            log << "ingest: dropping non-numeric column '" << doc.header[c] << "'\n";
        }
    }
    if (numeric_cols.empty()) throw data_error("no numeric feature columns in " + path);

    feature_table table;
    table.positive_class = positive_class;
    for (std::size_t c : numeric_cols) table.columns.push_back(doc.header[c]);
    table.values = matrix(doc.rows.size(), numeric_cols.size());
    table.labels.resize(doc.rows.size());

    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        if (row.size() != ncols)
            throw data_error("row " + std::to_string(r + 2) + " has " +
                             std::to_string(row.size()) + " fields, expected " +
                             std::to_string(ncols));
        for (std::size_t j = 0; j < numeric_cols.size(); ++j) {
            auto v = parse_double(row[numeric_cols[j]]);
            if (!v || !std::isfinite(*v))
                throw data_error("unparseable numeric cell at row " + std::to_string(r + 2) +
                                 ", column '" + doc.header[numeric_cols[j]] + "'");
            table.values.at(r, j) = *v;
        }
        auto lv = parse_double(row[label_idx]);
        if (!lv || (*lv != 0.0 && *lv != 1.0))
            throw data_error("label outside {0,1} at row " + std::to_string(r + 2));
        int legitimate = static_cast<int>(*lv);
        table.labels[r] =
            positive_class == class_label::legitimate ? legitimate : 1 - legitimate;
    }
    return table;
}

inline void save_csv(const feature_table& table, const std::string& path,
                     const std::string& label_column = "legitimate") {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out += csv_escape(table.columns[c]);
        out += ',';
    }
    out += label_column;
    out += '\n';
    for (std::size_t r = 0; r < table.values.rows(); ++r) {
        for (std::size_t c = 0; c < table.values.cols(); ++c) {
            out += format_double(table.values.at(r, c));
            out += ',';
        }
        int legitimate = table.positive_class == class_label::legitimate
                             ? table.labels[r]
                             : 1 - table.labels[r];
        out += std::to_string(legitimate);
        out += '\n';
    }
    write_text_file(path, out);
}

inline std::pair<std::size_t, std::size_t> class_distribution(const feature_table& table) {
    std::size_t pos = 0;
    for (int y : table.labels) pos += static_cast<std::size_t>(y);
    return {pos, table.labels.size() - pos};
}

// seeded within-class shuffle, then round-robin deal across folds
inline fold_plan stratified_kfold(const feature_table& table, std::size_t k,
                                  std::uint64_t seed) {
    if (k < 2) throw data_error("stratified_kfold: k must be >= 2");
    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t i = 0; i < table.labels.size(); ++i)
        (table.labels[i] == 1 ? pos_idx : neg_idx).push_back(i);
    if (pos_idx.size() < k || neg_idx.size() < k)
        throw data_error("stratified_kfold: a class has fewer than k samples");

    fold_plan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(table.labels.size(), 0);

    random_source rng(seed);
    rng.shuffle(pos_idx.data(), pos_idx.size());
    rng.shuffle(neg_idx.data(), neg_idx.size());
    for (std::size_t i = 0; i < pos_idx.size(); ++i) plan.assignments[pos_idx[i]] = i % k;
    for (std::size_t i = 0; i < neg_idx.size(); ++i) plan.assignments[neg_idx[i]] = i % k;
    return plan;
}

} // namespace ransomguard
