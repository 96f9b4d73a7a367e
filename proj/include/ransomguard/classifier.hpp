#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ransomguard/error.hpp"
#include "ransomguard/forest.hpp"
#include "ransomguard/logistic.hpp"
#include "ransomguard/matrix.hpp"
#include "ransomguard/naive_bayes.hpp"
#include "ransomguard/neural_net.hpp"
#include "ransomguard/standardize.hpp"
#include "ransomguard/tree.hpp"

namespace ransomguard {

enum class classifier_kind {
    decision_tree,
    random_forest,
    naive_bayes,
    logistic_regression,
    neural_network,
};

inline const char* classifier_kind_name(classifier_kind k) {
    switch (k) {
        case classifier_kind::decision_tree: return "decision_tree";
        case classifier_kind::random_forest: return "random_forest";
        case classifier_kind::naive_bayes: return "naive_bayes";
        case classifier_kind::logistic_regression: return "logistic_regression";
        case classifier_kind::neural_network: return "neural_network";
    }
    return "unknown";
}

inline classifier_kind parse_classifier_kind(const std::string& s) {
    if (s == "decision_tree" || s == "dt") return classifier_kind::decision_tree;
    if (s == "random_forest" || s == "rf") return classifier_kind::random_forest;
    if (s == "naive_bayes" || s == "nb") return classifier_kind::naive_bayes;
    if (s == "logistic_regression" || s == "lr")
        return classifier_kind::logistic_regression;
    if (s == "neural_network" || s == "nn") return classifier_kind::neural_network;
    throw data_error("unknown classifier kind '" + s + "'");
}

inline std::vector<classifier_kind> all_classifier_kinds() {
    return {classifier_kind::decision_tree, classifier_kind::random_forest,
            classifier_kind::naive_bayes, classifier_kind::logistic_regression,
            classifier_kind::neural_network};
}

// distance-based models consume standardized inputs, the tree family and the
// gaussian model consume raw feature values
inline bool kind_wants_standardized(classifier_kind k) {
    return k == classifier_kind::logistic_regression ||
           k == classifier_kind::neural_network;
}

struct classifier_spec {
    classifier_kind kind = classifier_kind::decision_tree;
    tree_params tree;
    forest_params forest;
    double nb_var_smoothing = 1e-9;
    logistic_params logistic;
    nn_params nn;
};

struct trained_model {
    classifier_kind kind = classifier_kind::decision_tree;
    std::vector<std::string> features;
    standardizer scaler;
    decision_tree tree;
    random_forest forest;
    naive_bayes_model nb;
    logistic_model logistic;
    nn_model nn;

    std::size_t width() const { return scaler.mean.size(); }

    // probability of the positive class from raw feature values, the fitted
    // scaler is applied internally
    double score_row(const double* raw_row) const {
        std::vector<double> buf(raw_row, raw_row + width());
        apply_standardizer_row(scaler, buf.data(), buf.size());
        switch (kind) {
            case classifier_kind::decision_tree: return tree.score_row(buf.data());
            case classifier_kind::random_forest: return forest.score_row(buf.data());
            case classifier_kind::naive_bayes: return nb.score_row(buf.data());
            case classifier_kind::logistic_regression:
                return logistic.score_row(buf.data());
            case classifier_kind::neural_network: return nn.score_row(buf.data());
        }
        throw data_error("trained_model: invalid kind");
    }

    std::vector<double> score(const matrix& raw) const {
        if (raw.cols() != width())
            throw data_error("trained_model: column count mismatch");
        std::vector<double> out(raw.rows());
        for (std::size_t r = 0; r < raw.rows(); ++r) out[r] = score_row(raw.row_ptr(r));
        return out;
    }

    int predict_row(const double* raw_row) const {
        return score_row(raw_row) >= 0.5 ? 1 : 0;
    }

    std::vector<int> predict(const matrix& raw) const {
        std::vector<double> s = score(raw);
        std::vector<int> out(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= 0.5 ? 1 : 0;
        return out;
    }
};

// trains on raw features; fits and embeds a scaler when the kind wants one,
// otherwise embeds an identity mapping. optional monitor set is forwarded to
// the network trainer in raw form and standardized with the training scaler.
inline trained_model train_classifier(const classifier_spec& spec, const matrix& x,
                                      const std::vector<int>& y, std::uint64_t seed,
                                      const matrix* monitor_x = nullptr,
                                      const std::vector<int>* monitor_y = nullptr) {
    if (x.rows() == 0 || x.rows() != y.size())
        throw data_error("train_classifier: rows and labels must match and be non-empty");
    trained_model model;
    model.kind = spec.kind;
    if (kind_wants_standardized(spec.kind)) {
        model.scaler = fit_standardizer(x);
    } else {
        model.scaler = identity_standardizer(x.cols());
    }
    matrix xs = model.scaler.is_identity() ? x : apply_standardizer(model.scaler, x);

    switch (spec.kind) {
        case classifier_kind::decision_tree:
            model.tree = train_tree(xs, y, spec.tree);
            break;
        case classifier_kind::random_forest:
            model.forest = train_forest(xs, y, spec.forest, seed);
            break;
        case classifier_kind::naive_bayes:
            model.nb = train_naive_bayes(xs, y, spec.nb_var_smoothing);
            break;
        case classifier_kind::logistic_regression:
            model.logistic = train_logistic(xs, y, spec.logistic);
            break;
        case classifier_kind::neural_network: {
            if (monitor_x != nullptr && monitor_y != nullptr) {
                matrix ms = model.scaler.is_identity()
                                ? *monitor_x
                                : apply_standardizer(model.scaler, *monitor_x);
                model.nn = train_nn(xs, y, spec.nn, seed, &ms, monitor_y);
            } else {
                model.nn = train_nn(xs, y, spec.nn, seed);
            }
            break;
        }
    }
    return model;
}

} // namespace ransomguard
