#pragma once

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ransomguard/classifier.hpp"
#include "ransomguard/csv.hpp"
#include "ransomguard/dataset.hpp"
#include "ransomguard/error.hpp"

namespace ransomguard {

inline constexpr int MODEL_FORMAT_VERSION = 1;

struct model_metadata {
    std::uint64_t seed = 0;
    std::string dataset_fingerprint;
    std::string created_at;
    class_label positive_class = class_label::ransomware;
};

// SOURCE_DATE_EPOCH wins so archived models can be reproduced byte for byte
inline std::string current_timestamp_utc() {
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
}

inline std::string dataset_fingerprint(const matrix& x, const std::vector<int>& y) {
    std::uint64_t rows = x.rows(), cols = x.cols();
    std::uint64_t h = fnv1a64(&rows, sizeof(rows));
    h = fnv1a64(&cols, sizeof(cols), h);
    if (rows > 0) h = fnv1a64(x.row_ptr(0), rows * cols * sizeof(double), h);
    if (!y.empty()) h = fnv1a64(y.data(), y.size() * sizeof(int), h);
    return hex64(h);
}

namespace detail {

inline nlohmann::json standardizer_to_json(const standardizer& s) {
    return {{"columns", s.columns}, {"mean", s.mean}, {"sd", s.sd}};
}

inline standardizer standardizer_from_json(const nlohmann::json& j) {
    standardizer s;
    s.columns = j.at("columns").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sd = j.at("sd").get<std::vector<double>>();
    if (s.mean.size() != s.sd.size())
        throw data_error("model file: standardizer shape mismatch");
    return s;
}

inline nlohmann::json tree_to_json(const decision_tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const tree_node& n : t.nodes) {
        nodes.push_back({{"leaf", n.is_leaf},
                         {"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
    }
    return {{"nodes", nodes}};
}

inline decision_tree tree_from_json(const nlohmann::json& j) {
    decision_tree t;
    for (const nlohmann::json& jn : j.at("nodes")) {
        tree_node n;
        n.is_leaf = jn.at("leaf").get<bool>();
        n.feature = jn.at("feature").get<std::int32_t>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<std::int32_t>();
        n.right = jn.at("right").get<std::int32_t>();
        n.value = jn.at("value").get<double>();
        t.nodes.push_back(n);
    }
    return t;
}

} // namespace detail

inline nlohmann::json model_to_json(const trained_model& model,
                                    const model_metadata& meta) {
    nlohmann::json j;
    j["format_version"] = MODEL_FORMAT_VERSION;
    j["kind"] = classifier_kind_name(model.kind);
    j["features"] = model.features;
    j["standardizer"] = detail::standardizer_to_json(model.scaler);
    j["metadata"] = {{"seed", meta.seed},
                     {"dataset_fingerprint", meta.dataset_fingerprint},
                     {"created_at", meta.created_at},
                     {"positive_class", class_label_name(meta.positive_class)}};
    switch (model.kind) {
        case classifier_kind::decision_tree:
            j["model"] = detail::tree_to_json(model.tree);
            break;
        case classifier_kind::random_forest: {
            nlohmann::json trees = nlohmann::json::array();
            for (const decision_tree& t : model.forest.trees)
                trees.push_back(detail::tree_to_json(t));
            j["model"] = {{"trees", trees}};
            break;
        }
        case classifier_kind::naive_bayes:
            j["model"] = {{"log_prior",
                           std::vector<double>{model.nb.log_prior[0],
                                               model.nb.log_prior[1]}},
                          {"mean_neg", model.nb.mean[0]},
                          {"mean_pos", model.nb.mean[1]},
                          {"variance_neg", model.nb.variance[0]},
                          {"variance_pos", model.nb.variance[1]},
                          {"epsilon", model.nb.epsilon}};
            break;
        case classifier_kind::logistic_regression:
            j["model"] = {{"weights", model.logistic.weights},
                          {"bias", model.logistic.bias}};
            break;
        case classifier_kind::neural_network:
            j["model"] = {{"d", model.nn.d},     {"h1", model.nn.h1},
                          {"h2", model.nn.h2},   {"w1", model.nn.w1},
                          {"b1", model.nn.b1},   {"w2", model.nn.w2},
                          {"b2", model.nn.b2},   {"w3", model.nn.w3},
                          {"b3", model.nn.b3}};
            break;
    }
    return j;
}

inline trained_model model_from_json(const nlohmann::json& j,
                                     model_metadata* meta_out = nullptr) {
    int version = j.at("format_version").get<int>();
    if (version != MODEL_FORMAT_VERSION)
        throw data_error("model file: unsupported format_version " +
                         std::to_string(version));
    trained_model model;
    model.kind = parse_classifier_kind(j.at("kind").get<std::string>());
    model.features = j.at("features").get<std::vector<std::string>>();
    model.scaler = detail::standardizer_from_json(j.at("standardizer"));
    const nlohmann::json& jm = j.at("model");
    switch (model.kind) {
        case classifier_kind::decision_tree:
            model.tree = detail::tree_from_json(jm);
            break;
        case classifier_kind::random_forest:
            for (const nlohmann::json& jt : jm.at("trees"))
                model.forest.trees.push_back(detail::tree_from_json(jt));
            break;
        case classifier_kind::naive_bayes: {
            std::vector<double> lp = jm.at("log_prior").get<std::vector<double>>();
            if (lp.size() != 2) throw data_error("model file: bad log_prior");
            model.nb.log_prior[0] = lp[0];
            model.nb.log_prior[1] = lp[1];
            model.nb.mean[0] = jm.at("mean_neg").get<std::vector<double>>();
            model.nb.mean[1] = jm.at("mean_pos").get<std::vector<double>>();
            model.nb.variance[0] = jm.at("variance_neg").get<std::vector<double>>();
            model.nb.variance[1] = jm.at("variance_pos").get<std::vector<double>>();
            model.nb.epsilon = jm.at("epsilon").get<double>();
            break;
        }
        case classifier_kind::logistic_regression:
            model.logistic.weights = jm.at("weights").get<std::vector<double>>();
            model.logistic.bias = jm.at("bias").get<double>();
            break;
        case classifier_kind::neural_network:
            model.nn.d = jm.at("d").get<std::size_t>();
            model.nn.h1 = jm.at("h1").get<std::size_t>();
            model.nn.h2 = jm.at("h2").get<std::size_t>();
            model.nn.w1 = jm.at("w1").get<std::vector<double>>();
            model.nn.b1 = jm.at("b1").get<std::vector<double>>();
            model.nn.w2 = jm.at("w2").get<std::vector<double>>();
            model.nn.b2 = jm.at("b2").get<std::vector<double>>();
            model.nn.w3 = jm.at("w3").get<std::vector<double>>();
            model.nn.b3 = jm.at("b3").get<double>();
            break;
    }
    if (meta_out != nullptr) {
        const nlohmann::json& jmd = j.at("metadata");
        meta_out->seed = jmd.at("seed").get<std::uint64_t>();
        meta_out->dataset_fingerprint =
            jmd.at("dataset_fingerprint").get<std::string>();
        meta_out->created_at = jmd.at("created_at").get<std::string>();
        meta_out->positive_class =
            parse_class_label(jmd.at("positive_class").get<std::string>());
    }
    return model;
}

inline void save_model(const std::string& path, const trained_model& model,
                       const model_metadata& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open model file for writing: " + path);
    out << model_to_json(model, meta).dump(2) << '\n';
    if (!out) throw data_error("failed writing model file: " + path);
}

inline trained_model load_model(const std::string& path,
                                model_metadata* meta_out = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file is not valid json: " + path + " (" + e.what() +
                         ")");
    }
    try {
        return model_from_json(j, meta_out);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("model file is missing fields: " + path + " (" + e.what() +
                         ")");
    }
}

} // namespace ransomguard
