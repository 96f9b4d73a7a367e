#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ransomguard/classifier.hpp"
#include "ransomguard/dataset.hpp"
#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"
#include "ransomguard/metrics.hpp"
#include "ransomguard/model_io.hpp"
#include "ransomguard/select.hpp"

namespace ransomguard {

enum class feature_mode { automatic, paper13, paper12, explicit_list };

inline std::string feature_mode_name(feature_mode m) {
    switch (m) {
        case feature_mode::automatic: return "auto";
        case feature_mode::paper13: return "paper13";
        case feature_mode::paper12: return "paper12";
        default: return "list";
    }
}

// accepted forms: auto | paper13 | paper12 | list:a,b,c
inline feature_mode parse_feature_mode(const std::string& s,
                                       std::vector<std::string>& explicit_out) {
    if (s == "auto") return feature_mode::automatic;
    if (s == "paper13") return feature_mode::paper13;
    if (s == "paper12") return feature_mode::paper12;
    if (s.rfind("list:", 0) == 0) {
        explicit_out.clear();
        std::string rest = s.substr(5);
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            std::string item = comma == std::string::npos
                                   ? rest.substr(start)
                                   : rest.substr(start, comma - start);
            if (!item.empty()) explicit_out.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (explicit_out.empty()) throw error(errc::usage, "empty feature list");
        return feature_mode::explicit_list;
    }
    throw error(errc::usage, "unknown feature mode '" + s +
                                 "' (expected auto|paper13|paper12|list:...)");
}

struct experiment_config {
    std::string dataset_path;
    std::string label_column = "legitimate";
    class_label positive_class = class_label::ransomware;
    feature_mode features = feature_mode::paper13;
    std::vector<std::string> explicit_features;
    scaling_mode variance_scaling = scaling_mode::raw;
    double variance_cutoff = 1.0;
    double vif_cutoff = 10.0;
    std::vector<classifier_spec> classifiers;
    std::size_t k = 10;
    std::uint64_t seed = 42;
    bool global_selection = false;
    double beta = 1.0;
};

inline std::vector<classifier_spec> default_classifier_specs() {
    std::vector<classifier_spec> out;
    for (classifier_kind kind : all_classifier_kinds()) {
        classifier_spec spec;
        spec.kind = kind;
        out.push_back(spec);
    }
    return out;
}

struct fold_result {
    std::size_t fold = 0;
    confusion_counts counts;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double fbeta = 0.0;
    double auc = 0.0;
    bool precision_degenerate = false;
    bool recall_degenerate = false;
    roc_curve_result roc;
    double seconds = 0.0; // informational; kept out of the canonical report
};

struct classifier_result {
    classifier_kind kind = classifier_kind::decision_tree;
    std::vector<fold_result> folds;
    mean_std accuracy, precision, recall, f1, fbeta, auc;
    roc_curve_result mean_curve;
};

struct eval_report {
    experiment_config config;
    std::string dataset_fingerprint_hex;
    std::size_t n_samples = 0;
    std::size_t n_positive = 0;
    std::size_t n_negative = 0;
    std::vector<std::string> features_used; // global list; empty in per-fold mode
    bool per_fold_selection = false;
    std::vector<selection_report> selections; // empty for presets and lists
    std::vector<classifier_result> classifiers;
};

namespace detail {

inline std::vector<std::size_t> resolve_columns(const feature_table& table,
                                                const std::vector<std::string>& names) {
    std::vector<std::size_t> out;
    for (const std::string& name : names) {
        auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end())
            throw data_error("feature not present in dataset: " + name);
        out.push_back(static_cast<std::size_t>(it - table.columns.begin()));
    }
    return out;
}

inline fold_result score_fold(const trained_model& model, const matrix& x_test,
                              const std::vector<int>& y_test, double beta) {
    fold_result fr;
    std::vector<double> scores = model.score(x_test);
    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= 0.5 ? 1 : 0;
    fr.counts = confusion(y_test, preds);
    prf_result prf = precision_recall_accuracy(fr.counts);
    fr.accuracy = prf.accuracy;
    fr.precision = prf.precision;
    fr.recall = prf.recall;
    fr.precision_degenerate = prf.precision_degenerate;
    fr.recall_degenerate = prf.recall_degenerate;
    fr.f1 = f_beta(prf.precision, prf.recall, 1.0);
    fr.fbeta = f_beta(prf.precision, prf.recall, beta);
    fr.roc = roc_curve(y_test, scores);
    fr.auc = fr.roc.auc;
    return fr;
}

} // namespace detail

// Fig-1 style harness: stratified folds, per-fold fit on training rows only
// (both the feature selector in auto mode and each model's embedded scaler),
// score the held-out fold, aggregate across folds in fold-index order.
inline eval_report run_experiment(const feature_table& table,
                                  const experiment_config& config) {
    if (config.k < 2) throw data_error("run_experiment: k must be >= 2");
    if (config.classifiers.empty())
        throw data_error("run_experiment: no classifiers configured");

    eval_report report;
    report.config = config;
    report.dataset_fingerprint_hex = dataset_fingerprint(table.values, table.labels);
    report.n_samples = table.values.rows();
    auto dist = class_distribution(table);
    report.n_positive = dist.first;
    report.n_negative = dist.second;

    // resolve the feature set once unless auto mode re-selects per fold
    std::vector<std::size_t> global_cols;
    switch (config.features) {
        case feature_mode::paper13:
            report.features_used = preset_features_13();
            break;
        case feature_mode::paper12:
            report.features_used = preset_features_12();
            break;
        case feature_mode::explicit_list:
            report.features_used = config.explicit_features;
            break;
        case feature_mode::automatic:
            if (config.global_selection) {
                selection_report sel = select_features(
                    table.values, table.columns, config.variance_scaling,
                    config.variance_cutoff, config.vif_cutoff);
                report.features_used = sel.final_columns;
                report.selections.push_back(std::move(sel));
            } else {
                report.per_fold_selection = true;
            }
            break;
    }
    if (!report.per_fold_selection)
        global_cols = detail::resolve_columns(table, report.features_used);

    fold_plan plan = stratified_kfold(table, config.k, config.seed);
    random_source root(config.seed);

    // per-fold training matrices are shared across classifiers
    struct fold_data {
        std::vector<std::size_t> train_idx, test_idx;
        matrix x_train, x_test;
        std::vector<int> y_train, y_test;
    };

    std::vector<fold_data> folds(config.k);
    for (std::size_t f = 0; f < config.k; ++f) {
        fold_data& fd = folds[f];
        fd.train_idx = plan.train_indices(f);
        fd.test_idx = plan.fold_indices(f);

        std::vector<std::size_t> cols = global_cols;
        if (report.per_fold_selection) {
            matrix train_full = table.values.select_rows(fd.train_idx);
            selection_report sel =
                select_features(train_full, table.columns, config.variance_scaling,
                                config.variance_cutoff, config.vif_cutoff);
            try {
                cols = detail::resolve_columns(table, sel.final_columns);
            } catch (const error& e) {
                throw data_error("fold " + std::to_string(f) +
                                 " selection: " + e.what());
            }
            if (cols.empty())
                throw data_error("fold " + std::to_string(f) +
                                 " selection kept no features");
            report.selections.push_back(std::move(sel));
        }

        fd.x_train = table.values.select_rows(fd.train_idx).select_columns(cols);
        fd.x_test = table.values.select_rows(fd.test_idx).select_columns(cols);
        fd.y_train.reserve(fd.train_idx.size());
        for (std::size_t i : fd.train_idx) fd.y_train.push_back(table.labels[i]);
        fd.y_test.reserve(fd.test_idx.size());
        for (std::size_t i : fd.test_idx) fd.y_test.push_back(table.labels[i]);
    }

    for (std::size_t ci = 0; ci < config.classifiers.size(); ++ci) {
        const classifier_spec& spec = config.classifiers[ci];
        classifier_result cr;
        cr.kind = spec.kind;
        std::vector<double> accs, precs, recs, f1s, fbetas, aucs;
        std::vector<roc_curve_result> curves;
        for (std::size_t f = 0; f < config.k; ++f) {
            const fold_data& fd = folds[f];
            std::uint64_t train_seed = root.substream(1000 + ci * config.k + f).seed();
            auto started = std::chrono::steady_clock::now();
            fold_result fr;
            try {
                trained_model model =
                    train_classifier(spec, fd.x_train, fd.y_train, train_seed);
                fr = detail::score_fold(model, fd.x_test, fd.y_test, config.beta);
            } catch (const error& e) {
                throw error(e.code(), "fold " + std::to_string(f) + ", classifier " +
                                          classifier_kind_name(spec.kind) + ": " +
                                          e.what());
            }
            fr.fold = f;
            fr.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                    .count();
            accs.push_back(fr.accuracy);
            precs.push_back(fr.precision);
            recs.push_back(fr.recall);
            f1s.push_back(fr.f1);
            fbetas.push_back(fr.fbeta);
            aucs.push_back(fr.auc);
            curves.push_back(fr.roc);
            cr.folds.push_back(std::move(fr));
        }
        cr.accuracy = aggregate_folds(accs);
        cr.precision = aggregate_folds(precs);
        cr.recall = aggregate_folds(recs);
        cr.f1 = aggregate_folds(f1s);
        cr.fbeta = aggregate_folds(fbetas);
        cr.auc = aggregate_folds(aucs);
        cr.mean_curve = mean_roc(curves);
        report.classifiers.push_back(std::move(cr));
    }
    return report;
}

inline eval_report run_experiment(const experiment_config& config) {
    feature_table table =
        load_csv(config.dataset_path, config.label_column, config.positive_class);
    return run_experiment(table, config);
}

namespace detail {

// +inf and nan never round-trip through json numbers, so vif values are
// stringified in those cases
inline nlohmann::json vif_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return "inf";
    return v;
}

inline nlohmann::json selection_to_json(const selection_report& sel) {
    nlohmann::json j;
    j["scaling_mode"] = scaling_mode_name(sel.mode);
    j["variance_threshold"] = sel.variance_threshold_value;
    j["vif_threshold"] = sel.vif_threshold_value;
    j["input_columns"] = sel.input_columns;
    j["input_variances"] = sel.input_variances;
    j["stage1_survivors"] = sel.stage1_survivors;
    nlohmann::json iters = nlohmann::json::array();
    for (const vif_iteration& it : sel.vif_iterations) {
        nlohmann::json vifs = nlohmann::json::array();
        for (double v : it.vif) vifs.push_back(vif_json(v));
        iters.push_back({{"columns", it.columns}, {"vif", vifs}});
    }
    j["vif_iterations"] = iters;
    nlohmann::json dropped = nlohmann::json::array();
    for (const drop_record& d : sel.dropped)
        dropped.push_back(
            {{"column", d.column}, {"vif", vif_json(d.vif)}, {"reason", d.reason}});
    j["dropped"] = dropped;
    j["final_columns"] = sel.final_columns;
    nlohmann::json final_vif = nlohmann::json::array();
    for (double v : sel.final_vif) final_vif.push_back(vif_json(v));
    j["final_vif"] = final_vif;
    j["notes"] = sel.notes;
    return j;
}

inline nlohmann::json mean_std_json(const mean_std& ms) {
    return {{"mean", ms.mean}, {"std", ms.std_dev}};
}

} // namespace detail

inline nlohmann::json selection_report_to_json(const selection_report& sel) {
    return detail::selection_to_json(sel);
}

// canonical report: key order is sorted, numbers round-trip, wall-clock
// timings never enter this form so identical configs serialize identically
inline nlohmann::json report_to_json(const eval_report& report) {
    nlohmann::json j;
    const experiment_config& cfg = report.config;
    j["config"] = {
        {"dataset_path", cfg.dataset_path},
        {"label_column", cfg.label_column},
        {"positive_class", class_label_name(cfg.positive_class)},
        {"feature_mode", feature_mode_name(cfg.features)},
        {"explicit_features", cfg.explicit_features},
        {"variance_scaling", scaling_mode_name(cfg.variance_scaling)},
        {"variance_cutoff", cfg.variance_cutoff},
        {"vif_cutoff", cfg.vif_cutoff},
        {"k", cfg.k},
        {"seed", cfg.seed},
        {"global_selection", cfg.global_selection},
        {"beta", cfg.beta},
    };
    j["dataset"] = {{"fingerprint", report.dataset_fingerprint_hex},
                    {"samples", report.n_samples},
                    {"positive", report.n_positive},
                    {"negative", report.n_negative}};
    j["features_used"] = report.features_used;
    j["per_fold_selection"] = report.per_fold_selection;
    nlohmann::json sels = nlohmann::json::array();
    for (const selection_report& sel : report.selections)
        sels.push_back(detail::selection_to_json(sel));
    j["selection_reports"] = sels;

    nlohmann::json classifiers = nlohmann::json::array();
    for (const classifier_result& cr : report.classifiers) {
        nlohmann::json jc;
        jc["kind"] = classifier_kind_name(cr.kind);
        nlohmann::json folds = nlohmann::json::array();
        for (const fold_result& fr : cr.folds) {
            folds.push_back({{"fold", fr.fold},
                             {"tp", fr.counts.tp},
                             {"fp", fr.counts.fp},
                             {"tn", fr.counts.tn},
                             {"fn", fr.counts.fn},
                             {"accuracy", fr.accuracy},
                             {"precision", fr.precision},
                             {"precision_degenerate", fr.precision_degenerate},
                             {"recall", fr.recall},
                             {"recall_degenerate", fr.recall_degenerate},
                             {"f1", fr.f1},
                             {"f_beta", fr.fbeta},
                             {"auc", fr.auc}});
        }
        jc["folds"] = folds;
        jc["aggregates"] = {{"accuracy", detail::mean_std_json(cr.accuracy)},
                            {"precision", detail::mean_std_json(cr.precision)},
                            {"recall", detail::mean_std_json(cr.recall)},
                            {"f1", detail::mean_std_json(cr.f1)},
                            {"f_beta", detail::mean_std_json(cr.fbeta)},
                            {"auc", detail::mean_std_json(cr.auc)}};
        nlohmann::json points = nlohmann::json::array();
        for (const roc_point& p : cr.mean_curve.points)
            points.push_back({p.fpr, p.tpr});
        jc["mean_roc"] = {{"auc", cr.mean_curve.auc}, {"points", points}};
        classifiers.push_back(jc);
    }
    j["classifiers"] = classifiers;
    return j;
}

inline std::string report_to_json_text(const eval_report& report) {
    return report_to_json(report).dump(2) + "\n";
}

namespace detail {

inline std::string format_cell(const mean_std& ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f±%.2f", ms.mean, ms.std_dev);
    return buf;
}

} // namespace detail

// aligned text table; per-classifier timing totals go here, not in the json
inline std::string report_to_table(const eval_report& report) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %11s %11s %11s %11s %11s %11s %9s\n",
                  "classifier", "accuracy", "f_beta", "recall", "precision", "f1",
                  "auc", "seconds");
    out += line;
    for (const classifier_result& cr : report.classifiers) {
        double total_seconds = 0.0;
        for (const fold_result& fr : cr.folds) total_seconds += fr.seconds;
        std::snprintf(line, sizeof(line), "%-20s %11s %11s %11s %11s %11s %11s %9.2f\n",
                      classifier_kind_name(cr.kind),
                      detail::format_cell(cr.accuracy).c_str(),
                      detail::format_cell(cr.fbeta).c_str(),
                      detail::format_cell(cr.recall).c_str(),
                      detail::format_cell(cr.precision).c_str(),
                      detail::format_cell(cr.f1).c_str(),
                      detail::format_cell(cr.auc).c_str(), total_seconds);
        out += line;
    }
    return out;
}

inline void write_roc_csv(const std::string& path, const roc_curve_result& curve) {
    std::string out = "fpr,tpr,threshold\n";
    for (const roc_point& p : curve.points) {
        out += format_double(p.fpr);
        out += ',';
        out += format_double(p.tpr);
        out += ',';
        out += format_double(p.threshold);
        out += '\n';
    }
    write_text_file(path, out);
}

// auc is recomputed from the stored points by the trapezoid rule
inline roc_curve_result read_roc_csv(const std::string& path) {
    csv_document doc = read_csv(path);
    if (doc.header != std::vector<std::string>{"fpr", "tpr", "threshold"})
        throw data_error("not a roc csv (expected header fpr,tpr,threshold): " + path);
    roc_curve_result out;
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        if (doc.rows[r].size() != 3)
            throw data_error("roc csv row " + std::to_string(r + 2) +
                             " has wrong field count: " + path);
        auto fpr = parse_double(doc.rows[r][0]);
        auto tpr = parse_double(doc.rows[r][1]);
        auto thr = parse_double(doc.rows[r][2]);
        if (!fpr || !tpr || !thr)
            throw data_error("roc csv row " + std::to_string(r + 2) +
                             " is not numeric: " + path);
        out.points.push_back({*fpr, *tpr, *thr});
    }
    if (out.points.size() < 2) throw data_error("roc csv has fewer than 2 points: " + path);
    double auc = 0.0;
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        const roc_point& a = out.points[i - 1];
        const roc_point& b = out.points[i];
        if (b.fpr < a.fpr) throw data_error("roc csv fpr not non-decreasing: " + path);
        auc += (b.fpr - a.fpr) * (b.tpr + a.tpr) * 0.5;
    }
    out.auc = auc;
    return out;
}

struct comparison_cell {
    std::string classifier;
    std::string metric;
    double reported = 0.0;
    double reference = 0.0;
    bool pass = false;
};

struct comparison_result {
    std::vector<comparison_cell> cells;
    bool all_pass = true;
};

// reference file format: {"metrics": {"<kind>": {"<metric>": value, ...}}}
inline comparison_result compare_to_reference(const eval_report& report,
                                              const nlohmann::json& reference,
                                              double tolerance) {
    if (!reference.contains("metrics"))
        throw data_error("reference file: missing 'metrics' object");
    comparison_result out;
    for (const auto& [kind_name, metrics] : reference.at("metrics").items()) {
        const classifier_result* found = nullptr;
        for (const classifier_result& cr : report.classifiers)
            if (classifier_kind_name(cr.kind) == kind_name) found = &cr;
        if (found == nullptr)
            throw data_error("reference classifier missing from report: " + kind_name);
        for (const auto& [metric, value] : metrics.items()) {
            double reported;
            if (metric == "accuracy") reported = found->accuracy.mean;
            else if (metric == "precision") reported = found->precision.mean;
            else if (metric == "recall") reported = found->recall.mean;
            else if (metric == "f1") reported = found->f1.mean;
            else if (metric == "f_beta") reported = found->fbeta.mean;
            else if (metric == "auc") reported = found->auc.mean;
            else throw data_error("reference metric not recognized: " + metric);
            comparison_cell cell;
            cell.classifier = kind_name;
            cell.metric = metric;
            cell.reported = reported;
            cell.reference = value.get<double>();
            cell.pass = std::fabs(reported - cell.reference) <= tolerance;
            if (!cell.pass) out.all_pass = false;
            out.cells.push_back(cell);
        }
    }
    return out;
}

inline const classifier_result* find_classifier(const eval_report& report,
                                                classifier_kind kind) {
    for (const classifier_result& cr : report.classifiers)
        if (cr.kind == kind) return &cr;
    return nullptr;
}

} // namespace ransomguard
