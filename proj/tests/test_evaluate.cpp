#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "ransomguard/classifier.hpp"
#include "ransomguard/error.hpp"
#include "ransomguard/evaluate.hpp"
#include "ransomguard/model_io.hpp"
#include "ransomguard/svg.hpp"
#include "ransomguard/synth.hpp"

using namespace ransomguard;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("rgeval_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string temp_path(const std::string& name) {
    return (temp_dir() / name).string();
}

const feature_table& small_table() {
    static feature_table table = [] {
        synth_params params;
        params.samples = 600;
        params.ransomware_fraction = 0.70;
        params.seed = 42;
        return synthetic_feature_table(params, class_label::ransomware);
    }();
    return table;
}

experiment_config small_config() {
    experiment_config cfg;
    cfg.k = 5;
    cfg.seed = 42;
    classifier_spec dt;
    dt.kind = classifier_kind::decision_tree;
    classifier_spec nb;
    nb.kind = classifier_kind::naive_bayes;
    classifier_spec lr;
    lr.kind = classifier_kind::logistic_regression;
    cfg.classifiers = {dt, nb, lr};
    return cfg;
}

const eval_report& small_report() {
    static eval_report report = run_experiment(small_table(), small_config());
    return report;
}

matrix blob_data(std::size_t n, std::size_t d, std::uint64_t seed,
                 std::vector<int>& y_out) {
    random_source rng(seed);
    matrix x(n, d);
    y_out.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int label = i % 2;
        y_out[i] = label;
        for (std::size_t j = 0; j < d; ++j)
            x.at(i, j) = (label == 0 ? -2.0 : 2.0) + rng.normal();
    }
    return x;
}

} // namespace

TEST_CASE("feature mode strings parse and round-trip") {
    std::vector<std::string> names;
    REQUIRE(parse_feature_mode("auto", names) == feature_mode::automatic);
    REQUIRE(parse_feature_mode("paper13", names) == feature_mode::paper13);
    REQUIRE(parse_feature_mode("paper12", names) == feature_mode::paper12);

    REQUIRE(parse_feature_mode("list:a,b,c", names) == feature_mode::explicit_list);
    REQUIRE(names == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(parse_feature_mode("list:a,,b", names) == feature_mode::explicit_list);
    REQUIRE(names == std::vector<std::string>{"a", "b"});

    REQUIRE_THROWS_AS(parse_feature_mode("list:", names), error);
    REQUIRE_THROWS_AS(parse_feature_mode("nonsense", names), error);
    try {
        parse_feature_mode("nonsense", names);
        FAIL("expected a usage error");
    } catch (const error& e) {
        REQUIRE(e.code() == errc::usage);
    }

    REQUIRE(feature_mode_name(feature_mode::automatic) == "auto");
    REQUIRE(feature_mode_name(feature_mode::paper13) == "paper13");
    REQUIRE(feature_mode_name(feature_mode::paper12) == "paper12");
    REQUIRE(feature_mode_name(feature_mode::explicit_list) == "list");
}

TEST_CASE("default classifier specs cover the five families in order") {
    std::vector<classifier_spec> specs = default_classifier_specs();
    REQUIRE(specs.size() == 5);
    REQUIRE(specs[0].kind == classifier_kind::decision_tree);
    REQUIRE(specs[1].kind == classifier_kind::random_forest);
    REQUIRE(specs[2].kind == classifier_kind::naive_bayes);
    REQUIRE(specs[3].kind == classifier_kind::logistic_regression);
    REQUIRE(specs[4].kind == classifier_kind::neural_network);
}

TEST_CASE("synthetic dataset honors its parameters and is seed-stable") {
    synth_params params;
    params.samples = 500;
    params.ransomware_fraction = 0.70;
    params.seed = 42;
    synth_dataset ds = synthesize_dataset(params);

    REQUIRE(ds.values.rows() == 500);
    REQUIRE(ds.columns == public_numeric_columns());
    REQUIRE(ds.values.cols() == ds.columns.size());
    REQUIRE(ds.names.size() == 500);
    REQUIRE(ds.md5s.size() == 500);
    REQUIRE(ds.md5s[0].size() == 32);
    REQUIRE(ds.names[0] != ds.names[1]);

    std::size_t legit = 0;
    for (int v : ds.legitimate) {
        REQUIRE((v == 0 || v == 1));
        legit += static_cast<std::size_t>(v);
    }
    REQUIRE(legit == 150);

    synth_dataset again = synthesize_dataset(params);
    REQUIRE(again.values.data() == ds.values.data());
    REQUIRE(again.names == ds.names);

    params.seed = 43;
    synth_dataset other = synthesize_dataset(params);
    REQUIRE(other.values.data() != ds.values.data());

    params.samples = 50;
    REQUIRE_THROWS_AS(synthesize_dataset(params), data_error);
    params.samples = 500;
    params.ransomware_fraction = 1.0;
    REQUIRE_THROWS_AS(synthesize_dataset(params), data_error);
}

TEST_CASE("synthetic csv writes and loads back consistently") {
    synth_params params;
    params.samples = 200;
    params.seed = 7;
    synth_dataset ds = synthesize_dataset(params);
    std::string path = temp_path("synth_roundtrip.csv");
    write_synthetic_csv(path, ds);

    feature_table loaded = load_csv(path, "legitimate", class_label::ransomware);
    REQUIRE(loaded.values.rows() == 200);
    // Name and md5 columns are non-numeric and drop out during loading
    REQUIRE(loaded.columns == ds.columns);
    for (std::size_t i = 0; i < loaded.values.rows(); ++i) {
        REQUIRE(loaded.labels[i] == 1 - ds.legitimate[i]);
        for (std::size_t j = 0; j < loaded.values.cols(); ++j)
            REQUIRE(loaded.values.at(i, j) == ds.values.at(i, j));
    }

    feature_table direct = synthetic_feature_table(params, class_label::ransomware);
    REQUIRE(direct.columns == loaded.columns);
    REQUIRE(direct.labels == loaded.labels);
    REQUIRE(direct.values.data() == loaded.values.data());
}

TEST_CASE("experiment report has the expected shape") {
    const eval_report& report = small_report();

    REQUIRE(report.n_samples == 600);
    REQUIRE(report.n_positive == 420);
    REQUIRE(report.n_negative == 180);
    REQUIRE(report.dataset_fingerprint_hex.size() == 16);
    REQUIRE(report.features_used == preset_features_13());
    REQUIRE_FALSE(report.per_fold_selection);
    REQUIRE(report.selections.empty());

    REQUIRE(report.classifiers.size() == 3);
    for (const classifier_result& cr : report.classifiers) {
        REQUIRE(cr.folds.size() == 5);
        for (const fold_result& fr : cr.folds) {
            std::size_t total = fr.counts.tp + fr.counts.fp + fr.counts.tn + fr.counts.fn;
            REQUIRE(total == 120);
            REQUIRE(fr.accuracy >= 0.0);
            REQUIRE(fr.accuracy <= 1.0);
            REQUIRE(fr.auc >= 0.0);
            REQUIRE(fr.auc <= 1.0);
            REQUIRE(fr.roc.points.size() >= 2);
        }
        REQUIRE(cr.mean_curve.points.size() == 101);
        REQUIRE(cr.accuracy.mean >= 0.0);
        REQUIRE(cr.accuracy.mean <= 1.0);
    }
    REQUIRE(find_classifier(report, classifier_kind::decision_tree) != nullptr);
    REQUIRE(find_classifier(report, classifier_kind::neural_network) == nullptr);
}

TEST_CASE("identical configurations serialize to identical reports") {
    eval_report again = run_experiment(small_table(), small_config());
    REQUIRE(report_to_json_text(again) == report_to_json_text(small_report()));
}

TEST_CASE("global auto selection records a single selection report") {
    experiment_config cfg;
    cfg.k = 3;
    cfg.features = feature_mode::automatic;
    cfg.global_selection = true;
    classifier_spec dt;
    cfg.classifiers = {dt};

    eval_report report = run_experiment(small_table(), cfg);
    REQUIRE_FALSE(report.per_fold_selection);
    REQUIRE(report.selections.size() == 1);
    REQUIRE(report.features_used == report.selections[0].final_columns);
    REQUIRE_FALSE(report.features_used.empty());
}

TEST_CASE("per-fold auto selection records one report per fold") {
    experiment_config cfg;
    cfg.k = 3;
    cfg.features = feature_mode::automatic;
    classifier_spec dt;
    cfg.classifiers = {dt};

    eval_report report = run_experiment(small_table(), cfg);
    REQUIRE(report.per_fold_selection);
    REQUIRE(report.selections.size() == 3);
    REQUIRE(report.features_used.empty());
}

TEST_CASE("experiment configuration errors are rejected") {
    experiment_config cfg = small_config();
    cfg.k = 1;
    REQUIRE_THROWS_AS(run_experiment(small_table(), cfg), data_error);

    cfg = small_config();
    cfg.classifiers.clear();
    REQUIRE_THROWS_AS(run_experiment(small_table(), cfg), data_error);

    cfg = small_config();
    cfg.features = feature_mode::explicit_list;
    cfg.explicit_features = {"NoSuchColumn"};
    REQUIRE_THROWS_AS(run_experiment(small_table(), cfg), data_error);
}

TEST_CASE("saved models score identically after reloading") {
    std::vector<int> y;
    matrix x = blob_data(80, 5, 71, y);

    model_metadata meta;
    meta.seed = 123;
    meta.dataset_fingerprint = dataset_fingerprint(x, y);
    meta.created_at = "2024-01-01T00:00:00Z";
    meta.positive_class = class_label::ransomware;

    for (classifier_kind kind : all_classifier_kinds()) {
        classifier_spec spec;
        spec.kind = kind;
        spec.forest.n_trees = 10;
        spec.nn.hidden1 = 6;
        spec.nn.hidden2 = 4;
        spec.nn.batch_size = 16;
        spec.nn.max_epochs = 5;

        trained_model model = train_classifier(spec, x, y, 123);
        model.features = {"f0", "f1", "f2", "f3", "f4"};

        std::string path =
            temp_path(std::string("model_") + classifier_kind_name(kind) + ".json");
        save_model(path, model, meta);

        model_metadata loaded_meta;
        trained_model loaded = load_model(path, &loaded_meta);

        REQUIRE(loaded.kind == kind);
        REQUIRE(loaded.features == model.features);
        REQUIRE(loaded.score(x) == model.score(x));
        REQUIRE(loaded_meta.seed == 123);
        REQUIRE(loaded_meta.dataset_fingerprint == meta.dataset_fingerprint);
        REQUIRE(loaded_meta.created_at == "2024-01-01T00:00:00Z");
        REQUIRE(loaded_meta.positive_class == class_label::ransomware);
    }
}

TEST_CASE("model files with the wrong version or shape are rejected") {
    std::vector<int> y;
    matrix x = blob_data(30, 2, 73, y);
    classifier_spec spec;
    trained_model model = train_classifier(spec, x, y, 1);
    model.features = {"a", "b"};
    model_metadata meta;

    nlohmann::json j = model_to_json(model, meta);
    j["format_version"] = 2;
    REQUIRE_THROWS_AS(model_from_json(j), data_error);

    std::string truncated = temp_path("model_truncated.json");
    write_text_file(truncated, "{\"format_version\": 1}\n");
    REQUIRE_THROWS_AS(load_model(truncated), data_error);

    std::string garbage = temp_path("model_garbage.json");
    write_text_file(garbage, "this is not json\n");
    REQUIRE_THROWS_AS(load_model(garbage), data_error);

    REQUIRE_THROWS_AS(load_model(temp_path("does_not_exist.json")), data_error);
}

TEST_CASE("timestamps honor SOURCE_DATE_EPOCH") {
    setenv("SOURCE_DATE_EPOCH", "0", 1);
    REQUIRE(current_timestamp_utc() == "1970-01-01T00:00:00Z");
    setenv("SOURCE_DATE_EPOCH", "1600000000", 1);
    REQUIRE(current_timestamp_utc() == "2020-09-13T12:26:40Z");
    unsetenv("SOURCE_DATE_EPOCH");
    REQUIRE(current_timestamp_utc().size() == 20);
    REQUIRE(current_timestamp_utc().back() == 'Z');
}

TEST_CASE("dataset fingerprints react to any value or label change") {
    std::vector<int> y;
    matrix x = blob_data(40, 3, 79, y);
    std::string base = dataset_fingerprint(x, y);
    REQUIRE(base.size() == 16);
    REQUIRE(dataset_fingerprint(x, y) == base);

    matrix x2 = x;
    x2.at(17, 1) += 1e-9;
    REQUIRE(dataset_fingerprint(x2, y) != base);

    std::vector<int> y2 = y;
    y2[5] = 1 - y2[5];
    REQUIRE(dataset_fingerprint(x, y2) != base);
}

TEST_CASE("roc csv files round-trip through write and read") {
    const eval_report& report = small_report();
    const roc_curve_result& curve = report.classifiers[0].folds[0].roc;

    std::string path = temp_path("roc_roundtrip.csv");
    write_roc_csv(path, curve);
    roc_curve_result loaded = read_roc_csv(path);

    REQUIRE(loaded.points.size() == curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        REQUIRE(loaded.points[i].fpr == curve.points[i].fpr);
        REQUIRE(loaded.points[i].tpr == curve.points[i].tpr);
    }
    REQUIRE(loaded.auc == Catch::Approx(curve.auc).margin(1e-12));
}

TEST_CASE("malformed roc csv files are rejected") {
    std::string bad_header = temp_path("roc_bad_header.csv");
    write_text_file(bad_header, "x,y,z\n0,0,1\n1,1,0\n");
    REQUIRE_THROWS_AS(read_roc_csv(bad_header), data_error);

    std::string one_point = temp_path("roc_one_point.csv");
    write_text_file(one_point, "fpr,tpr,threshold\n0,0,inf\n");
    REQUIRE_THROWS_AS(read_roc_csv(one_point), data_error);

    std::string decreasing = temp_path("roc_decreasing.csv");
    write_text_file(decreasing, "fpr,tpr,threshold\n0.5,0.5,1\n0.2,0.8,0.5\n");
    REQUIRE_THROWS_AS(read_roc_csv(decreasing), data_error);

    std::string non_numeric = temp_path("roc_non_numeric.csv");
    write_text_file(non_numeric, "fpr,tpr,threshold\n0,zero,inf\n1,1,0\n");
    REQUIRE_THROWS_AS(read_roc_csv(non_numeric), data_error);

    std::string short_row = temp_path("roc_short_row.csv");
    write_text_file(short_row, "fpr,tpr,threshold\n0,0\n1,1,0\n");
    REQUIRE_THROWS_AS(read_roc_csv(short_row), data_error);
}

TEST_CASE("reference comparison marks cells within tolerance") {
    const eval_report& report = small_report();
    double dt_acc = report.classifiers[0].accuracy.mean;

    nlohmann::json reference = {
        {"metrics",
         {{"decision_tree", {{"accuracy", dt_acc}, {"auc", 0.0}}},
          {"naive_bayes", {{"recall", report.classifiers[1].recall.mean}}}}}};

    comparison_result res = compare_to_reference(report, reference, 0.02);
    REQUIRE(res.cells.size() == 3);
    REQUIRE_FALSE(res.all_pass);
    std::size_t passes = 0;
    for (const comparison_cell& c : res.cells) {
        if (c.pass) ++passes;
        if (c.metric == "auc") REQUIRE_FALSE(c.pass);
    }
    REQUIRE(passes == 2);

    nlohmann::json missing_kind = {{"metrics", {{"neural_network", {{"auc", 0.9}}}}}};
    REQUIRE_THROWS_AS(compare_to_reference(report, missing_kind, 0.02), data_error);

    nlohmann::json bad_metric = {
        {"metrics", {{"decision_tree", {{"specificity", 0.9}}}}}};
    REQUIRE_THROWS_AS(compare_to_reference(report, bad_metric, 0.02), data_error);

    nlohmann::json no_metrics = {{"results", 1}};
    REQUIRE_THROWS_AS(compare_to_reference(report, no_metrics, 0.02), data_error);
}

TEST_CASE("text table lists every classifier with spread columns") {
    std::string table = report_to_table(small_report());
    REQUIRE(table.find("classifier") != std::string::npos);
    REQUIRE(table.find("decision_tree") != std::string::npos);
    REQUIRE(table.find("naive_bayes") != std::string::npos);
    REQUIRE(table.find("logistic_regression") != std::string::npos);
    REQUIRE(table.find("±") != std::string::npos);
    REQUIRE(table.find("auc") != std::string::npos);
}

TEST_CASE("selection report serializes infinite vif values as strings") {
    matrix m(8, 3);
    random_source rng(83);
    for (std::size_t i = 0; i < 8; ++i) {
        m.at(i, 0) = rng.uniform(0.0, 10.0);
        m.at(i, 1) = m.at(i, 0); // exact duplicate forces an infinite vif
        m.at(i, 2) = rng.uniform(0.0, 10.0);
    }
    selection_report sel = select_features(m, {"a", "b", "c"}, scaling_mode::raw,
                                           0.0, 10.0);
    nlohmann::json j = selection_report_to_json(sel);
    REQUIRE(j.contains("stage1_survivors"));
    REQUIRE(j.contains("final_columns"));
    REQUIRE(j["dropped"].size() >= 1);
    REQUIRE(j["dropped"][0]["vif"] == "inf");
}

TEST_CASE("roc svg rendering includes every curve and the legend") {
    roc_curve_result fold_a;
    fold_a.points = {{0.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {1.0, 1.0, 0.0}};
    fold_a.auc = 1.0;
    roc_curve_result fold_b;
    fold_b.points = {{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}};
    fold_b.auc = 0.5;
    roc_curve_result mean = mean_roc({fold_a, fold_b});

    std::string svg = render_roc_svg({fold_a, fold_b}, mean, "roc for dt");
    REQUIRE(svg.find("<svg") == 0);
    REQUIRE(svg.rfind("</svg>") != std::string::npos);
    REQUIRE(svg.find("roc for dt") != std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1))
        ++polylines;
    REQUIRE(polylines >= 3);
    REQUIRE(svg.find("AUC") != std::string::npos);
    REQUIRE(svg.find("mean") != std::string::npos);
}
