#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ransomguard/classifier.hpp"
#include "ransomguard/csv.hpp"
#include "ransomguard/dataset.hpp"
#include "ransomguard/error.hpp"
#include "ransomguard/evaluate.hpp"
#include "ransomguard/model_io.hpp"
#include "ransomguard/pe.hpp"
#include "ransomguard/select.hpp"
#include "ransomguard/svg.hpp"

namespace rg = ransomguard;
namespace fs = std::filesystem;

namespace {

// bad values arriving via command-line flags are usage errors regardless of
// what the underlying parser throws
template <typename Fn>
auto parse_flag(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const rg::error& e) {
        throw rg::error(rg::errc::usage, e.what());
    }
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rg::data_error("cannot open file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

struct shared_options {
    std::string data;
    std::string label_column = "legitimate";
    std::string positive_class = "ransomware";
    std::string features = "paper13";
    std::uint64_t seed = 42;
};

void add_dataset_options(CLI::App* cmd, shared_options& opts, bool need_data = true) {
    auto* data = cmd->add_option("--data", opts.data, "dataset csv path")
                     ->envname("RANSOMGUARD_DATA");
    if (need_data) data->required();
    cmd->add_option("--label-column", opts.label_column, "label column name")
        ->envname("RANSOMGUARD_LABEL_COLUMN")
        ->capture_default_str();
    cmd->add_option("--positive-class", opts.positive_class,
                    "class scored as positive (ransomware|legitimate)")
        ->envname("RANSOMGUARD_POSITIVE_CLASS")
        ->capture_default_str();
    cmd->add_option("--seed", opts.seed, "random seed")
        ->envname("RANSOMGUARD_SEED")
        ->capture_default_str();
}

void add_features_option(CLI::App* cmd, shared_options& opts) {
    cmd->add_option("--features", opts.features,
                    "feature set: auto|paper13|paper12|list:a,b,c")
        ->envname("RANSOMGUARD_FEATURES")
        ->capture_default_str();
}

// resolve a feature list against a loaded table, running two-stage selection
// in auto mode
std::vector<std::string> resolve_feature_names(const rg::feature_table& table,
                                               const std::string& features,
                                               rg::scaling_mode scaling,
                                               double variance_cutoff,
                                               double vif_cutoff) {
    std::vector<std::string> explicit_list;
    rg::feature_mode mode =
        parse_flag([&] { return rg::parse_feature_mode(features, explicit_list); });
    switch (mode) {
        case rg::feature_mode::paper13: return rg::preset_features_13();
        case rg::feature_mode::paper12: return rg::preset_features_12();
        case rg::feature_mode::explicit_list: return explicit_list;
        case rg::feature_mode::automatic: {
            rg::selection_report sel = rg::select_features(
                table.values, table.columns, scaling, variance_cutoff, vif_cutoff);
            return sel.final_columns;
        }
    }
    throw rg::error(rg::errc::usage, "unreachable feature mode");
}

rg::matrix select_named_columns(const rg::feature_table& table,
                                const std::vector<std::string>& names) {
    std::vector<std::size_t> idx;
    for (const std::string& name : names) {
        auto it = std::find(table.columns.begin(), table.columns.end(), name);
        if (it == table.columns.end())
            throw rg::data_error("feature not present in dataset: " + name);
        idx.push_back(static_cast<std::size_t>(it - table.columns.begin()));
    }
    return table.values.select_columns(idx);
}

// ---------------------------------------------------------------- extract

struct extract_options {
    std::vector<std::string> inputs;
    std::string output;
};

int run_extract(const extract_options& opts) {
    std::vector<std::string> files;
    for (const std::string& input : opts.inputs) {
        fs::path p(input);
        std::error_code ec;
        if (fs::is_directory(p, ec)) {
            std::vector<std::string> inside;
            for (const auto& entry : fs::directory_iterator(p, ec)) {
                if (entry.is_regular_file()) inside.push_back(entry.path().string());
            }
            std::sort(inside.begin(), inside.end());
            files.insert(files.end(), inside.begin(), inside.end());
        } else if (fs::is_regular_file(p, ec)) {
            files.push_back(input);
        } else {
            throw rg::data_error("input not found: " + input);
        }
    }

    std::vector<std::string> schema = rg::extractor_schema();
    std::string csv = "Name";
    for (const std::string& name : schema) csv += ',' + name;
    csv += '\n';

    std::size_t ok = 0;
    for (const std::string& file : files) {
        std::vector<std::uint8_t> bytes;
        try {
            bytes = read_file_bytes(file);
        } catch (const rg::error& e) {
            std::cerr << "extract: " << e.what() << "\n";
            continue;
        }
        try {
            rg::pe_metadata meta = rg::parse_pe(std::move(bytes));
            rg::feature_vector fv = rg::extract_features(meta);
            csv += rg::csv_escape(fs::path(file).filename().string());
            for (double v : fv.values) csv += ',' + rg::format_double(v);
            csv += '\n';
            ++ok;
        } catch (const rg::parse_error& e) {
            std::cerr << "extract: " << file << ": " << e.what() << "\n";
        }
    }

    if (ok == 0)
        throw rg::error(rg::errc::parse,
                        "no input parsed as a portable executable (" +
                            std::to_string(files.size()) + " candidates)");
    rg::write_text_file(opts.output, csv);
    std::cerr << "extract: wrote " << ok << " of " << files.size() << " inputs to "
              << opts.output << "\n";
    return 0;
}

// ----------------------------------------------------------------- select

struct select_options {
    shared_options shared;
    std::string scaling = "raw";
    double variance_threshold = 1.0;
    double vif_threshold = 10.0;
    std::string output;
    std::string sweep_csv;
    double sweep_max = 10.0;
    std::size_t sweep_steps = 41;
    bool json = false;
};

int run_select(const select_options& opts) {
    rg::class_label positive =
        parse_flag([&] { return rg::parse_class_label(opts.shared.positive_class); });
    rg::scaling_mode mode =
        parse_flag([&] { return rg::parse_scaling_mode(opts.scaling); });
    rg::feature_table table =
        rg::load_csv(opts.shared.data, opts.shared.label_column, positive);
    std::cerr << "select: data=" << opts.shared.data << " scaling=" << opts.scaling
              << " variance_threshold=" << rg::format_double(opts.variance_threshold)
              << " vif_threshold=" << rg::format_double(opts.vif_threshold) << "\n";

    rg::selection_report sel =
        rg::select_features(table.values, table.columns, mode, opts.variance_threshold,
                            opts.vif_threshold);
    std::vector<rg::calibration_result> cal = rg::calibrate_scaling_mode(
        table.values, table.columns, opts.variance_threshold, opts.vif_threshold);

    nlohmann::json j;
    j["selection"] = rg::selection_report_to_json(sel);
    nlohmann::json jcal = nlohmann::json::array();
    for (const rg::calibration_result& c : cal)
        jcal.push_back({{"scaling_mode", rg::scaling_mode_name(c.mode)},
                        {"threshold", c.threshold},
                        {"stage1_count", c.stage1_count},
                        {"final_count", c.final_count},
                        {"reproduces_target", c.reproduces_target}});
    j["calibration"] = jcal;
    std::string json_text = j.dump(2) + "\n";

    if (!opts.output.empty()) rg::write_text_file(opts.output, json_text);
    if (!opts.sweep_csv.empty()) {
        if (opts.sweep_steps < 2)
            throw rg::error(rg::errc::usage, "--sweep-steps must be at least 2");
        std::vector<double> thresholds;
        for (std::size_t i = 0; i < opts.sweep_steps; ++i)
            thresholds.push_back(opts.sweep_max * static_cast<double>(i) /
                                 static_cast<double>(opts.sweep_steps - 1));
        auto sweep = rg::variance_sweep(table.values, thresholds, mode);
        std::string csv = "threshold,survivors\n";
        for (const auto& [t, count] : sweep)
            csv += rg::format_double(t) + ',' + std::to_string(count) + '\n';
        rg::write_text_file(opts.sweep_csv, csv);
    }

    if (opts.json) {
        std::cout << json_text;
    } else {
        std::cout << "input columns: " << sel.input_columns.size() << "\n";
        std::cout << "variance survivors (" << rg::scaling_mode_name(sel.mode) << " > "
                  << rg::format_double(sel.variance_threshold_value)
                  << "): " << sel.stage1_survivors.size() << "\n";
        for (const rg::drop_record& d : sel.dropped)
            std::cout << "dropped " << d.column << ": " << d.reason << "\n";
        std::cout << "final columns (" << sel.final_columns.size() << "):\n";
        for (std::size_t i = 0; i < sel.final_columns.size(); ++i) {
            double vif = i < sel.final_vif.size() ? sel.final_vif[i] : 0.0;
            std::cout << "  " << sel.final_columns[i] << " vif="
                      << rg::format_double(vif) << "\n";
        }
        for (const rg::calibration_result& c : cal)
            std::cout << "calibration " << rg::scaling_mode_name(c.mode)
                      << "@" << rg::format_double(c.threshold) << ": final "
                      << c.final_count
                      << (c.reproduces_target ? " (reproduces target)" : "") << "\n";
        for (const std::string& note : sel.notes) std::cout << "note: " << note << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ train

struct train_options {
    shared_options shared;
    std::string model = "dt";
    std::string output;
    std::string scaling = "raw";
    double variance_threshold = 1.0;
    double vif_threshold = 10.0;
};

int run_train(const train_options& opts) {
    rg::class_label positive =
        parse_flag([&] { return rg::parse_class_label(opts.shared.positive_class); });
    rg::feature_table table =
        rg::load_csv(opts.shared.data, opts.shared.label_column, positive);
    std::vector<std::string> names = resolve_feature_names(
        table, opts.shared.features,
        parse_flag([&] { return rg::parse_scaling_mode(opts.scaling); }),
        opts.variance_threshold, opts.vif_threshold);
    rg::matrix x = select_named_columns(table, names);

    rg::classifier_spec spec;
    spec.kind = parse_flag([&] { return rg::parse_classifier_kind(opts.model); });
    std::cerr << "train: data=" << opts.shared.data << " model="
              << rg::classifier_kind_name(spec.kind) << " features=" << names.size()
              << " seed=" << opts.shared.seed << " positive_class="
              << rg::class_label_name(positive) << "\n";

    rg::trained_model model =
        rg::train_classifier(spec, x, table.labels, opts.shared.seed);
    model.features = names;

    rg::model_metadata meta;
    meta.seed = opts.shared.seed;
    meta.dataset_fingerprint = rg::dataset_fingerprint(table.values, table.labels);
    meta.created_at = rg::current_timestamp_utc();
    meta.positive_class = positive;
    rg::save_model(opts.output, model, meta);
    std::cerr << "train: wrote " << opts.output << "\n";
    return 0;
}

// --------------------------------------------------------------- evaluate

struct evaluate_options {
    shared_options shared;
    std::string models = "dt,rf,nb,lr,nn";
    std::size_t folds = 10;
    std::string scaling = "raw";
    double variance_threshold = 1.0;
    double vif_threshold = 10.0;
    bool global_selection = false;
    double beta = 1.0;
    std::string output;
    std::string roc_dir;
    std::string reference;
    double tolerance = 0.02;
    bool json = false;
};

int run_evaluate(const evaluate_options& opts) {
    rg::experiment_config cfg;
    cfg.dataset_path = opts.shared.data;
    cfg.label_column = opts.shared.label_column;
    cfg.positive_class =
        parse_flag([&] { return rg::parse_class_label(opts.shared.positive_class); });
    cfg.features = parse_flag(
        [&] { return rg::parse_feature_mode(opts.shared.features, cfg.explicit_features); });
    cfg.variance_scaling =
        parse_flag([&] { return rg::parse_scaling_mode(opts.scaling); });
    cfg.variance_cutoff = opts.variance_threshold;
    cfg.vif_cutoff = opts.vif_threshold;
    cfg.k = opts.folds;
    cfg.seed = opts.shared.seed;
    cfg.global_selection = opts.global_selection;
    cfg.beta = opts.beta;

    std::string token;
    std::stringstream ss(opts.models);
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        rg::classifier_spec spec;
        spec.kind = parse_flag([&] { return rg::parse_classifier_kind(token); });
        cfg.classifiers.push_back(spec);
    }
    if (cfg.classifiers.empty())
        throw rg::error(rg::errc::usage, "no classifiers given in --models");

    std::cerr << "evaluate: data=" << cfg.dataset_path << " models=" << opts.models
              << " folds=" << cfg.k << " seed=" << cfg.seed << " features="
              << opts.shared.features << " positive_class="
              << rg::class_label_name(cfg.positive_class) << "\n";

    rg::eval_report report = rg::run_experiment(cfg);
    std::string json_text = rg::report_to_json_text(report);

    if (!opts.output.empty()) rg::write_text_file(opts.output, json_text);
    if (!opts.roc_dir.empty()) {
        fs::create_directories(opts.roc_dir);
        for (const rg::classifier_result& cr : report.classifiers) {
            std::string base =
                (fs::path(opts.roc_dir) / rg::classifier_kind_name(cr.kind)).string();
            for (const rg::fold_result& fr : cr.folds)
                rg::write_roc_csv(base + "_fold" + std::to_string(fr.fold) + ".csv",
                                  fr.roc);
            rg::write_roc_csv(base + "_mean.csv", cr.mean_curve);
        }
    }

    if (opts.json) std::cout << json_text;
    else std::cout << rg::report_to_table(report);

    if (!opts.reference.empty()) {
        nlohmann::json ref;
        try {
            ref = nlohmann::json::parse(rg::read_text_file(opts.reference));
        } catch (const nlohmann::json::exception& e) {
            throw rg::data_error("reference file is not valid json: " + opts.reference +
                                 " (" + e.what() + ")");
        }
        rg::comparison_result cmp =
            rg::compare_to_reference(report, ref, opts.tolerance);
        for (const rg::comparison_cell& cell : cmp.cells) {
            char line[160];
            std::snprintf(line, sizeof(line), "%-4s %-20s %-10s reported=%.4f reference=%.2f\n",
                          cell.pass ? "ok" : "FAIL", cell.classifier.c_str(),
                          cell.metric.c_str(), cell.reported, cell.reference);
            std::cout << line;
        }
        std::cout << (cmp.all_pass ? "reference comparison: all cells within "
                                   : "reference comparison: FAILURES at tolerance ")
                  << rg::format_double(opts.tolerance) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- predict

struct predict_options {
    std::string model;
    std::vector<std::string> inputs;
    bool json = false;
};

struct prediction {
    std::string input;
    double probability = 0.0;
    std::string label;
};

prediction predict_row(const rg::trained_model& model, const rg::model_metadata& meta,
                       const std::string& id, const double* row) {
    prediction p;
    p.input = id;
    p.probability = model.score_row(row);
    rg::class_label other = meta.positive_class == rg::class_label::ransomware
                                ? rg::class_label::legitimate
                                : rg::class_label::ransomware;
    p.label = rg::class_label_name(p.probability >= 0.5 ? meta.positive_class : other);
    return p;
}

int run_predict(const predict_options& opts) {
    rg::model_metadata meta;
    rg::trained_model model = rg::load_model(opts.model, &meta);
    if (model.features.empty())
        throw rg::data_error("model file lists no features: " + opts.model);

    std::vector<prediction> results;
    for (const std::string& input : opts.inputs) {
        if (fs::path(input).extension() == ".csv") {
            rg::csv_document doc = rg::read_csv(input);
            std::vector<std::size_t> idx;
            for (const std::string& name : model.features) {
                auto it = std::find(doc.header.begin(), doc.header.end(), name);
                if (it == doc.header.end())
                    throw rg::data_error("model feature '" + name +
                                         "' not present in " + input);
                idx.push_back(static_cast<std::size_t>(it - doc.header.begin()));
            }
            for (std::size_t r = 0; r < doc.rows.size(); ++r) {
                if (doc.rows[r].size() != doc.header.size())
                    throw rg::data_error("row " + std::to_string(r + 2) +
                                         " has wrong field count: " + input);
                std::vector<double> row;
                for (std::size_t c : idx) {
                    auto v = rg::parse_double(doc.rows[r][c]);
                    if (!v)
                        throw rg::data_error("unparseable cell at row " +
                                             std::to_string(r + 2) + ", column '" +
                                             doc.header[c] + "' in " + input);
                    row.push_back(*v);
                }
                results.push_back(predict_row(model, meta,
                                              input + ":" + std::to_string(r + 2),
                                              row.data()));
            }
        } else {
            rg::pe_metadata pe = rg::parse_pe(read_file_bytes(input));
            rg::feature_vector fv = rg::extract_features(pe);
            std::vector<double> row;
            for (const std::string& name : model.features) {
                auto it = std::find(fv.names.begin(), fv.names.end(), name);
                if (it == fv.names.end())
                    throw rg::data_error("model feature '" + name +
                                         "' is not an extractable field");
                row.push_back(fv.values[static_cast<std::size_t>(it - fv.names.begin())]);
            }
            results.push_back(predict_row(model, meta, input, row.data()));
        }
    }

    if (opts.json) {
        nlohmann::json j = nlohmann::json::array();
        for (const prediction& p : results)
            j.push_back({{"input", p.input},
                         {"probability", p.probability},
                         {"label", p.label}});
        std::cout << j.dump(2) << "\n";
    } else {
        for (const prediction& p : results)
            std::cout << p.input << ' ' << rg::format_double(p.probability) << ' '
                      << p.label << "\n";
    }
    return 0;
}

// --------------------------------------------------------------- plot-roc

struct plot_options {
    std::vector<std::string> inputs;
    std::string mean;
    std::string output;
    std::string title = "ROC";
};

int run_plot_roc(const plot_options& opts) {
    std::vector<rg::roc_curve_result> folds;
    for (const std::string& input : opts.inputs)
        folds.push_back(rg::read_roc_csv(input));
    rg::roc_curve_result mean_curve;
    if (!opts.mean.empty()) mean_curve = rg::read_roc_csv(opts.mean);
    else mean_curve = rg::mean_roc(folds);
    rg::write_text_file(opts.output, rg::render_roc_svg(folds, mean_curve, opts.title));
    std::cerr << "plot-roc: wrote " << opts.output << " (" << folds.size()
              << " fold curves)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"static ransomware detection toolkit"};
    app.require_subcommand(1);

    extract_options ex;
    auto* cmd_extract = app.add_subcommand("extract", "extract PE header features to csv");
    cmd_extract->add_option("inputs", ex.inputs, "PE files or directories")->required();
    cmd_extract->add_option("--output", ex.output, "output csv path")->required();

    select_options se;
    auto* cmd_select = app.add_subcommand("select", "two-stage feature selection report");
    add_dataset_options(cmd_select, se.shared);
    cmd_select->add_option("--scaling", se.scaling, "variance scaling: raw|zscore|minmax")
        ->capture_default_str();
    cmd_select->add_option("--variance-threshold", se.variance_threshold)
        ->capture_default_str();
    cmd_select->add_option("--vif-threshold", se.vif_threshold)->capture_default_str();
    cmd_select->add_option("--output", se.output, "selection report json path");
    cmd_select->add_option("--sweep-csv", se.sweep_csv, "variance sweep csv path");
    cmd_select->add_option("--sweep-max", se.sweep_max)->capture_default_str();
    cmd_select->add_option("--sweep-steps", se.sweep_steps)->capture_default_str();
    cmd_select->add_flag("--json", se.json, "print the report json to stdout");

    train_options tr;
    auto* cmd_train = app.add_subcommand("train", "train one classifier on a dataset");
    add_dataset_options(cmd_train, tr.shared);
    add_features_option(cmd_train, tr.shared);
    cmd_train->add_option("--model", tr.model, "dt|rf|nb|lr|nn")->capture_default_str();
    cmd_train->add_option("--output", tr.output, "model file path")->required();
    cmd_train->add_option("--scaling", tr.scaling)->capture_default_str();
    cmd_train->add_option("--variance-threshold", tr.variance_threshold)
        ->capture_default_str();
    cmd_train->add_option("--vif-threshold", tr.vif_threshold)->capture_default_str();

    evaluate_options ev;
    auto* cmd_evaluate =
        app.add_subcommand("evaluate", "cross-validated evaluation report");
    add_dataset_options(cmd_evaluate, ev.shared);
    add_features_option(cmd_evaluate, ev.shared);
    cmd_evaluate->add_option("--models", ev.models, "comma list of dt,rf,nb,lr,nn")
        ->capture_default_str();
    cmd_evaluate->add_option("--folds", ev.folds)
        ->envname("RANSOMGUARD_FOLDS")
        ->capture_default_str();
    cmd_evaluate->add_option("--scaling", ev.scaling)->capture_default_str();
    cmd_evaluate->add_option("--variance-threshold", ev.variance_threshold)
        ->capture_default_str();
    cmd_evaluate->add_option("--vif-threshold", ev.vif_threshold)->capture_default_str();
    cmd_evaluate->add_flag("--global-selection", ev.global_selection,
                           "fit auto selection once on the full dataset");
    cmd_evaluate->add_option("--beta", ev.beta, "beta for the f_beta column")
        ->capture_default_str();
    cmd_evaluate->add_option("--output", ev.output, "report json path");
    cmd_evaluate->add_option("--roc-dir", ev.roc_dir, "directory for roc csv export");
    cmd_evaluate->add_option("--reference", ev.reference, "reference metrics json");
    cmd_evaluate->add_option("--tolerance", ev.tolerance)->capture_default_str();
    cmd_evaluate->add_flag("--json", ev.json, "print the report json to stdout");

    predict_options pr;
    auto* cmd_predict = app.add_subcommand("predict", "score PE files or csv rows");
    cmd_predict->add_option("--model", pr.model, "model file path")->required();
    cmd_predict->add_option("--input", pr.inputs, "PE files or csv datasets")
        ->required();
    cmd_predict->add_flag("--json", pr.json, "print predictions as json");

    plot_options pl;
    auto* cmd_plot = app.add_subcommand("plot-roc", "render roc curves to svg");
    cmd_plot->add_option("--input", pl.inputs, "fold roc csv paths")->required();
    cmd_plot->add_option("--mean", pl.mean, "mean roc csv path");
    cmd_plot->add_option("--output", pl.output, "svg output path")->required();
    cmd_plot->add_option("--title", pl.title)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(rg::errc::usage);
    }

    try {
        if (cmd_extract->parsed()) return run_extract(ex);
        if (cmd_select->parsed()) return run_select(se);
        if (cmd_train->parsed()) return run_train(tr);
        if (cmd_evaluate->parsed()) return run_evaluate(ev);
        if (cmd_predict->parsed()) return run_predict(pr);
        if (cmd_plot->parsed()) return run_plot_roc(pl);
    } catch (const rg::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    }
    return 0;
}
