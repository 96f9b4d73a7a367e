#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "pe_fixture.hpp"
#include "ransomguard/csv.hpp"
#include "ransomguard/pe.hpp"
#include "ransomguard/dataset.hpp"
#include "ransomguard/evaluate.hpp"
#include "ransomguard/model_io.hpp"
#include "ransomguard/select.hpp"

using namespace ransomguard;
namespace fs = std::filesystem;

namespace {

struct workspace_guard {
    fs::path dir;
    workspace_guard() {
        dir = fs::temp_directory_path() / ("rgcli_" + std::to_string(::getpid()));
        fs::create_directories(dir);
    }
    ~workspace_guard() {
        std::error_code ec;
        fs::remove_all(dir, ec);
    }
};

fs::path ws() {
    static workspace_guard guard;
    return guard.dir;
}

std::string ws_path(const std::string& name) { return (ws() / name).string(); }

struct cmd_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

cmd_result run_cmd(const std::string& cmd) {
    std::string out_file = ws_path("cmd_stdout.txt");
    std::string err_file = ws_path("cmd_stderr.txt");
    std::string full = cmd + " >" + out_file + " 2>" + err_file;
    int status = std::system(full.c_str());
    cmd_result res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out_file);
    res.err = slurp(err_file);
    return res;
}

cmd_result tool(const std::string& args) {
    return run_cmd(std::string(RG_TOOL_PATH) + " " + args);
}

cmd_result synth_tool(const std::string& args) {
    return run_cmd(std::string(RG_SYNTH_PATH) + " " + args);
}

// shared corpus and model artifacts, generated on first use
const std::string& synth_csv() {
    static std::string path = [] {
        std::string p = ws_path("synth600.csv");
        cmd_result res = synth_tool("--samples 600 --seed 42 --output " + p);
        REQUIRE(res.exit_code == 0);
        return p;
    }();
    return path;
}

const std::string& dt_model() {
    static std::string path = [] {
        std::string p = ws_path("dt_model.json");
        cmd_result res = tool("train --data " + synth_csv() + " --model dt --output " + p);
        REQUIRE(res.exit_code == 0);
        return p;
    }();
    return path;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    REQUIRE(out.good());
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

} // namespace

TEST_CASE("extract writes one csv row per parsed binary") {
    fs::path pes = ws() / "pes";
    fs::create_directories(pes);
    write_bytes((pes / "a.exe").string(), pefix::build_pe());
    pefix::pe_options plus;
    plus.pe32plus = true;
    write_bytes((pes / "b.exe").string(), pefix::build_pe(plus));
    write_text_file((pes / "junk.bin").string(), "not a portable executable\n");

    std::string out_csv = ws_path("extracted.csv");
    cmd_result res = tool("extract " + pes.string() + " --output " + out_csv);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.err.find("junk.bin") != std::string::npos);

    csv_document doc = read_csv(out_csv);
    REQUIRE(doc.header.size() == 1 + extractor_schema().size());
    REQUIRE(doc.header[0] == "Name");
    REQUIRE(doc.header[1] == "Machine");
    REQUIRE(doc.rows.size() == 2);
    REQUIRE(doc.rows[0][0] == "a.exe");
    REQUIRE(doc.rows[1][0] == "b.exe");
    REQUIRE(doc.rows[0][1] == "332");
    REQUIRE(doc.rows[1][1] == "34404");

    // a single file argument works the same way
    std::string single_csv = ws_path("extracted_single.csv");
    res = tool("extract " + (pes / "a.exe").string() + " --output " + single_csv);
    REQUIRE(res.exit_code == 0);
    REQUIRE(read_csv(single_csv).rows.size() == 1);
}

TEST_CASE("extract distinguishes missing inputs from unparseable ones") {
    cmd_result res = tool("extract " + ws_path("no_such_dir") + " --output " +
                          ws_path("unused.csv"));
    REQUIRE(res.exit_code == 2);
    REQUIRE(res.err.find("not found") != std::string::npos);

    fs::path junk_dir = ws() / "junk_only";
    fs::create_directories(junk_dir);
    write_text_file((junk_dir / "one.txt").string(), "plain text\n");
    res = tool("extract " + junk_dir.string() + " --output " + ws_path("unused.csv"));
    REQUIRE(res.exit_code == 3);
    REQUIRE(res.err.find("no input parsed") != std::string::npos);
}

TEST_CASE("synthgen output is a function of its seed") {
    std::string a = ws_path("synth_a.csv");
    std::string b = ws_path("synth_b.csv");
    std::string c = ws_path("synth_c.csv");
    std::string d = ws_path("synth_d.csv");

    cmd_result res = synth_tool("--samples 300 --seed 9 --output " + a);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.err.find("ransomware") != std::string::npos);
    REQUIRE(synth_tool("--samples 300 --seed 9 --output " + b).exit_code == 0);
    REQUIRE(synth_tool("--samples 300 --seed 10 --output " + c).exit_code == 0);
    REQUIRE(slurp(a) == slurp(b));
    REQUIRE(slurp(a) != slurp(c));

    // the environment variable is an alternate spelling of --seed
    res = run_cmd("RANSOMGUARD_SEED=9 " + std::string(RG_SYNTH_PATH) +
                  " --samples 300 --output " + d);
    REQUIRE(res.exit_code == 0);
    REQUIRE(slurp(d) == slurp(a));

    feature_table table = load_csv(a, "legitimate", class_label::ransomware);
    REQUIRE(table.values.rows() == 300);
    auto dist = class_distribution(table);
    REQUIRE(dist.first == 210);
}

TEST_CASE("select reports calibration results for every scaling mode") {
    cmd_result res = tool("select --data " + synth_csv() + " --json");
    REQUIRE(res.exit_code == 0);

    nlohmann::json j = nlohmann::json::parse(res.out);
    REQUIRE(j.contains("selection"));
    REQUIRE(j.contains("calibration"));
    REQUIRE(j["calibration"].size() == 3);
    for (const nlohmann::json& entry : j["calibration"]) {
        REQUIRE(entry.contains("scaling_mode"));
        REQUIRE(entry.contains("threshold"));
        REQUIRE(entry.contains("stage1_count"));
        REQUIRE(entry.contains("final_count"));
        REQUIRE(entry.contains("reproduces_target"));
    }
    REQUIRE(j["selection"].contains("final_columns"));

    std::string sweep = ws_path("sweep.csv");
    res = tool("select --data " + synth_csv() + " --sweep-csv " + sweep);
    REQUIRE(res.exit_code == 0);
    csv_document doc = read_csv(sweep);
    REQUIRE(doc.header == std::vector<std::string>{"threshold", "survivors"});
    REQUIRE(doc.rows.size() == 41);
    long prev = std::stol(doc.rows[0][1]);
    for (const std::vector<std::string>& row : doc.rows) {
        long survivors = std::stol(row[1]);
        REQUIRE(survivors <= prev);
        prev = survivors;
    }
}

TEST_CASE("train writes a loadable model file") {
    model_metadata meta;
    trained_model model = load_model(dt_model(), &meta);
    REQUIRE(model.kind == classifier_kind::decision_tree);
    REQUIRE(model.features == preset_features_13());
    REQUIRE(meta.seed == 42);
    REQUIRE(meta.positive_class == class_label::ransomware);
    REQUIRE(meta.dataset_fingerprint.size() == 16);

    nlohmann::json j = nlohmann::json::parse(slurp(dt_model()));
    REQUIRE(j["format_version"] == 1);
}

TEST_CASE("train rejects unknown model kinds") {
    cmd_result res = tool("train --data " + synth_csv() +
                          " --model zz --output " + ws_path("unused_model.json"));
    REQUIRE(res.exit_code == 1);
    REQUIRE(res.err.find("error:") != std::string::npos);
}

TEST_CASE("predict scores csv rows with row-numbered ids") {
    cmd_result res = tool("predict --model " + dt_model() + " --input " + synth_csv());
    REQUIRE(res.exit_code == 0);

    std::vector<std::string> lines = split_lines(res.out);
    REQUIRE(lines.size() == 600);
    REQUIRE(lines[0].rfind(synth_csv() + ":2 ", 0) == 0);

    for (const std::string& line : {lines[0], lines[299], lines[599]}) {
        std::size_t sp1 = line.find(' ');
        std::size_t sp2 = line.find(' ', sp1 + 1);
        REQUIRE(sp1 != std::string::npos);
        REQUIRE(sp2 != std::string::npos);
        double prob = std::stod(line.substr(sp1 + 1, sp2 - sp1 - 1));
        REQUIRE(prob >= 0.0);
        REQUIRE(prob <= 1.0);
        std::string label = line.substr(sp2 + 1);
        REQUIRE((label == "ransomware" || label == "legitimate"));
    }

    res = tool("predict --model " + dt_model() + " --input " + synth_csv() + " --json");
    REQUIRE(res.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(res.out);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 600);
    REQUIRE(j[0].contains("input"));
    REQUIRE(j[0].contains("probability"));
    REQUIRE(j[0].contains("label"));
}

TEST_CASE("predict scores a raw binary") {
    std::string pe_path = ws_path("sample.exe");
    write_bytes(pe_path, pefix::build_pe());

    cmd_result res = tool("predict --model " + dt_model() + " --input " + pe_path);
    REQUIRE(res.exit_code == 0);
    std::vector<std::string> lines = split_lines(res.out);
    REQUIRE(lines.size() == 1);
    REQUIRE(lines[0].rfind(pe_path + " ", 0) == 0);

    // a non-pe input fails with the parse exit code
    std::string junk = ws_path("junk_input.bin");
    write_text_file(junk, "nope\n");
    res = tool("predict --model " + dt_model() + " --input " + junk);
    REQUIRE(res.exit_code == 3);
}

TEST_CASE("evaluate reports are byte-identical across reruns") {
    std::string r1 = ws_path("report1.json");
    std::string r2 = ws_path("report2.json");
    std::string rocs = ws_path("rocs");

    cmd_result res = tool("evaluate --data " + synth_csv() +
                          " --models dt,nb --folds 3 --output " + r1 +
                          " --roc-dir " + rocs);
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.out.find("decision_tree") != std::string::npos);
    REQUIRE(res.out.find("naive_bayes") != std::string::npos);

    nlohmann::json j = nlohmann::json::parse(slurp(r1));
    REQUIRE(j["classifiers"].size() == 2);
    REQUIRE(j["classifiers"][0]["kind"] == "decision_tree");
    REQUIRE(j["classifiers"][0]["folds"].size() == 3);
    REQUIRE(j["config"]["k"] == 3);
    REQUIRE(j["config"]["seed"] == 42);

    for (const char* name :
         {"decision_tree_fold0.csv", "decision_tree_fold1.csv",
          "decision_tree_fold2.csv", "decision_tree_mean.csv",
          "naive_bayes_fold0.csv", "naive_bayes_mean.csv"}) {
        fs::path p = fs::path(rocs) / name;
        INFO("expected roc csv " << p);
        REQUIRE(fs::is_regular_file(p));
    }
    roc_curve_result fold0 = read_roc_csv((fs::path(rocs) / "decision_tree_fold0.csv").string());
    REQUIRE(fold0.points.size() >= 2);

    res = tool("evaluate --data " + synth_csv() +
               " --models dt,nb --folds 3 --output " + r2);
    REQUIRE(res.exit_code == 0);
    REQUIRE(slurp(r1) == slurp(r2));
}

TEST_CASE("evaluate checks reported means against a reference file") {
    std::string r1 = ws_path("report_ref_base.json");
    cmd_result res = tool("evaluate --data " + synth_csv() +
                          " --models dt --folds 3 --output " + r1);
    REQUIRE(res.exit_code == 0);
    nlohmann::json report = nlohmann::json::parse(slurp(r1));
    double dt_acc = report["classifiers"][0]["aggregates"]["accuracy"]["mean"];

    std::string ref = ws_path("reference.json");
    nlohmann::json ref_json = {
        {"metrics", {{"decision_tree", {{"accuracy", dt_acc}, {"auc", 0.0}}}}}};
    write_text_file(ref, ref_json.dump(2) + "\n");

    res = tool("evaluate --data " + synth_csv() + " --models dt --folds 3" +
               " --reference " + ref + " --tolerance 0.02");
    REQUIRE(res.exit_code == 0);
    REQUIRE(res.out.find("ok") != std::string::npos);
    REQUIRE(res.out.find("FAIL") != std::string::npos);
    REQUIRE(res.out.find("accuracy") != std::string::npos);
}

TEST_CASE("environment variables supply evaluate defaults") {
    std::string report = ws_path("report_env.json");
    cmd_result res = run_cmd("RANSOMGUARD_FOLDS=3 RANSOMGUARD_DATA=" + synth_csv() +
                             " " + std::string(RG_TOOL_PATH) +
                             " evaluate --models dt --output " + report);
    REQUIRE(res.exit_code == 0);
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    REQUIRE(j["config"]["k"] == 3);
}

TEST_CASE("plot-roc renders fold curves to svg") {
    std::string rocs = ws_path("rocs");
    REQUIRE(fs::is_directory(rocs)); // produced by the evaluate test above

    std::string svg_path = ws_path("roc.svg");
    cmd_result res = tool("plot-roc --input " + rocs + "/decision_tree_fold0.csv" +
                          " --input " + rocs + "/decision_tree_fold1.csv" +
                          " --mean " + rocs + "/decision_tree_mean.csv" +
                          " --output " + svg_path + " --title dt_roc");
    REQUIRE(res.exit_code == 0);
    std::string svg = slurp(svg_path);
    REQUIRE(svg.rfind("<svg", 0) == 0);
    REQUIRE(svg.find("dt_roc") != std::string::npos);
    REQUIRE(svg.find("<polyline") != std::string::npos);

    std::string bad = ws_path("bad_roc.csv");
    write_text_file(bad, "fpr,tpr\n0,0\n1,1\n");
    res = tool("plot-roc --input " + bad + " --output " + ws_path("unused.svg"));
    REQUIRE(res.exit_code == 2);
}

TEST_CASE("usage errors exit with the usage code") {
    REQUIRE(tool("").exit_code == 1);
    REQUIRE(tool("no-such-command").exit_code == 1);
    REQUIRE(tool("evaluate --data x.csv --no-such-flag").exit_code == 1);
    REQUIRE(tool("extract --output only.csv").exit_code == 1);
    REQUIRE(tool("--help").exit_code == 0);
    REQUIRE(tool("evaluate --help").exit_code == 0);

    // a dataset that does not exist is a data error, not a usage error
    REQUIRE(tool("evaluate --data " + ws_path("missing.csv") + " --models dt")
                .exit_code == 2);
}
