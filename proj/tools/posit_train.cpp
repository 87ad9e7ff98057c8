// posit-train: train / verify / table.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 verification failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posittrain/experiment.hpp"
#include "posittrain/verify.hpp"

namespace {

using namespace posittrain;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct TrainArgs {
    std::string dataset = "mnist";
    std::string family = "float";
    int bits = 32;
    std::optional<int> es;
    std::vector<std::size_t> hidden{256, 128, 64};
    std::optional<int> epochs;
    std::size_t batch = 64;
    AdamHyperparameters adam;
    std::uint64_t seed = 0;
    int runs = 1;
    std::string accum = "round-mac";
    std::string out;
    std::string data_dir;
    std::size_t train_limit = 0;
    bool fast = false;
    int jobs = 1;
    bool quiet = false;
};

std::string default_output(const ExperimentSpec& spec) {
    return "results/" + to_string(spec.dataset) + "_" + spec.format.name() + "_seed" + std::to_string(spec.seed) +
           ".json";
}

int cmd_train(const TrainArgs& args) {
    ExperimentSpec spec;
    try {
        spec.dataset = parse_dataset_name(args.dataset);
        spec.format = NumericFormat::from_cli(args.family, args.bits, args.es);
        spec.accumulation = parse_accumulation(args.accum);
        spec.hidden = args.hidden;
        spec.batch_size = args.batch;
        spec.adam = args.adam;
        spec.seed = args.seed;
        spec.runs = args.runs;
        if (args.fast) spec.apply_fast_profile();
        if (args.epochs) spec.epochs = *args.epochs;
        if (args.train_limit > 0) spec.train_limit = args.train_limit;
        spec.output_path = args.out.empty() ? default_output(spec) : args.out;
        spec.validate();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    const std::filesystem::path root = args.data_dir.empty() ? default_data_root() : std::filesystem::path(args.data_dir);
    LoadedDataset data;
    try {
        data = load_dataset(spec.dataset, root);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';

    const ProgressFn progress = args.quiet ? ProgressFn{} : [](const std::string& msg) { std::cerr << msg << '\n'; };
    const RunResult result = run_experiment(spec, data, args.jobs, progress);

    const std::filesystem::path out = spec.output_path;
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream file(out);
    if (!file) {
        std::cerr << "error: cannot write " << out << '\n';
        return kExitData;
    }
    file << nlohmann::json(result).dump(2) << '\n';

    TableRow row;
    row.dataset = to_string(spec.dataset);
    row.format_label = spec.format.label();
    row.format_name = spec.format.name();
    row.mean = result.mean_accuracy;
    row.std = result.std_accuracy;
    row.runs = static_cast<int>(result.runs.size());
    row.diverged = result.diverged_count;
    row.timestamp = result.timestamp;
    std::cout << render_table({row});
    std::cout << "wrote " << out.string() << '\n';
    return 0;
}

int cmd_verify(const std::string& suite, const std::string& inject, const std::string& json_out) {
    std::vector<std::string> names;
    if (suite == "all")
        names = verify::suite_names();
    else
        names = {suite};

    nlohmann::json reports = nlohmann::json::array();
    bool ok = true;
    for (const auto& name : names) {
        verify::SuiteReport report;
        if (!inject.empty()) {
            if (name != "posit8-exhaustive") {
                std::cerr << "error: --inject only applies to posit8-exhaustive\n";
                return kExitUsage;
            }
            report = verify::posit8_exhaustive({verify::ties_away_ops()});
        } else {
            report = verify::run_suite(name);
        }
        ok = ok && report.passed;
        std::cerr << (report.passed ? "PASS " : "FAIL ") << report.suite << ": " << report.cases << " cases, "
                  << report.failures << " failures, " << report.seconds << " s\n";
        if (!report.passed) std::cerr << "  first counterexample: " << report.first_counterexample << '\n';
        reports.push_back(report);
    }
    const nlohmann::json doc = names.size() == 1 ? reports.front() : reports;
    std::cout << doc.dump(2) << '\n';
    if (!json_out.empty()) std::ofstream(json_out) << doc.dump(2) << '\n';
    return ok ? 0 : kExitVerify;
}

int cmd_table(const std::string& dir, const std::string& csv) {
    std::vector<TableRow> rows;
    try {
        rows = collect_table(dir);
    } catch (const ResultFileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    if (rows.empty()) {
        std::cout << "no results in " << dir << '\n';
        return 0;
    }
    std::cout << render_table(rows);
    if (!csv.empty()) {
        std::ofstream out(csv);
        if (!out) {
            std::cerr << "error: cannot write " << csv << '\n';
            return kExitData;
        }
        out << render_csv(rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train small MLPs with emulated posit and IEEE formats"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kArtifactVersion);

    TrainArgs t;
    auto* train = app.add_subcommand("train", "Run training experiments and write a RunResult JSON");
    train->add_option("--dataset", t.dataset, "mnist | fashion-mnist")
        ->check(CLI::IsMember({"mnist", "fashion-mnist"}));
    train->add_option("--format", t.family, "posit | float")->check(CLI::IsMember({"posit", "float"}));
    train->add_option("--bits", t.bits, "16 | 32 (posits accept 2..32)");
    train->add_option("--es", t.es, "posit exponent size (default 1 for 16 bits, 2 for 32)");
    train->add_option("--hidden", t.hidden, "hidden widths, e.g. 256,128,64")->delimiter(',');
    train->add_option("--epochs", t.epochs, "epochs (default 10)");
    train->add_option("--batch", t.batch, "mini-batch size")->capture_default_str();
    train->add_option("--lr", t.adam.lr, "Adam learning rate")->capture_default_str();
    train->add_option("--beta1", t.adam.beta1, "Adam beta1")->capture_default_str();
    train->add_option("--beta2", t.adam.beta2, "Adam beta2")->capture_default_str();
    train->add_option("--eps", t.adam.eps, "Adam epsilon")->capture_default_str();
    train->add_option("--seed", t.seed, "base seed; run i uses seed + i")->capture_default_str();
    train->add_option("--runs", t.runs, "independent runs")->capture_default_str();
    train->add_option("--accum", t.accum, "round-mac | exact")->check(CLI::IsMember({"round-mac", "exact"}));
    train->add_option("--out", t.out, "result file (default results/<dataset>_<format>_seed<S>.json)");
    train->add_option("--data-dir", t.data_dir, "dataset root (default $POSIT_TRAIN_DATA_DIR or ./data)");
    train->add_option("--train-limit", t.train_limit, "train on the first N samples only");
    train->add_flag("--fast", t.fast, "first 10000 training samples, 5 epochs");
    train->add_option("--jobs", t.jobs, "runs trained concurrently")->capture_default_str();
    train->add_flag("--quiet", t.quiet, "no per-epoch progress");

    std::string suite;
    std::string inject;
    std::string verify_json;
    auto* verify = app.add_subcommand("verify", "Run an arithmetic verification suite");
    std::vector<std::string> suites = verify::suite_names();
    suites.push_back("all");
    verify->add_option("--suite", suite, "suite name or 'all'")->required()->check(CLI::IsMember(suites));
    verify->add_option("--inject", inject, "run posit8-exhaustive against a faulty rounding rule")
        ->check(CLI::IsMember({"ties-away"}));
    verify->add_option("--json", verify_json, "also write the report to FILE");

    std::string dir;
    std::string csv;
    auto* table = app.add_subcommand("table", "Summarize result files as a comparison table");
    table->add_option("--dir", dir, "directory of RunResult JSON files")->required();
    table->add_option("--csv", csv, "also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(t);
        if (verify->parsed()) return cmd_verify(suite, inject, verify_json);
        return cmd_table(dir, csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
