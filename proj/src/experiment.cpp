#include "posittrain/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace posittrain {

using nlohmann::json;

void ExperimentSpec::apply_fast_profile() {
    train_limit = 10000;
    epochs = 5;
}

void ExperimentSpec::validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be at least 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
    for (auto h : hidden)
        if (h == 0) throw std::invalid_argument("hidden layer widths must be positive");
    if (!(adam.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
        throw std::invalid_argument("beta1 and beta2 must lie in [0, 1)");
    if (!(adam.eps > 0.0)) throw std::invalid_argument("eps must be positive");
}

std::vector<std::size_t> ExperimentSpec::layer_sizes(std::size_t inputs) const {
    std::vector<std::size_t> sizes{inputs};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(kNumClasses);
    return sizes;
}

void to_json(json& j, const ExperimentSpec& s) {
    j = json{{"dataset", to_string(s.dataset)},
             {"format", s.format.name()},
             {"format_family", s.format.is_posit() ? "posit" : "float"},
             {"bits", s.format.bits()},
             {"es", s.format.is_posit() ? json(s.format.posit_config().es()) : json(nullptr)},
             {"hidden", s.hidden},
             {"epochs", s.epochs},
             {"batch_size", s.batch_size},
             {"lr", s.adam.lr},
             {"beta1", s.adam.beta1},
             {"beta2", s.adam.beta2},
             {"eps", s.adam.eps},
             {"seed", s.seed},
             {"runs", s.runs},
             {"accumulation", to_string(s.accumulation)},
             {"train_limit", s.train_limit},
             {"output_path", s.output_path}};
}

void from_json(const json& j, ExperimentSpec& s) {
    s.dataset = parse_dataset_name(j.at("dataset").get<std::string>());
    s.format = NumericFormat::parse(j.at("format").get<std::string>());
    s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    s.epochs = j.at("epochs").get<int>();
    s.batch_size = j.at("batch_size").get<std::size_t>();
    s.adam.lr = j.at("lr").get<double>();
    s.adam.beta1 = j.at("beta1").get<double>();
    s.adam.beta2 = j.at("beta2").get<double>();
    s.adam.eps = j.at("eps").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.runs = j.at("runs").get<int>();
    s.accumulation = parse_accumulation(j.at("accumulation").get<std::string>());
    s.train_limit = j.at("train_limit").get<std::size_t>();
    s.output_path = j.at("output_path").get<std::string>();
}

void to_json(json& j, const EpochRecord& e) {
    j = json{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"test_accuracy", e.test_accuracy}};
}

void from_json(const json& j, EpochRecord& e) {
    e.epoch = j.at("epoch").get<int>();
    e.train_loss = j.at("train_loss").get<double>();
    e.test_accuracy = j.at("test_accuracy").get<double>();
}

void to_json(json& j, const RunRecord& r) {
    j = json{{"index", r.index},
             {"seed", r.seed},
             {"diverged", r.diverged},
             {"divergence_reason", r.divergence_reason},
             {"diverged_epoch", r.diverged_epoch ? json(*r.diverged_epoch) : json(nullptr)},
             {"final_accuracy", r.final_accuracy},
             {"curve", r.curve}};
}

void from_json(const json& j, RunRecord& r) {
    r.index = j.at("index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.diverged = j.at("diverged").get<bool>();
    r.divergence_reason = j.at("divergence_reason").get<std::string>();
    const auto& de = j.at("diverged_epoch");
    r.diverged_epoch = de.is_null() ? std::nullopt : std::optional<int>(de.get<int>());
    r.final_accuracy = j.at("final_accuracy").get<double>();
    r.curve = j.at("curve").get<std::vector<EpochRecord>>();
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j) {
    return j.is_null() ? std::nullopt : std::optional<double>(j.get<double>());
}

}  // namespace

void RunResult::aggregate() {
    std::vector<double> ok;
    diverged_count = 0;
    for (const auto& r : runs) {
        if (r.diverged)
            ++diverged_count;
        else
            ok.push_back(r.final_accuracy);
    }
    if (ok.empty()) {
        mean_accuracy.reset();
        std_accuracy.reset();
        return;
    }
    const double mean = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
    double ss = 0.0;
    for (double a : ok) ss += (a - mean) * (a - mean);
    mean_accuracy = mean;
    std_accuracy = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
}

void to_json(json& j, const RunResult& r) {
    j = json{{"spec", r.spec},
             {"runs", r.runs},
             {"mean_accuracy", optional_number(r.mean_accuracy)},
             {"std_accuracy", optional_number(r.std_accuracy)},
             {"diverged_count", r.diverged_count},
             {"wall_clock_seconds", r.wall_clock_seconds},
             {"artifact_version", r.artifact_version},
             {"timestamp", r.timestamp}};
}

void from_json(const json& j, RunResult& r) {
    r.spec = j.at("spec").get<ExperimentSpec>();
    r.runs = j.at("runs").get<std::vector<RunRecord>>();
    r.mean_accuracy = read_optional(j.at("mean_accuracy"));
    r.std_accuracy = read_optional(j.at("std_accuracy"));
    r.diverged_count = j.at("diverged_count").get<int>();
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    r.artifact_version = j.at("artifact_version").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
}

TrainingSession::TrainingSession(const ExperimentSpec& spec, std::size_t inputs, std::uint64_t seed)
    : mode_(spec.accumulation),
      net_(Network::he_uniform(spec.format, spec.layer_sizes(inputs), seed)),
      adam_(AdamState::create(std::as_const(net_).parameters(), spec.format, spec.adam)) {}

StepOutcome TrainingSession::train_batch(const Batch& batch) {
    const ForwardResult fwd = forward(net_, batch.x, mode_);
    const LossResult loss = softmax_xent(fwd.logits, batch.y);
    const double value = loss.loss.to_double();
    if (loss.loss.is_non_finite() || !std::isfinite(value))
        return StepOutcome{StepStatus::Diverged, value, "non-finite loss"};

    const auto layer_grads = backward(net_, fwd.cache, loss.dlogits, mode_);
    std::vector<Tensor> grads;
    for (const auto& g : layer_grads) {
        grads.push_back(g.weights);
        grads.push_back(g.bias);
    }
    StepOutcome out = apply_gradients(grads);
    out.loss = value;
    return out;
}

StepOutcome TrainingSession::apply_gradients(const std::vector<Tensor>& grads) {
    std::vector<const Tensor*> g;
    for (const auto& t : grads) g.push_back(&t);
    try {
        adam_step(net_.parameters(), g, adam_);
    } catch (const NonFiniteState& e) {
        return StepOutcome{StepStatus::Diverged, 0.0, e.what()};
    }
    return StepOutcome{};
}

double TrainingSession::evaluate(const Dataset& test, std::size_t batch_size) const {
    if (test.size() == 0) return 0.0;
    const auto pixels = pixel_table(net_.format());
    std::vector<std::uint32_t> idx(test.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::size_t correct = 0;
    for (std::size_t start = 0; start < idx.size(); start += batch_size) {
        const std::size_t end = std::min(idx.size(), start + batch_size);
        const Batch b = make_batch(test, std::span(idx).subspan(start, end - start), net_.format(), pixels);
        const auto predicted = argmax_rows(forward(net_, b.x, mode_).logits);
        for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == b.labels[i];
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

RunRecord train_single_run(const ExperimentSpec& spec, const LoadedDataset& data, int run_index,
                           const ProgressFn& progress) {
    RunRecord record;
    record.index = run_index;
    record.seed = spec.seed + static_cast<std::uint64_t>(run_index);

    const Dataset train = spec.train_limit > 0 ? data.train.head(spec.train_limit) : data.train;
    TrainingSession session(spec, train.features(), record.seed);

    for (int epoch = 0; epoch < spec.epochs && !record.diverged; ++epoch) {
        BatchStream stream(train, spec.batch_size, record.seed, static_cast<std::uint64_t>(epoch), spec.format);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        while (auto batch = stream.next()) {
            const StepOutcome step = session.train_batch(*batch);
            if (step.status == StepStatus::Diverged) {
                record.diverged = true;
                record.divergence_reason = step.reason;
                record.diverged_epoch = epoch;
                break;
            }
            loss_sum += step.loss;
            ++batches;
        }
        const double accuracy = session.evaluate(data.test);
        record.curve.push_back(
            EpochRecord{epoch, batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0, accuracy});
        record.final_accuracy = accuracy;
        if (progress) {
            std::ostringstream os;
            os << spec.format.label() << " run " << run_index << " epoch " << epoch + 1 << "/" << spec.epochs
               << ": loss " << record.curve.back().train_loss << ", test accuracy " << accuracy * 100.0 << "%"
               << (record.diverged ? " (diverged: " + record.divergence_reason + ")" : "");
            progress(os.str());
        }
    }
    return record;
}

RunResult run_experiment(const ExperimentSpec& spec, const LoadedDataset& data, int jobs,
                         const ProgressFn& progress) {
    spec.validate();
    const auto started = std::chrono::steady_clock::now();
    RunResult result;
    result.spec = spec;
    result.runs.resize(static_cast<std::size_t>(spec.runs));

    std::mutex progress_mutex;
    const ProgressFn locked = progress ? ProgressFn([&](const std::string& msg) {
        std::lock_guard lock(progress_mutex);
        progress(msg);
    })
                                       : ProgressFn{};
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int i = next++; i < spec.runs; i = next++)
            result.runs[static_cast<std::size_t>(i)] = train_single_run(spec, data, i, locked);
    };
    const int threads = std::clamp(jobs, 1, spec.runs);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    result.aggregate();
    result.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.timestamp = utc_timestamp();
    return result;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
    return os.str();
}

namespace {

int format_rank(const NumericFormat& f) {
    if (f.is_posit() && f.bits() == 32) return 0;
    if (f.kind() == FormatKind::Binary32) return 1;
    if (f.is_posit() && f.bits() == 16) return 2;
    if (f.kind() == FormatKind::Binary16) return 3;
    return 4;
}

std::string dataset_title(const std::string& name) { return name == "mnist" ? "MNIST" : "Fashion MNIST"; }

std::string percent(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v * 100.0;
    return os.str();
}

}  // namespace

std::vector<TableRow> collect_table(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ResultFileError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    struct Keyed {
        int dataset;
        int rank;
        std::string format;
        TableRow row;
    };
    std::vector<Keyed> keyed;
    for (const auto& path : files) {
        RunResult r;
        try {
            std::ifstream in(path);
            r = json::parse(in).get<RunResult>();
        } catch (const std::exception& e) {
            throw ResultFileError("malformed result file " + path.string() + ": " + e.what());
        }
        TableRow row;
        row.dataset = to_string(r.spec.dataset);
        row.format_label = r.spec.format.label();
        row.format_name = r.spec.format.name();
        row.mean = r.mean_accuracy;
        row.std = r.std_accuracy;
        row.runs = static_cast<int>(r.runs.size());
        row.diverged = r.diverged_count;
        row.timestamp = r.timestamp;
        row.source = path.filename().string();
        keyed.push_back(Keyed{r.spec.dataset == DatasetName::Mnist ? 0 : 1, format_rank(r.spec.format),
                              row.format_name, std::move(row)});
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return std::tie(a.dataset, a.rank, a.format, a.row.timestamp) <
               std::tie(b.dataset, b.rank, b.format, b.row.timestamp);
    });

    std::vector<TableRow> rows;
    for (auto& k : keyed) rows.push_back(std::move(k.row));
    for (std::size_t i = 0; i < rows.size();) {
        std::size_t j = i;
        std::optional<std::size_t> best;
        for (; j < rows.size() && rows[j].dataset == rows[i].dataset; ++j)
            if (rows[j].mean && (!best || *rows[j].mean > *rows[*best].mean)) best = j;
        if (best) rows[*best].best = true;
        i = j;
    }
    return rows;
}

std::string render_table(const std::vector<TableRow>& rows) {
    if (rows.empty()) return "no results\n";
    std::ostringstream os;
    os << std::left << std::setw(15) << "Task" << std::setw(20) << "Format" << std::setw(22) << "Accuracy"
       << std::setw(6) << "Runs" << std::setw(10) << "Diverged" << "Timestamp\n";
    std::string last;
    for (const auto& r : rows) {
        const std::string task = r.dataset != last ? dataset_title(r.dataset) : "";
        last = r.dataset;
        std::string acc = r.mean ? percent(*r.mean, 3) + "% ± " + percent(r.std.value_or(0.0), 3) : "n/a";
        if (r.best) acc += " *";
        os << std::setw(15) << task << std::setw(20) << r.format_label << std::setw(22) << acc << std::setw(6)
           << r.runs << std::setw(10) << r.diverged << r.timestamp << '\n';
    }
    os << "* best format per task\n";
    return os.str();
}

std::string render_csv(const std::vector<TableRow>& rows) {
    std::ostringstream os;
    os << "task,format,format_name,mean_accuracy,std_accuracy,runs,diverged,best,timestamp,source\n";
    os << std::setprecision(17);
    for (const auto& r : rows) {
        os << dataset_title(r.dataset) << ',' << r.format_label << ',' << r.format_name << ',';
        if (r.mean) os << *r.mean;
        os << ',';
        if (r.std) os << *r.std;
        os << ',' << r.runs << ',' << r.diverged << ',' << (r.best ? 1 : 0) << ',' << r.timestamp << ','
           << r.source << '\n';
    }
    return os.str();
}

}  // namespace posittrain
