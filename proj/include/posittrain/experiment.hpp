#pragma once

// Training experiments: configuration, the per-run training loop, result
// records and the cross-format comparison table built from result files.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "posittrain/adam.hpp"
#include "posittrain/dataset.hpp"
#include "posittrain/network.hpp"

namespace posittrain {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct ExperimentSpec {
    DatasetName dataset = DatasetName::Mnist;
    NumericFormat format = NumericFormat::binary32();
    std::vector<std::size_t> hidden{256, 128, 64};
    int epochs = 10;
    std::size_t batch_size = 64;
    AdamHyperparameters adam;
    std::uint64_t seed = 0;
    int runs = 1;
    Accumulation accumulation = Accumulation::RoundEachMac;
    std::size_t train_limit = 0;  // 0 = full training split
    std::string output_path;

    /// First 10,000 training samples, 5 epochs.
    void apply_fast_profile();
    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
    std::vector<std::size_t> layer_sizes(std::size_t inputs) const;
};

void to_json(nlohmann::json& j, const ExperimentSpec& spec);
void from_json(const nlohmann::json& j, ExperimentSpec& spec);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;  // mean of batch losses
    double test_accuracy = 0.0;
};

struct RunRecord {
    int index = 0;
    std::uint64_t seed = 0;
    bool diverged = false;
    std::string divergence_reason;
    std::optional<int> diverged_epoch;
    double final_accuracy = 0.0;  // accuracy of the last evaluated parameters
    std::vector<EpochRecord> curve;
};

void to_json(nlohmann::json& j, const RunRecord& r);
void from_json(const nlohmann::json& j, RunRecord& r);

struct RunResult {
    ExperimentSpec spec;
    std::vector<RunRecord> runs;
    std::optional<double> mean_accuracy;  // over non-diverged runs
    std::optional<double> std_accuracy;   // sample standard deviation
    int diverged_count = 0;
    double wall_clock_seconds = 0.0;
    std::string artifact_version = kArtifactVersion;
    std::string timestamp;  // UTC ISO-8601

    /// Recomputes mean/std/diverged_count from `runs`.
    void aggregate();
};

void to_json(nlohmann::json& j, const RunResult& r);
void from_json(const nlohmann::json& j, RunResult& r);

/// Fields that vary between otherwise identical invocations.
inline constexpr const char* kVolatileResultFields[] = {"timestamp", "wall_clock_seconds"};

enum class StepStatus : std::uint8_t { Ok, Diverged };

struct StepOutcome {
    StepStatus status = StepStatus::Ok;
    double loss = 0.0;
    std::string reason;
};

/// One training run's mutable state: network plus optimizer.
class TrainingSession {
public:
    TrainingSession(const ExperimentSpec& spec, std::size_t inputs, std::uint64_t seed);

    /// Forward, loss, backward and Adam update on one batch. A non-finite
    /// loss or optimizer state is reported as Diverged instead of thrown.
    StepOutcome train_batch(const Batch& batch);
    /// Adam update with externally supplied gradients (W0, b0, W1, b1, ...).
    StepOutcome apply_gradients(const std::vector<Tensor>& grads);
    double evaluate(const Dataset& test, std::size_t batch_size = 1000) const;

    const Network& network() const { return net_; }
    const AdamState& optimizer() const { return adam_; }

private:
    Accumulation mode_;
    Network net_;
    AdamState adam_;
};

using ProgressFn = std::function<void(const std::string&)>;

RunRecord train_single_run(const ExperimentSpec& spec, const LoadedDataset& data, int run_index,
                           const ProgressFn& progress = {});

/// Runs spec.runs independent runs (seed + i), up to `jobs` at a time.
RunResult run_experiment(const ExperimentSpec& spec, const LoadedDataset& data, int jobs = 1,
                         const ProgressFn& progress = {});

struct TableRow {
    std::string dataset;
    std::string format_label;
    std::string format_name;
    std::optional<double> mean;
    std::optional<double> std;
    int runs = 0;
    int diverged = 0;
    std::string timestamp;
    std::string source;
    bool best = false;
};

class ResultFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads every *.json RunResult in `dir`, grouped by dataset (mnist first)
/// and ordered Posit-32, Float-32, Posit-16, Float-16, then others.
std::vector<TableRow> collect_table(const std::filesystem::path& dir);
std::string render_table(const std::vector<TableRow>& rows);
std::string render_csv(const std::vector<TableRow>& rows);

std::string utc_timestamp();

}  // namespace posittrain
