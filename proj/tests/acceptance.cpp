// Acceptance checks, one line per criterion.
//
//   acceptance --criteria 1,2,3,4,7,8 --cli path/to/posit-train
//   acceptance --criteria 5,6 [--data-dir D] [--results DIR]
//
// Criteria 5 and 6 need the real MNIST and Fashion-MNIST files. With
// --results they read RunResult files produced by `posit-train train`;
// otherwise they train in-process. When neither data nor results are
// available they print FAIL (blocked) and the binary exits 77.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "posittrain/experiment.hpp"
#include "posittrain/verify.hpp"
#include "synthetic.hpp"

namespace {

using namespace posittrain;
using nlohmann::json;

enum class Status { Pass, Fail, Blocked };

struct Outcome {
    Status status;
    std::string detail;
};

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

Outcome from_report(const verify::SuiteReport& r, double time_limit) {
    std::string detail = std::to_string(r.cases) + " cases, " + std::to_string(r.failures) + " failures, " +
                         fmt(r.seconds, 2) + " s";
    if (!r.passed) return {Status::Fail, detail + "; first counterexample: " + r.first_counterexample};
    if (r.seconds >= time_limit) return {Status::Fail, detail + " (over the " + fmt(time_limit, 0) + " s budget)"};
    return {Status::Pass, detail};
}

Outcome criterion1() { return from_report(verify::posit8_exhaustive(), 60.0); }

Outcome criterion2() { return from_report(verify::posit16_roundtrip(), 60.0); }

Outcome criterion3() {
    const auto r = verify::half_exhaustive(1'000'000, 200'000);
    Outcome o = from_report(r, 1e9);
    if (o.status == Status::Pass && r.details["random_cases"].get<std::uint64_t>() < 1'000'000)
        return {Status::Fail, o.detail + "; fewer than 10^6 random cases"};
    return o;
}

Outcome criterion4() {
    const auto r = verify::gradcheck();
    const double max_rel = r.details["max_relative_error"].get<double>();
    const std::string detail = std::to_string(r.cases) + " parameters, max relative error " + std::to_string(max_rel);
    if (r.cases > 100) return {Status::Fail, detail + " (network too large)"};
    if (!r.passed || !(max_rel < 1e-2)) return {Status::Fail, detail + "; " + r.first_counterexample};
    return {Status::Pass, detail};
}

// Two identical invocations of the CLI on a small corpus; payloads compared
// with the volatile fields removed.
Outcome criterion7(const std::string& cli) {
    if (cli.empty()) return {Status::Fail, "no --cli given"};
    const auto root = synthetic::temp_dir("determinism");
    synthetic::write_corpus(root, DatasetName::Mnist, 240, 60, 7, true);
    const std::vector<std::string> formats{"--format posit --bits 16", "--format float --bits 16",
                                           "--format float --bits 32"};
    std::string detail;
    for (const auto& format : formats) {
        const auto out = root / "result.json";
        std::vector<std::string> payloads;
        for (int i = 0; i < 2; ++i) {
            const std::string cmd = "\"" + cli + "\" train --dataset mnist " + format +
                                    " --hidden 12,8 --epochs 2 --batch 32 --runs 2 --seed 5 --quiet --data-dir \"" +
                                    root.string() + "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                std::filesystem::remove_all(root);
                return {Status::Fail, "train invocation failed: " + cmd};
            }
            json doc = json::parse(std::ifstream(out));
            for (const char* field : kVolatileResultFields) doc.erase(field);
            payloads.push_back(doc.dump());
            std::filesystem::remove(out);
        }
        if (payloads[0] != payloads[1]) {
            std::filesystem::remove_all(root);
            return {Status::Fail, format + ": payloads differ"};
        }
        detail += (detail.empty() ? "" : ", ") + format.substr(9);
    }
    std::filesystem::remove_all(root);
    return {Status::Pass, "byte-identical payloads for " + detail};
}

// Gradients of magnitude 10^6 fed straight into Adam.
Outcome criterion8() {
    const auto huge_gradients = [](const TrainingSession& s, const NumericFormat& f, std::uint64_t step,
                                   double magnitude = 1e6) {
        std::vector<Tensor> grads;
        std::uint64_t c = 0;
        const auto rng = CounterRng::derive(step, Stream::Test, 8);
        for (const Tensor* p : s.network().parameters()) {
            std::vector<double> g(p->size());
            for (auto& x : g) x = (rng.at(c++) & 1u) != 0 ? magnitude : -magnitude;
            grads.push_back(Tensor::from_doubles(p->shape(), f, g));
        }
        return grads;
    };

    ExperimentSpec spec;
    spec.hidden = {32, 16};
    spec.format = NumericFormat::posit(16, 1);
    TrainingSession posit(spec, 64, 3);
    constexpr int kSteps = 200;
    for (int step = 0; step < kSteps; ++step) {
        const auto out = posit.apply_gradients(huge_gradients(posit, spec.format, step));
        if (out.status != StepStatus::Ok) return {Status::Fail, "posit16 step " + std::to_string(step) + ": " + out.reason};
        for (const Tensor* p : posit.network().parameters())
            if (p->has_non_finite()) return {Status::Fail, "NaR in posit16 parameters at step " + std::to_string(step)};
        for (const auto& v : posit.optimizer().v)
            if (v.has_non_finite()) return {Status::Fail, "NaR in posit16 second moment at step " + std::to_string(step)};
    }

    // 1e6 is already inf in binary16; 1e3 is representable but g*g is not.
    spec.format = NumericFormat::binary16();
    std::vector<std::string> caught;
    for (const double magnitude : {1e6, 1e3}) {
        TrainingSession half(spec, 64, 3);
        std::optional<std::string> reason;
        for (int step = 0; step < kSteps && !reason; ++step) {
            try {
                const auto out = half.apply_gradients(huge_gradients(half, spec.format, step, magnitude));
                if (out.status == StepStatus::Diverged) reason = out.reason;
            } catch (const std::exception& e) {
                return {Status::Fail, std::string("binary16 scenario threw: ") + e.what()};
            }
        }
        if (!reason) return {Status::Fail, "binary16 with |g| = " + fmt(magnitude, 0) + " produced no non-finite value"};
        caught.push_back("|g| = " + fmt(magnitude, 0) + ": " + *reason);
    }
    return {Status::Pass, "posit16: " + std::to_string(kSteps) + " steps without NaR; binary16 divergence caught (" +
                              caught[0] + "; " + caught[1] + ")"};
}

// ---- criteria 5 and 6 ------------------------------------------------------

struct Cell {
    DatasetName dataset;
    NumericFormat format;
    bool fast;
};

struct CellSource {
    std::optional<std::filesystem::path> results;
    std::filesystem::path data_root;
    int jobs;
    std::map<std::string, RunResult> cache;
    std::map<DatasetName, std::optional<LoadedDataset>> loaded;
    std::string blocked_reason;
};

std::string cell_key(const Cell& c) {
    return to_string(c.dataset) + "/" + c.format.name() + (c.fast ? "/fast" : "");
}

bool matches(const ExperimentSpec& s, const Cell& c) {
    ExperimentSpec defaults;
    if (c.fast) defaults.apply_fast_profile();
    return s.dataset == c.dataset && s.format == c.format && s.runs >= (c.fast ? 1 : 10) &&
           s.train_limit == defaults.train_limit && s.epochs == defaults.epochs && s.hidden == defaults.hidden &&
           s.batch_size == defaults.batch_size && s.accumulation == Accumulation::RoundEachMac;
}

std::optional<RunResult> obtain(CellSource& src, const Cell& c) {
    const std::string key = cell_key(c);
    if (auto it = src.cache.find(key); it != src.cache.end()) return it->second;

    if (src.results) {
        for (const auto& entry : std::filesystem::directory_iterator(*src.results)) {
            if (entry.path().extension() != ".json") continue;
            try {
                RunResult r = json::parse(std::ifstream(entry.path())).get<RunResult>();
                if (matches(r.spec, c)) return src.cache[key] = r;
            } catch (const std::exception&) {
            }
        }
    }

    auto& data = src.loaded[c.dataset];
    if (!data) {
        try {
            data = load_dataset(c.dataset, src.data_root);
        } catch (const std::exception& e) {
            src.blocked_reason = e.what();
            src.loaded.erase(c.dataset);
            return std::nullopt;
        }
    }
    ExperimentSpec spec;
    spec.dataset = c.dataset;
    spec.format = c.format;
    if (c.fast)
        spec.apply_fast_profile();
    else
        spec.runs = 10;
    std::cerr << "training " << key << " (" << spec.runs << " runs)\n";
    return src.cache[key] = run_experiment(spec, *data, src.jobs);
}

double mean_pct(const RunResult& r) { return r.mean_accuracy.value_or(0.0) * 100.0; }

const NumericFormat kP32 = NumericFormat::posit(32, 2);
const NumericFormat kF32 = NumericFormat::binary32();
const NumericFormat kP16 = NumericFormat::posit(16, 1);
const NumericFormat kF16 = NumericFormat::binary16();

// Reference means, percent.
struct Published {
    double p32, f32, p16, f16;
};
const std::map<DatasetName, Published> kPublished{{DatasetName::Mnist, {98.131, 98.087, 96.535, 90.646}},
                                                  {DatasetName::FashionMnist, {89.263, 89.105, 87.400, 81.725}}};

Outcome blocked(const CellSource& src) {
    return {Status::Blocked, "dataset unavailable (" + src.blocked_reason +
                                 "); place the IDX files under $POSIT_TRAIN_DATA_DIR or pass --results"};
}

Outcome criterion5(CellSource& src) {
    std::vector<std::string> parts;
    bool ok = true;
    for (const auto& [dataset, pub] : kPublished) {
        for (const auto& [format, reference] : {std::pair{kP32, pub.p32}, std::pair{kF32, pub.f32}}) {
            const auto r = obtain(src, Cell{dataset, format, false});
            if (!r) return blocked(src);
            const double m = mean_pct(*r);
            const bool in_band = std::fabs(m - reference) <= 1.0;
            ok = ok && in_band;
            parts.push_back(to_string(dataset) + " " + format.label() + " " + fmt(m) + "% vs " + fmt(reference) + "%" +
                            (in_band ? "" : " (outside ±1.0)"));
        }
        const double floor = dataset == DatasetName::Mnist ? 96.0 : 85.0;
        for (const auto& format : {kP32, kF32}) {
            const auto r = obtain(src, Cell{dataset, format, true});
            if (!r) return blocked(src);
            const double m = mean_pct(*r);
            const bool good = m >= floor;
            ok = ok && good;
            parts.push_back(to_string(dataset) + " " + format.label() + " fast " + fmt(m) + "% (floor " + fmt(floor, 1) +
                            "%)" + (good ? "" : " (below floor)"));
        }
    }
    std::string detail;
    for (const auto& p : parts) detail += (detail.empty() ? "" : "; ") + p;
    return {ok ? Status::Pass : Status::Fail, detail};
}

Outcome criterion6(CellSource& src) {
    std::vector<std::string> parts;
    bool ok = true;
    for (const auto& [dataset, pub] : kPublished) {
        (void)pub;
        const auto p16 = obtain(src, Cell{dataset, kP16, false});
        const auto f16 = p16 ? obtain(src, Cell{dataset, kF16, false}) : std::nullopt;
        const auto p32 = f16 ? obtain(src, Cell{dataset, kP32, false}) : std::nullopt;
        if (!p32) return blocked(src);
        const double gap = mean_pct(*p16) - mean_pct(*f16);
        const double floor = dataset == DatasetName::Mnist ? 95.0 : 85.5;
        const double degradation = mean_pct(*p32) - mean_pct(*p16);
        const bool good = gap >= 3.0 && mean_pct(*p16) >= floor && degradation <= 2.5;
        ok = ok && good;
        parts.push_back(to_string(dataset) + " posit16 " + fmt(mean_pct(*p16)) + "%, gap over binary16 " + fmt(gap) +
                        " (need 3.0), posit32 minus posit16 " + fmt(degradation) + " (max 2.5), floor " +
                        fmt(floor, 1) + "%");
    }
    std::string detail;
    for (const auto& p : parts) detail += (detail.empty() ? "" : "; ") + p;
    return {ok ? Status::Pass : Status::Fail, detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8};
    std::string cli;
    std::string data_dir;
    std::string results;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--criteria", criteria, "criteria to evaluate")->delimiter(',');
    app.add_option("--cli", cli, "posit-train executable");
    app.add_option("--data-dir", data_dir, "dataset root");
    app.add_option("--results", results, "directory of RunResult files to evaluate instead of training");
    app.add_option("--jobs", jobs, "concurrent runs when training");
    CLI11_PARSE(app, argc, argv);

    CellSource src;
    src.data_root = data_dir.empty() ? default_data_root() : std::filesystem::path(data_dir);
    if (!results.empty()) src.results = results;
    src.jobs = jobs;

    static const std::map<int, std::string> names{
        {1, "posit8 exhaustive codec and arithmetic"}, {2, "posit16 roundtrip and monotonicity"},
        {3, "binary16 emulation"},                      {4, "binary32 gradient check"},
        {5, "32-bit accuracy band"},                    {6, "16-bit ordering"},
        {7, "determinism"},                             {8, "saturation under huge gradients"}};

    bool any_fail = false;
    bool any_blocked = false;
    for (int c : criteria) {
        Outcome o{Status::Fail, "unknown criterion"};
        try {
            switch (c) {
                case 1: o = criterion1(); break;
                case 2: o = criterion2(); break;
                case 3: o = criterion3(); break;
                case 4: o = criterion4(); break;
                case 5: o = criterion5(src); break;
                case 6: o = criterion6(src); break;
                case 7: o = criterion7(cli); break;
                case 8: o = criterion8(); break;
                default: break;
            }
        } catch (const std::exception& e) {
            o = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char* label = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "FAIL (blocked)";
        std::cout << "criterion " << c << " [" << (names.count(c) ? names.at(c) : "?") << "]: " << label << ": "
                  << o.detail << std::endl;
        any_fail = any_fail || o.status == Status::Fail;
        any_blocked = any_blocked || o.status == Status::Blocked;
    }
    if (any_fail) return 1;
    return any_blocked ? 77 : 0;
}
