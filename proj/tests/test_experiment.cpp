#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "posittrain/experiment.hpp"
#include "synthetic.hpp"

using namespace posittrain;
using nlohmann::json;

namespace {

RunResult fake_result(const NumericFormat& f, DatasetName d, std::vector<double> accuracies, std::string stamp) {
    RunResult r;
    r.spec.dataset = d;
    r.spec.format = f;
    r.spec.runs = static_cast<int>(accuracies.size());
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        RunRecord rec;
        rec.index = static_cast<int>(i);
        rec.seed = i;
        rec.final_accuracy = accuracies[i];
        rec.curve.push_back(EpochRecord{0, 0.5, accuracies[i]});
        r.runs.push_back(rec);
    }
    r.aggregate();
    r.timestamp = std::move(stamp);
    return r;
}

void write_json(const std::filesystem::path& p, const RunResult& r) { std::ofstream(p) << json(r).dump(2); }

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("ExperimentSpec validation") {
    ExperimentSpec s;
    CHECK_NOTHROW(s.validate());
    s.runs = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.runs = 1;
    s.batch_size = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.batch_size = 64;
    s.adam.beta2 = 1.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("fast profile") {
    ExperimentSpec s;
    s.apply_fast_profile();
    CHECK(s.train_limit == 10000);
    CHECK(s.epochs == 5);
    CHECK(s.layer_sizes(784) == std::vector<std::size_t>{784, 256, 128, 64, 10});
}

TEST_CASE("RunResult JSON round-trips losslessly") {
    RunResult r = fake_result(NumericFormat::posit(16, 1), DatasetName::FashionMnist, {0.8731, 0.1 + 0.2}, "t0");
    r.spec.adam.lr = 3e-4;
    r.spec.seed = 0xFFFFFFFFFFFFull;
    r.spec.accumulation = Accumulation::ExactAccumulate;
    r.spec.output_path = "out/x.json";
    r.runs[1].diverged = true;
    r.runs[1].divergence_reason = "non-finite loss";
    r.runs[1].diverged_epoch = 3;
    r.aggregate();
    r.wall_clock_seconds = 1.0 / 3.0;
    const std::string text = json(r).dump();
    const RunResult back = json::parse(text).get<RunResult>();
    CHECK(json(back).dump() == text);
    CHECK(back.spec.format == r.spec.format);
    CHECK(back.runs[1].diverged_epoch == 3);
    CHECK(back.spec.adam.lr == 3e-4);
}

TEST_CASE("diverged runs are excluded from the mean and counted") {
    RunResult r = fake_result(NumericFormat::binary16(), DatasetName::Mnist, {0.9, 0.1, 0.8}, "t");
    r.runs[1].diverged = true;
    r.aggregate();
    CHECK(r.diverged_count == 1);
    CHECK(*r.mean_accuracy == doctest::Approx(0.85));
    CHECK(*r.std_accuracy == doctest::Approx(0.0707106781).epsilon(1e-6));
    for (auto& run : r.runs) run.diverged = true;
    r.aggregate();
    CHECK_FALSE(r.mean_accuracy);
    CHECK(r.diverged_count == 3);
}

TEST_CASE("training on a learnable synthetic corpus") {
    const auto root = synthetic::temp_dir("train");
    synthetic::write_corpus(root, DatasetName::Mnist, 400, 100, 4, false);
    const auto data = load_dataset(DatasetName::Mnist, root);
    ExperimentSpec spec;
    spec.format = NumericFormat::binary32();
    spec.hidden = {16};
    spec.epochs = 3;
    spec.batch_size = 20;
    spec.adam.lr = 5e-3;
    spec.seed = 11;
    const RunRecord a = train_single_run(spec, data, 0);
    CHECK_FALSE(a.diverged);
    CHECK(a.curve.size() == 3);
    CHECK(a.final_accuracy > 0.8);
    CHECK(a.curve.back().train_loss < a.curve.front().train_loss);

    const RunRecord b = train_single_run(spec, data, 0);
    CHECK(json(a).dump() == json(b).dump());
    const RunRecord c = train_single_run(spec, data, 1);
    CHECK(c.seed == 12);
    std::filesystem::remove_all(root);
}

TEST_CASE("parallel runs match sequential runs") {
    const auto root = synthetic::temp_dir("jobs");
    synthetic::write_corpus(root, DatasetName::Mnist, 120, 40, 6, false);
    const auto data = load_dataset(DatasetName::Mnist, root);
    ExperimentSpec spec;
    spec.format = NumericFormat::posit(16, 1);
    spec.hidden = {8};
    spec.epochs = 1;
    spec.batch_size = 30;
    spec.runs = 3;
    const auto seq = run_experiment(spec, data, 1);
    const auto par = run_experiment(spec, data, 3);
    CHECK(json(seq.runs).dump() == json(par.runs).dump());
    std::filesystem::remove_all(root);
}

TEST_CASE("overflowing updates mark the run diverged") {
    ExperimentSpec spec;
    spec.format = NumericFormat::binary16();
    spec.hidden = {4};
    TrainingSession session(spec, 6, 1);
    std::vector<Tensor> grads;
    for (const Tensor* p : session.network().parameters()) {
        std::vector<double> g(p->size(), 1e6);
        grads.push_back(Tensor::from_doubles(p->shape(), spec.format, g));
    }
    const StepOutcome out = session.apply_gradients(grads);
    CHECK(out.status == StepStatus::Diverged);
    CHECK(out.reason.find("non-finite") != std::string::npos);
}

TEST_CASE("comparison table") {
    const auto dir = synthetic::temp_dir("table");
    SUBCASE("empty directory") {
        CHECK(collect_table(dir).empty());
        CHECK(render_table({}) == "no results\n");
    }
    SUBCASE("posit16 beats float16") {
        write_json(dir / "a.json", fake_result(NumericFormat::binary16(), DatasetName::Mnist, {0.90, 0.91}, "t1"));
        write_json(dir / "b.json", fake_result(NumericFormat::posit(16, 1), DatasetName::Mnist, {0.96, 0.97}, "t2"));
        const auto rows = collect_table(dir);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].format_label == "Posit-16");
        CHECK(rows[0].best);
        CHECK_FALSE(rows[1].best);
        const std::string text = render_table(rows);
        CHECK(text.find("MNIST") != std::string::npos);
        CHECK(text.find("96.500% ± 0.707 *") != std::string::npos);
        const std::string csv = render_csv(rows);
        CHECK(csv.rfind("task,format", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    }
    SUBCASE("ordering across datasets and formats") {
        write_json(dir / "1.json", fake_result(NumericFormat::binary16(), DatasetName::FashionMnist, {0.8}, "t"));
        write_json(dir / "2.json", fake_result(NumericFormat::posit(32, 2), DatasetName::FashionMnist, {0.89}, "t"));
        write_json(dir / "3.json", fake_result(NumericFormat::binary32(), DatasetName::Mnist, {0.98}, "t"));
        write_json(dir / "4.json", fake_result(NumericFormat::posit(16, 1), DatasetName::Mnist, {0.96}, "t"));
        const auto rows = collect_table(dir);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].format_label == "Float-32");
        CHECK(rows[1].format_label == "Posit-16");
        CHECK(rows[2].format_label == "Posit-32");
        CHECK(rows[3].format_label == "Float-16");
        CHECK(rows[0].best);
        CHECK(rows[2].best);
    }
    SUBCASE("duplicate specs are both listed") {
        write_json(dir / "x.json", fake_result(NumericFormat::binary32(), DatasetName::Mnist, {0.97}, "2024-01-02"));
        write_json(dir / "y.json", fake_result(NumericFormat::binary32(), DatasetName::Mnist, {0.98}, "2024-01-01"));
        const auto rows = collect_table(dir);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].timestamp != rows[1].timestamp);
    }
    SUBCASE("malformed file") {
        std::ofstream(dir / "bad.json") << "{\"spec\": 3}";
        CHECK_THROWS_AS(collect_table(dir), ResultFileError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("timestamps are UTC ISO-8601") {
    const std::string t = utc_timestamp();
    CHECK(t.size() == 24);
    CHECK(t[10] == 'T');
    CHECK(t.back() == 'Z');
}

}  // TEST_SUITE
