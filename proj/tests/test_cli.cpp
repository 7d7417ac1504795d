#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "json.hpp"

#include "cli_runner.hpp"
#include "hierclass/cli.hpp"
#include "hierclass/error.hpp"

using namespace hierclass;
using hierclass::testing::run_cli;
using hierclass::testing::write_config;
namespace fs = std::filesystem;

namespace {

const std::string kTinyModel = R"("d_model":16,"n_heads":2,"n_layers":1,"d_ff":16,"seed":2)";

fs::path fresh(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("hierclass_cli_" + name);
    fs::remove_all(d);
    return d;
}

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

// Trains once per process and shares the result between tests.
const fs::path& trained_dir() {
    static const fs::path dir = [] {
        const fs::path d = fresh("trained");
        const auto cfg = write_config(d, "synthetic_3label.csv", kTinyModel, R"("epochs":3,"batch_size":32)", 400);
        const auto r = run_cli({"train", "--config", cfg.string()});
        EXPECT_EQ(r.code, 0) << r.out;
        return d;
    }();
    return dir;
}

}  // namespace

TEST(Cli, TokenizerTrainIsReproducible) {
    const fs::path d = fresh("tok");
    const auto cfg = write_config(d, "synthetic_3label.csv", "", "", 300);
    ASSERT_EQ(run_cli({"tokenizer-train", "--config", cfg.string()}).code, 0);
    const std::string vocab = read_file(d / "out/tokenizer/vocab.json");
    const std::string merges = read_file(d / "out/tokenizer/merges.txt");
    const Tokenizer tok = Tokenizer::load(d / "out/tokenizer");
    EXPECT_EQ(tok.vocab_size(), 300u);
    ASSERT_EQ(run_cli({"tokenizer-train", "--config", cfg.string()}).code, 0);
    EXPECT_EQ(read_file(d / "out/tokenizer/vocab.json"), vocab);
    EXPECT_EQ(read_file(d / "out/tokenizer/merges.txt"), merges);
}

TEST(Cli, ExitCodes) {
    const fs::path d = fresh("codes");
    const auto small_vocab = write_config(d, "synthetic_3label.csv", "", "", 100);
    EXPECT_EQ(run_cli({"tokenizer-train", "--config", small_vocab.string()}).code, cli::kConfigError);
    EXPECT_EQ(run_cli({"tokenizer-train", "--config", (d / "nope.json").string()}).code, cli::kIoError);
    EXPECT_EQ(run_cli({"train"}).code, cli::kConfigError);
    EXPECT_EQ(run_cli({"bogus"}).code, cli::kConfigError);
    EXPECT_EQ(run_cli({"predict", "--checkpoint", (d / "missing").string(), "--text", "x"}).code, cli::kIoError);
    const auto good = write_config(d, "synthetic_3label.csv", "", "", 300);
    EXPECT_EQ(run_cli({"train", "--config", good.string(), "--set", "training.epochs=0"}).code, cli::kConfigError);
    EXPECT_EQ(run_cli({"train", "--config", good.string(), "--set", "model.n_classes=4"}).code, cli::kConfigError);
    EXPECT_EQ(run_cli({"train", "--config", good.string(), "--set", "wat.x=1"}).code, cli::kConfigError);
    EXPECT_EQ(run_cli({"--help"}).code, cli::kOk);
}

TEST(Cli, TrainWritesCurvesAndSplits) {
    const fs::path& d = trained_dir();
    const std::string c1 = read_file(d / "out/curves_stage1.csv");
    const std::string c2 = read_file(d / "out/curves_stage2.csv");
    EXPECT_EQ(line_count(c1), 4u);  // header + 3 epochs
    EXPECT_EQ(line_count(c2), 4u);
    EXPECT_EQ(c1.substr(0, c1.find('\n')), "epoch,train_loss,train_acc,test_acc");
    const Dataset train = load_dataset(d / "out/train.csv");
    const Dataset test = load_dataset(d / "out/test.csv");
    EXPECT_EQ(train.size() + test.size(), 600u);
    EXPECT_TRUE(fs::exists(d / "out/checkpoint/manifest.json"));
    const auto manifest = nlohmann::json::parse(read_file(d / "out/checkpoint/manifest.json"));
    EXPECT_EQ(manifest["train_config"]["epochs"], 3);
}

TEST(Cli, EvaluateReportsEveryStage) {
    const fs::path& d = trained_dir();
    const fs::path metrics = d / "m.json";
    const auto r = run_cli({"evaluate", "--checkpoint", (d / "out/checkpoint").string(), "--data",
                            (d / "out/test.csv").string(), "--metrics", metrics.string(), "--model-name", "tiny"});
    ASSERT_EQ(r.code, 0) << r.out;
    std::size_t rows = 0;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) rows += line.rfind("tiny ", 0) == 0;
    EXPECT_EQ(rows, 2u + 2u + 3u);
    std::string model;
    const auto reports = parse_metrics_json(read_file(metrics), &model);
    EXPECT_EQ(model, "tiny");
    ASSERT_EQ(reports.size(), 3u);
    EXPECT_EQ(reports[0].stage, "binary");
    EXPECT_EQ(reports[1].stage, "multiclass");
    EXPECT_EQ(reports[2].stage, "end_to_end");
    EXPECT_EQ(reports[2].n, 120u);
    EXPECT_EQ(reports[1].n, 48u);

    // Default metrics location, and jsonl input.
    const Dataset test = load_dataset(d / "out/test.csv");
    save_dataset(test, d / "test.jsonl", DataFormat::jsonl);
    const auto r2 = run_cli({"evaluate", "--checkpoint", (d / "out/checkpoint").string(), "--data",
                             (d / "test.jsonl").string(), "--model-name", "tiny"});
    ASSERT_EQ(r2.code, 0) << r2.out;
    EXPECT_EQ(r2.out, r.out);
    EXPECT_EQ(read_file(d / "out/checkpoint/metrics.json"), read_file(metrics));
}

TEST(Cli, EvaluateRejectsUnknownLabels) {
    const fs::path& d = trained_dir();
    save_dataset(Dataset(std::vector<Record>{{"hello", "martian"}}), d / "odd.csv", DataFormat::csv);
    EXPECT_EQ(run_cli({"evaluate", "--checkpoint", (d / "out/checkpoint").string(), "--data",
                       (d / "odd.csv").string()})
                  .code,
              cli::kConfigError);
}

TEST(Cli, PredictMatchesLibrary) {
    const fs::path& d = trained_dir();
    const HierarchicalModel h = load_checkpoint(d / "out/checkpoint");
    for (const std::string text : {"you idiot", "", "what a lovely morning", "vermin scum trash 🙂"}) {
        const auto r = run_cli({"predict", "--checkpoint", (d / "out/checkpoint").string(), "--text", text});
        ASSERT_EQ(r.code, 0) << r.out;
        const auto j = nlohmann::json::parse(r.out);
        const Prediction p = predict(h, text);
        EXPECT_EQ(j["label"].get<std::string>(), p.label);
        EXPECT_EQ(j["p1"].get<double>(), p.trace.p1);
        EXPECT_EQ(j.contains("dist2"), p.trace.p1 < h.threshold);
        if (j.contains("dist2")) {
            EXPECT_EQ(j["dist2"].size(), h.schema.merged().size());
            double sum = 0.0;
            for (const auto& [k, v] : j["dist2"].items()) sum += v.get<double>();
            EXPECT_NEAR(sum, 1.0, 1e-12);
        }
    }
}

TEST(Cli, SeedOverrideChangesEverySeed) {
    const fs::path d = fresh("seed");
    const auto cfg = write_config(d, "synthetic_3label.csv", kTinyModel, R"("epochs":1)", 300);
    const cli::RunConfig rc = cli::load_run_config(cfg, {"training.batch_size=8"}, 77);
    EXPECT_EQ(rc.model.seed, 77u);
    EXPECT_EQ(rc.training.seed, 77u);
    EXPECT_EQ(rc.split_seed, 77u);
    EXPECT_EQ(rc.training.batch_size, 8u);
    EXPECT_EQ(rc.model.d_model, 16u);
    EXPECT_EQ(rc.dataset, fs::path(HIERCLASS_DATA_DIR) / "synthetic_3label.csv");
}

TEST(Cli, OverrideParsing) {
    nlohmann::json doc = nlohmann::json::object();
    cli::apply_override(doc, "training.learning_rate=0.01");
    cli::apply_override(doc, "model_name=plain text");
    cli::apply_override(doc, "a.b.c=true");
    EXPECT_EQ(doc["training"]["learning_rate"], 0.01);
    EXPECT_EQ(doc["model_name"], "plain text");
    EXPECT_EQ(doc["a"]["b"]["c"], true);
    EXPECT_THROW(cli::apply_override(doc, "novalue"), ValidationError);
    EXPECT_THROW(cli::apply_override(doc, "a..b=1"), ValidationError);
}
