#include <gtest/gtest.h>

#include <filesystem>
#include <algorithm>
#include <random>
#include <set>

#include "hierclass/corpus.hpp"
#include "hierclass/error.hpp"
#include "hierclass/rng.hpp"

using namespace hierclass;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path dir = fs::temp_directory_path() / "hierclass_corpus_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    write_file(p, content);
    return p;
}

Dataset random_dataset(std::mt19937_64& gen, std::size_t n_labels, std::size_t min_per_label,
                       std::size_t max_per_label) {
    std::vector<Record> records;
    for (std::size_t l = 0; l < n_labels; ++l) {
        const std::size_t count = min_per_label + gen() % (max_per_label - min_per_label + 1);
        for (std::size_t i = 0; i < count; ++i) {
            records.push_back({"text " + std::to_string(l) + "/" + std::to_string(i), "L" + std::to_string(l)});
        }
    }
    std::shuffle(records.begin(), records.end(), gen);
    return Dataset(std::move(records));
}

}  // namespace

TEST(LoadDataset, CsvTwoRows) {
    const auto p = temp_file("two.csv", "text,label\nyou are kind,neither\n<slur> people,hate\n");
    const Dataset ds = load_dataset(p, DataFormat::csv);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.records()[0], (Record{"you are kind", "neither"}));
    EXPECT_EQ(ds.records()[1], (Record{"<slur> people", "hate"}));
    EXPECT_EQ(ds.labels(), (std::vector<std::string>{"neither", "hate"}));
}

TEST(LoadDataset, HeaderOnlyCsvIsEmpty) {
    const Dataset ds = load_dataset(temp_file("empty.csv", "text,label\n"));
    EXPECT_EQ(ds.size(), 0u);
    EXPECT_TRUE(ds.labels().empty());
}

TEST(LoadDataset, JsonlLine) {
    const Dataset ds = load_dataset(temp_file("one.jsonl", "{\"text\":\"go away\",\"label\":\"offensive\"}\n"));
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds.records()[0], (Record{"go away", "offensive"}));
}

TEST(LoadDataset, QuotedFieldsAndColumnOrder) {
    const Dataset ds = parse_csv("label,text\nhate,\"a, \"\"quoted\"\"\nline\"\nneither,\"\"\n");
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.records()[0].text, "a, \"quoted\"\nline");
    EXPECT_EQ(ds.records()[1].text, "");
}

TEST(LoadDataset, Errors) {
    EXPECT_THROW(load_dataset("/nonexistent/file.csv"), IoError);
    try {
        parse_csv("text,label\nok,a\nbad row without label\n", "x.csv");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("x.csv:3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_csv("body,label\nx,a\n"), IoError);
    EXPECT_THROW(parse_csv("text,label\n\"unterminated,a\n"), IoError);
    EXPECT_THROW(parse_csv("text,label\n\xff\xfe,a\n"), IoError);
    EXPECT_THROW(parse_csv("text,label\nx,\n"), IoError);
    EXPECT_THROW(parse_jsonl("{\"text\":\"x\"}\n"), IoError);
    EXPECT_THROW(parse_jsonl("{\"text\":\"x\",\"label\":3}\n"), IoError);
    try {
        parse_jsonl("{\"text\":\"x\",\"label\":\"a\"}\n{broken\n", "y.jsonl");
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("y.jsonl:2"), std::string::npos) << e.what();
    }
}

TEST(LoadDataset, RoundTripProperty) {
    std::mt19937_64 gen(3);
    const std::string alphabet[] = {"a", "b", " ", ",", "\"", "\n", "\r\n", "é", "日", "😀", "\t", "x y"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Record> records;
        const std::size_t n = gen() % 8;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            const std::size_t len = gen() % 10;
            for (std::size_t k = 0; k < len; ++k) text += alphabet[gen() % std::size(alphabet)];
            std::string label = "l" + alphabet[gen() % std::size(alphabet)];
            records.push_back({text, label});
        }
        const Dataset ds(records);
        EXPECT_EQ(parse_csv(to_csv(ds)), ds);
        EXPECT_EQ(parse_jsonl(to_jsonl(ds)), ds);
    }
}

TEST(ClassDistribution, Examples) {
    const Dataset ds(std::vector<Record>{{"1", "a"}, {"2", "a"}, {"3", "b"}});
    EXPECT_EQ(class_distribution(ds), (std::map<std::string, std::size_t>{{"a", 2}, {"b", 1}}));
    EXPECT_TRUE(class_distribution(Dataset{}).empty());
}

TEST(ClassDistribution, MatchesPerRecordTally) {
    std::mt19937_64 gen(11);
    std::vector<Record> records;
    for (int i = 0; i < 1000; ++i) records.push_back({"t", std::string(1, static_cast<char>('a' + gen() % 3))});
    const Dataset ds(records);
    const auto counts = class_distribution(ds);
    std::size_t total = 0;
    for (const auto& [label, count] : counts) {
        std::size_t tally = 0;
        for (const auto& r : records) tally += (r.label == label);
        EXPECT_EQ(count, tally);
        total += count;
    }
    EXPECT_EQ(total, 1000u);
    EXPECT_EQ(counts.size(), 3u);
}

TEST(StratifiedSplit, TenPerLabel) {
    std::vector<Record> records;
    for (int l = 0; l < 3; ++l) {
        for (int i = 0; i < 10; ++i) records.push_back({std::to_string(i), "L" + std::to_string(l)});
    }
    const Split s = stratified_split(Dataset(records), 0.2, 42);
    for (const auto& [label, count] : class_distribution(s.test)) EXPECT_EQ(count, 2u) << label;
    EXPECT_EQ(s.train.size(), 24u);
}

TEST(StratifiedSplit, RoundingAndClamping) {
    EXPECT_EQ(stratified_test_count(9, 0.33), 3u);
    EXPECT_EQ(stratified_test_count(3, 0.33), 1u);
    EXPECT_EQ(stratified_test_count(2, 0.01), 1u);
    EXPECT_EQ(stratified_test_count(2, 0.99), 1u);
    std::vector<Record> records;
    for (int i = 0; i < 9; ++i) records.push_back({"a" + std::to_string(i), "a"});
    for (int i = 0; i < 3; ++i) records.push_back({"b" + std::to_string(i), "b"});
    const auto counts = class_distribution(stratified_split(Dataset(records), 0.33, 1).test);
    EXPECT_EQ(counts.at("a"), 3u);
    EXPECT_EQ(counts.at("b"), 1u);
}

TEST(StratifiedSplit, Errors) {
    EXPECT_THROW(stratified_split(Dataset(std::vector<Record>{{"x", "a"}, {"y", "a"}, {"z", "b"}}), 0.5, 0), ValidationError);
    EXPECT_THROW(stratified_split(Dataset(std::vector<Record>{{"x", "a"}, {"y", "a"}}), 1.0, 0), ValidationError);
}

TEST(StratifiedSplit, PartitionStratificationDeterminism) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Dataset ds = random_dataset(gen, 1 + gen() % 4, 2, 40);
        const double fraction = 0.05 + 0.9 * static_cast<double>(gen() % 1000) / 1000.0;
        const std::uint64_t seed = gen();
        const Split a = stratified_split(ds, fraction, seed);
        const Split b = stratified_split(ds, fraction, seed);
        EXPECT_EQ(a.train, b.train);
        EXPECT_EQ(a.test, b.test);

        // Texts are unique, so multiset equality reduces to set equality plus sizes.
        std::multiset<std::string> all, parts;
        for (const auto& r : ds.records()) all.insert(r.text + "|" + r.label);
        for (const auto* half : {&a.train, &a.test}) {
            for (const auto& r : half->records()) parts.insert(r.text + "|" + r.label);
        }
        EXPECT_EQ(all, parts);

        const auto total = class_distribution(ds);
        const auto test = class_distribution(a.test);
        for (const auto& [label, count] : total) {
            const double tc = test.count(label) ? static_cast<double>(test.at(label)) : 0.0;
            EXPECT_LE(std::abs(tc - static_cast<double>(count) * fraction), 1.0);
        }
    }
}

TEST(StratifiedSplit, PreservesSourceOrder) {
    std::vector<Record> records;
    for (int i = 0; i < 40; ++i) records.push_back({std::to_string(1000 + i), i % 2 ? "a" : "b"});
    const Split s = stratified_split(Dataset(records), 0.3, 9);
    for (const auto* half : {&s.train, &s.test}) {
        for (std::size_t i = 1; i < half->size(); ++i) {
            EXPECT_LT(half->records()[i - 1].text, half->records()[i].text);
        }
    }
}
