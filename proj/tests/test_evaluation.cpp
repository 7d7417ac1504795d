#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "hierclass/error.hpp"
#include "hierclass/evaluation.hpp"

using namespace hierclass;

namespace {

ConfusionMatrix from_rows(std::vector<std::string> names, const std::vector<std::vector<std::uint64_t>>& rows) {
    ConfusionMatrix cm(std::move(names));
    for (std::size_t g = 0; g < rows.size(); ++g)
        for (std::size_t p = 0; p < rows[g].size(); ++p) cm.add(g, p, rows[g][p]);
    return cm;
}

std::vector<std::string> table_rows(const std::string& table, const std::string& model) {
    std::vector<std::string> rows;
    std::istringstream in(table);
    for (std::string line; std::getline(in, line);)
        if (line.rfind(model + " ", 0) == 0) rows.push_back(line);
    return rows;
}

std::vector<std::string> cells(const std::string& row) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto bar = row.find(" | ", start);
        std::string c = row.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
        c.erase(c.find_last_not_of(' ') + 1);
        out.push_back(c);
        if (bar == std::string::npos) break;
        start = bar + 3;
    }
    return out;
}

}  // namespace

TEST(Metrics, TwoByTwoExample) {
    const auto r = per_class_metrics(from_rows({"0", "1"}, {{8, 2}, {1, 9}}), "binary");
    EXPECT_EQ(r.n, 20u);
    EXPECT_DOUBLE_EQ(r.accuracy, 17.0 / 20.0);
    EXPECT_DOUBLE_EQ(r.classes[0].precision, 8.0 / 9.0);
    EXPECT_DOUBLE_EQ(r.classes[0].recall, 0.8);
    EXPECT_DOUBLE_EQ(r.classes[1].precision, 9.0 / 11.0);
    EXPECT_DOUBLE_EQ(r.classes[1].recall, 0.9);
    EXPECT_DOUBLE_EQ(r.classes[0].ovr_accuracy, 0.85);
    EXPECT_DOUBLE_EQ(r.classes[1].ovr_accuracy, 0.85);
    EXPECT_DOUBLE_EQ(r.macro_precision, (8.0 / 9.0 + 9.0 / 11.0) / 2.0);
    EXPECT_DOUBLE_EQ(r.macro_recall, 0.85);
}

TEST(Metrics, DiagonalIsPerfect) {
    const auto r = per_class_metrics(from_rows({"a", "b", "c"}, {{3, 0, 0}, {0, 5, 0}, {0, 0, 2}}));
    EXPECT_EQ(r.accuracy, 1.0);
    for (const auto& c : r.classes) {
        EXPECT_EQ(c.precision, 1.0);
        EXPECT_EQ(c.recall, 1.0);
        EXPECT_EQ(c.ovr_accuracy, 1.0);
    }
}

TEST(Metrics, ZeroOverZeroIsZero) {
    // Class "c" never occurs and is never predicted.
    const auto r = per_class_metrics(from_rows({"a", "b", "c"}, {{2, 1, 0}, {0, 4, 0}, {0, 0, 0}}));
    EXPECT_EQ(r.classes[2].precision, 0.0);
    EXPECT_EQ(r.classes[2].recall, 0.0);
    EXPECT_EQ(r.classes[2].ovr_accuracy, 1.0);

    const auto empty = per_class_metrics(ConfusionMatrix({"a", "b"}));
    EXPECT_EQ(empty.n, 0u);
    EXPECT_EQ(empty.accuracy, 0.0);
    for (const auto& c : empty.classes) {
        EXPECT_EQ(c.precision, 0.0);
        EXPECT_EQ(c.recall, 0.0);
        EXPECT_EQ(c.ovr_accuracy, 0.0);
    }
}

TEST(Metrics, MatchesPerRecordTally) {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 2 + gen() % 4;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < k; ++c) names.push_back("c" + std::to_string(c));
        std::vector<std::string> preds, golds;
        for (int i = 0; i < 500; ++i) {
            golds.push_back(names[gen() % k]);
            preds.push_back(gen() % 3 == 0 ? golds.back() : names[gen() % k]);
        }
        const auto cm = confusion(preds, golds, names);
        const auto r = per_class_metrics(cm);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i] == golds[i];
        EXPECT_EQ(cm.trace(), correct);
        EXPECT_EQ(r.accuracy, static_cast<double>(correct) / 500.0);
        for (std::size_t c = 0; c < k; ++c) {
            std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                const bool g = golds[i] == names[c], p = preds[i] == names[c];
                tp += g && p;
                fp += !g && p;
                fn += g && !p;
                tn += !g && !p;
            }
            EXPECT_EQ(r.classes[c].precision, tp + fp ? double(tp) / double(tp + fp) : 0.0);
            EXPECT_EQ(r.classes[c].recall, tp + fn ? double(tp) / double(tp + fn) : 0.0);
            EXPECT_EQ(r.classes[c].ovr_accuracy, double(tp + tn) / 500.0);
        }
    }
}

TEST(Metrics, PermutationInvariant) {
    std::mt19937_64 gen(3);
    const std::vector<std::string> names{"x", "y", "z"};
    std::vector<std::string> preds, golds;
    for (int i = 0; i < 200; ++i) {
        preds.push_back(names[gen() % 3]);
        golds.push_back(names[gen() % 3]);
    }
    const auto before = per_class_metrics(confusion(preds, golds, names));
    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<std::string> p2, g2;
    for (auto i : order) {
        p2.push_back(preds[i]);
        g2.push_back(golds[i]);
    }
    EXPECT_EQ(per_class_metrics(confusion(p2, g2, names)), before);
}

TEST(Metrics, BinaryRecallIsTruePositiveRate) {
    const std::vector<std::string> golds{"1", "1", "1", "0", "0", "1", "0", "1"};
    const std::vector<std::string> preds{"1", "0", "1", "1", "0", "1", "0", "0"};
    const auto r = per_class_metrics(confusion(preds, golds, {"0", "1"}));
    // 5 positives, 3 detected.
    EXPECT_DOUBLE_EQ(r.classes[1].recall, 3.0 / 5.0);
}

TEST(Metrics, ConfusionErrors) {
    const std::vector<std::string> a{"x"}, b{"x", "y"};
    EXPECT_THROW(confusion(a, b, {"x", "y"}), ValidationError);
    const std::vector<std::string> c{"q"};
    EXPECT_THROW(confusion(c, a, {"x"}), ValidationError);
    EXPECT_THROW(ConfusionMatrix({"x", "x"}), ValidationError);
}

TEST(Render, RowLayout) {
    const EvalReport r{"multiclass", {{"0", 0.6666, 0.449, 0.87}, {"1", 1.0, 0.0, 0.5}, {"2", 0.0, 0.0, 1.0}},
                       0.5, 0.5, 0.5, 100};
    const auto out = render_report(std::span(&r, 1), "encoder-base");
    const auto rows = table_rows(out.table, "encoder-base");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(cells(rows[0]), (std::vector<std::string>{"encoder-base", "0", "0.67", "0.45", "87%"}));
    EXPECT_EQ(cells(rows[1]), (std::vector<std::string>{"encoder-base", "1", "1.00", "0.00", "50%"}));
    EXPECT_NE(out.table.find("Model"), std::string::npos);
    EXPECT_NE(out.table.find("Precision"), std::string::npos);
    EXPECT_NE(out.table.find("Stage: multiclass"), std::string::npos);
    // Columns line up.
    const auto bar = rows[0].find('|');
    for (const auto& row : rows) EXPECT_EQ(row.find('|'), bar);
}

TEST(Render, MetricsRoundTripAndTableAgree) {
    std::mt19937_64 gen(8);
    std::vector<EvalReport> reports;
    for (const std::string stage : {"binary", "multiclass", "end_to_end"}) {
        const std::size_t k = stage == "binary" ? 2 : 3;
        std::vector<std::string> names;
        for (std::size_t c = 0; c < k; ++c) names.push_back(stage + std::to_string(c));
        std::vector<std::string> p, g;
        for (int i = 0; i < 77; ++i) {
            p.push_back(names[gen() % k]);
            g.push_back(names[gen() % k]);
        }
        reports.push_back(per_class_metrics(confusion(p, g, names), stage));
    }
    const auto out = render_report(reports, "m");
    std::string model;
    EXPECT_EQ(parse_metrics_json(out.metrics_json, &model), reports);
    EXPECT_EQ(model, "m");

    const auto rows = table_rows(out.table, "m");
    ASSERT_EQ(rows.size(), 8u);
    std::size_t i = 0;
    for (const auto& r : reports) {
        for (const auto& c : r.classes) {
            const auto cs = cells(rows[i++]);
            EXPECT_EQ(cs[1], c.name);
            EXPECT_NEAR(std::stod(cs[2]), c.precision, 0.005 + 1e-12);
            EXPECT_NEAR(std::stod(cs[3]), c.recall, 0.005 + 1e-12);
            EXPECT_NEAR(std::stod(cs[4]) / 100.0, c.ovr_accuracy, 0.005 + 1e-12);
        }
    }
}

TEST(Render, MalformedMetricsRejected) {
    EXPECT_THROW(parse_metrics_json("{"), IoError);
    EXPECT_THROW(parse_metrics_json(R"({"model":"x"})"), IoError);
}
