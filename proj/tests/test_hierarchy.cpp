#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "hierclass/error.hpp"
#include "hierclass/hierarchy.hpp"
#include "hierclass/training.hpp"

using namespace hierclass;

namespace {

ModelConfig tiny(std::size_t n_classes, std::uint64_t seed) {
    ModelConfig c;
    c.vocab_size = 260;
    c.max_len = 12;
    c.d_model = 8;
    c.n_heads = 2;
    c.n_layers = 1;
    c.d_ff = 8;
    c.n_classes = n_classes;
    c.seed = seed;
    return c;
}

// Model whose stage outputs are fixed: head weights zeroed, biases set.
HierarchicalModel fixed_model(const LabelSchema& schema, double p1, const std::vector<double>& dist2) {
    HierarchicalModel h{Tokenizer{}, Lexicon{}, schema, init_model(tiny(1, 1)), std::nullopt, 0.5};
    h.stage1.head_w.setZero();
    h.stage1.head_b(0, 0) = std::log(p1 / (1.0 - p1));
    if (schema.merged().size() >= 2) {
        ModelParams s2 = init_model(tiny(schema.merged().size(), 2));
        s2.head_w.setZero();
        for (std::size_t i = 0; i < dist2.size(); ++i) s2.head_b(0, static_cast<Eigen::Index>(i)) = std::log(dist2[i]);
        h.stage2 = std::move(s2);
    }
    return h;
}

}  // namespace

TEST(BuildSchema, ArgmaxDominant) {
    const LabelSchema s = build_schema({{"offensive", 900}, {"hate", 60}, {"neither", 140}});
    EXPECT_EQ(s.dominant(), "offensive");
    EXPECT_EQ(s.merged(), (std::vector<std::string>{"hate", "neither"}));
    EXPECT_EQ(s.binary_label("offensive"), 1u);
    EXPECT_EQ(s.binary_label("hate"), 0u);
    EXPECT_EQ(s.multiclass_index("neither"), 1u);
}

TEST(BuildSchema, TieGoesToSmallestLabel) {
    const LabelSchema s = build_schema({{"b", 5}, {"a", 5}});
    EXPECT_EQ(s.dominant(), "a");
    EXPECT_EQ(s.merged(), (std::vector<std::string>{"b"}));
}

TEST(BuildSchema, FourLabelsPartitionAndBijection) {
    const LabelSchema s = build_schema({{"w", 4}, {"x", 9}, {"y", 1}, {"z", 3}});
    EXPECT_EQ(s.dominant(), "x");
    ASSERT_EQ(s.merged().size(), 3u);
    std::set<std::size_t> indices;
    for (const auto& l : s.merged()) indices.insert(*s.multiclass_index(l));
    EXPECT_EQ(indices, (std::set<std::size_t>{0, 1, 2}));
}

TEST(BuildSchema, Errors) {
    EXPECT_THROW(build_schema({{"only", 3}}), ValidationError);
    EXPECT_THROW(build_schema({}), ValidationError);
    EXPECT_THROW(LabelSchema("a", {"a"}), ValidationError);
    EXPECT_THROW(LabelSchema("a", {}), ValidationError);
}

TEST(Projections, BinaryAndMulticlass) {
    const Dataset ds(std::vector<Record>{{"t1", "offensive"}, {"t2", "hate"}, {"t3", "neither"}, {"t4", "offensive"}});
    const LabelSchema s = build_schema(class_distribution(ds));
    const auto bin = project_binary(ds, s);
    EXPECT_EQ(bin, (std::vector<LabeledText>{{"t1", 1}, {"t2", 0}, {"t3", 0}, {"t4", 1}}));
    const auto mc = project_multiclass(ds, s);
    EXPECT_EQ(mc, (std::vector<LabeledText>{{"t2", 0}, {"t3", 1}}));

    const Dataset only_dominant(std::vector<Record>{{"x", "offensive"}});
    EXPECT_TRUE(project_multiclass(only_dominant, s).empty());
    const Dataset unknown(std::vector<Record>{{"x", "spam"}});
    EXPECT_THROW(project_binary(unknown, s), ValidationError);
    EXPECT_THROW(project_multiclass(unknown, s), ValidationError);
}

TEST(Projections, CountsMatchRecount) {
    std::vector<Record> records;
    for (int i = 0; i < 60; ++i) records.push_back({"h" + std::to_string(i), "hate"});
    for (int i = 0; i < 140; ++i) records.push_back({"n" + std::to_string(i), "neither"});
    for (int i = 0; i < 900; ++i) records.push_back({"o" + std::to_string(i), "offensive"});
    std::shuffle(records.begin(), records.end(), std::mt19937_64(3));
    const Dataset ds(records);
    const LabelSchema s = build_schema(class_distribution(ds));
    const auto bin = project_binary(ds, s);
    std::size_t ones = 0;
    for (const auto& b : bin) ones += b.label;
    EXPECT_EQ(ones, 900u);
    EXPECT_EQ(bin.size() - ones, 200u);
    const auto mc = project_multiclass(ds, s);
    EXPECT_EQ(mc.size(), 200u);
    // Order is preserved: the k-th merged record in the source is the k-th output.
    std::size_t k = 0;
    for (const auto& r : ds.records()) {
        if (r.label == "offensive") continue;
        EXPECT_EQ(mc[k].text, r.text);
        EXPECT_EQ(s.merged()[mc[k].label], r.label);
        ++k;
    }
}

TEST(Predict, DominantRoute) {
    const LabelSchema s("offensive", {"hate", "neither"});
    const HierarchicalModel h = fixed_model(s, 0.9, {0.5, 0.5});
    const Prediction p = predict(h, "anything");
    EXPECT_EQ(p.label, "offensive");
    EXPECT_NEAR(p.trace.p1, 0.9, 1e-12);
    EXPECT_FALSE(p.trace.dist2.has_value());
}

TEST(Predict, MergedRouteArgmax) {
    const LabelSchema s("offensive", {"a", "b", "c"});
    const HierarchicalModel h = fixed_model(s, 0.3, {0.2, 0.7, 0.1});
    const Prediction p = predict(h, "anything");
    EXPECT_EQ(p.label, "b");
    ASSERT_TRUE(p.trace.dist2.has_value());
    EXPECT_NEAR((*p.trace.dist2)(1), 0.7, 1e-12);
}

TEST(Predict, ArgmaxTieGoesToLowestIndex) {
    const LabelSchema s("offensive", {"a", "b", "c"});
    const HierarchicalModel h = fixed_model(s, 0.3, {0.25, 0.375, 0.375});
    EXPECT_EQ(predict(h, "x").label, "b");
}

TEST(Predict, DegenerateSingleMergedLabel) {
    const LabelSchema s("offensive", {"hate"});
    const HierarchicalModel h = fixed_model(s, 0.2, {});
    EXPECT_FALSE(h.stage2.has_value());
    const Prediction p = predict(h, "");
    EXPECT_EQ(p.label, "hate");
    EXPECT_FALSE(p.trace.dist2.has_value());
}

TEST(Predict, RoutingAuditOverRandomModels) {
    std::mt19937_64 gen(13);
    const std::vector<std::string> texts{"", "hello", "you idiot", "vermin everywhere", "ça va? 日本", "a b c d e f g h"};
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t m = 1 + gen() % 3;
        std::vector<std::string> merged;
        for (std::size_t i = 0; i < m; ++i) merged.push_back("m" + std::to_string(i));
        const LabelSchema s("dom", merged);
        HierarchicalModel h{Tokenizer{}, Lexicon{}, s, init_model(tiny(1, gen())), std::nullopt,
                            0.05 + 0.9 * static_cast<double>(gen() % 100) / 100.0};
        if (m >= 2) h.stage2 = init_model(tiny(m, gen()));
        for (const auto& t : texts) {
            const Prediction p = predict(h, t);
            const auto labels = s.original_labels();
            EXPECT_NE(std::find(labels.begin(), labels.end(), p.label), labels.end());
            EXPECT_EQ(p.trace.dist2.has_value(), m >= 2 && p.trace.p1 < h.threshold);
            EXPECT_EQ(p.label == "dom", p.trace.p1 >= h.threshold);
        }
    }
}

TEST(Predict, ThresholdMonotonicity) {
    const LabelSchema s("dom", {"x", "y"});
    HierarchicalModel h{Tokenizer{}, Lexicon{}, s, init_model(tiny(1, 3)), init_model(tiny(2, 4)), 0.5};
    for (const std::string t : {"", "abc", "some longer text here"}) {
        bool merged_seen = false;
        for (double th = 0.01; th < 1.0; th += 0.01) {
            h.threshold = th;
            const bool dominant = predict(h, t).label == "dom";
            if (merged_seen) EXPECT_FALSE(dominant) << "threshold " << th;
            merged_seen |= !dominant;
        }
    }
}

TEST(HierarchicalModel, Validation) {
    const LabelSchema s("dom", {"x", "y"});
    HierarchicalModel h{Tokenizer{}, Lexicon{}, s, init_model(tiny(1, 3)), std::nullopt, 0.5};
    EXPECT_THROW(h.validate(), ModelError);
    h.stage2 = init_model(tiny(3, 4));
    EXPECT_THROW(h.validate(), ModelError);
    h.stage2 = init_model(tiny(2, 4));
    EXPECT_NO_THROW(h.validate());
    h.threshold = 1.0;
    EXPECT_THROW(h.validate(), ValidationError);
}
