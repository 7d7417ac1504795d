#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hierclass/corpus.hpp"
#include "hierclass/model.hpp"
#include "hierclass/sentiment.hpp"
#include "hierclass/tokenizer.hpp"

namespace hierclass {

// Dominant label vs. the merged remainder. Binary stage: dominant -> 1,
// merged -> 0. Multiclass stage: merged[i] -> i.
class LabelSchema {
  public:
    LabelSchema(std::string dominant, std::vector<std::string> merged);

    const std::string& dominant() const { return dominant_; }
    const std::vector<std::string>& merged() const { return merged_; }
    // Dominant first, then the merged labels.
    std::vector<std::string> original_labels() const;

    bool contains(const std::string& label) const;
    std::size_t binary_label(const std::string& label) const;
    std::optional<std::size_t> multiclass_index(const std::string& label) const;

    bool operator==(const LabelSchema&) const = default;

  private:
    std::string dominant_;
    std::vector<std::string> merged_;
};

// Dominant = highest count (lexicographically smallest on ties), merged = the
// rest in lexicographic order.
LabelSchema build_schema(const std::map<std::string, std::size_t>& distribution);

struct LabeledText {
    std::string text;
    std::size_t label;

    bool operator==(const LabeledText&) const = default;
};

std::vector<LabeledText> project_binary(const Dataset& dataset, const LabelSchema& schema);
std::vector<LabeledText> project_multiclass(const Dataset& dataset, const LabelSchema& schema);

struct HierarchicalModel {
    Tokenizer tokenizer;
    Lexicon lexicon;
    LabelSchema schema;
    ModelParams stage1;
    std::optional<ModelParams> stage2;  // absent when only one label was merged
    double threshold = 0.5;

    void validate() const;
};

struct PredictionTrace {
    double p1 = 0.0;
    std::optional<RowVector> dist2;
};

struct Prediction {
    std::string label;
    PredictionTrace trace;
};

// Featurization shared by training and inference.
Example make_example(const Tokenizer& tok, const Lexicon& lex, std::size_t max_len, const std::string& text,
                     std::size_t label = 0);

Prediction predict(const HierarchicalModel& h, const std::string& text);

// Stage-1 probability and, when stage 2 exists, its distribution regardless of
// routing. Used to score each stage on its own.
double stage1_probability(const HierarchicalModel& h, const std::string& text);
std::optional<RowVector> stage2_distribution(const HierarchicalModel& h, const std::string& text);

}  // namespace hierclass
