#include "hierclass/hierarchy.hpp"

#include <algorithm>

#include "hierclass/error.hpp"

namespace hierclass {

LabelSchema::LabelSchema(std::string dominant, std::vector<std::string> merged)
    : dominant_(std::move(dominant)), merged_(std::move(merged)) {
    if (dominant_.empty()) throw ValidationError("dominant label is empty");
    if (merged_.empty()) throw ValidationError("schema needs at least one merged label");
    std::vector<std::string> all = original_labels();
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) throw ValidationError("schema labels are not distinct");
}

std::vector<std::string> LabelSchema::original_labels() const {
    std::vector<std::string> out{dominant_};
    out.insert(out.end(), merged_.begin(), merged_.end());
    return out;
}

bool LabelSchema::contains(const std::string& label) const {
    return label == dominant_ || multiclass_index(label).has_value();
}

std::size_t LabelSchema::binary_label(const std::string& label) const {
    if (label == dominant_) return 1;
    if (multiclass_index(label)) return 0;
    throw ValidationError("label '" + label + "' is not in the schema");
}

std::optional<std::size_t> LabelSchema::multiclass_index(const std::string& label) const {
    const auto it = std::find(merged_.begin(), merged_.end(), label);
    if (it == merged_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - merged_.begin());
}

LabelSchema build_schema(const std::map<std::string, std::size_t>& distribution) {
    if (distribution.size() < 2) throw ValidationError("need at least 2 distinct labels to build a schema");
    // std::map iterates lexicographically, so the first maximum wins ties.
    auto dominant = distribution.begin();
    for (auto it = distribution.begin(); it != distribution.end(); ++it) {
        if (it->second > dominant->second) dominant = it;
    }
    std::vector<std::string> merged;
    for (const auto& [label, count] : distribution) {
        if (label != dominant->first) merged.push_back(label);
    }
    return LabelSchema(dominant->first, std::move(merged));
}

std::vector<LabeledText> project_binary(const Dataset& dataset, const LabelSchema& schema) {
    std::vector<LabeledText> out;
    out.reserve(dataset.size());
    for (const auto& r : dataset.records()) out.push_back({r.text, schema.binary_label(r.label)});
    return out;
}

std::vector<LabeledText> project_multiclass(const Dataset& dataset, const LabelSchema& schema) {
    std::vector<LabeledText> out;
    for (const auto& r : dataset.records()) {
        if (r.label == schema.dominant()) continue;
        const auto idx = schema.multiclass_index(r.label);
        if (!idx) throw ValidationError("label '" + r.label + "' is not in the schema");
        out.push_back({r.text, *idx});
    }
    return out;
}

void HierarchicalModel::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
    if (!stage1.config.binary()) throw ModelError("stage 1 must have a single-logit head");
    const std::size_t m = schema.merged().size();
    if (m >= 2) {
        if (!stage2) throw ModelError("stage 2 missing for a schema with several merged labels");
        if (stage2->config.n_classes != m) throw ModelError("stage 2 head width differs from merged label count");
    } else if (stage2) {
        throw ModelError("stage 2 present although only one label was merged");
    }
    for (const ModelParams* p : {&stage1, stage2 ? &*stage2 : nullptr}) {
        if (p && p->config.vocab_size < tokenizer.vocab_size()) {
            throw ModelError("model vocabulary smaller than tokenizer vocabulary");
        }
    }
}

Example make_example(const Tokenizer& tok, const Lexicon& lex, std::size_t max_len, const std::string& text,
                     std::size_t label) {
    return Example{tok.encode(text, max_len), extract_features(text, lex), label};
}

Prediction predict(const HierarchicalModel& h, const std::string& text) {
    Prediction out;
    const Example ex1 = make_example(h.tokenizer, h.lexicon, h.stage1.config.max_len, text);
    out.trace.p1 = predict_binary(forward(h.stage1, ex1.seq, ex1.senti)(0));
    if (out.trace.p1 >= h.threshold) {
        out.label = h.schema.dominant();
        return out;
    }
    if (!h.stage2) {
        out.label = h.schema.merged().front();
        return out;
    }
    const ModelParams& s2 = *h.stage2;
    const Example ex2 =
        s2.config.max_len == ex1.seq.ids.size() ? ex1 : make_example(h.tokenizer, h.lexicon, s2.config.max_len, text);
    out.trace.dist2 = predict_multiclass(forward(s2, ex2.seq, ex2.senti));
    out.label = h.schema.merged()[argmax(*out.trace.dist2)];
    return out;
}

double stage1_probability(const HierarchicalModel& h, const std::string& text) {
    const Example ex = make_example(h.tokenizer, h.lexicon, h.stage1.config.max_len, text);
    return predict_binary(forward(h.stage1, ex.seq, ex.senti)(0));
}

std::optional<RowVector> stage2_distribution(const HierarchicalModel& h, const std::string& text) {
    if (!h.stage2) return std::nullopt;
    const Example ex = make_example(h.tokenizer, h.lexicon, h.stage2->config.max_len, text);
    return predict_multiclass(forward(*h.stage2, ex.seq, ex.senti));
}

}  // namespace hierclass
