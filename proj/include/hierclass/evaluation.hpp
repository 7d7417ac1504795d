#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hierclass {

// Rows are gold classes, columns predicted classes.
class ConfusionMatrix {
  public:
    explicit ConfusionMatrix(std::vector<std::string> classes);

    const std::vector<std::string>& classes() const { return classes_; }
    std::size_t size() const { return classes_.size(); }
    std::uint64_t at(std::size_t gold, std::size_t pred) const { return counts_[gold * size() + pred]; }
    void add(std::size_t gold, std::size_t pred, std::uint64_t n = 1);
    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::size_t index_of(const std::string& name) const;

    bool operator==(const ConfusionMatrix&) const = default;

  private:
    std::vector<std::string> classes_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::string> preds, std::span<const std::string> golds,
                          std::vector<std::string> class_names);

struct ClassMetrics {
    std::string name;
    double precision = 0.0;
    double recall = 0.0;
    double ovr_accuracy = 0.0;  // (TP + TN) / n

    bool operator==(const ClassMetrics&) const = default;
};

struct EvalReport {
    std::string stage;
    std::vector<ClassMetrics> classes;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    std::uint64_t n = 0;

    bool operator==(const EvalReport&) const = default;
};

// 0/0 ratios are 0.
EvalReport per_class_metrics(const ConfusionMatrix& cm, std::string stage = {});

struct RenderedReport {
    std::string table;
    std::string metrics_json;
};

// Fixed-width "Model | Class | Precision | Recall | Accuracy" tables, one per
// stage, and a JSON document with full-precision values.
RenderedReport render_report(std::span<const EvalReport> reports, const std::string& model_name);

std::vector<EvalReport> parse_metrics_json(const std::string& json, std::string* model_name = nullptr);

}  // namespace hierclass
