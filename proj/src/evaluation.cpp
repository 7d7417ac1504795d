#include "hierclass/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "json.hpp"

#include "hierclass/error.hpp"

namespace hierclass {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> classes) : classes_(std::move(classes)) {
    const std::set<std::string> unique(classes_.begin(), classes_.end());
    if (unique.size() != classes_.size()) throw ValidationError("class names must be distinct");
    counts_.assign(classes_.size() * classes_.size(), 0);
}

void ConfusionMatrix::add(std::size_t gold, std::size_t pred, std::uint64_t n) {
    if (gold >= size() || pred >= size()) throw ValidationError("class index out of range");
    counts_[gold * size() + pred] += n;
}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < size(); ++i) t += at(i, i);
    return t;
}

std::size_t ConfusionMatrix::index_of(const std::string& name) const {
    const auto it = std::find(classes_.begin(), classes_.end(), name);
    if (it == classes_.end()) throw ValidationError("unknown label '" + name + "'");
    return static_cast<std::size_t>(it - classes_.begin());
}

ConfusionMatrix confusion(std::span<const std::string> preds, std::span<const std::string> golds,
                          std::vector<std::string> class_names) {
    if (preds.size() != golds.size()) throw ValidationError("prediction and gold sequences differ in length");
    ConfusionMatrix cm(std::move(class_names));
    for (std::size_t i = 0; i < preds.size(); ++i) cm.add(cm.index_of(golds[i]), cm.index_of(preds[i]));
    return cm;
}

namespace {
double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

EvalReport per_class_metrics(const ConfusionMatrix& cm, std::string stage) {
    EvalReport r;
    r.stage = std::move(stage);
    r.n = cm.total();
    const std::size_t k = cm.size();
    for (std::size_t c = 0; c < k; ++c) {
        std::uint64_t col = 0, row = 0;
        for (std::size_t j = 0; j < k; ++j) {
            col += cm.at(j, c);
            row += cm.at(c, j);
        }
        const std::uint64_t tp = cm.at(c, c);
        const std::uint64_t tn = r.n - row - col + tp;
        r.classes.push_back({cm.classes()[c], ratio(tp, col), ratio(tp, row), ratio(tp + tn, r.n)});
    }
    r.accuracy = ratio(cm.trace(), r.n);
    if (k > 0) {
        for (const auto& c : r.classes) {
            r.macro_precision += c.precision;
            r.macro_recall += c.recall;
        }
        r.macro_precision /= static_cast<double>(k);
        r.macro_recall /= static_cast<double>(k);
    }
    return r;
}

namespace {

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string fixed2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string percent(double x) { return std::to_string(static_cast<long long>(std::llround(x * 100.0))) + "%"; }

}  // namespace

RenderedReport render_report(std::span<const EvalReport> reports, const std::string& model_name) {
    RenderedReport out;
    std::size_t model_w = std::max<std::size_t>(5, model_name.size());
    std::size_t class_w = 5;
    for (const auto& r : reports) {
        for (const auto& c : r.classes) class_w = std::max(class_w, c.name.size());
    }
    const auto row = [&](const std::string& m, const std::string& c, const std::string& p, const std::string& rc,
                         const std::string& a) {
        return pad(m, model_w) + " | " + pad(c, class_w) + " | " + pad(p, 9) + " | " + pad(rc, 6) + " | " + a + "\n";
    };
    for (const auto& r : reports) {
        out.table += "Stage: " + r.stage + " (n=" + std::to_string(r.n) + ", accuracy " + percent(r.accuracy) + ")\n";
        out.table += row("Model", "Class", "Precision", "Recall", "Accuracy");
        out.table += std::string(model_w, '-') + "-+-" + std::string(class_w, '-') + "-+-" + std::string(9, '-') +
                     "-+-" + std::string(6, '-') + "-+-" + std::string(8, '-') + "\n";
        for (const auto& c : r.classes) {
            out.table += row(model_name, c.name, fixed2(c.precision), fixed2(c.recall), percent(c.ovr_accuracy));
        }
        out.table += "\n";
    }

    nlohmann::ordered_json doc;
    doc["model"] = model_name;
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    for (const auto& r : reports) {
        nlohmann::ordered_json s;
        s["n"] = r.n;
        s["accuracy"] = r.accuracy;
        s["macro_precision"] = r.macro_precision;
        s["macro_recall"] = r.macro_recall;
        nlohmann::ordered_json classes = nlohmann::ordered_json::object();
        for (const auto& c : r.classes) {
            classes[c.name] = {{"precision", c.precision}, {"recall", c.recall}, {"ovr_accuracy", c.ovr_accuracy}};
        }
        s["classes"] = classes;
        stages[r.stage] = s;
    }
    doc["stages"] = stages;
    out.metrics_json = doc.dump(2) + "\n";
    return out;
}

std::vector<EvalReport> parse_metrics_json(const std::string& json, std::string* model_name) {
    try {
        const auto doc = nlohmann::ordered_json::parse(json);
        if (model_name) *model_name = doc.at("model").get<std::string>();
        std::vector<EvalReport> out;
        for (const auto& [stage, s] : doc.at("stages").items()) {
            EvalReport r;
            r.stage = stage;
            r.n = s.at("n").get<std::uint64_t>();
            r.accuracy = s.at("accuracy").get<double>();
            r.macro_precision = s.at("macro_precision").get<double>();
            r.macro_recall = s.at("macro_recall").get<double>();
            for (const auto& [name, c] : s.at("classes").items()) {
                r.classes.push_back({name, c.at("precision").get<double>(), c.at("recall").get<double>(),
                                     c.at("ovr_accuracy").get<double>()});
            }
            out.push_back(std::move(r));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed metrics file: ") + e.what());
    }
}

}  // namespace hierclass
