#include "hierclass/cli.hpp"

#include <iostream>
#include <set>

#include "CLI11.hpp"

#include "hierclass/config_json.hpp"
#include "hierclass/error.hpp"

namespace hierclass::cli {

namespace fs = std::filesystem;

void RunConfig::validate() const {
    if (dataset.empty()) throw ValidationError("paths.dataset is required");
    if (vocab_size < static_cast<std::size_t>(special::kFirstMerge)) {
        throw ValidationError("tokenizer.vocab_size must be at least " + std::to_string(special::kFirstMerge));
    }
    if (max_len < 2) throw ValidationError("tokenizer.max_len must be at least 2");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("split.test_fraction must lie in (0, 1)");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
    ModelConfig m = model;
    m.vocab_size = vocab_size;
    m.max_len = max_len;
    m.validate();
    training.validate();
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void require_object(const nlohmann::json& j, const char* what) {
    if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
}

template <typename F>
void with_section(const nlohmann::json& doc, const char* key, F&& f) {
    if (doc.contains(key)) {
        require_object(doc.at(key), key);
        f(doc.at(key));
    }
}

std::string get_string(const nlohmann::json& j, const char* key) {
    if (!j.at(key).is_string()) throw ValidationError(std::string("'") + key + "' must be a string");
    return j.at(key).get<std::string>();
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc, const fs::path& base_dir) {
    require_object(doc, "config");
    for (const auto& [key, value] : doc.items()) {
        static const std::set<std::string> known{"paths", "tokenizer", "model", "training", "split", "threshold",
                                                 "model_name"};
        if (!known.contains(key)) throw ValidationError("unknown config section '" + key + "'");
    }
    RunConfig cfg;
    with_section(doc, "paths", [&](const nlohmann::json& p) {
        for (const auto& [key, value] : p.items()) {
            if (key == "dataset") cfg.dataset = resolve(base_dir, get_string(p, "dataset"));
            else if (key == "lexicon") cfg.lexicon = resolve(base_dir, get_string(p, "lexicon"));
            else if (key == "output_dir") cfg.output_dir = resolve(base_dir, get_string(p, "output_dir"));
            else if (key == "tokenizer_dir") cfg.tokenizer_dir = resolve(base_dir, get_string(p, "tokenizer_dir"));
            else throw ValidationError("unknown paths key '" + key + "'");
        }
    });
    with_section(doc, "tokenizer", [&](const nlohmann::json& t) {
        for (const auto& [key, value] : t.items()) {
            if (!value.is_number_unsigned()) throw ValidationError("tokenizer." + key + " must be a non-negative integer");
            if (key == "vocab_size") cfg.vocab_size = value.get<std::size_t>();
            else if (key == "max_len") cfg.max_len = value.get<std::size_t>();
            else throw ValidationError("unknown tokenizer key '" + key + "'");
        }
    });
    with_section(doc, "model", [&](const nlohmann::json& m) {
        for (const char* k : {"vocab_size", "max_len", "n_classes", "sentiment_dim"}) {
            if (m.contains(k)) throw ValidationError(std::string("model.") + k + " is derived and cannot be set");
        }
        update_from_json(cfg.model, m);
    });
    with_section(doc, "training", [&](const nlohmann::json& t) { update_from_json(cfg.training, t); });
    with_section(doc, "split", [&](const nlohmann::json& s) {
        for (const auto& [key, value] : s.items()) {
            if (key == "test_fraction") {
                if (!value.is_number()) throw ValidationError("split.test_fraction must be a number");
                cfg.test_fraction = value.get<double>();
            } else if (key == "seed") {
                if (!value.is_number_unsigned()) throw ValidationError("split.seed must be a non-negative integer");
                cfg.split_seed = value.get<std::uint64_t>();
            } else {
                throw ValidationError("unknown split key '" + key + "'");
            }
        }
    });
    if (doc.contains("threshold")) {
        if (!doc.at("threshold").is_number()) throw ValidationError("threshold must be a number");
        cfg.threshold = doc.at("threshold").get<double>();
    }
    if (doc.contains("model_name")) cfg.model_name = get_string(doc, "model_name");
    cfg.model.vocab_size = cfg.vocab_size;
    cfg.model.max_len = cfg.max_len;
    cfg.validate();
    return cfg;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("override '" + assignment + "' is not key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
        value = raw;
    }
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ValidationError("override key '" + path + "' is malformed");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        if (!node->is_object()) *node = nlohmann::json::object();
        start = dot + 1;
    }
}

RunConfig load_run_config(const fs::path& path, const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed) {
    if (!fs::exists(path)) throw IoError("no such config file: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) {
        apply_override(doc, "model.seed=" + std::to_string(*seed));
        apply_override(doc, "training.seed=" + std::to_string(*seed));
        apply_override(doc, "split.seed=" + std::to_string(*seed));
    }
    return parse_run_config(doc, path.parent_path());
}

namespace {

std::vector<std::string> texts_of(const Dataset& ds) {
    std::vector<std::string> out;
    out.reserve(ds.size());
    for (const auto& r : ds.records()) out.push_back(r.text);
    return out;
}

fs::path default_tokenizer_dir(const RunConfig& cfg) { return cfg.output_dir / "tokenizer"; }

void require_file(const fs::path& p, const char* what) {
    if (p.empty()) throw ValidationError(std::string(what) + " path is required");
    if (!fs::exists(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

}  // namespace

fs::path tokenizer_train(const RunConfig& cfg) {
    require_file(cfg.dataset, "dataset");
    const Dataset ds = load_dataset(cfg.dataset);
    const auto texts = texts_of(ds);
    const Tokenizer tok = Tokenizer::train(texts, cfg.vocab_size);
    const fs::path dir = cfg.tokenizer_dir.value_or(default_tokenizer_dir(cfg));
    tok.save(dir);
    return dir;
}

TrainOutputs train(const RunConfig& cfg) {
    require_file(cfg.dataset, "dataset");
    require_file(cfg.lexicon, "lexicon");
    const Dataset ds = load_dataset(cfg.dataset);
    const Lexicon lex = load_lexicon(cfg.lexicon);

    Tokenizer tok;
    if (cfg.tokenizer_dir && fs::exists(*cfg.tokenizer_dir / "vocab.json")) {
        tok = Tokenizer::load(*cfg.tokenizer_dir);
    } else {
        tok = Tokenizer::train(texts_of(ds), cfg.vocab_size);
        tok.save(cfg.tokenizer_dir.value_or(default_tokenizer_dir(cfg)));
    }

    const LabelSchema schema = build_schema(class_distribution(ds));
    const Split split = stratified_split(ds, cfg.test_fraction, cfg.split_seed);
    fs::create_directories(cfg.output_dir);
    save_dataset(split.train, cfg.output_dir / "train.csv", DataFormat::csv);
    save_dataset(split.test, cfg.output_dir / "test.csv", DataFormat::csv);

    ModelConfig mc = cfg.model;
    mc.vocab_size = tok.vocab_size();
    mc.max_len = cfg.max_len;
    TrainOutputs out{cfg.output_dir / "checkpoint", cfg.output_dir / "curves_stage1.csv", std::nullopt,
                     train_hierarchical(split.train, split.test, schema, tok, lex, mc, cfg.training, cfg.threshold)};

    save_checkpoint(out.result.model, out.checkpoint_dir, CheckpointExtras{cfg.training, cfg.split_seed});
    write_file(out.curves_stage1, history_csv(out.result.stage1_history));
    if (out.result.stage2_history) {
        out.curves_stage2 = cfg.output_dir / "curves_stage2.csv";
        write_file(*out.curves_stage2, history_csv(*out.result.stage2_history));
    }
    return out;
}

std::string combined_class_name(const LabelSchema& schema) {
    std::string name = "combined(";
    for (std::size_t i = 0; i < schema.merged().size(); ++i) {
        if (i) name += "+";
        name += schema.merged()[i];
    }
    return name + ")";
}

std::vector<EvalReport> evaluate(const HierarchicalModel& h, const Dataset& dataset) {
    const LabelSchema& s = h.schema;
    for (const auto& r : dataset.records()) {
        if (!s.contains(r.label)) throw ValidationError("dataset label '" + r.label + "' is not in the checkpoint schema");
    }
    const std::string combined = combined_class_name(s);
    std::vector<std::string> bin_pred, bin_gold, mc_pred, mc_gold, e2e_pred, e2e_gold;
    for (const auto& r : dataset.records()) {
        const Prediction p = predict(h, r.text);
        bin_pred.push_back(p.trace.p1 >= h.threshold ? s.dominant() : combined);
        bin_gold.push_back(r.label == s.dominant() ? s.dominant() : combined);
        if (r.label != s.dominant()) {
            const auto dist = p.trace.dist2 ? p.trace.dist2 : stage2_distribution(h, r.text);
            mc_pred.push_back(dist ? s.merged()[argmax(*dist)] : s.merged().front());
            mc_gold.push_back(r.label);
        }
        e2e_pred.push_back(p.label);
        e2e_gold.push_back(r.label);
    }
    std::vector<EvalReport> out;
    out.push_back(per_class_metrics(confusion(bin_pred, bin_gold, {combined, s.dominant()}), "binary"));
    out.push_back(per_class_metrics(confusion(mc_pred, mc_gold, s.merged()), "multiclass"));
    out.push_back(per_class_metrics(confusion(e2e_pred, e2e_gold, s.original_labels()), "end_to_end"));
    return out;
}

std::string prediction_json(const HierarchicalModel& h, const Prediction& p) {
    nlohmann::ordered_json j;
    j["label"] = p.label;
    j["p1"] = p.trace.p1;
    if (p.trace.dist2) {
        nlohmann::ordered_json dist = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < h.schema.merged().size(); ++i) {
            dist[h.schema.merged()[i]] = (*p.trace.dist2)(static_cast<Eigen::Index>(i));
        }
        j["dist2"] = dist;
    }
    return j.dump();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hierarchical binary-then-multiclass text classifier"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;

    auto* tok_cmd = app.add_subcommand("tokenizer-train", "Train the byte-level BPE tokenizer");
    tok_cmd->add_option("--config", config_path, "Run config (JSON)")->required();
    tok_cmd->add_option("--set", overrides, "Override a config value, e.g. tokenizer.vocab_size=512");

    auto* train_cmd = app.add_subcommand("train", "Train both stages and write a checkpoint");
    train_cmd->add_option("--config", config_path, "Run config (JSON)")->required();
    train_cmd->add_option("--seed", seed, "Override every seed (model, training, split)");
    train_cmd->add_option("--set", overrides, "Override a config value, e.g. training.epochs=5");

    std::string checkpoint, data_path, metrics_path, model_name = "hierclass", text;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on a labeled dataset");
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    eval_cmd->add_option("--data", data_path, "Dataset (.csv or .jsonl)")->required();
    eval_cmd->add_option("--metrics", metrics_path, "Metrics JSON output (default: <checkpoint>/metrics.json)");
    eval_cmd->add_option("--model-name", model_name, "Model column value in the report");

    auto* predict_cmd = app.add_subcommand("predict", "Classify a single text");
    predict_cmd->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    predict_cmd->add_option("--text", text, "Input text")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    try {
        if (*tok_cmd) {
            const RunConfig cfg = load_run_config(config_path, overrides);
            const fs::path dir = tokenizer_train(cfg);
            out << "tokenizer written to " << dir.string() << "\n";
        } else if (*train_cmd) {
            const RunConfig cfg = load_run_config(config_path, overrides, seed);
            const TrainOutputs o = train(cfg);
            const auto summarize = [&](const char* name, const TrainHistory& hist) {
                if (hist.empty()) return;
                const auto& last = hist.back();
                out << name << ": " << hist.size() << " epochs, final train_loss " << last.train_loss
                    << ", train_acc " << last.train_acc << ", test_acc " << last.test_acc << "\n";
            };
            summarize("stage1", o.result.stage1_history);
            if (o.result.stage2_history) summarize("stage2", *o.result.stage2_history);
            out << "checkpoint written to " << o.checkpoint_dir.string() << "\n";
        } else if (*eval_cmd) {
            const HierarchicalModel h = load_checkpoint(checkpoint);
            const Dataset ds = load_dataset(data_path);
            const auto reports = evaluate(h, ds);
            const RenderedReport rendered = render_report(reports, model_name);
            const fs::path mpath = metrics_path.empty() ? fs::path(checkpoint) / "metrics.json" : fs::path(metrics_path);
            write_file(mpath, rendered.metrics_json);
            out << rendered.table;
        } else if (*predict_cmd) {
            const HierarchicalModel h = load_checkpoint(checkpoint);
            out << prediction_json(h, predict(h, text)) << "\n";
        }
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const ModelError& e) {
        err << "training error: " << e.what() << "\n";
        return kTrainingError;
    } catch (const fs::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUnexpected;
    }
    return kOk;
}

}  // namespace hierclass::cli
