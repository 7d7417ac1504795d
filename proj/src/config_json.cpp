#include "hierclass/config_json.hpp"

#include <set>

#include "hierclass/error.hpp"

namespace hierclass {

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
        out = v.get<double>();
    } else {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ValidationError(std::string("'") + key + "' must be a non-negative integer");
        }
        out = v.get<T>();
    }
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const char* what) {
    if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
    const std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw ValidationError(std::string("unknown ") + what + " key '" + key + "'");
    }
}

}  // namespace

nlohmann::ordered_json to_json(const ModelConfig& c) {
    return {{"vocab_size", c.vocab_size}, {"max_len", c.max_len},   {"d_model", c.d_model},
            {"n_heads", c.n_heads},       {"n_layers", c.n_layers}, {"d_ff", c.d_ff},
            {"sentiment_dim", c.sentiment_dim}, {"n_classes", c.n_classes}, {"seed", c.seed}};
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},   {"beta2", c.beta2},
            {"adam_eps", c.adam_eps},           {"batch_size", c.batch_size}, {"epochs", c.epochs},
            {"seed", c.seed},                   {"early_stop_patience", c.early_stop_patience}};
}

nlohmann::ordered_json to_json(const LabelSchema& s) {
    return {{"labels", s.original_labels()}, {"dominant", s.dominant()}, {"merged", s.merged()}};
}

void update_from_json(ModelConfig& c, const nlohmann::json& j) {
    reject_unknown(j,
                   {"vocab_size", "max_len", "d_model", "n_heads", "n_layers", "d_ff", "sentiment_dim", "n_classes",
                    "seed"},
                   "model");
    read_field(j, "vocab_size", c.vocab_size);
    read_field(j, "max_len", c.max_len);
    read_field(j, "d_model", c.d_model);
    read_field(j, "n_heads", c.n_heads);
    read_field(j, "n_layers", c.n_layers);
    read_field(j, "d_ff", c.d_ff);
    read_field(j, "sentiment_dim", c.sentiment_dim);
    read_field(j, "n_classes", c.n_classes);
    read_field(j, "seed", c.seed);
}

void update_from_json(TrainConfig& c, const nlohmann::json& j) {
    reject_unknown(j, {"learning_rate", "beta1", "beta2", "adam_eps", "batch_size", "epochs", "seed",
                       "early_stop_patience"},
                   "training");
    read_field(j, "learning_rate", c.learning_rate);
    read_field(j, "beta1", c.beta1);
    read_field(j, "beta2", c.beta2);
    read_field(j, "adam_eps", c.adam_eps);
    read_field(j, "batch_size", c.batch_size);
    read_field(j, "epochs", c.epochs);
    read_field(j, "seed", c.seed);
    read_field(j, "early_stop_patience", c.early_stop_patience);
}

LabelSchema schema_from_json(const nlohmann::json& j) {
    try {
        auto schema = LabelSchema(j.at("dominant").get<std::string>(), j.at("merged").get<std::vector<std::string>>());
        if (j.contains("labels") && j.at("labels").get<std::vector<std::string>>() != schema.original_labels()) {
            throw IoError("schema label list disagrees with dominant/merged");
        }
        return schema;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed schema: ") + e.what());
    }
}

}  // namespace hierclass
