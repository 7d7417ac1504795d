#include <bit>
#include <cmath>
#include <cstring>

#include <zlib.h>

#include "hierclass/config_json.hpp"
#include "hierclass/error.hpp"
#include "hierclass/rng.hpp"
#include "hierclass/training.hpp"

namespace hierclass {

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kWeights = "weights.bin";
constexpr const char* kLexicon = "lexicon.tsv";

std::uint32_t crc32_of(const std::string& bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void append_f32_le(std::string& out, double value) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double read_f32_le(const std::string& in, std::size_t float_index) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[4 * float_index + i])) << (8 * i);
    }
    return static_cast<double>(std::bit_cast<float>(bits));
}

nlohmann::ordered_json stage_manifest(const std::string& stage, const ModelParams& p, std::size_t& offset,
                                      std::string& weights) {
    nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
    for (const auto& t : p.tensors()) {
        const Matrix& m = *t.tensor;
        tensors.push_back({{"name", stage + "." + t.name},
                           {"shape", {m.rows(), m.cols()}},
                           {"offset", offset}});
        for (Eigen::Index i = 0; i < m.size(); ++i) append_f32_le(weights, m.data()[i]);
        offset += static_cast<std::size_t>(m.size());
    }
    return {{"config", to_json(p.config)}, {"tensors", tensors}};
}

// Fills `p` (already shaped by its config) from the manifest entries and the weights blob.
void load_stage(const std::string& stage, const nlohmann::json& entry, const std::string& weights, ModelParams& p) {
    const auto& tensors = entry.at("tensors");
    auto refs = p.tensors();
    if (tensors.size() != refs.size()) {
        throw IoError(stage + ": manifest lists " + std::to_string(tensors.size()) + " tensors, model needs " +
                      std::to_string(refs.size()));
    }
    const std::size_t total_floats = weights.size() / 4;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& t = tensors.at(i);
        const std::string expected = stage + "." + refs[i].name;
        if (t.at("name").get<std::string>() != expected) throw IoError("missing tensor " + expected);
        Matrix& m = *refs[i].tensor;
        const auto shape = t.at("shape").get<std::vector<std::int64_t>>();
        if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
            throw IoError("shape mismatch for tensor " + expected);
        }
        const auto offset = t.at("offset").get<std::size_t>();
        if (offset + static_cast<std::size_t>(m.size()) > total_floats) {
            throw IoError("tensor " + expected + " extends past the end of weights.bin");
        }
        for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = read_f32_le(weights, offset + static_cast<std::size_t>(k));
    }
    if (!p.all_finite()) throw IoError(stage + ": non-finite weights");
}

}  // namespace

void save_checkpoint(const HierarchicalModel& h, const std::filesystem::path& dir, const CheckpointExtras& extras) {
    h.validate();
    std::filesystem::create_directories(dir);

    std::string weights;
    std::size_t offset = 0;
    nlohmann::ordered_json stages = nlohmann::ordered_json::object();
    stages["stage1"] = stage_manifest("stage1", h.stage1, offset, weights);
    if (h.stage2) stages["stage2"] = stage_manifest("stage2", *h.stage2, offset, weights);

    nlohmann::ordered_json manifest;
    manifest["format_version"] = kCheckpointVersion;
    manifest["generator"] = std::string(Rng::kAlgorithm);
    manifest["threshold"] = h.threshold;
    manifest["schema"] = to_json(h.schema);
    manifest["seeds"] = {{"stage1_init", h.stage1.config.seed}};
    if (h.stage2) manifest["seeds"]["stage2_init"] = h.stage2->config.seed;
    if (extras.train_config) {
        manifest["seeds"]["shuffle"] = extras.train_config->seed;
        manifest["train_config"] = to_json(*extras.train_config);
    }
    if (extras.split_seed) manifest["seeds"]["split"] = *extras.split_seed;
    manifest["stages"] = stages;
    std::size_t tensor_count = h.stage1.tensors().size() + (h.stage2 ? h.stage2->tensors().size() : 0);
    manifest["tensor_count"] = tensor_count;
    manifest["weights"] = {{"file", kWeights},
                           {"dtype", "float32-le"},
                           {"float_count", offset},
                           {"crc32", crc32_of(weights)}};

    write_file(dir / kWeights, weights);
    h.tokenizer.save(dir);
    save_lexicon(h.lexicon, dir / kLexicon);
    write_file(dir / kManifest, manifest.dump(2) + "\n");
}

HierarchicalModel load_checkpoint(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / kManifest)) throw IoError("no checkpoint manifest in " + dir.string());
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(dir / kManifest));
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("manifest.json: ") + e.what());
    }

    try {
        const int version = manifest.at("format_version").get<int>();
        if (version != kCheckpointVersion) {
            throw IoError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
        }
        const std::string weights = read_file(dir / kWeights);
        const auto& winfo = manifest.at("weights");
        const auto float_count = winfo.at("float_count").get<std::size_t>();
        if (weights.size() != 4 * float_count) {
            throw IoError("weights.bin length " + std::to_string(weights.size()) + " does not match manifest (" +
                          std::to_string(4 * float_count) + " bytes)");
        }
        if (crc32_of(weights) != winfo.at("crc32").get<std::uint32_t>()) {
            throw IoError("weights.bin checksum mismatch");
        }

        HierarchicalModel h{Tokenizer::load(dir), load_lexicon(dir / kLexicon),
                            schema_from_json(manifest.at("schema")), ModelParams{}, std::nullopt,
                            manifest.at("threshold").get<double>()};

        const auto& stages = manifest.at("stages");
        const auto load = [&](const std::string& name) {
            const auto& entry = stages.at(name);
            ModelConfig c;
            update_from_json(c, entry.at("config"));
            ModelParams p = ModelParams::zeros(c);
            load_stage(name, entry, weights, p);
            return p;
        };
        h.stage1 = load("stage1");
        if (stages.contains("stage2")) h.stage2 = load("stage2");
        const std::size_t tensor_count = h.stage1.tensors().size() + (h.stage2 ? h.stage2->tensors().size() : 0);
        if (manifest.at("tensor_count").get<std::size_t>() != tensor_count) {
            throw IoError("manifest tensor_count disagrees with the stage tensor lists");
        }
        h.validate();
        return h;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    } catch (const ValidationError& e) {
        throw IoError(std::string("invalid checkpoint: ") + e.what());
    } catch (const ModelError& e) {
        throw IoError(std::string("invalid checkpoint: ") + e.what());
    }
}

}  // namespace hierclass
