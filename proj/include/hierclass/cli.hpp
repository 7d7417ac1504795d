#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hierclass/evaluation.hpp"
#include "hierclass/hierarchy.hpp"
#include "hierclass/model.hpp"
#include "hierclass/training.hpp"

namespace hierclass::cli {

enum ExitCode : int {
    kOk = 0,
    kUnexpected = 1,
    kConfigError = 2,
    kIoError = 3,
    kTrainingError = 4,
};

// Settings for the tokenizer-train and train commands. Relative paths in the
// config file resolve against the file's directory.
struct RunConfig {
    std::filesystem::path dataset;
    std::filesystem::path lexicon;
    std::filesystem::path output_dir = "out";
    std::optional<std::filesystem::path> tokenizer_dir;  // reuse a trained tokenizer when set
    std::size_t vocab_size = 1024;
    std::size_t max_len = 64;
    ModelConfig model;
    TrainConfig training;
    double test_fraction = 0.2;
    std::uint64_t split_seed = 0;
    double threshold = 0.5;
    std::string model_name = "hierclass";

    void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides = {},
                          std::optional<std::uint64_t> seed = std::nullopt);

// Applies "section.key=value" overrides; the value is parsed as JSON when
// possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

std::filesystem::path tokenizer_train(const RunConfig& cfg);

struct TrainOutputs {
    std::filesystem::path checkpoint_dir;
    std::filesystem::path curves_stage1;
    std::optional<std::filesystem::path> curves_stage2;
    HierarchicalResult result;
};
TrainOutputs train(const RunConfig& cfg);

// Binary-stage, multiclass-stage and end-to-end reports for `dataset`.
std::vector<EvalReport> evaluate(const HierarchicalModel& h, const Dataset& dataset);

// Name of the binary stage's "everything but the dominant label" class.
std::string combined_class_name(const LabelSchema& schema);

// Single-line JSON: {"label":..., "p1":..., "dist2":{...}}; dist2 only when stage 2 ran.
std::string prediction_json(const HierarchicalModel& h, const Prediction& p);

// Entry point behind the hierclass executable.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hierclass::cli
