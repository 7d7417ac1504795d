#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hierclass/corpus.hpp"
#include "hierclass/hierarchy.hpp"
#include "hierclass/model.hpp"

namespace hierclass {

struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 16;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
    std::size_t early_stop_patience = 0;  // 0 disables

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;

    bool operator==(const EpochStats&) const = default;
};

using TrainHistory = std::vector<EpochStats>;

// `epoch,train_loss,train_acc,test_acc` rows with round-trip precision.
std::string history_csv(const TrainHistory& history);

struct AdamState {
    ModelParams m;
    ModelParams v;

    static AdamState for_params(const ModelParams& params);
};

// One bias-corrected Adam update at step t >= 1.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, std::size_t t,
               const TrainConfig& cfg);

// Fraction of examples whose predicted class equals the label.
double accuracy(const ModelParams& params, std::span<const Example> examples);

struct StageResult {
    ModelParams params;  // from the best-test-accuracy epoch
    TrainHistory history;
    std::size_t best_epoch = 0;
};

// Seeded shuffle, mini-batch Adam, per-epoch stats, patience-based early stop.
// Parameters are stored at float precision after every update so checkpoints
// reproduce them exactly. With an empty test set the last epoch is returned.
StageResult train_stage(const ModelParams& init, std::span<const Example> train, std::span<const Example> test,
                        const TrainConfig& cfg);

std::vector<Example> make_examples(const Tokenizer& tok, const Lexicon& lex, std::size_t max_len,
                                   std::span<const LabeledText> items);

struct HierarchicalResult {
    HierarchicalModel model;
    TrainHistory stage1_history;
    std::optional<TrainHistory> stage2_history;
};

// Stage 1 on the binary projection, stage 2 on the merged-label subset when
// at least two labels were merged. `model_config.n_classes` is ignored; stage 2
// uses seed + 1 for its initialization.
HierarchicalResult train_hierarchical(const Dataset& train, const Dataset& test, const LabelSchema& schema,
                                      const Tokenizer& tokenizer, const Lexicon& lexicon,
                                      const ModelConfig& model_config, const TrainConfig& cfg,
                                      double threshold = 0.5);

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

// Relative error |a - b| / max(|a| + |b|, floor).
inline constexpr double kGradCheckFloor = 1e-6;
double relative_error(double analytic, double numeric);

// Compares the analytic gradient of a random model on a random batch against
// central differences over every parameter.
GradientCheckResult gradient_check(const ModelConfig& config, std::uint64_t seed, std::size_t batch_size,
                                   double h = 1e-5);

// Same, for a caller-supplied model and batch.
GradientCheckResult gradient_check(const ModelParams& params, std::span<const Example> batch, double h = 1e-5);

// Random batch for `config`: lengths, ids, sentiment features and labels drawn from `seed`.
std::vector<Example> random_batch(const ModelConfig& config, std::uint64_t seed, std::size_t batch_size);

// --- checkpoints ---

inline constexpr int kCheckpointVersion = 1;

struct CheckpointExtras {
    std::optional<TrainConfig> train_config;
    std::optional<std::uint64_t> split_seed;
};

void save_checkpoint(const HierarchicalModel& h, const std::filesystem::path& dir,
                     const CheckpointExtras& extras = {});
HierarchicalModel load_checkpoint(const std::filesystem::path& dir);

}  // namespace hierclass
