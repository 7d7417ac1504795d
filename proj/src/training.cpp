#include "hierclass/training.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "hierclass/error.hpp"
#include "hierclass/rng.hpp"

namespace hierclass {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ValidationError("Adam betas must lie in [0, 1)");
    }
    if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be positive");
    if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
    if (epochs < 1) throw ValidationError("epochs must be at least 1");
}

namespace {
std::string shortest(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}
}  // namespace

std::string history_csv(const TrainHistory& history) {
    std::string out = "epoch,train_loss,train_acc,test_acc\n";
    for (const auto& e : history) {
        out += std::to_string(e.epoch) + "," + shortest(e.train_loss) + "," + shortest(e.train_acc) + "," +
               shortest(e.test_acc) + "\n";
    }
    return out;
}

AdamState AdamState::for_params(const ModelParams& params) {
    return AdamState{ModelParams::zeros(params.config), ModelParams::zeros(params.config)};
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, std::size_t t,
               const TrainConfig& cfg) {
    if (t < 1) throw ValidationError("Adam step index starts at 1");
    if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
        throw ModelError("Adam: parameter, gradient and moment shapes differ");
    }
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    auto p = params.tensors();
    const auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto& mi = *m[i].tensor;
        auto& vi = *v[i].tensor;
        const auto& gi = *g[i].tensor;
        mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * gi;
        vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * gi.cwiseProduct(gi);
        p[i].tensor->array() -=
            cfg.learning_rate * (mi.array() / c1) / ((vi.array() / c2).sqrt() + cfg.adam_eps);
    }
}

namespace {
std::size_t predicted_class(const ModelConfig& c, const RowVector& logits) {
    // logit >= 0 is exactly sigmoid >= 0.5
    return c.binary() ? (logits(0) >= 0.0 ? 1 : 0) : argmax(logits);
}
}  // namespace

double accuracy(const ModelParams& params, std::span<const Example> examples) {
    if (examples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        if (predicted_class(params.config, forward(params, ex.seq, ex.senti)) == ex.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(examples.size());
}

StageResult train_stage(const ModelParams& init, std::span<const Example> train, std::span<const Example> test,
                        const TrainConfig& cfg) {
    cfg.validate();
    if (train.empty()) throw ValidationError("cannot train on an empty training set");

    ModelParams params = init;
    params.round_to_float();
    AdamState state = AdamState::for_params(params);
    ModelParams grads = ModelParams::zeros(params.config);
    Rng rng(cfg.seed);

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Example> batch;
    batch.reserve(cfg.batch_size);

    StageResult result{params, {}, 0};
    double best_test = -1.0;
    std::size_t since_best = 0;
    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
            const double loss = forward_backward(params, batch, grads);
            loss_sum += loss * static_cast<double>(batch.size());
            adam_step(params, grads, state, ++step, cfg);
            params.round_to_float();
        }
        if (!params.all_finite()) throw ModelError("parameters became non-finite during training");

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(train.size());
        stats.train_acc = accuracy(params, train);
        stats.test_acc = accuracy(params, test);
        result.history.push_back(stats);

        if (test.empty()) {
            result.params = params;
            result.best_epoch = epoch;
            continue;
        }
        if (stats.test_acc > best_test) {
            best_test = stats.test_acc;
            result.params = params;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (cfg.early_stop_patience > 0 && ++since_best > cfg.early_stop_patience) {
            break;
        }
    }
    return result;
}

std::vector<Example> make_examples(const Tokenizer& tok, const Lexicon& lex, std::size_t max_len,
                                   std::span<const LabeledText> items) {
    std::vector<Example> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(make_example(tok, lex, max_len, item.text, item.label));
    return out;
}

HierarchicalResult train_hierarchical(const Dataset& train, const Dataset& test, const LabelSchema& schema,
                                      const Tokenizer& tokenizer, const Lexicon& lexicon,
                                      const ModelConfig& model_config, const TrainConfig& cfg, double threshold) {
    if (model_config.vocab_size < tokenizer.vocab_size()) {
        throw ValidationError("model vocab_size smaller than the tokenizer vocabulary");
    }
    ModelConfig c1 = model_config;
    c1.n_classes = 1;
    const auto bin_train = project_binary(train, schema);
    const auto bin_test = project_binary(test, schema);
    const auto ex_train = make_examples(tokenizer, lexicon, c1.max_len, bin_train);
    const auto ex_test = make_examples(tokenizer, lexicon, c1.max_len, bin_test);
    StageResult s1 = train_stage(init_model(c1), ex_train, ex_test, cfg);

    HierarchicalResult out{HierarchicalModel{tokenizer, lexicon, schema, std::move(s1.params), std::nullopt, threshold},
                           std::move(s1.history), std::nullopt};

    const std::size_t m = schema.merged().size();
    if (m >= 2) {
        ModelConfig c2 = model_config;
        c2.n_classes = m;
        c2.seed = model_config.seed + 1;
        const auto mc_train = project_multiclass(train, schema);
        const auto mc_test = project_multiclass(test, schema);
        const auto ex2_train = make_examples(tokenizer, lexicon, c2.max_len, mc_train);
        const auto ex2_test = make_examples(tokenizer, lexicon, c2.max_len, mc_test);
        StageResult s2 = train_stage(init_model(c2), ex2_train, ex2_test, cfg);
        out.model.stage2 = std::move(s2.params);
        out.stage2_history = std::move(s2.history);
    }
    out.model.validate();
    return out;
}

double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), kGradCheckFloor);
}

std::vector<Example> random_batch(const ModelConfig& config, std::uint64_t seed, std::size_t batch_size) {
    config.validate();
    Rng rng(seed);
    std::vector<Example> batch;
    for (std::size_t b = 0; b < batch_size; ++b) {
        Example ex;
        const std::size_t pieces = static_cast<std::size_t>(rng.below(config.max_len - 1));
        ex.seq.ids.assign(config.max_len, special::kPad);
        ex.seq.mask.assign(config.max_len, 0);
        ex.seq.ids[0] = special::kCls;
        for (std::size_t i = 1; i <= pieces; ++i) {
            ex.seq.ids[i] = static_cast<TokenId>(rng.below(config.vocab_size));
        }
        ex.seq.ids[pieces + 1] = special::kSep;
        std::fill(ex.seq.mask.begin(), ex.seq.mask.begin() + static_cast<std::ptrdiff_t>(pieces + 2), 1);
        ex.senti[0] = rng.uniform(-1.0, 1.0);
        for (std::size_t i = 1; i < kSentimentDim; ++i) ex.senti[i] = rng.uniform01() / 6.0;
        ex.label = static_cast<std::size_t>(rng.below(config.binary() ? 2 : config.n_classes));
        batch.push_back(ex);
    }
    return batch;
}

GradientCheckResult gradient_check(const ModelParams& params, std::span<const Example> batch, double h) {
    const LossAndGrad analytic = forward_backward(params, batch);
    ModelParams probe = params;
    GradientCheckResult result;
    auto probe_tensors = probe.tensors();
    const auto grad_tensors = analytic.grads.tensors();
    for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
        Matrix& w = *probe_tensors[t].tensor;
        const Matrix& g = *grad_tensors[t].tensor;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double saved = w.data()[i];
            w.data()[i] = saved + h;
            const double up = mean_loss(probe, batch);
            w.data()[i] = saved - h;
            const double down = mean_loss(probe, batch);
            w.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double err = relative_error(g.data()[i], numeric);
            ++result.checked;
            if (err > result.max_relative_error) {
                result.max_relative_error = err;
                result.worst_tensor = probe_tensors[t].name;
                result.worst_index = static_cast<std::size_t>(i);
            }
        }
    }
    return result;
}

GradientCheckResult gradient_check(const ModelConfig& config, std::uint64_t seed, std::size_t batch_size, double h) {
    ModelConfig c = config;
    c.seed = seed;
    const ModelParams params = init_model(c);
    const auto batch = random_batch(c, seed ^ 0x9E3779B97F4A7C15ull, batch_size);
    return gradient_check(params, batch, h);
}

}  // namespace hierclass
