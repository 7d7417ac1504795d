#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hierclass/sentiment.hpp"
#include "hierclass/tokenizer.hpp"

namespace hierclass {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline constexpr double kProbEpsilon = 1e-7;
inline constexpr double kLayerNormEpsilon = 1e-10;

struct ModelConfig {
    std::size_t vocab_size = 1024;
    std::size_t max_len = 64;
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::size_t d_ff = 128;
    std::size_t sentiment_dim = kSentimentDim;
    std::size_t n_classes = 1;  // 1 = single-logit sigmoid head, k >= 2 = softmax head
    std::uint64_t seed = 0;

    void validate() const;
    bool binary() const { return n_classes == 1; }
    std::size_t fused_dim() const { return d_model + sentiment_dim; }

    bool operator==(const ModelConfig&) const = default;
};

struct LayerParams {
    Matrix wq, wk, wv, wo;        // d_model x d_model
    Matrix w1, b1;                // d_model x d_ff, 1 x d_ff
    Matrix w2, b2;                // d_ff x d_model, 1 x d_model
    Matrix ln1_gain, ln1_bias;    // 1 x d_model
    Matrix ln2_gain, ln2_bias;    // 1 x d_model
};

// Every trainable tensor of one encoder plus head. The same type carries
// gradients.
struct ModelParams {
    ModelConfig config;
    Matrix token_emb;  // vocab_size x d_model
    Matrix pos_emb;    // max_len x d_model
    std::vector<LayerParams> layers;
    Matrix head_w;     // (d_model + sentiment_dim) x n_classes
    Matrix head_b;     // 1 x n_classes

    struct TensorRef {
        std::string name;
        Matrix* tensor;
    };
    struct ConstTensorRef {
        std::string name;
        const Matrix* tensor;
    };

    // Fixed serialization / optimizer order.
    std::vector<TensorRef> tensors();
    std::vector<ConstTensorRef> tensors() const;

    // All-zero tensors shaped by `config`.
    static ModelParams zeros(const ModelConfig& config);
    void set_zero();
    std::size_t parameter_count() const;
    bool same_shape(const ModelParams& other) const;
    bool all_finite() const;
    // Rounds every entry to the nearest float.
    void round_to_float();
};

// Xavier-uniform matrices, zero biases, unit layer-norm gains; deterministic in config.seed.
ModelParams init_model(const ModelConfig& config);

struct LayerTrace {
    Matrix input;                 // n x d
    Matrix q, k, v;               // n x d
    std::vector<Matrix> attention;  // per head, n x n, rows sum to 1
    Matrix context;               // n x d, heads concatenated
    Matrix ln1_xhat;              // normalized (x + attn)
    RowVector ln1_rstd;           // per position
    Matrix ln1_out;
    Matrix ff_pre;                // n x d_ff, before ReLU
    Matrix ff_act;
    Matrix ln2_xhat;
    RowVector ln2_rstd;
    Matrix output;
};

// Only the n unmasked positions are computed; padding never enters the graph.
struct ForwardTrace {
    std::vector<TokenId> ids;      // unmasked ids
    std::vector<LayerTrace> layers;
    RowVector fused;               // [CLS] hidden state followed by sentiment features
    RowVector logits;              // 1 x n_classes
};

struct Example {
    TokenSequence seq;
    SentimentFeatures senti{};
    std::size_t label = 0;  // {0,1} for binary heads, class index otherwise
};

RowVector forward(const ModelParams& params, const TokenSequence& seq, const SentimentFeatures& senti,
                  ForwardTrace* trace = nullptr);

// n x k logit matrix for a batch of inputs.
Matrix forward_batch(const ModelParams& params, std::span<const Example> batch);

double sigmoid(double z);
double predict_binary(double logit);
RowVector predict_multiclass(const RowVector& logits);

double bce_loss(double p, std::size_t y);
double ce_loss(const RowVector& dist, std::size_t y);

// Loss of one example from its logits, using the head kind in `config`.
double example_loss(const ModelConfig& config, const RowVector& logits, std::size_t y);

// Mean loss over a batch; forward only.
double mean_loss(const ModelParams& params, std::span<const Example> batch);

// Mean loss and its exact gradient. `grads` is reshaped and overwritten.
double forward_backward(const ModelParams& params, std::span<const Example> batch, ModelParams& grads);

struct LossAndGrad {
    double loss;
    ModelParams grads;
};
LossAndGrad forward_backward(const ModelParams& params, std::span<const Example> batch);

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(const RowVector& v);

}  // namespace hierclass
