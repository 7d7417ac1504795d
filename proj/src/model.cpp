#include "hierclass/model.hpp"

#include <algorithm>
#include <cmath>

#include "hierclass/error.hpp"
#include "hierclass/rng.hpp"

namespace hierclass {

void ModelConfig::validate() const {
    if (vocab_size < 1) throw ValidationError("vocab_size must be positive");
    if (max_len < 2) throw ValidationError("max_len must be at least 2");
    if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
        throw ValidationError("d_model must be a positive multiple of n_heads");
    }
    if (n_layers < 1) throw ValidationError("n_layers must be at least 1");
    if (d_ff < 1) throw ValidationError("d_ff must be at least 1");
    if (sentiment_dim != kSentimentDim) throw ValidationError("sentiment_dim must be 9");
    if (n_classes < 1) throw ValidationError("n_classes must be at least 1");
}

std::vector<ModelParams::TensorRef> ModelParams::tensors() {
    std::vector<TensorRef> out;
    out.push_back({"token_emb", &token_emb});
    out.push_back({"pos_emb", &pos_emb});
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& L = layers[l];
        const std::string p = "layer" + std::to_string(l) + ".";
        out.push_back({p + "wq", &L.wq});
        out.push_back({p + "wk", &L.wk});
        out.push_back({p + "wv", &L.wv});
        out.push_back({p + "wo", &L.wo});
        out.push_back({p + "w1", &L.w1});
        out.push_back({p + "b1", &L.b1});
        out.push_back({p + "w2", &L.w2});
        out.push_back({p + "b2", &L.b2});
        out.push_back({p + "ln1_gain", &L.ln1_gain});
        out.push_back({p + "ln1_bias", &L.ln1_bias});
        out.push_back({p + "ln2_gain", &L.ln2_gain});
        out.push_back({p + "ln2_bias", &L.ln2_bias});
    }
    out.push_back({"head_w", &head_w});
    out.push_back({"head_b", &head_b});
    return out;
}

std::vector<ModelParams::ConstTensorRef> ModelParams::tensors() const {
    std::vector<ConstTensorRef> out;
    for (auto& t : const_cast<ModelParams*>(this)->tensors()) out.push_back({std::move(t.name), t.tensor});
    return out;
}

ModelParams ModelParams::zeros(const ModelConfig& c) {
    c.validate();
    const auto d = static_cast<Eigen::Index>(c.d_model);
    const auto ff = static_cast<Eigen::Index>(c.d_ff);
    ModelParams p;
    p.config = c;
    p.token_emb = Matrix::Zero(static_cast<Eigen::Index>(c.vocab_size), d);
    p.pos_emb = Matrix::Zero(static_cast<Eigen::Index>(c.max_len), d);
    p.layers.resize(c.n_layers);
    for (auto& L : p.layers) {
        L.wq = L.wk = L.wv = L.wo = Matrix::Zero(d, d);
        L.w1 = Matrix::Zero(d, ff);
        L.b1 = Matrix::Zero(1, ff);
        L.w2 = Matrix::Zero(ff, d);
        L.b2 = Matrix::Zero(1, d);
        L.ln1_gain = L.ln1_bias = L.ln2_gain = L.ln2_bias = Matrix::Zero(1, d);
    }
    p.head_w = Matrix::Zero(static_cast<Eigen::Index>(c.fused_dim()), static_cast<Eigen::Index>(c.n_classes));
    p.head_b = Matrix::Zero(1, static_cast<Eigen::Index>(c.n_classes));
    return p;
}

void ModelParams::set_zero() {
    for (auto& t : tensors()) t.tensor->setZero();
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += static_cast<std::size_t>(t.tensor->size());
    return n;
}

bool ModelParams::same_shape(const ModelParams& other) const {
    const auto a = tensors();
    const auto b = other.tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].tensor->rows() != b[i].tensor->rows() || a[i].tensor->cols() != b[i].tensor->cols()) return false;
    }
    return true;
}

bool ModelParams::all_finite() const {
    for (const auto& t : tensors()) {
        if (!t.tensor->allFinite()) return false;
    }
    return true;
}

void ModelParams::round_to_float() {
    for (auto& t : tensors()) {
        t.tensor->noalias() = t.tensor->cast<float>().cast<double>();
    }
}

ModelParams init_model(const ModelConfig& config) {
    ModelParams p = ModelParams::zeros(config);
    Rng rng(config.seed);
    const auto xavier = [&rng](Matrix& m) {
        const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
    };
    xavier(p.token_emb);
    xavier(p.pos_emb);
    for (auto& L : p.layers) {
        xavier(L.wq);
        xavier(L.wk);
        xavier(L.wv);
        xavier(L.wo);
        xavier(L.w1);
        xavier(L.w2);
        L.ln1_gain.setOnes();
        L.ln2_gain.setOnes();
    }
    xavier(p.head_w);
    return p;
}

namespace {

// Row-wise layer norm of x; fills xhat and 1/sigma per row.
Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, Matrix& xhat, RowVector& rstd) {
    const Eigen::Index n = x.rows();
    const auto d = static_cast<double>(x.cols());
    xhat.resize(x.rows(), x.cols());
    rstd.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mean = x.row(i).sum() / d;
        const double var = (x.row(i).array() - mean).square().sum() / d;
        rstd(i) = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        xhat.row(i) = (x.row(i).array() - mean) * rstd(i);
    }
    Matrix y = xhat.array().rowwise() * gain.row(0).array();
    y.rowwise() += bias.row(0);
    return y;
}

// Backward through layer norm: returns d(input); accumulates gain/bias grads.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat, const RowVector& rstd, const Matrix& gain,
                           Matrix& dgain, Matrix& dbias) {
    dgain.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    dbias.row(0) += dy.colwise().sum();
    const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
    const auto d = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index i = 0; i < dy.rows(); ++i) {
        const double mean_dxhat = dxhat.row(i).sum() / d;
        const double mean_dxhat_xhat = dxhat.row(i).dot(xhat.row(i)) / d;
        dx.row(i) = rstd(i) * (dxhat.row(i).array() - mean_dxhat - xhat.row(i).array() * mean_dxhat_xhat).matrix();
    }
    return dx;
}

void softmax_rows(Matrix& s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double mx = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - mx).exp().matrix();
        s.row(i) /= s.row(i).sum();
    }
}

std::vector<TokenId> unmasked_ids(const ModelConfig& c, const TokenSequence& seq) {
    if (seq.ids.size() != c.max_len || seq.mask.size() != c.max_len) {
        throw ModelError("sequence length " + std::to_string(seq.ids.size()) + " does not match max_len " +
                         std::to_string(c.max_len));
    }
    std::size_t n = 0;
    while (n < seq.mask.size() && seq.mask[n]) ++n;
    for (std::size_t i = n; i < seq.mask.size(); ++i) {
        if (seq.mask[i]) throw ModelError("attention mask has interior padding");
    }
    if (n == 0) throw ModelError("sequence has no unmasked positions");
    std::vector<TokenId> ids(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(n));
    for (TokenId id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= c.vocab_size) {
            throw ModelError("token id " + std::to_string(id) + " outside model vocabulary");
        }
    }
    return ids;
}

}  // namespace

RowVector forward(const ModelParams& params, const TokenSequence& seq, const SentimentFeatures& senti,
                  ForwardTrace* trace) {
    const ModelConfig& c = params.config;
    std::vector<TokenId> ids = unmasked_ids(c, seq);
    const auto n = static_cast<Eigen::Index>(ids.size());
    const auto d = static_cast<Eigen::Index>(c.d_model);
    const auto dh = d / static_cast<Eigen::Index>(c.n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) x.row(i) = params.token_emb.row(ids[i]) + params.pos_emb.row(i);

    if (trace) {
        trace->ids = ids;
        trace->layers.assign(c.n_layers, LayerTrace{});
    }
    LayerTrace scratch;
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const LayerParams& L = params.layers[l];
        LayerTrace& t = trace ? trace->layers[l] : scratch;
        t.input = x;
        t.q.noalias() = x * L.wq;
        t.k.noalias() = x * L.wk;
        t.v.noalias() = x * L.wv;
        t.attention.resize(c.n_heads);
        t.context.resize(n, d);
        for (std::size_t h = 0; h < c.n_heads; ++h) {
            const auto off = static_cast<Eigen::Index>(h) * dh;
            Matrix s = (t.q.middleCols(off, dh) * t.k.middleCols(off, dh).transpose()) * scale;
            softmax_rows(s);
            t.context.middleCols(off, dh).noalias() = s * t.v.middleCols(off, dh);
            t.attention[h] = std::move(s);
        }
        Matrix r1 = x;
        r1.noalias() += t.context * L.wo;
        t.ln1_out = layer_norm(r1, L.ln1_gain, L.ln1_bias, t.ln1_xhat, t.ln1_rstd);
        t.ff_pre = t.ln1_out * L.w1;
        t.ff_pre.rowwise() += L.b1.row(0);
        t.ff_act = t.ff_pre.cwiseMax(0.0);
        Matrix r2 = t.ln1_out;
        r2.noalias() += t.ff_act * L.w2;
        r2.rowwise() += L.b2.row(0);
        x = layer_norm(r2, L.ln2_gain, L.ln2_bias, t.ln2_xhat, t.ln2_rstd);
        t.output = x;
    }

    RowVector fused(c.fused_dim());
    fused.head(d) = x.row(0);
    for (std::size_t i = 0; i < kSentimentDim; ++i) fused(d + static_cast<Eigen::Index>(i)) = senti[i];
    RowVector logits = fused * params.head_w + params.head_b;
    if (trace) {
        trace->fused = fused;
        trace->logits = logits;
    }
    return logits;
}

Matrix forward_batch(const ModelParams& params, std::span<const Example> batch) {
    Matrix out(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(params.config.n_classes));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = forward(params, batch[i].seq, batch[i].senti);
    }
    return out;
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double predict_binary(double logit) { return sigmoid(logit); }

RowVector predict_multiclass(const RowVector& logits) {
    const double mx = logits.maxCoeff();
    RowVector e = (logits.array() - mx).exp().matrix();
    return e / e.sum();
}

double bce_loss(double p, std::size_t y) {
    const double pc = std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
    return y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

double ce_loss(const RowVector& dist, std::size_t y) {
    if (y >= static_cast<std::size_t>(dist.size())) throw ValidationError("class index out of range");
    return -std::log(std::clamp(dist(static_cast<Eigen::Index>(y)), kProbEpsilon, 1.0 - kProbEpsilon));
}

double example_loss(const ModelConfig& config, const RowVector& logits, std::size_t y) {
    if (config.binary()) {
        if (y > 1) throw ValidationError("binary label must be 0 or 1");
        return bce_loss(predict_binary(logits(0)), y);
    }
    return ce_loss(predict_multiclass(logits), y);
}

double mean_loss(const ModelParams& params, std::span<const Example> batch) {
    if (batch.empty()) throw ValidationError("empty batch");
    double total = 0.0;
    for (const auto& ex : batch) total += example_loss(params.config, forward(params, ex.seq, ex.senti), ex.label);
    return total / static_cast<double>(batch.size());
}

namespace {

// d(loss)/d(logits) of the clamped loss; zero inside the clamped region.
RowVector loss_gradient(const ModelConfig& c, const RowVector& logits, std::size_t y) {
    RowVector g = RowVector::Zero(logits.size());
    if (c.binary()) {
        if (y > 1) throw ValidationError("binary label must be 0 or 1");
        const double p = predict_binary(logits(0));
        if (p > kProbEpsilon && p < 1.0 - kProbEpsilon) g(0) = p - static_cast<double>(y);
        return g;
    }
    if (y >= static_cast<std::size_t>(logits.size())) throw ValidationError("class index out of range");
    const RowVector dist = predict_multiclass(logits);
    const double py = dist(static_cast<Eigen::Index>(y));
    if (py > kProbEpsilon && py < 1.0 - kProbEpsilon) {
        g = dist;
        g(static_cast<Eigen::Index>(y)) -= 1.0;
    }
    return g;
}

void backward(const ModelParams& params, const ForwardTrace& t, const RowVector& dlogits, ModelParams& g) {
    const ModelConfig& c = params.config;
    const auto n = static_cast<Eigen::Index>(t.ids.size());
    const auto d = static_cast<Eigen::Index>(c.d_model);
    const auto dh = d / static_cast<Eigen::Index>(c.n_heads);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    g.head_w.noalias() += t.fused.transpose() * dlogits;
    g.head_b.row(0) += dlogits;
    const RowVector dfused = dlogits * params.head_w.transpose();

    Matrix dx = Matrix::Zero(n, d);
    dx.row(0) = dfused.head(d);

    for (std::size_t li = c.n_layers; li-- > 0;) {
        const LayerParams& L = params.layers[li];
        LayerParams& G = g.layers[li];
        const LayerTrace& lt = t.layers[li];

        const Matrix dr2 = layer_norm_backward(dx, lt.ln2_xhat, lt.ln2_rstd, L.ln2_gain, G.ln2_gain, G.ln2_bias);
        G.w2.noalias() += lt.ff_act.transpose() * dr2;
        G.b2.row(0) += dr2.colwise().sum();
        Matrix dff = dr2 * L.w2.transpose();
        dff = (lt.ff_pre.array() > 0.0).select(dff, 0.0);
        G.w1.noalias() += lt.ln1_out.transpose() * dff;
        G.b1.row(0) += dff.colwise().sum();
        Matrix dln1 = dr2;
        dln1.noalias() += dff * L.w1.transpose();

        const Matrix dr1 = layer_norm_backward(dln1, lt.ln1_xhat, lt.ln1_rstd, L.ln1_gain, G.ln1_gain, G.ln1_bias);
        G.wo.noalias() += lt.context.transpose() * dr1;
        const Matrix dctx = dr1 * L.wo.transpose();

        Matrix dq(n, d), dk(n, d), dv(n, d);
        for (std::size_t h = 0; h < c.n_heads; ++h) {
            const auto off = static_cast<Eigen::Index>(h) * dh;
            const Matrix& a = lt.attention[h];
            const Matrix da = dctx.middleCols(off, dh) * lt.v.middleCols(off, dh).transpose();
            dv.middleCols(off, dh).noalias() = a.transpose() * dctx.middleCols(off, dh);
            Matrix ds = a.array() * (da.array().colwise() - (da.array() * a.array()).rowwise().sum());
            ds *= scale;
            dq.middleCols(off, dh).noalias() = ds * lt.k.middleCols(off, dh);
            dk.middleCols(off, dh).noalias() = ds.transpose() * lt.q.middleCols(off, dh);
        }
        G.wq.noalias() += lt.input.transpose() * dq;
        G.wk.noalias() += lt.input.transpose() * dk;
        G.wv.noalias() += lt.input.transpose() * dv;
        dx = dr1;
        dx.noalias() += dq * L.wq.transpose();
        dx.noalias() += dk * L.wk.transpose();
        dx.noalias() += dv * L.wv.transpose();
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        g.token_emb.row(t.ids[i]) += dx.row(i);
        g.pos_emb.row(i) += dx.row(i);
    }
}

}  // namespace

double forward_backward(const ModelParams& params, std::span<const Example> batch, ModelParams& grads) {
    if (batch.empty()) throw ValidationError("empty batch");
    if (!grads.same_shape(params) || !(grads.config == params.config)) {
        grads = ModelParams::zeros(params.config);
    } else {
        grads.set_zero();
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    ForwardTrace trace;
    for (const auto& ex : batch) {
        const RowVector logits = forward(params, ex.seq, ex.senti, &trace);
        total += example_loss(params.config, logits, ex.label);
        backward(params, trace, loss_gradient(params.config, logits, ex.label) * inv_b, grads);
    }
    return total * inv_b;
}

LossAndGrad forward_backward(const ModelParams& params, std::span<const Example> batch) {
    LossAndGrad out{0.0, ModelParams::zeros(params.config)};
    out.loss = forward_backward(params, batch, out.grads);
    return out;
}

std::size_t argmax(const RowVector& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (v(i) > v(best)) best = i;
    }
    return static_cast<std::size_t>(best);
}

}  // namespace hierclass
