#include "apa/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace apa {

namespace {

constexpr double kLayerNormEps = 1e-5;

double activation_eval(const ActivationKind& kind, double z) {
    switch (kind.tag) {
        case ActivationTag::APA: return apa_forward(z, *kind.params);
        case ActivationTag::AGLU: return aglu_forward(z, *kind.params);
        default: return reference_forward(kind, z);
    }
}

bool is_adaptive(const ActivationKind& kind) {
    return kind.tag == ActivationTag::APA || kind.tag == ActivationTag::AGLU;
}

// Shared-intermediate evaluation for the hot loops. The arithmetic mirrors
// the scalar functions expression-for-expression so results stay
// bit-identical; only the redundant transcendental calls are hoisted.
struct ApaSite {
    double kappa, lambda, log_lambda, lambda_sq;
    explicit ApaSite(const ActivationParams& p)
        : kappa(p.kappa), lambda(p.lambda), log_lambda(std::log(p.lambda)),
          lambda_sq(p.lambda * p.lambda) {}

    double eta(double z) const {
        const double x = kappa * z - log_lambda;
        return std::exp(-softplus(-x) / lambda);
    }

    struct Grads {
        double eta;
        double apa_d_input, apa_d_kappa, apa_d_lambda;
        double aglu_d_input, aglu_d_kappa, aglu_d_lambda;
    };

    Grads grads(double z) const {
        Grads g;
        const double x = kappa * z - log_lambda;
        const double sp = softplus(-x);
        g.eta = std::exp(-sp / lambda);
        const double denom = lambda + std::exp(kappa * z);
        g.apa_d_input = kappa * g.eta / denom;
        g.apa_d_kappa = z * g.eta / denom;
        g.apa_d_lambda = g.eta * (sp / lambda_sq - 1.0 / (lambda * denom));
        g.aglu_d_input = kappa * z * g.eta / denom + g.eta;
        g.aglu_d_kappa = z * z * g.eta / denom;
        g.aglu_d_lambda = z * g.apa_d_lambda;
        return g;
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(std::size_t out, std::size_t in, ActivationKind act)
    : w(out, in), b(out, 0.0), activation(std::move(act)),
      w_grad(out, in), b_grad(out, 0.0) {
    activation.validate();
}

Tensor DenseLayer::forward(const Tensor& x) {
    if (x.cols != w.cols) throw std::invalid_argument("dense: input width mismatch");
    in_cache = x;
    pre_cache = Tensor(x.rows, w.rows);
    Tensor out(x.rows, w.rows);
    for (std::size_t r = 0; r < x.rows; ++r)
        affine(w, x.data.data() + r * x.cols, b.data(), pre_cache.data.data() + r * w.rows);
    if (is_adaptive(activation)) {
        const ApaSite site(*activation.params);
        const bool glu = activation.tag == ActivationTag::AGLU;
        for (std::size_t i = 0; i < pre_cache.size(); ++i) {
            const double z = pre_cache.data[i];
            out.data[i] = glu ? z * site.eta(z) : site.eta(z);
        }
    } else {
        for (std::size_t i = 0; i < pre_cache.size(); ++i)
            out.data[i] = activation_eval(activation, pre_cache.data[i]);
    }
    out.require_finite("dense activation output");
    return out;
}

Tensor DenseLayer::backward(const Tensor& dout) {
    if (!dout.same_shape(pre_cache)) throw std::invalid_argument("dense backward: shape mismatch");
    const std::size_t n = dout.rows, out_dim = w.rows, in_dim = w.cols;

    Tensor dpre(n, out_dim);
    if (activation.tag == ActivationTag::AGLU) {
        const ApaSite site(*activation.params);
        for (std::size_t i = 0; i < dpre.size(); ++i) {
            const double g = dout.data[i];
            const auto grads = site.grads(pre_cache.data[i]);
            dpre.data[i] = g * grads.aglu_d_input;
            kappa_grad += g * grads.aglu_d_kappa;
            lambda_grad += g * grads.aglu_d_lambda;
        }
    } else if (activation.tag == ActivationTag::APA) {
        const ApaSite site(*activation.params);
        for (std::size_t i = 0; i < dpre.size(); ++i) {
            const double g = dout.data[i];
            const auto grads = site.grads(pre_cache.data[i]);
            dpre.data[i] = g * grads.apa_d_input;
            kappa_grad += g * grads.apa_d_kappa;
            lambda_grad += g * grads.apa_d_lambda;
        }
    } else {
        for (std::size_t i = 0; i < dpre.size(); ++i)
            dpre.data[i] = dout.data[i] * reference_grad_input(activation, pre_cache.data[i]);
    }

    Tensor dx(n, in_dim);
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = in_cache.data.data() + r * in_dim;
        const double* dp = dpre.data.data() + r * out_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
            const double g = dp[o];
            b_grad[o] += g;
            double* wg = w_grad.data.data() + o * in_dim;
            const double* wrow = w.data.data() + o * in_dim;
            double* dxr = dx.data.data() + r * in_dim;
            for (std::size_t j = 0; j < in_dim; ++j) {
                wg[j] += g * xr[j];
                dxr[j] += g * wrow[j];
            }
        }
    }
    return dx;
}

// ---------------------------------------------------------------------------
// AttentionBlock

AttentionBlock::AttentionBlock(std::size_t c, std::size_t reduction, ActivationKind gate_kind)
    : channels(c), gate(std::move(gate_kind)) {
    if (reduction == 0 || c % reduction != 0)
        throw std::invalid_argument("attention: channels must be divisible by reduction");
    if (gate.tag != ActivationTag::SIGMOID && gate.tag != ActivationTag::APA)
        throw std::invalid_argument("attention: gate must be sigmoid or apa");
    gate.validate();
    bottleneck = c / reduction;
    w1 = Tensor(bottleneck, c);
    b1.assign(bottleneck, 0.0);
    w2 = Tensor(c, bottleneck);
    b2.assign(c, 0.0);
    w1_grad = Tensor(bottleneck, c);
    b1_grad.assign(bottleneck, 0.0);
    w2_grad = Tensor(c, bottleneck);
    b2_grad.assign(c, 0.0);
}

Tensor AttentionBlock::forward(const Tensor& x, bool training, Rng* dropout_rng) {
    if (x.cols != channels) throw std::invalid_argument("attention: channel mismatch");
    const bool use_dropout = training && dropout_p > 0.0;
    if (use_dropout && dropout_rng == nullptr)
        throw std::invalid_argument("attention: dropout requires an rng stream");

    const std::size_t n = x.rows;
    in_cache = x;
    norm_cache = Tensor(n, channels);
    inv_std_cache.assign(n, 1.0);
    pre1_cache = Tensor(n, bottleneck);
    hidden_cache = Tensor(n, bottleneck);
    pre2_cache = Tensor(n, channels);
    gate_cache = Tensor(n, channels);
    mask_cache = Tensor(n, channels, 1.0);

    Tensor out(n, channels);
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = x.data.data() + r * channels;
        double* g = norm_cache.data.data() + r * channels;
        if (layer_norm) {
            double mean = 0.0;
            for (std::size_t j = 0; j < channels; ++j) mean += xr[j];
            mean /= static_cast<double>(channels);
            double var = 0.0;
            for (std::size_t j = 0; j < channels; ++j) var += (xr[j] - mean) * (xr[j] - mean);
            var /= static_cast<double>(channels);
            const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
            inv_std_cache[r] = inv_std;
            for (std::size_t j = 0; j < channels; ++j) g[j] = (xr[j] - mean) * inv_std;
        } else {
            std::copy(xr, xr + channels, g);
        }

        double* a1 = pre1_cache.data.data() + r * bottleneck;
        affine(w1, g, b1.data(), a1);
        double* z1 = hidden_cache.data.data() + r * bottleneck;
        for (std::size_t j = 0; j < bottleneck; ++j) z1[j] = std::fmax(0.0, a1[j]);

        double* a2 = pre2_cache.data.data() + r * channels;
        affine(w2, z1, b2.data(), a2);

        double* u = gate_cache.data.data() + r * channels;
        if (gate.tag == ActivationTag::APA) {
            const ApaSite site(*gate.params);
            for (std::size_t j = 0; j < channels; ++j) u[j] = site.eta(a2[j]);
        } else {
            for (std::size_t j = 0; j < channels; ++j) u[j] = stable_logistic(a2[j]);
        }

        double* m = mask_cache.data.data() + r * channels;
        if (use_dropout) {
            const double keep = 1.0 - dropout_p;
            for (std::size_t j = 0; j < channels; ++j)
                m[j] = dropout_rng->uniform() < dropout_p ? 0.0 : 1.0 / keep;
        }

        double* y = out.data.data() + r * channels;
        for (std::size_t j = 0; j < channels; ++j) y[j] = u[j] * m[j] * xr[j];
    }
    out.require_finite("attention output");
    return out;
}

Tensor AttentionBlock::backward(const Tensor& dout) {
    if (!dout.same_shape(in_cache)) throw std::invalid_argument("attention backward: shape mismatch");
    const std::size_t n = dout.rows;
    Tensor dx(n, channels);

    std::vector<double> du(channels), da2(channels), dz1(bottleneck), da1(bottleneck),
        dh(channels);
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = in_cache.data.data() + r * channels;
        const double* u = gate_cache.data.data() + r * channels;
        const double* m = mask_cache.data.data() + r * channels;
        const double* a2 = pre2_cache.data.data() + r * channels;
        const double* a1 = pre1_cache.data.data() + r * bottleneck;
        const double* z1 = hidden_cache.data.data() + r * bottleneck;
        const double* g = norm_cache.data.data() + r * channels;
        const double* dyr = dout.data.data() + r * channels;
        double* dxr = dx.data.data() + r * channels;

        // y = u * m * x : both factors receive gradient.
        for (std::size_t j = 0; j < channels; ++j) {
            du[j] = dyr[j] * xr[j] * m[j];
            dxr[j] = dyr[j] * u[j] * m[j];
        }

        if (gate.tag == ActivationTag::APA) {
            const ApaSite site(*gate.params);
            for (std::size_t j = 0; j < channels; ++j) {
                const auto grads = site.grads(a2[j]);
                da2[j] = du[j] * grads.apa_d_input;
                kappa_grad += du[j] * grads.apa_d_kappa;
                lambda_grad += du[j] * grads.apa_d_lambda;
            }
        } else {
            for (std::size_t j = 0; j < channels; ++j) da2[j] = du[j] * u[j] * (1.0 - u[j]);
        }

        std::fill(dz1.begin(), dz1.end(), 0.0);
        for (std::size_t o = 0; o < channels; ++o) {
            b2_grad[o] += da2[o];
            double* wg = w2_grad.data.data() + o * bottleneck;
            const double* wrow = w2.data.data() + o * bottleneck;
            for (std::size_t j = 0; j < bottleneck; ++j) {
                wg[j] += da2[o] * z1[j];
                dz1[j] += da2[o] * wrow[j];
            }
        }

        for (std::size_t j = 0; j < bottleneck; ++j) da1[j] = a1[j] > 0.0 ? dz1[j] : 0.0;

        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t o = 0; o < bottleneck; ++o) {
            b1_grad[o] += da1[o];
            double* wg = w1_grad.data.data() + o * channels;
            const double* wrow = w1.data.data() + o * channels;
            for (std::size_t j = 0; j < channels; ++j) {
                wg[j] += da1[o] * g[j];
                dh[j] += da1[o] * wrow[j];
            }
        }

        if (layer_norm) {
            const double inv_std = inv_std_cache[r];
            double mean_dh = 0.0, mean_dh_g = 0.0;
            for (std::size_t j = 0; j < channels; ++j) {
                mean_dh += dh[j];
                mean_dh_g += dh[j] * g[j];
            }
            mean_dh /= static_cast<double>(channels);
            mean_dh_g /= static_cast<double>(channels);
            for (std::size_t j = 0; j < channels; ++j)
                dxr[j] += inv_std * (dh[j] - mean_dh - g[j] * mean_dh_g);
        } else {
            for (std::size_t j = 0; j < channels; ++j) dxr[j] += dh[j];
        }
    }
    return dx;
}

std::pair<Tensor, Tensor> channel_attention_forward(AttentionBlock& block, const Tensor& x) {
    Tensor out = block.forward(x, /*training=*/false, nullptr);
    return {std::move(out), block.gate_cache};
}

// ---------------------------------------------------------------------------
// Model

Tensor Model::forward(const Tensor& x, bool training, Rng* dropout_rng) {
    if (blocks.empty()) throw std::logic_error("model: no blocks");
    Tensor cur = x;
    for (auto& block : blocks) {
        if (auto* dense = std::get_if<DenseLayer>(&block))
            cur = dense->forward(cur);
        else
            cur = std::get<AttentionBlock>(block).forward(cur, training, dropout_rng);
    }
    has_forward_ = true;
    return cur;
}

void Model::backward(const Tensor& dlogits) {
    if (!has_forward_) throw std::logic_error("model: backward called before forward");
    Tensor cur = dlogits;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        if (auto* dense = std::get_if<DenseLayer>(&*it))
            cur = dense->backward(cur);
        else
            cur = std::get<AttentionBlock>(*it).backward(cur);
    }
}

void Model::zero_grads() {
    for (auto& block : blocks) {
        if (auto* dense = std::get_if<DenseLayer>(&block)) {
            std::fill(dense->w_grad.data.begin(), dense->w_grad.data.end(), 0.0);
            std::fill(dense->b_grad.begin(), dense->b_grad.end(), 0.0);
            dense->kappa_grad = dense->lambda_grad = 0.0;
        } else {
            auto& attn = std::get<AttentionBlock>(block);
            std::fill(attn.w1_grad.data.begin(), attn.w1_grad.data.end(), 0.0);
            std::fill(attn.w2_grad.data.begin(), attn.w2_grad.data.end(), 0.0);
            std::fill(attn.b1_grad.begin(), attn.b1_grad.end(), 0.0);
            std::fill(attn.b2_grad.begin(), attn.b2_grad.end(), 0.0);
            attn.kappa_grad = attn.lambda_grad = 0.0;
        }
    }
}

namespace {

void push_activation_params(ActivationKind& kind, double* kg, double* lg,
                            std::vector<ParamRef>& out) {
    if (!is_adaptive(kind) || !kind.params) return;
    if (kind.params->kappa_learnable) out.push_back({&kind.params->kappa, kg, false});
    if (kind.params->lambda_learnable) out.push_back({&kind.params->lambda, lg, true});
}

}  // namespace

std::vector<ParamRef> Model::params() {
    std::vector<ParamRef> out;
    for (auto& block : blocks) {
        if (auto* dense = std::get_if<DenseLayer>(&block)) {
            for (std::size_t i = 0; i < dense->w.size(); ++i)
                out.push_back({&dense->w.data[i], &dense->w_grad.data[i], false});
            for (std::size_t i = 0; i < dense->b.size(); ++i)
                out.push_back({&dense->b[i], &dense->b_grad[i], false});
            push_activation_params(dense->activation, &dense->kappa_grad, &dense->lambda_grad, out);
        } else {
            auto& attn = std::get<AttentionBlock>(block);
            for (std::size_t i = 0; i < attn.w1.size(); ++i)
                out.push_back({&attn.w1.data[i], &attn.w1_grad.data[i], false});
            for (std::size_t i = 0; i < attn.b1.size(); ++i)
                out.push_back({&attn.b1[i], &attn.b1_grad[i], false});
            for (std::size_t i = 0; i < attn.w2.size(); ++i)
                out.push_back({&attn.w2.data[i], &attn.w2_grad.data[i], false});
            for (std::size_t i = 0; i < attn.b2.size(); ++i)
                out.push_back({&attn.b2[i], &attn.b2_grad[i], false});
            push_activation_params(attn.gate, &attn.kappa_grad, &attn.lambda_grad, out);
        }
    }
    return out;
}

std::vector<ParamSite> Model::adaptive_sites() {
    std::vector<ParamSite> out;
    std::size_t dense_idx = 0, attn_idx = 0;
    for (auto& block : blocks) {
        if (auto* dense = std::get_if<DenseLayer>(&block)) {
            if (is_adaptive(dense->activation))
                out.push_back({"dense" + std::to_string(dense_idx) + "." +
                                   to_string(dense->activation.tag),
                               &*dense->activation.params});
            ++dense_idx;
        } else {
            auto& attn = std::get<AttentionBlock>(block);
            if (is_adaptive(attn.gate))
                out.push_back({"attn" + std::to_string(attn_idx) + ".gate", &*attn.gate.params});
            ++attn_idx;
        }
    }
    return out;
}

std::vector<Tensor> Model::last_gates() const {
    std::vector<Tensor> out;
    for (const auto& block : blocks)
        if (const auto* attn = std::get_if<AttentionBlock>(&block)) out.push_back(attn->gate_cache);
    return out;
}

std::vector<double> Model::state() {
    std::vector<double> out;
    for (const ParamRef& p : params()) out.push_back(*p.value);
    return out;
}

void Model::load_state(const std::vector<double>& values) {
    auto refs = params();
    if (values.size() != refs.size()) throw std::invalid_argument("model state size mismatch");
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].value = values[i];
}

// ---------------------------------------------------------------------------
// Losses

const char* to_string(LossKind k) {
    return k == LossKind::SoftmaxCE ? "softmax_ce" : "sigmoid_bce";
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "softmax_ce") return LossKind::SoftmaxCE;
    if (name == "sigmoid_bce") return LossKind::SigmoidBCE;
    throw std::invalid_argument("unknown loss: " + name);
}

LossGrad softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.rows, k = logits.cols;
    if (labels.size() != n) throw std::invalid_argument("loss: label count mismatch");
    LossGrad out;
    out.dlogits = Tensor(n, k);
    double total = 0.0;
    std::vector<double> probs(k);
    for (std::size_t r = 0; r < n; ++r) {
        const double* z = logits.data.data() + r * k;
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= k)
            throw std::invalid_argument("loss: label out of range");
        double zmax = z[0];
        for (std::size_t j = 1; j < k; ++j) zmax = std::max(zmax, z[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            probs[j] = std::exp(z[j] - zmax);
            sum += probs[j];
        }
        total += std::log(sum) - (z[static_cast<std::size_t>(y)] - zmax);
        double* d = out.dlogits.data.data() + r * k;
        for (std::size_t j = 0; j < k; ++j)
            d[j] = (probs[j] / sum - (static_cast<std::size_t>(y) == j ? 1.0 : 0.0)) /
                   static_cast<double>(n);
    }
    out.loss = total / static_cast<double>(n);
    return out;
}

LossGrad sigmoid_bce(const Tensor& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.rows, k = logits.cols;
    if (labels.size() != n) throw std::invalid_argument("loss: label count mismatch");
    LossGrad out;
    out.dlogits = Tensor(n, k);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* z = logits.data.data() + r * k;
        double* d = out.dlogits.data.data() + r * k;
        const std::size_t y = static_cast<std::size_t>(labels[r]);
        if (y >= k) throw std::invalid_argument("loss: label out of range");
        for (std::size_t j = 0; j < k; ++j) {
            const double target = j == y ? 1.0 : 0.0;
            // -[y ln s + (1-y) ln(1-s)] = y*softplus(-z) + (1-y)*softplus(z)
            total += target * softplus(-z[j]) + (1.0 - target) * softplus(z[j]);
            d[j] = (stable_logistic(z[j]) - target) / static_cast<double>(n);
        }
    }
    out.loss = total / static_cast<double>(n);
    return out;
}

LossGrad compute_loss(LossKind kind, const Tensor& logits, const std::vector<int>& labels) {
    return kind == LossKind::SoftmaxCE ? softmax_cross_entropy(logits, labels)
                                       : sigmoid_bce(logits, labels);
}

// ---------------------------------------------------------------------------
// Build / train / evaluate

namespace {

void glorot_init(Tensor& w, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& v : w.data) v = rng.uniform(-bound, bound);
}

}  // namespace

Model build_model(const ModelConfig& cfg, std::size_t input_dim, std::size_t classes,
                  const InitRanges& init, std::uint64_t seed) {
    if (cfg.gate != ActivationTag::SIGMOID && cfg.gate != ActivationTag::APA)
        throw std::invalid_argument("model config: gate must be sigmoid or apa");
    Rng weight_rng = Rng(seed).derive(stream::weight_init);
    Rng act_rng = Rng(seed).derive(stream::activation_init);

    Model model;
    std::size_t in_dim = input_dim;
    for (std::size_t width : cfg.hidden) {
        ActivationKind act =
            cfg.dense_activation == ActivationTag::AGLU
                ? ActivationKind::aglu(act_rng.uniform(init.aglu_kappa_lo, init.aglu_kappa_hi),
                                       act_rng.uniform(init.aglu_lambda_lo, init.aglu_lambda_hi))
                : ActivationKind::plain(cfg.dense_activation);
        DenseLayer dense(width, in_dim, act);
        glorot_init(dense.w, weight_rng);
        model.blocks.emplace_back(std::move(dense));

        if (cfg.attention) {
            ActivationKind gate =
                cfg.gate == ActivationTag::APA
                    ? ActivationKind::apa(act_rng.uniform(init.gate_kappa_lo, init.gate_kappa_hi),
                                          act_rng.uniform(init.gate_lambda_lo, init.gate_lambda_hi))
                    : ActivationKind::plain(ActivationTag::SIGMOID);
            AttentionBlock attn(width, cfg.reduction, gate);
            attn.layer_norm = cfg.layer_norm;
            attn.dropout_p = cfg.gate_dropout;
            glorot_init(attn.w1, weight_rng);
            glorot_init(attn.w2, weight_rng);
            model.blocks.emplace_back(std::move(attn));
        }
        in_dim = width;
    }
    DenseLayer head(classes, in_dim, ActivationKind::plain(ActivationTag::IDENTITY));
    glorot_init(head.w, weight_rng);
    model.blocks.emplace_back(std::move(head));
    return model;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning rate must be > 0");
    if (batch_size == 0) throw std::invalid_argument("train config: batch size must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("train config: momentum in [0,1)");
    if (!(lambda_clamp_lo > 0.0) || lambda_clamp_hi < lambda_clamp_lo)
        throw std::invalid_argument("train config: bad lambda clamp bounds");
}

Tensor penultimate_features(Model& model, const Tensor& x) {
    if (model.blocks.size() < 2) throw std::logic_error("model: no penultimate layer");
    Tensor cur = x;
    for (std::size_t i = 0; i + 1 < model.blocks.size(); ++i) {
        if (auto* dense = std::get_if<DenseLayer>(&model.blocks[i]))
            cur = dense->forward(cur);
        else
            cur = std::get<AttentionBlock>(model.blocks[i]).forward(cur, false, nullptr);
    }
    return cur;
}

GroupAccuracy evaluate_grouped(Model& model, const SampledDataset& data) {
    const Tensor logits = model.forward(data.features, /*training=*/false, nullptr);
    const std::size_t n = logits.rows, k = logits.cols;

    std::size_t correct_total = 0;
    std::size_t group_total[3] = {0, 0, 0};
    std::size_t group_correct[3] = {0, 0, 0};
    for (std::size_t r = 0; r < n; ++r) {
        const double* z = logits.data.data() + r * k;
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
            if (z[j] > z[best]) best = j;
        const int y = data.labels[r];
        const auto g = static_cast<std::size_t>(data.class_groups[static_cast<std::size_t>(y)]);
        ++group_total[g];
        if (best == static_cast<std::size_t>(y)) {
            ++correct_total;
            ++group_correct[g];
        }
    }

    GroupAccuracy acc;
    acc.average = n > 0 ? static_cast<double>(correct_total) / static_cast<double>(n) : 0.0;
    auto ratio = [&](Group g) -> std::optional<double> {
        const auto i = static_cast<std::size_t>(g);
        if (group_total[i] == 0) return std::nullopt;
        return static_cast<double>(group_correct[i]) / static_cast<double>(group_total[i]);
    };
    acc.many = ratio(Group::Many);
    acc.medium = ratio(Group::Medium);
    acc.few = ratio(Group::Few);
    return acc;
}

TrainResult train(Model& model, const SampledDataset& train_data, const TrainConfig& cfg,
                  const SampledDataset* eval_data) {
    cfg.validate();
    const std::size_t n = train_data.features.rows;
    if (n == 0) throw std::invalid_argument("train: empty dataset");

    auto refs = model.params();
    std::vector<double> velocity(refs.size(), 0.0);
    Rng shuffle_rng = Rng(cfg.seed).derive(stream::shuffle);
    Rng dropout_rng = Rng(cfg.seed).derive(stream::dropout);

    const auto sites = model.adaptive_sites();
    TrainResult result;
    result.trajectories.resize(sites.size());
    auto record_sites = [&] {
        for (std::size_t i = 0; i < sites.size(); ++i) {
            result.trajectories[i].name = sites[i].name;
            result.trajectories[i].kappa.push_back(sites[i].params->kappa);
            result.trajectories[i].lambda.push_back(sites[i].params->lambda);
        }
    };
    record_sites();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t batch = std::min(cfg.batch_size, n);
    const std::size_t in_dim = train_data.features.cols;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (batch < n) {
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[shuffle_rng.below(i + 1)]);
        }

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            Tensor bx(count, in_dim);
            std::vector<int> by(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = order[start + i];
                std::copy_n(train_data.features.data.data() + src * in_dim, in_dim,
                            bx.data.data() + i * in_dim);
                by[i] = train_data.labels[src];
            }

            model.zero_grads();
            LossGrad lg;
            try {
                const Tensor logits = model.forward(bx, /*training=*/true, &dropout_rng);
                lg = compute_loss(cfg.loss, logits, by);
            } catch (const std::exception& e) {
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                         ": " + e.what());
            }
            if (!std::isfinite(lg.loss))
                throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                                         ": non-finite loss");
            model.backward(lg.dlogits);

            for (std::size_t i = 0; i < refs.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] + *refs[i].grad;
                *refs[i].value -= cfg.learning_rate * velocity[i];
                if (refs[i].is_lambda)
                    *refs[i].value = std::clamp(*refs[i].value, cfg.lambda_clamp_lo,
                                                cfg.lambda_clamp_hi);
            }
            epoch_loss += lg.loss * static_cast<double>(count);
        }
        result.per_epoch_loss.push_back(epoch_loss / static_cast<double>(n));
        record_sites();
    }

    result.train_accuracy = evaluate_grouped(model, train_data);
    result.final_accuracy = eval_data ? evaluate_grouped(model, *eval_data) : result.train_accuracy;
    return result;
}

}  // namespace apa
