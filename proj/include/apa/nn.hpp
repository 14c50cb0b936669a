#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "apa/activation.hpp"
#include "apa/datagen.hpp"
#include "apa/rng.hpp"
#include "apa/tensor.hpp"

namespace apa {

/// Fully connected layer with an elementwise activation. AGLU/APA
/// activations carry one shared (kappa, lambda) pair per layer.
struct DenseLayer {
    Tensor w;  // out x in
    std::vector<double> b;
    ActivationKind activation = ActivationKind::plain(ActivationTag::IDENTITY);

    Tensor w_grad;
    std::vector<double> b_grad;
    double kappa_grad = 0.0;
    double lambda_grad = 0.0;

    Tensor in_cache;   // n x in
    Tensor pre_cache;  // n x out

    DenseLayer() = default;
    DenseLayer(std::size_t out, std::size_t in, ActivationKind act);

    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dout);
};

/// Channel-attention gate: X' = gate(MLP(descriptor)) * X, with the gate
/// either Sigmoid or APA. At this scale the inputs are already per-sample
/// channel vectors, so the pooled descriptor is the input row itself
/// (global average pooling reduces to the identity).
struct AttentionBlock {
    std::size_t channels = 0;
    std::size_t bottleneck = 0;
    Tensor w1;  // bottleneck x channels
    std::vector<double> b1;
    Tensor w2;  // channels x bottleneck
    std::vector<double> b2;
    ActivationKind gate = ActivationKind::plain(ActivationTag::SIGMOID);
    bool layer_norm = false;  // normalizes the descriptor before the MLP
    double dropout_p = 0.0;   // applied to the gate vector, after the nonlinearity

    Tensor w1_grad, w2_grad;
    std::vector<double> b1_grad, b2_grad;
    double kappa_grad = 0.0;
    double lambda_grad = 0.0;

    Tensor in_cache, norm_cache, pre1_cache, hidden_cache, pre2_cache, gate_cache, mask_cache;
    std::vector<double> inv_std_cache;

    AttentionBlock() = default;
    AttentionBlock(std::size_t channels, std::size_t reduction, ActivationKind gate_kind);

    Tensor forward(const Tensor& x, bool training, Rng* dropout_rng);
    Tensor backward(const Tensor& dout);
};

/// Spec-level entry point: returns the reweighted features and the raw gate
/// values (pre-dropout) for diagnostics.
std::pair<Tensor, Tensor> channel_attention_forward(AttentionBlock& block, const Tensor& x);

/// A learnable activation site, addressable for trajectories and clamping.
struct ParamSite {
    std::string name;
    ActivationParams* params = nullptr;
};

/// Flat view of one learnable scalar.
struct ParamRef {
    double* value = nullptr;
    double* grad = nullptr;
    bool is_lambda = false;  // subject to positivity clamping
};

struct Model {
    std::vector<std::variant<DenseLayer, AttentionBlock>> blocks;

    Tensor forward(const Tensor& x, bool training = false, Rng* dropout_rng = nullptr);
    void backward(const Tensor& dlogits);
    void zero_grads();

    std::vector<ParamRef> params();
    std::vector<ParamSite> adaptive_sites();
    /// Gate tensors captured by the most recent forward, one per attention
    /// block in network order.
    std::vector<Tensor> last_gates() const;

    std::vector<double> state() ;
    void load_state(const std::vector<double>& values);

private:
    bool has_forward_ = false;
};

enum class LossKind { SoftmaxCE, SigmoidBCE };

const char* to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& name);

struct LossGrad {
    double loss = 0.0;
    Tensor dlogits;
};

LossGrad softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);
LossGrad sigmoid_bce(const Tensor& logits, const std::vector<int>& labels);
LossGrad compute_loss(LossKind kind, const Tensor& logits, const std::vector<int>& labels);

/// Uniform init ranges for the adaptive activation parameters, per role.
struct InitRanges {
    double aglu_kappa_lo = 0.8, aglu_kappa_hi = 1.2;
    double aglu_lambda_lo = 1e-4, aglu_lambda_hi = 1.0;
    double gate_kappa_lo = -1.0, gate_kappa_hi = 0.0;
    double gate_lambda_lo = 1e-4, gate_lambda_hi = 1.0;
};

struct ModelConfig {
    std::vector<std::size_t> hidden = {32, 32};
    std::size_t reduction = 4;
    ActivationTag dense_activation = ActivationTag::RELU;
    ActivationTag gate = ActivationTag::SIGMOID;  // SIGMOID or APA
    bool attention = true;                        // gate block after each hidden layer
    bool layer_norm = false;
    double gate_dropout = 0.0;
};

/// Builds the toy classifier. Dense weights are Glorot-uniform from the
/// weight stream; adaptive kappa/lambda come from a separate stream so that
/// sigmoid- and APA-gated models share identical dense weights per seed.
Model build_model(const ModelConfig& cfg, std::size_t input_dim, std::size_t classes,
                  const InitRanges& init, std::uint64_t seed);

struct TrainConfig {
    std::size_t epochs = 60;
    std::size_t batch_size = 128;
    double learning_rate = 0.3;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::SoftmaxCE;
    double lambda_clamp_lo = 1e-4;
    double lambda_clamp_hi = 1e4;
    InitRanges init;

    void validate() const;
};

struct GroupAccuracy {
    std::optional<double> many, medium, few;
    double average = 0.0;  // overall top-1 over all samples
};

GroupAccuracy evaluate_grouped(Model& model, const SampledDataset& data);

/// Features entering the classification head: the forward pass through every
/// block except the last dense layer.
Tensor penultimate_features(Model& model, const Tensor& x);

struct SiteTrajectory {
    std::string name;
    std::vector<double> kappa;   // one entry at init plus one per epoch
    std::vector<double> lambda;
};

struct TrainResult {
    std::vector<double> per_epoch_loss;
    GroupAccuracy final_accuracy;       // on eval_data when provided
    GroupAccuracy train_accuracy;
    std::vector<SiteTrajectory> trajectories;
};

/// Minibatch SGD with momentum; lambda parameters are clamped to the
/// configured bounds after every step. Fully reproducible from cfg.seed.
/// Throws if the loss goes non-finite.
TrainResult train(Model& model, const SampledDataset& train_data, const TrainConfig& cfg,
                  const SampledDataset* eval_data = nullptr);

}  // namespace apa
